// Drives the installed CLI binary end to end over generated fixtures.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "normpred/alignment.hpp"
#include "normpred/embedding.hpp"
#include "normpred/norms.hpp"
#include "synthetic.hpp"

using namespace normpred;
namespace fs = std::filesystem;

namespace {

const char* cli_path() {
    return NORMPRED_CLI_PATH;
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("normpred_cli_log_" +
                                                      std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(cli_path()) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    res.output = ss.str();
    return res;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One fixture set for every test case in this file.
struct Fixtures {
    fs::path dir;
    fs::path src_vec, tgt_vec, src_lex, tgt_lex, pairs, dict, empty_dict;

    Fixtures() {
        dir = fs::temp_directory_path() / "normpred_cli_fixtures";
        fs::create_directories(dir);

        const synth::TwinLanguage twin = synth::make_twin(150, 8, 0.05, 0.05, 12345);
        src_vec = dir / "src.vec";
        tgt_vec = dir / "tgt.vec";
        save_vec_file(twin.source, src_vec.string());
        save_vec_file(twin.target, tgt_vec.string());

        src_lex = dir / "src_lex.tsv";
        tgt_lex = dir / "tgt_lex.tsv";
        save_lexicon(twin.source_gold, src_lex.string());
        save_lexicon(twin.target_gold, tgt_lex.string());

        pairs = dir / "pairs.tsv";
        {
            std::ofstream out(pairs);
            for (const auto& [s, t] : twin.seed_pairs.pairs) out << s << '\t' << t << '\n';
        }
        dict = dir / "dict.tsv";
        {
            std::ofstream out(dict);
            int i = 0;
            for (const auto& [s, t] : twin.seed_pairs.pairs) {
                if (i++ % 2 == 0) out << s << '\t' << t << '\n';
            }
        }
        empty_dict = dir / "empty_dict.tsv";
        std::ofstream(empty_dict) << "# nothing here\n";
    }
};

const Fixtures& fixtures() {
    static Fixtures f;
    return f;
}

std::string lex_flags(const Fixtures& f) {
    return " --lexicon " + f.src_lex.string() + " --scale-min -20 --scale-max 20 ";
}

}  // namespace

TEST_CASE("eval-cv runs and writes reports") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_cv";
    fs::remove_all(out);
    const RunResult res =
        run_cli("eval-cv" + lex_flags(f) + "--embeddings " + f.src_vec.string() +
                " --variable conc_mean --model svr --seed 7 --out " + out.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(out / "report.jsonl"));
    CHECK(fs::exists(out / "report.txt"));
    CHECK(read_file(out / "report.jsonl").find("\"task\":\"in_language_cv\"") !=
          std::string::npos);
}

TEST_CASE("unknown flags exit 1 without writing outputs") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_unknown";
    fs::remove_all(out);
    const RunResult res = run_cli("eval-cv --definitely-not-a-flag --out " + out.string());
    CHECK(res.exit_code == 1);
    CHECK(res.output.find("Usage") != std::string::npos);
    CHECK(!fs::exists(out));
}

TEST_CASE("empty dictionary is a data error naming the file") {
    const Fixtures& f = fixtures();
    const RunResult res =
        run_cli("transfer-dict --source-lexicon " + f.src_lex.string() +
                " --source-scale-min -20 --source-scale-max 20 --dictionary " +
                f.empty_dict.string() + " --variable conc_mean --out " +
                (f.dir / "out_ed").string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("empty_dict.tsv") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
    const Fixtures& f = fixtures();
    const fs::path out1 = f.dir / "out_det1";
    const fs::path out2 = f.dir / "out_det2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    const std::string args = "eval-cv" + lex_flags(f) + "--embeddings " + f.src_vec.string() +
                             " --variable conc_mean --model both --seed 11 --out ";
    CHECK(run_cli(args + out1.string()).exit_code == 0);
    CHECK(run_cli(args + out2.string()).exit_code == 0);
    CHECK(read_file(out1 / "report.jsonl") == read_file(out2 / "report.jsonl"));
    CHECK(read_file(out1 / "report.txt") == read_file(out2 / "report.txt"));
    // the comparison run attaches a p-value
    CHECK(read_file(out1 / "report.jsonl").find("\"p_value\":null") == std::string::npos);
}

TEST_CASE("align writes an orthogonal transform plus inverse") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_align";
    fs::remove_all(out);
    const RunResult res = run_cli(
        "align --source-embeddings " + f.src_vec.string() + " --target-embeddings " +
        f.tgt_vec.string() + " --pairs " + f.pairs.string() + " --emit-inverse --out " +
        out.string());
    CHECK(res.exit_code == 0);
    const AlignmentTransform t = load_transform((out / "transform.tsv").string());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(t.dim(), t.dim());
    CHECK((t.W.transpose() * t.W - I).cwiseAbs().maxCoeff() < 1e-6);
    const AlignmentTransform inv = load_transform((out / "transform_inverse.tsv").string());
    CHECK((inv.W - t.W.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transfer-embed + predict-lexicon round-trip through a saved model") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_te";
    fs::remove_all(out);
    const RunResult res = run_cli(
        "transfer-embed --source-lexicon " + f.src_lex.string() +
        " --source-scale-min -20 --source-scale-max 20 --source-embeddings " +
        f.src_vec.string() + " --target-embeddings " + f.tgt_vec.string() + " --pairs " +
        f.pairs.string() + " --target-lexicon " + f.tgt_lex.string() +
        " --target-scale-min -20 --target-scale-max 20" +
        " --variable conc_mean --model svr --seed 3 --out " + out.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(out / "predicted_conc_mean_svr.tsv"));
    CHECK(fs::exists(out / "model_svr.tsv"));
    CHECK(fs::exists(out / "report.jsonl"));

    const fs::path out2 = f.dir / "out_pl";
    fs::remove_all(out2);
    const RunResult res2 =
        run_cli("predict-lexicon --embeddings " + f.tgt_vec.string() + " --model-file " +
                (out / "model_svr.tsv").string() + " --out " + out2.string());
    CHECK(res2.exit_code == 0);
    const NormLexicon lex = load_lexicon((out2 / "predicted_lexicon.tsv").string(),
                                         LexiconSchema{}, {-1e9, 1e9});
    CHECK(lex.size() == 150);

    // the exported lexicon must match the in-run predictions
    const NormLexicon direct = load_lexicon((out / "predicted_conc_mean_svr.tsv").string(),
                                            LexiconSchema{}, {-1e9, 1e9});
    CHECK(direct.size() == lex.size());
    for (int i = 0; i < 5; ++i) {
        CHECK(lex.entries[i].conc_mean ==
              doctest::Approx(direct.entries[i].conc_mean).epsilon(1e-12));
    }
}

TEST_CASE("transfer-dict evaluates against the gold lexicon") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_td";
    fs::remove_all(out);
    const RunResult res = run_cli(
        "transfer-dict --source-lexicon " + f.src_lex.string() +
        " --source-scale-min -20 --source-scale-max 20 --dictionary " + f.dict.string() +
        " --target-lexicon " + f.tgt_lex.string() +
        " --target-scale-min -20 --target-scale-max 20 --variable conc_mean --out " +
        out.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(out / "predicted_dict.tsv"));
    CHECK(read_file(out / "report.jsonl").find("\"task\":\"transfer_dict\"") !=
          std::string::npos);
}

TEST_CASE("coef-analysis writes the cumulative profile") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_ca";
    fs::remove_all(out);
    const RunResult res =
        run_cli("coef-analysis" + lex_flags(f) + "--embeddings " + f.src_vec.string() +
                " --variable conc_mean --out " + out.string());
    CHECK(res.exit_code == 0);
    const std::string profile = read_file(out / "coef_profile.tsv");
    CHECK(profile.find("# dims_for_50pct") != std::string::npos);
    CHECK(profile.find("rank\tcumulative_mass") != std::string::npos);
}

TEST_CASE("eval-cv --downsample trims the lexicon before CV") {
    const Fixtures& f = fixtures();
    const fs::path out = f.dir / "out_ds";
    fs::remove_all(out);
    const RunResult res =
        run_cli("eval-cv" + lex_flags(f) + "--embeddings " + f.src_vec.string() +
                " --variable conc_mean --model svr --downsample 60 --seed 7 --out " +
                out.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("downsampled lexicon to 60 entries") != std::string::npos);
    CHECK(read_file(out / "report.jsonl").find("\"n\":60") != std::string::npos);
}

TEST_CASE("config file feeds defaults, flags override it") {
    const Fixtures& f = fixtures();
    const fs::path cfg = f.dir / "exp.toml";
    {
        std::ofstream out(cfg);
        out << "seed = 99\n[eval-cv]\nvariable = \"conc_mean\"\nmodel = \"svr\"\n"
            << "scale-min = -20\nscale-max = 20\n";
    }
    const fs::path out1 = f.dir / "out_cfg1";
    fs::remove_all(out1);
    const RunResult res =
        run_cli("--config " + cfg.string() + " eval-cv --lexicon " + f.src_lex.string() +
                " --embeddings " + f.src_vec.string() + " --out " + out1.string());
    CHECK(res.exit_code == 0);
    CHECK(read_file(out1 / "report.jsonl").find("\"seed\":99") != std::string::npos);

    const fs::path out2 = f.dir / "out_cfg2";
    fs::remove_all(out2);
    const RunResult res2 =
        run_cli("--config " + cfg.string() + " eval-cv --lexicon " + f.src_lex.string() +
                " --embeddings " + f.src_vec.string() + " --seed 123 --out " + out2.string());
    CHECK(res2.exit_code == 0);
    CHECK(read_file(out2 / "report.jsonl").find("\"seed\":123") != std::string::npos);
}

TEST_CASE("NORMPRED_DATA_DIR resolves bare resource names") {
    const Fixtures& f = fixtures();
    const std::string cmd = "NORMPRED_DATA_DIR=" + f.dir.string() + " " +
                            std::string(cli_path()) + " inspect --pairs pairs.tsv";
    CHECK(std::system((cmd + " > /dev/null 2>&1").c_str()) == 0);
}

TEST_CASE("inspect prints resource statistics") {
    const Fixtures& f = fixtures();
    const RunResult res = run_cli("inspect --embeddings " + f.src_vec.string() + " --lexicon " +
                                  f.src_lex.string() + " --pairs " + f.pairs.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("words\t150") != std::string::npos);
    CHECK(res.output.find("conc_mean\t150") != std::string::npos);

    CHECK(run_cli("inspect").exit_code == 2);
}
