// normpred command-line frontend. Exit codes: 0 success, 1 usage error,
// 2 data error.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "normpred/alignment.hpp"
#include "normpred/embedding.hpp"
#include "normpred/errors.hpp"
#include "normpred/ffn.hpp"
#include "normpred/norms.hpp"
#include "normpred/pipelines.hpp"
#include "normpred/rng.hpp"
#include "normpred/stats.hpp"
#include "normpred/svr.hpp"
#include "normpred/text_io.hpp"

using namespace normpred;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    int jobs = 1;
    bool verbose = false;
};

struct LexiconFlags {
    std::string path;
    LexiconSchema schema;
    double scale_min = 1.0;
    double scale_max = 5.0;
    std::string lang;
    bool keep_case = false;
};

struct EmbeddingFlags {
    std::string path;
    long long max_words = 0;
    bool keep_case = false;
    std::string lang;
};

struct ModelFlags {
    std::string model = "svr";
    SvrHyperParams svr;
    FfnHyperParams ffn;
    bool dropout_set = false;
    int folds = 3;
    int rand_iterations = 10000;
    double significance = 0.05;
};

void log_line(const std::string& msg) {
    std::cerr << "[normpred] " << msg << "\n";
}

NormLexicon load_lexicon_cli(const LexiconFlags& f) {
    LexiconLoadReport rep;
    const NormLexicon lex =
        load_lexicon(resolve_data_path(f.path), f.schema, {f.scale_min, f.scale_max}, f.lang,
                     !f.keep_case, &rep);
    log_line("lexicon " + f.path + ": kept " + std::to_string(rep.kept) + " entries, " +
             std::to_string(rep.rejected_rows.size()) + " rejected, " +
             std::to_string(rep.duplicates_dropped) + " duplicates");
    for (const std::string& r : rep.rejected_rows) log_line("  rejected " + r);
    return lex;
}

EmbeddingSpace load_space_cli(const EmbeddingFlags& f) {
    VecParseReport rep;
    const EmbeddingSpace space =
        parse_vec_file(resolve_data_path(f.path), f.max_words, !f.keep_case, f.lang, &rep);
    log_line("embeddings " + f.path + ": " + std::to_string(space.size()) + " words, dim " +
             std::to_string(space.dim) + " (" + std::to_string(rep.skipped_malformed) +
             " malformed rows skipped, " + std::to_string(rep.duplicates_dropped) +
             " duplicates dropped)");
    return space;
}

void add_lexicon_flags(CLI::App* cmd, LexiconFlags& f, const std::string& prefix,
                       const std::string& name) {
    cmd->add_option("--" + prefix + "lexicon", f.path, name + " lexicon TSV")->required();
    cmd->add_option("--" + prefix + "word-col", f.schema.word, "word column header");
    cmd->add_option("--" + prefix + "conc-mean-col", f.schema.conc_mean,
                    "concreteness mean column ('' = absent)");
    cmd->add_option("--" + prefix + "conc-std-col", f.schema.conc_std,
                    "concreteness std column ('' = absent)");
    cmd->add_option("--" + prefix + "imag-mean-col", f.schema.imag_mean,
                    "imageability mean column ('' = absent)");
    cmd->add_option("--" + prefix + "imag-std-col", f.schema.imag_std,
                    "imageability std column ('' = absent)");
    cmd->add_option("--" + prefix + "scale-min", f.scale_min, "rating scale lower bound");
    cmd->add_option("--" + prefix + "scale-max", f.scale_max, "rating scale upper bound");
    cmd->add_option("--" + prefix + "lexicon-lang", f.lang, "language code");
    cmd->add_flag("--" + prefix + "lexicon-keep-case", f.keep_case,
                  "do not lowercase lexicon words");
}

void add_embedding_flags(CLI::App* cmd, EmbeddingFlags& f, const std::string& prefix,
                         const std::string& name) {
    cmd->add_option("--" + prefix + "embeddings", f.path, name + " .vec/.vec.gz embeddings")
        ->required();
    cmd->add_option("--" + prefix + "max-words", f.max_words,
                    "load at most this many embedding rows (0 = all)");
    cmd->add_flag("--" + prefix + "keep-case", f.keep_case, "do not lowercase embedding words");
    cmd->add_option("--" + prefix + "embeddings-lang", f.lang, "language code");
}

Variable add_variable_flag(CLI::App* cmd, std::string& holder, bool mean_only = false) {
    auto* opt = cmd->add_option("--variable", holder,
                                mean_only ? "variable (conc_mean|imag_mean)"
                                          : "variable (conc_mean|conc_std|imag_mean|imag_std)");
    opt->required();
    if (mean_only) {
        opt->check(CLI::IsMember({"conc_mean", "imag_mean"}));
    } else {
        opt->check(CLI::IsMember({"conc_mean", "conc_std", "imag_mean", "imag_std"}));
    }
    return Variable::conc_mean;
}

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_folds) {
    cmd->add_option("--model", f.model, "regressor: svr, ffn, or both")
        ->check(CLI::IsMember({"svr", "ffn", "both"}));
    cmd->add_option("--svr-c", f.svr.c, "SVR box constraint C");
    cmd->add_option("--svr-gamma", f.svr.gamma, "RBF kernel width gamma");
    cmd->add_option("--svr-epsilon", f.svr.epsilon, "epsilon tube half-width");
    cmd->add_option("--svr-kernel", f.svr.kernel, "SVR kernel")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Kernel>{{"rbf", Kernel::rbf}, {"linear", Kernel::linear}}));
    cmd->add_option("--svr-tol", f.svr.tol, "SMO KKT tolerance");
    cmd->add_option("--svr-max-passes", f.svr.max_passes,
                    "SMO pair-update cap (0 = 10*n)");
    cmd->add_option("--ffn-hidden", f.ffn.hidden_sizes, "hidden layer sizes");
    cmd->add_option("--ffn-dropout", f.ffn.dropout_p,
                    "dropout probability (default 0.5 in-language / 0.8 cross-lingual)");
    cmd->add_option("--ffn-epochs", f.ffn.epochs, "training epochs");
    cmd->add_option("--ffn-batch-size", f.ffn.batch_size, "mini-batch size");
    cmd->add_option("--ffn-lr", f.ffn.learning_rate, "learning rate");
    if (with_folds) cmd->add_option("--folds", f.folds, "cross-validation folds");
    cmd->add_option("--rand-iterations", f.rand_iterations,
                    "approximate-randomization iterations");
    cmd->add_option("--significance", f.significance, "significance threshold (reporting only)");
}

ExperimentOptions make_options(const CommonFlags& common, const ModelFlags& mf,
                               const std::string& model_name, Variable variable,
                               bool dropout_overridden) {
    ExperimentOptions opts;
    opts.variable = variable;
    opts.model = model_name == "ffn" ? ModelKind::ffn : ModelKind::svr;
    opts.svr = mf.svr;
    opts.ffn = mf.ffn;
    opts.ffn_dropout_overridden = dropout_overridden;
    opts.folds = mf.folds;
    opts.seed = common.seed;
    opts.jobs = common.jobs;
    return opts;
}

void write_reports(const std::vector<EvalReport>& reports, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    atomic_write_file((out_dir / "report.jsonl").string(), [&](std::ostream& out) {
        for (const EvalReport& r : reports) out << r.to_json().dump() << "\n";
    });
    atomic_write_file((out_dir / "report.txt").string(), [&](std::ostream& out) {
        for (const EvalReport& r : reports) out << r.to_text_table();
    });
    log_line("wrote " + (out_dir / "report.jsonl").string() + " and report.txt");
}

void dump_resolved_config(const CLI::App& app) {
    std::cerr << "[normpred] resolved config:\n";
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->count() > 0 || !opt->get_default_str().empty()) {
            std::cerr << "  " << opt->get_name() << " = "
                      << (opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str())
                      << "\n";
        }
    }
}

// ---- subcommand runners ----------------------------------------------------

int run_align(const CommonFlags& common, const EmbeddingFlags& src_f,
              const EmbeddingFlags& tgt_f, const std::string& pairs_path,
              const std::string& out_file, bool emit_inverse,
              const std::string& write_aligned) {
    const EmbeddingSpace src = load_space_cli(src_f);
    const EmbeddingSpace tgt = load_space_cli(tgt_f);
    const BilingualPairs pairs = load_pairs(resolve_data_path(pairs_path));
    ProcrustesReport rep;
    const AlignmentTransform t = learn_procrustes(src, tgt, pairs, &rep);
    log_line("procrustes: " + std::to_string(rep.pairs_usable) + "/" +
             std::to_string(rep.pairs_total) + " pairs usable" +
             (rep.underdetermined ? " (warning: fewer pairs than dimensions)" : ""));

    fs::create_directories(common.out_dir);
    const fs::path out = fs::path(common.out_dir) / out_file;
    save_transform(t, out.string());
    log_line("wrote " + out.string());
    if (emit_inverse) {
        fs::path inv = out;
        inv.replace_extension();
        inv += "_inverse.tsv";
        save_transform(t.inverse(), inv.string());
        log_line("wrote " + inv.string());
    }
    if (!write_aligned.empty()) {
        const fs::path aligned_path = fs::path(common.out_dir) / write_aligned;
        save_vec_file(apply_transform(src, t), aligned_path.string());
        log_line("wrote " + aligned_path.string());
    }
    return 0;
}

int run_eval_cv(const CommonFlags& common, const LexiconFlags& lex_f,
                const EmbeddingFlags& emb_f, const std::string& variable_name_str,
                const ModelFlags& mf, int downsample_n) {
    const Variable variable = *variable_from_name(variable_name_str);
    const EmbeddingSpace space = load_space_cli(emb_f);
    NormLexicon lexicon = load_lexicon_cli(lex_f);
    if (downsample_n > 0) {
        lexicon = downsample(lexicon, downsample_n, mix_seed(common.seed, 3));
        log_line("downsampled lexicon to " + std::to_string(lexicon.size()) + " entries");
    }

    std::vector<std::string> models;
    if (mf.model == "both") {
        models = {"svr", "ffn"};
    } else {
        models = {mf.model};
    }
    std::vector<EvalReport> reports;
    std::vector<CvResult> results;
    for (const std::string& name : models) {
        const ExperimentOptions opts =
            make_options(common, mf, name, variable, mf.dropout_set);
        CvResult res = run_in_language_cv(space, lexicon, opts);
        log_line(name + ": pooled spearman " + format_double(res.report.spearman) +
                 ", pearson " + format_double(res.report.pearson));
        results.push_back(std::move(res));
        reports.push_back(results.back().report);
    }
    if (results.size() == 2) {
        const std::vector<double> gold(results[0].gold.data(),
                                       results[0].gold.data() + results[0].gold.size());
        const std::vector<double> a(
            results[0].pooled_predictions.data(),
            results[0].pooled_predictions.data() + results[0].pooled_predictions.size());
        const std::vector<double> b(
            results[1].pooled_predictions.data(),
            results[1].pooled_predictions.data() + results[1].pooled_predictions.size());
        const double p = approx_randomization_test(gold, a, b, Metric::spearman,
                                                   mf.rand_iterations, mix_seed(common.seed, 77));
        for (EvalReport& r : reports) {
            r.p_value = p;
            r.config["significance_threshold"] = mf.significance;
            r.config["rand_iterations"] = mf.rand_iterations;
        }
        log_line("svr vs ffn approximate randomization p = " + format_double(p) +
                 (p < mf.significance ? " (significant)" : " (not significant)"));
    }
    write_reports(reports, common.out_dir);
    return 0;
}

int run_transfer_embed(const CommonFlags& common, const LexiconFlags& src_lex_f,
                       const EmbeddingFlags& src_emb_f, const EmbeddingFlags& tgt_emb_f,
                       const std::string& variable_name_str, const ModelFlags& mf,
                       const std::string& transform_path, const std::string& pairs_path,
                       const std::string& tgt_lexicon_path, const LexiconFlags& tgt_lex_f) {
    const Variable variable = *variable_from_name(variable_name_str);
    const EmbeddingSpace src_space = load_space_cli(src_emb_f);
    const EmbeddingSpace tgt_space = load_space_cli(tgt_emb_f);
    const NormLexicon src_lexicon = load_lexicon_cli(src_lex_f);

    std::optional<AlignmentTransform> transform;
    if (!transform_path.empty()) {
        transform = load_transform(resolve_data_path(transform_path));
        log_line("loaded transform " + transform_path);
    } else if (!pairs_path.empty()) {
        ProcrustesReport rep;
        transform =
            learn_procrustes(src_space, tgt_space, load_pairs(resolve_data_path(pairs_path)), &rep);
        log_line("learned transform from " + std::to_string(rep.pairs_usable) + " pairs");
    } else {
        log_line("no transform given; treating the spaces as pre-aligned");
    }

    std::optional<NormLexicon> tgt_gold;
    if (!tgt_lexicon_path.empty()) {
        LexiconFlags f = tgt_lex_f;
        f.path = tgt_lexicon_path;
        tgt_gold = load_lexicon_cli(f);
    }

    std::vector<std::string> models;
    if (mf.model == "both") {
        models = {"svr", "ffn"};
    } else {
        models = {mf.model};
    }

    fs::create_directories(common.out_dir);
    std::vector<EvalReport> reports;
    std::vector<Eigen::VectorXd> gold_aligned_preds;
    std::vector<double> shared_gold;
    for (const std::string& name : models) {
        const ExperimentOptions opts =
            make_options(common, mf, name, variable, mf.dropout_set);
        const TransferResult res =
            run_embedding_transfer(src_space, src_lexicon, tgt_space, transform,
                                   tgt_gold ? &*tgt_gold : nullptr, opts);
        if (res.report) {
            log_line(name + ": transfer spearman " + format_double(res.report->spearman));
            reports.push_back(*res.report);
        }
        if (is_mean_variable(variable)) {
            const fs::path lex_out = fs::path(common.out_dir) /
                                     ("predicted_" + std::string(variable_name_str) + "_" + name +
                                      ".tsv");
            save_lexicon(res.predicted, lex_out.string());
            log_line("wrote " + lex_out.string());
        } else {
            log_line("std-variable predictions are evaluated but not exported");
        }
        const fs::path model_out =
            fs::path(common.out_dir) / ("model_" + name + ".tsv");
        if (std::holds_alternative<SvrModel>(*res.model)) {
            save_svr_model(std::get<SvrModel>(*res.model), variable_name_str,
                           model_out.string());
        } else {
            save_ffn_model(std::get<FfnModel>(*res.model), variable_name_str,
                           model_out.string());
        }
        log_line("wrote " + model_out.string());

        if (tgt_gold) {
            std::vector<double> gold, pred;
            for (const NormEntry& e : tgt_gold->entries) {
                if (!e.has(variable)) continue;
                const auto row = tgt_space.row_of(e.word);
                if (!row) continue;
                gold.push_back(e.get(variable));
                const NormEntry* pe = res.predicted.find(e.word);
                pred.push_back(pe->get(variable));
            }
            shared_gold = gold;
            Eigen::VectorXd pv(pred.size());
            for (std::size_t i = 0; i < pred.size(); ++i) pv[i] = pred[i];
            gold_aligned_preds.push_back(pv);
        }
    }
    if (gold_aligned_preds.size() == 2) {
        const std::vector<double> a(gold_aligned_preds[0].data(),
                                    gold_aligned_preds[0].data() + gold_aligned_preds[0].size());
        const std::vector<double> b(gold_aligned_preds[1].data(),
                                    gold_aligned_preds[1].data() + gold_aligned_preds[1].size());
        const double p = approx_randomization_test(shared_gold, a, b, Metric::spearman,
                                                   mf.rand_iterations, mix_seed(common.seed, 78));
        for (EvalReport& r : reports) {
            r.p_value = p;
            r.config["significance_threshold"] = mf.significance;
            r.config["rand_iterations"] = mf.rand_iterations;
        }
        log_line("svr vs ffn approximate randomization p = " + format_double(p));
    }
    if (!reports.empty()) write_reports(reports, common.out_dir);
    return 0;
}

int run_transfer_dict(const CommonFlags& common, const LexiconFlags& src_lex_f,
                      const std::string& dict_path, const std::string& variable_name_str,
                      const std::string& tgt_lexicon_path, const LexiconFlags& tgt_lex_f,
                      const std::string& collision, const ModelFlags& mf) {
    const Variable variable = *variable_from_name(variable_name_str);
    const NormLexicon src_lexicon = load_lexicon_cli(src_lex_f);
    const TransferDictionary dict = load_transfer_dictionary(resolve_data_path(dict_path));
    if (dict.size() == 0) {
        throw DataError("dictionary file " + dict_path + " contains no pairs");
    }
    log_line("dictionary " + dict_path + ": " + std::to_string(dict.size()) + " pairs");

    std::optional<NormLexicon> tgt_gold;
    if (!tgt_lexicon_path.empty()) {
        LexiconFlags f = tgt_lex_f;
        f.path = tgt_lexicon_path;
        tgt_gold = load_lexicon_cli(f);
    }

    ExperimentOptions opts = make_options(common, mf, "svr", variable, mf.dropout_set);
    opts.collision =
        collision == "median" ? CollisionAveraging::median : CollisionAveraging::mean;
    const TransferResult res =
        run_dictionary_transfer(src_lexicon, dict, tgt_gold ? &*tgt_gold : nullptr, opts);

    fs::create_directories(common.out_dir);
    // means only in the exported lexicon; std transfers stay in the report
    NormLexicon exported = res.predicted;
    for (NormEntry& e : exported.entries) {
        e.conc_std = std::numeric_limits<double>::quiet_NaN();
        e.imag_std = std::numeric_limits<double>::quiet_NaN();
    }
    exported.entries.erase(
        std::remove_if(exported.entries.begin(), exported.entries.end(),
                       [](const NormEntry& e) { return !e.has_any(); }),
        exported.entries.end());
    exported.rebuild_index();
    const fs::path lex_out = fs::path(common.out_dir) / "predicted_dict.tsv";
    save_lexicon(exported, lex_out.string());
    log_line("wrote " + lex_out.string() + " (" + std::to_string(exported.size()) + " words)");

    if (res.report) {
        log_line("dictionary transfer spearman " + format_double(res.report->spearman));
        write_reports({*res.report}, common.out_dir);
    }
    return 0;
}

int run_coef_analysis(const CommonFlags& common, const LexiconFlags& lex_f,
                      const EmbeddingFlags& emb_f, const std::string& variable_name_str,
                      const ModelFlags& mf) {
    const Variable variable = *variable_from_name(variable_name_str);
    const EmbeddingSpace space = load_space_cli(emb_f);
    const NormLexicon lexicon = load_lexicon_cli(lex_f);
    const ExperimentOptions opts = make_options(common, mf, "svr", variable, mf.dropout_set);
    const CoefficientProfile profile = run_coefficient_analysis(space, lexicon, opts);

    fs::create_directories(common.out_dir);
    const fs::path out = fs::path(common.out_dir) / "coef_profile.tsv";
    atomic_write_file(out.string(), [&](std::ostream& os) {
        os << "# dims_for_50pct\t" << profile.dims_for_50pct << "\n";
        os << "# dims_for_80pct\t" << profile.dims_for_80pct << "\n";
        os << "rank\tcumulative_mass\n";
        for (Eigen::Index i = 0; i < profile.sorted_mass.size(); ++i) {
            os << (i + 1) << '\t' << format_double(profile.sorted_mass[i]) << "\n";
        }
    });
    log_line("wrote " + out.string());
    log_line("dims for 50% mass: " + std::to_string(profile.dims_for_50pct) + ", for 80%: " +
             std::to_string(profile.dims_for_80pct) + " of " +
             std::to_string(profile.sorted_mass.size()));
    return 0;
}

int run_predict_lexicon(const CommonFlags& common, const std::string& model_path,
                        const EmbeddingFlags& emb_f, const std::string& out_name) {
    const EmbeddingSpace space = load_space_cli(emb_f);
    const std::string resolved = resolve_data_path(model_path);

    TrainedModel model;
    std::string variable_str;
    {
        LineReader probe(resolved);
        std::string first;
        if (!probe.next(first)) throw DataError(resolved + ": empty model file");
        if (first.rfind("normpred-svr", 0) == 0) {
            model = load_svr_model(resolved, &variable_str);
        } else if (first.rfind("normpred-ffn", 0) == 0) {
            model = load_ffn_model(resolved, &variable_str);
        } else {
            throw DataError(resolved + ": unrecognized model file");
        }
    }
    const auto variable = variable_from_name(variable_str);
    if (!variable) {
        throw DataError(resolved + ": model carries no variable label; cannot build a lexicon");
    }
    const NormLexicon lex = predict_lexicon(model, space, *variable);

    fs::create_directories(common.out_dir);
    const fs::path out = fs::path(common.out_dir) / out_name;
    save_lexicon(lex, out.string());
    log_line("wrote " + out.string() + " (" + std::to_string(lex.size()) + " words, variable " +
             variable_str + ")");
    return 0;
}

int run_inspect(const std::string& embeddings, const std::string& lexicon,
                const std::string& dictionary, const std::string& pairs) {
    if (embeddings.empty() && lexicon.empty() && dictionary.empty() && pairs.empty()) {
        throw DataError("inspect: give at least one of --embeddings/--lexicon/--dictionary/--pairs");
    }
    if (!embeddings.empty()) {
        VecParseReport rep;
        const EmbeddingSpace space = parse_vec_file(resolve_data_path(embeddings), 0, true, "", &rep);
        std::cout << "embeddings\t" << embeddings << "\n";
        std::cout << "  words\t" << space.size() << "\n  dim\t" << space.dim << "\n";
        std::cout << "  malformed_rows\t" << rep.skipped_malformed << "\n";
        std::cout << "  duplicates\t" << rep.duplicates_dropped << "\n";
    }
    if (!lexicon.empty()) {
        LexiconLoadReport rep;
        const NormLexicon lex = load_lexicon(resolve_data_path(lexicon), LexiconSchema{},
                                             {-1e300, 1e300}, "", true, &rep);
        int counts[4] = {0, 0, 0, 0};
        const Variable vars[] = {Variable::conc_mean, Variable::conc_std, Variable::imag_mean,
                                 Variable::imag_std};
        for (const NormEntry& e : lex.entries) {
            for (int k = 0; k < 4; ++k) {
                if (e.has(vars[k])) ++counts[k];
            }
        }
        std::cout << "lexicon\t" << lexicon << "\n  entries\t" << lex.size() << "\n";
        for (int k = 0; k < 4; ++k) {
            std::cout << "  " << variable_name(vars[k]) << "\t" << counts[k] << "\n";
        }
        std::cout << "  rejected_rows\t" << rep.rejected_rows.size() << "\n";
        std::cout << "  duplicates\t" << rep.duplicates_dropped << "\n";
    }
    if (!dictionary.empty()) {
        const TransferDictionary dict = load_transfer_dictionary(resolve_data_path(dictionary));
        std::cout << "dictionary\t" << dictionary << "\n  pairs\t" << dict.size() << "\n";
    }
    if (!pairs.empty()) {
        const BilingualPairs p = load_pairs(resolve_data_path(pairs));
        std::cout << "pairs\t" << pairs << "\n  pairs\t" << p.size() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"normpred: concreteness and imageability prediction over word embeddings"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a TOML/INI config file");
    app.fallthrough();

    CommonFlags common;
    app.add_option("--seed", common.seed, "seed for every random choice")->capture_default_str();
    app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
    app.add_option("--jobs", common.jobs, "concurrent fold training cap")->capture_default_str();
    app.add_flag("--verbose", common.verbose, "dump resolved configuration");

    // align
    auto* align_cmd = app.add_subcommand("align", "learn an orthogonal alignment transform");
    EmbeddingFlags al_src, al_tgt;
    add_embedding_flags(align_cmd, al_src, "source-", "source");
    add_embedding_flags(align_cmd, al_tgt, "target-", "target");
    std::string al_pairs, al_out = "transform.tsv", al_write_aligned;
    bool al_inverse = false;
    align_cmd->add_option("--pairs", al_pairs, "bilingual seed pairs TSV")->required();
    align_cmd->add_option("--out-file", al_out, "transform file name")->capture_default_str();
    align_cmd->add_flag("--emit-inverse", al_inverse, "also write the transposed transform");
    align_cmd->add_option("--write-aligned", al_write_aligned,
                          "also write the transformed source space (.vec)");

    // eval-cv
    auto* cv_cmd = app.add_subcommand("eval-cv", "in-language cross-validation");
    LexiconFlags cv_lex;
    EmbeddingFlags cv_emb;
    ModelFlags cv_model;
    std::string cv_variable;
    int cv_downsample = 0;
    add_lexicon_flags(cv_cmd, cv_lex, "", "gold");
    add_embedding_flags(cv_cmd, cv_emb, "", "language");
    add_variable_flag(cv_cmd, cv_variable);
    add_model_flags(cv_cmd, cv_model, true);
    cv_cmd->add_option("--downsample", cv_downsample,
                       "randomly downsample the lexicon to this many entries first (0 = off)");

    // transfer-embed
    auto* te_cmd = app.add_subcommand("transfer-embed",
                                      "cross-lingual transfer over aligned embeddings");
    LexiconFlags te_src_lex, te_tgt_lex;
    EmbeddingFlags te_src_emb, te_tgt_emb;
    ModelFlags te_model;
    std::string te_variable, te_transform, te_pairs, te_tgt_lexicon;
    add_lexicon_flags(te_cmd, te_src_lex, "source-", "source gold");
    add_embedding_flags(te_cmd, te_src_emb, "source-", "source");
    add_embedding_flags(te_cmd, te_tgt_emb, "target-", "target");
    add_variable_flag(te_cmd, te_variable);
    add_model_flags(te_cmd, te_model, false);
    te_cmd->add_option("--transform", te_transform, "saved alignment transform TSV");
    te_cmd->add_option("--pairs", te_pairs, "learn the transform from this pairs file");
    te_cmd->add_option("--target-lexicon", te_tgt_lexicon,
                       "target gold lexicon for evaluation (optional)");
    te_cmd->add_option("--target-scale-min", te_tgt_lex.scale_min, "target scale lower bound");
    te_cmd->add_option("--target-scale-max", te_tgt_lex.scale_max, "target scale upper bound");
    te_cmd->add_option("--target-lexicon-lang", te_tgt_lex.lang, "target language code");

    // transfer-dict
    auto* td_cmd = app.add_subcommand("transfer-dict",
                                      "cross-lingual transfer through a translation dictionary");
    LexiconFlags td_src_lex, td_tgt_lex;
    ModelFlags td_model;
    std::string td_variable, td_dict, td_tgt_lexicon, td_collision = "mean";
    add_lexicon_flags(td_cmd, td_src_lex, "source-", "source gold");
    td_cmd->add_option("--dictionary", td_dict, "translation dictionary TSV")->required();
    add_variable_flag(td_cmd, td_variable);
    td_cmd->add_option("--target-lexicon", td_tgt_lexicon,
                       "target gold lexicon for evaluation (optional)");
    td_cmd->add_option("--target-scale-min", td_tgt_lex.scale_min, "target scale lower bound");
    td_cmd->add_option("--target-scale-max", td_tgt_lex.scale_max, "target scale upper bound");
    td_cmd->add_option("--target-lexicon-lang", td_tgt_lex.lang, "target language code");
    td_cmd->add_option("--collision", td_collision, "collision averaging: mean or median")
        ->check(CLI::IsMember({"mean", "median"}))
        ->capture_default_str();
    td_cmd->add_option("--rand-iterations", td_model.rand_iterations,
                       "approximate-randomization iterations");

    // coef-analysis
    auto* ca_cmd = app.add_subcommand("coef-analysis",
                                      "cumulative mass profile of linear-SVR coefficients");
    LexiconFlags ca_lex;
    EmbeddingFlags ca_emb;
    ModelFlags ca_model;
    std::string ca_variable;
    add_lexicon_flags(ca_cmd, ca_lex, "", "gold");
    add_embedding_flags(ca_cmd, ca_emb, "", "language");
    add_variable_flag(ca_cmd, ca_variable);
    ca_cmd->add_option("--svr-c", ca_model.svr.c, "SVR box constraint C");
    ca_cmd->add_option("--svr-epsilon", ca_model.svr.epsilon, "epsilon tube half-width");
    ca_cmd->add_option("--svr-max-passes", ca_model.svr.max_passes,
                       "SMO pair-update cap (0 = 10*n)");

    // predict-lexicon
    auto* pl_cmd = app.add_subcommand("predict-lexicon",
                                      "emit a predicted norm lexicon from a saved model");
    EmbeddingFlags pl_emb;
    std::string pl_model, pl_out = "predicted_lexicon.tsv";
    add_embedding_flags(pl_cmd, pl_emb, "", "target");
    pl_cmd->add_option("--model-file", pl_model, "saved model (from transfer-embed)")->required();
    pl_cmd->add_option("--out-file", pl_out, "output lexicon file name")->capture_default_str();

    // inspect
    auto* in_cmd = app.add_subcommand("inspect", "print resource statistics");
    std::string in_emb, in_lex, in_dict, in_pairs;
    in_cmd->add_option("--embeddings", in_emb, ".vec/.vec.gz file");
    in_cmd->add_option("--lexicon", in_lex, "canonical lexicon TSV");
    in_cmd->add_option("--dictionary", in_dict, "translation dictionary TSV");
    in_cmd->add_option("--pairs", in_pairs, "bilingual pairs TSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion") {
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    }

    if (common.verbose) dump_resolved_config(app);
    log_line("seed " + std::to_string(common.seed));

    // flags changed from their defaults count as explicit overrides
    cv_model.dropout_set = cv_cmd->count("--ffn-dropout") > 0;
    te_model.dropout_set = te_cmd->count("--ffn-dropout") > 0;

    try {
        if (align_cmd->parsed()) {
            return run_align(common, al_src, al_tgt, al_pairs, al_out, al_inverse,
                             al_write_aligned);
        }
        if (cv_cmd->parsed()) {
            return run_eval_cv(common, cv_lex, cv_emb, cv_variable, cv_model, cv_downsample);
        }
        if (te_cmd->parsed()) {
            return run_transfer_embed(common, te_src_lex, te_src_emb, te_tgt_emb, te_variable,
                                      te_model, te_transform, te_pairs, te_tgt_lexicon,
                                      te_tgt_lex);
        }
        if (td_cmd->parsed()) {
            return run_transfer_dict(common, td_src_lex, td_dict, td_variable, td_tgt_lexicon,
                                     td_tgt_lex, td_collision, td_model);
        }
        if (ca_cmd->parsed()) {
            return run_coef_analysis(common, ca_lex, ca_emb, ca_variable, ca_model);
        }
        if (pl_cmd->parsed()) {
            return run_predict_lexicon(common, pl_model, pl_emb, pl_out);
        }
        if (in_cmd->parsed()) {
            return run_inspect(in_emb, in_lex, in_dict, in_pairs);
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
