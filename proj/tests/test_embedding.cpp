#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "normpred/embedding.hpp"
#include "normpred/errors.hpp"
#include "normpred/rng.hpp"

using namespace normpred;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "normpred_embed_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    fs::path p = temp_dir() / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

}  // namespace

TEST_CASE("parse_vec_file basic format") {
    const auto path = write_file("basic.vec", "2 3\na 1 0 0\nb 0 1 0\n");
    const EmbeddingSpace space = parse_vec_file(path.string());
    CHECK(space.dim == 3);
    CHECK(space.vocab == std::vector<std::string>{"a", "b"});
    CHECK(space.matrix(0, 0) == 1.0);
    CHECK(space.matrix(1, 1) == 1.0);
    CHECK(space.row_of("a").value() == 0);
    CHECK(!space.row_of("zzz"));
}

TEST_CASE("duplicate words keep the first occurrence") {
    const auto path = write_file("dup.vec", "2 3\na 1 0 0\na 9 9 9\n");
    VecParseReport rep;
    const EmbeddingSpace space = parse_vec_file(path.string(), 0, false, "", &rep);
    CHECK(space.size() == 1);
    CHECK(space.matrix(0, 0) == 1.0);
    CHECK(space.matrix(0, 2) == 0.0);
    CHECK(rep.duplicates_dropped == 1);
}

TEST_CASE("case folding merges duplicates when lowercase=true") {
    const auto path = write_file("fold.vec", "2 2\nDog 1 2\ndog 3 4\n");
    VecParseReport rep;
    const EmbeddingSpace space = parse_vec_file(path.string(), 0, true, "", &rep);
    CHECK(space.size() == 1);
    CHECK(space.vocab[0] == "dog");
    CHECK(space.matrix(0, 0) == 1.0);
    CHECK(rep.duplicates_dropped == 1);
    CHECK(space.row_of("DOG").value() == 0);
}

TEST_CASE("malformed rows are skipped and counted") {
    const auto path = write_file("bad.vec", "3 2\na 1 2\nbad 1\nc 3 4\n");
    VecParseReport rep;
    const EmbeddingSpace space = parse_vec_file(path.string(), 0, true, "", &rep);
    CHECK(space.vocab == std::vector<std::string>{"a", "c"});
    CHECK(rep.skipped_malformed == 1);

    const auto nonnum = write_file("nonnum.vec", "2 2\na 1 x\nb 3 4\n");
    VecParseReport rep2;
    const EmbeddingSpace space2 = parse_vec_file(nonnum.string(), 0, true, "", &rep2);
    CHECK(space2.vocab == std::vector<std::string>{"b"});
    CHECK(rep2.skipped_malformed == 1);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_vec_file((temp_dir() / "missing.vec").string()), DataError);
    CHECK_THROWS_AS(parse_vec_file(write_file("nohdr.vec", "").string()), DataError);
    CHECK_THROWS_AS(parse_vec_file(write_file("badhdr.vec", "x y\na 1 1\n").string()), DataError);
    CHECK_THROWS_AS(parse_vec_file(write_file("norows.vec", "1 2\nonly 1\n").string()), DataError);
}

TEST_CASE("max_words limits the load") {
    const auto path = write_file("limit.vec", "3 2\na 1 2\nb 3 4\nc 5 6\n");
    const EmbeddingSpace space = parse_vec_file(path.string(), 2);
    CHECK(space.vocab == std::vector<std::string>{"a", "b"});
}

TEST_CASE("gzip input is accepted") {
    const fs::path path = temp_dir() / "packed.vec.gz";
    gzFile f = gzopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    const std::string body = "2 2\nhello 0.5 -0.25\nworld 1.5 2.75\n";
    gzwrite(f, body.data(), static_cast<unsigned>(body.size()));
    gzclose(f);

    const EmbeddingSpace space = parse_vec_file(path.string());
    CHECK(space.size() == 2);
    CHECK(space.matrix(1, 1) == 2.75);
}

TEST_CASE("vec round-trip is bit-identical") {
    Rng rng(991);
    EmbeddingSpace space;
    space.dim = 4;
    space.lang = "xx";
    for (int i = 0; i < 25; ++i) space.vocab.push_back("word" + std::to_string(i));
    space.matrix.resize(25, 4);
    for (int i = 0; i < 25; ++i) {
        for (int j = 0; j < 4; ++j) space.matrix(i, j) = rng.gaussian() * 1e3;
    }
    space.rebuild_index();

    const fs::path path = temp_dir() / "roundtrip.vec";
    save_vec_file(space, path.string());
    const EmbeddingSpace back = parse_vec_file(path.string());
    REQUIRE(back.size() == space.size());
    CHECK(back.vocab == space.vocab);
    CHECK(back.matrix == space.matrix);

    save_vec_file(back, (temp_dir() / "roundtrip2.vec").string());
    const EmbeddingSpace back2 = parse_vec_file((temp_dir() / "roundtrip2.vec").string());
    CHECK(back2.matrix == back.matrix);
}

TEST_CASE("standardizer matches hand-computed population stats") {
    EmbeddingSpace space;
    space.dim = 2;
    space.vocab = {"a", "b", "c"};
    space.matrix.resize(3, 2);
    space.matrix << 1, 5, 2, 5, 3, 5;
    space.rebuild_index();

    const Standardizer s = fit_standardizer(space);
    CHECK(s.means[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.stds[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    // constant column guard
    CHECK(s.means[1] == doctest::Approx(5.0));
    CHECK(s.stds[1] == 1.0);

    const EmbeddingSpace z = standardize(space, s);
    CHECK(z.matrix(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(z.matrix(1, 0) == doctest::Approx(0.0));
    CHECK(z.matrix(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
    CHECK(z.matrix(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("identity standardizer and two-point column") {
    EmbeddingSpace space;
    space.dim = 1;
    space.vocab = {"a", "b"};
    space.matrix.resize(2, 1);
    space.matrix << 10, 20;
    space.rebuild_index();

    Standardizer identity;
    identity.means = Eigen::VectorXd::Zero(1);
    identity.stds = Eigen::VectorXd::Ones(1);
    CHECK(standardize(space, identity).matrix == space.matrix);

    const Standardizer s = fit_standardizer(space);
    const EmbeddingSpace z = standardize(space, s);
    CHECK(z.matrix(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(z.matrix(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardization is idempotent") {
    Rng rng(4242);
    EmbeddingSpace space;
    space.dim = 6;
    space.matrix.resize(40, 6);
    for (int i = 0; i < 40; ++i) {
        space.vocab.push_back("w" + std::to_string(i));
        for (int j = 0; j < 6; ++j) space.matrix(i, j) = rng.gaussian(3.0, 2.5);
    }
    space.rebuild_index();

    const EmbeddingSpace once = standardize(space, fit_standardizer(space));
    const Standardizer refit = fit_standardizer(once);
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(refit.means[j]) < 1e-9);
        CHECK(refit.stds[j] == doctest::Approx(1.0).epsilon(1e-9));
    }
    const EmbeddingSpace twice = standardize(once, refit);
    CHECK((twice.matrix - once.matrix).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("standardize rejects dim mismatch") {
    EmbeddingSpace space;
    space.dim = 2;
    space.vocab = {"a"};
    space.matrix = Eigen::MatrixXd::Zero(1, 2);
    space.rebuild_index();
    Standardizer s;
    s.means = Eigen::VectorXd::Zero(3);
    s.stds = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(standardize(space, s), DataError);
    CHECK_THROWS_AS(fit_standardizer(Eigen::MatrixXd(0, 2)), DataError);
}

namespace {

NormLexicon tiny_lexicon(const std::vector<std::pair<std::string, double>>& ratings) {
    NormLexicon lex;
    for (const auto& [word, value] : ratings) {
        NormEntry e;
        e.word = word;
        e.conc_mean = value;
        lex.entries.push_back(e);
    }
    lex.rebuild_index();
    return lex;
}

}  // namespace

TEST_CASE("intersect keeps lexicon order and reports drops") {
    EmbeddingSpace space;
    space.dim = 2;
    space.vocab = {"a", "b", "c"};
    space.matrix.resize(3, 2);
    space.matrix << 1, 2, 3, 4, 5, 6;
    space.rebuild_index();

    const NormLexicon lex = tiny_lexicon({{"a", 1.5}, {"b", 2.5}, {"z", 3.5}});
    const IntersectResult res = intersect(space, lex);
    CHECK(res.words == std::vector<std::string>{"a", "b"});
    CHECK(res.dropped == 1);
    CHECK(res.conc_mean[0] == 1.5);
    CHECK(res.conc_mean[1] == 2.5);
    CHECK(std::isnan(res.imag_mean[0]));

    // row i equals the space row of word i
    for (int i = 0; i < res.size(); ++i) {
        const int row = space.row_of(res.words[i]).value();
        CHECK(res.features.row(i) == space.matrix.row(row));
    }
}

TEST_CASE("intersect with disjoint vocabularies fails") {
    EmbeddingSpace space;
    space.dim = 1;
    space.vocab = {"x"};
    space.matrix = Eigen::MatrixXd::Zero(1, 1);
    space.rebuild_index();
    const NormLexicon lex = tiny_lexicon({{"nope", 2.0}});
    CHECK_THROWS_WITH_AS(intersect(space, lex),
                         "empty intersection between lexicon and embedding vocabulary", DataError);
}
