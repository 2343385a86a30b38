#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "normpred/norms.hpp"

namespace normpred {

// Vocabulary plus one row of `matrix` per word. Immutable after
// construction; safe to share across threads.
struct EmbeddingSpace {
    std::string lang;
    int dim = 0;
    bool lowercased = true;  // case-folding policy applied at load time
    std::vector<std::string> vocab;
    Eigen::MatrixXd matrix;  // vocab.size() x dim

    int size() const { return static_cast<int>(vocab.size()); }

    // Row index of `word` under this space's folding policy.
    std::optional<int> row_of(const std::string& word) const;

    void rebuild_index();

  private:
    std::unordered_map<std::string, int> index_;
};

struct VecParseReport {
    long long lines_read = 0;
    long long kept = 0;
    long long skipped_malformed = 0;
    long long duplicates_dropped = 0;
};

// word2vec/fastText text format: header `<count> <dim>`, then one word and
// dim floats per line. Gzip input accepted when the name ends in .gz.
// Duplicate words (after folding) keep the first occurrence; malformed rows
// are skipped and counted. max_words = 0 loads everything.
EmbeddingSpace parse_vec_file(const std::string& path, long long max_words = 0,
                              bool lowercase = true, const std::string& lang = "",
                              VecParseReport* report = nullptr);

void save_vec_file(const EmbeddingSpace& space, const std::string& path);

// Per-dimension mean and population standard deviation. Zero stds are
// stored as 1 so constant columns map to 0 instead of dividing by zero.
struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;

    int dim() const { return static_cast<int>(means.size()); }
};

Standardizer fit_standardizer(const EmbeddingSpace& space);
Standardizer fit_standardizer(const Eigen::MatrixXd& matrix);

EmbeddingSpace standardize(const EmbeddingSpace& space, const Standardizer& s);
Eigen::MatrixXd standardize_matrix(const Eigen::MatrixXd& matrix, const Standardizer& s);

// Rows of `space` for the lexicon words it covers, in lexicon order.
// Rating columns are aligned with the rows; absent ratings are NaN.
struct IntersectResult {
    Eigen::MatrixXd features;
    std::vector<std::string> words;
    Eigen::VectorXd conc_mean, conc_std, imag_mean, imag_std;
    int dropped = 0;

    int size() const { return static_cast<int>(words.size()); }
    const Eigen::VectorXd& targets(Variable v) const;
};

IntersectResult intersect(const EmbeddingSpace& space, const NormLexicon& lexicon);

}  // namespace normpred
