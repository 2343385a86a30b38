#pragma once

#include <string>
#include <utility>
#include <vector>

#include "normpred/embedding.hpp"

namespace normpred {

struct BilingualPairs {
    std::vector<std::pair<std::string, std::string>> pairs;  // source -> target

    int size() const { return static_cast<int>(pairs.size()); }
};

// TSV `source<TAB>target`; '#'-prefixed comment lines ignored, exact
// duplicate pairs dropped.
BilingualPairs load_pairs(const std::string& path);

// Orthogonal map from the source space onto the target space. Applying W
// preserves norms; W^T maps back.
struct AlignmentTransform {
    Eigen::MatrixXd W;  // dim x dim, row vectors map as x -> xW
    std::string source_lang;
    std::string target_lang;
    int pairs_used = 0;

    int dim() const { return static_cast<int>(W.rows()); }
    AlignmentTransform inverse() const;
};

struct ProcrustesReport {
    int pairs_total = 0;
    int pairs_usable = 0;
    int pairs_dropped_missing = 0;
    bool underdetermined = false;  // fewer usable pairs than dim
};

// Solves min_W ||XW - Y||_F over orthogonal W, where X and Y hold the
// L2-normalized embedding rows of the dictionary pairs found in both
// vocabularies: W = U V^T from the SVD of X^T Y.
AlignmentTransform learn_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                    const BilingualPairs& pairs,
                                    ProcrustesReport* report = nullptr);

// Maps every row x of the space to xW; vocabulary unchanged.
EmbeddingSpace apply_transform(const EmbeddingSpace& space, const AlignmentTransform& t);

// TSV matrix file with a one-line header `<dim> <source_lang> <target_lang>`.
void save_transform(const AlignmentTransform& t, const std::string& path);
AlignmentTransform load_transform(const std::string& path);

}  // namespace normpred
