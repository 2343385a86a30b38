#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "normpred/alignment.hpp"
#include "normpred/embedding.hpp"
#include "normpred/ffn.hpp"
#include "normpred/norms.hpp"
#include "normpred/stats.hpp"
#include "normpred/svr.hpp"

namespace normpred {

enum class ModelKind { svr, ffn };
const char* model_kind_name(ModelKind m);

enum class CollisionAveraging { mean, median };

struct ExperimentOptions {
    Variable variable = Variable::conc_mean;
    ModelKind model = ModelKind::svr;
    SvrHyperParams svr;
    FfnHyperParams ffn;
    // dropout switches by task (0.5 in-language, 0.8 embedding transfer)
    // unless the caller pinned it explicitly
    bool ffn_dropout_overridden = false;
    int folds = 3;
    std::uint64_t seed = 42;
    int jobs = 1;  // fold-parallel training cap
    CollisionAveraging collision = CollisionAveraging::mean;
};

using TrainedModel = std::variant<SvrModel, FfnModel>;

Eigen::VectorXd trained_predict(const TrainedModel& model, const Eigen::MatrixXd& X);

struct CvResult {
    EvalReport report;
    std::vector<std::string> words;       // evaluated words, lexicon order
    Eigen::VectorXd pooled_predictions;   // held-out prediction per word
    Eigen::VectorXd gold;
    int dropped_words = 0;
};

// 3-fold (by default) cross-validation within one language: intersect,
// standardize with full-space statistics, train on k-1 folds, pool the
// held-out predictions, correlate the pooled vector.
CvResult run_in_language_cv(const EmbeddingSpace& space, const NormLexicon& lexicon,
                            const ExperimentOptions& opts);

struct TransferResult {
    std::optional<EvalReport> report;  // present when gold ratings were supplied
    NormLexicon predicted;
    std::optional<TrainedModel> model;  // absent for dictionary transfer
};

// Trains on the whole source dataset over aligned + standardized features,
// then predicts every target-space word. Pass no transform when the spaces
// are already aligned (identity).
TransferResult run_embedding_transfer(const EmbeddingSpace& src_space,
                                      const NormLexicon& src_lexicon,
                                      const EmbeddingSpace& tgt_space,
                                      const std::optional<AlignmentTransform>& transform,
                                      const NormLexicon* tgt_gold, const ExperimentOptions& opts);

// Projects source ratings through translation pairs; collisions receive the
// arithmetic mean (median behind the option). All rating variables present
// in the source lexicon are transferred; evaluation uses opts.variable.
TransferResult run_dictionary_transfer(const NormLexicon& src_lexicon,
                                       const TransferDictionary& dict,
                                       const NormLexicon* tgt_gold,
                                       const ExperimentOptions& opts);

struct CoefficientProfile {
    Eigen::VectorXd sorted_mass;  // cumulative, nondecreasing, ends at 1
    int dims_for_50pct = 0;
    int dims_for_80pct = 0;
};

// Cumulative mass of the normalized, descending-sorted absolute weights.
CoefficientProfile coefficient_profile_from_weights(const Eigen::VectorXd& weights);

// Linear-kernel SVR on the full standardized data, profiled as above.
CoefficientProfile run_coefficient_analysis(const EmbeddingSpace& space,
                                            const NormLexicon& lexicon,
                                            const ExperimentOptions& opts);

// One rating per target-space word, vocabulary order. Mean variables only.
NormLexicon predict_lexicon(const TrainedModel& model, const EmbeddingSpace& tgt_space,
                            Variable variable, const NormLexicon* scale_source = nullptr);

}  // namespace normpred
