#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace normpred {

// Fractional (1-based) ranks; ties receive the average of the ranks they
// span.
std::vector<double> fractional_ranks(std::span<const double> values);

// Centered covariance over the product of population standard deviations.
// Throws on constant input (undefined correlation).
double pearson(std::span<const double> a, std::span<const double> b);

// Pearson correlation of fractional ranks.
double spearman(std::span<const double> a, std::span<const double> b);

enum class Metric { spearman, pearson };
const char* metric_name(Metric m);
double correlation(Metric m, std::span<const double> a, std::span<const double> b);

// Seeded shuffle, then contiguous split; fold sizes differ by at most one.
struct FoldPlan {
    int k = 3;
    std::uint64_t seed = 0;
    std::vector<int> assignments;  // per-item fold index in [0, k)

    std::vector<int> indices_of_fold(int fold) const;
    std::vector<int> indices_not_in_fold(int fold) const;
};

FoldPlan make_folds(int n, int k, std::uint64_t seed);

// Two-sided approximate randomization test on the absolute metric
// difference of two prediction systems against shared gold values. Each
// iteration swaps paired predictions independently with probability 0.5;
// the p-value uses add-one smoothing: (1 + #{d' >= d}) / (1 + iterations).
double approx_randomization_test(std::span<const double> gold, std::span<const double> preds_a,
                                 std::span<const double> preds_b, Metric metric,
                                 int iterations = 10000, std::uint64_t seed = 0);

struct FoldScore {
    double spearman = 0.0;
    double pearson = 0.0;
    int n = 0;
};

struct EvalReport {
    std::string task;
    std::string model;
    std::string variable;
    int n = 0;
    double spearman = 0.0;
    double pearson = 0.0;
    std::vector<FoldScore> per_fold;
    std::optional<double> p_value;  // vs a baseline system, when computed
    nlohmann::ordered_json config = nlohmann::ordered_json::object();

    nlohmann::ordered_json to_json() const;
    std::string to_text_table() const;
};

}  // namespace normpred
