#include "normpred/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "normpred/errors.hpp"
#include "normpred/rng.hpp"
#include "normpred/text_io.hpp"

namespace normpred {

std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // 1-based ranks i+1 .. j+1 averaged over the tie block
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("pearson: length mismatch");
    if (a.size() < 2) throw DataError("pearson: need at least 2 samples");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        throw DataError("pearson: constant input, correlation undefined");
    }
    return cov / std::sqrt(var_a * var_b);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("spearman: length mismatch");
    const std::vector<double> ra = fractional_ranks(a);
    const std::vector<double> rb = fractional_ranks(b);
    return pearson(ra, rb);
}

const char* metric_name(Metric m) {
    return m == Metric::spearman ? "spearman" : "pearson";
}

double correlation(Metric m, std::span<const double> a, std::span<const double> b) {
    return m == Metric::spearman ? spearman(a, b) : pearson(a, b);
}

std::vector<int> FoldPlan::indices_of_fold(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> FoldPlan::indices_not_in_fold(int fold) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(static_cast<int>(i));
    }
    return out;
}

FoldPlan make_folds(int n, int k, std::uint64_t seed) {
    if (k < 1 || k > n) {
        throw DataError("make_folds: k=" + std::to_string(k) + " invalid for n=" +
                        std::to_string(n));
    }
    Rng rng(seed);
    const std::vector<std::size_t> order = rng.permutation(static_cast<std::size_t>(n));

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(n, 0);
    // first (n mod k) folds take the extra item
    const int base = n / k;
    const int extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        for (int t = 0; t < size; ++t) {
            plan.assignments[order[pos++]] = f;
        }
    }
    return plan;
}

double approx_randomization_test(std::span<const double> gold, std::span<const double> preds_a,
                                 std::span<const double> preds_b, Metric metric, int iterations,
                                 std::uint64_t seed) {
    if (gold.size() != preds_a.size() || gold.size() != preds_b.size()) {
        throw DataError("approx_randomization_test: length mismatch");
    }
    if (iterations < 1) throw DataError("approx_randomization_test: iterations must be >= 1");

    const double observed =
        std::abs(correlation(metric, gold, preds_a) - correlation(metric, gold, preds_b));

    const std::size_t n = gold.size();
    std::vector<double> swapped_a(preds_a.begin(), preds_a.end());
    std::vector<double> swapped_b(preds_b.begin(), preds_b.end());
    Rng rng(seed);
    long long at_least = 0;
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.bernoulli(0.5)) {
                swapped_a[i] = preds_b[i];
                swapped_b[i] = preds_a[i];
            } else {
                swapped_a[i] = preds_a[i];
                swapped_b[i] = preds_b[i];
            }
        }
        const double d =
            std::abs(correlation(metric, gold, swapped_a) - correlation(metric, gold, swapped_b));
        if (d >= observed) ++at_least;
    }
    return static_cast<double>(1 + at_least) / static_cast<double>(1 + iterations);
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["task"] = task;
    j["model"] = model;
    j["variable"] = variable;
    j["n"] = n;
    j["spearman"] = spearman;
    j["pearson"] = pearson;
    if (!per_fold.empty()) {
        nlohmann::ordered_json folds = nlohmann::ordered_json::array();
        for (const FoldScore& f : per_fold) {
            folds.push_back({{"spearman", f.spearman}, {"pearson", f.pearson}, {"n", f.n}});
        }
        j["per_fold"] = folds;
    }
    if (p_value) {
        j["p_value"] = *p_value;
    } else {
        j["p_value"] = nullptr;
    }
    j["config"] = config;
    return j;
}

std::string EvalReport::to_text_table() const {
    std::ostringstream out;
    out << "task=" << task << " model=" << model << " variable=" << variable << "\n";
    out << "  n=" << n << "  spearman=" << format_double(spearman)
        << "  pearson=" << format_double(pearson);
    if (p_value) out << "  p_value=" << format_double(*p_value);
    out << "\n";
    for (std::size_t f = 0; f < per_fold.size(); ++f) {
        out << "  fold " << f << ": n=" << per_fold[f].n
            << " spearman=" << format_double(per_fold[f].spearman)
            << " pearson=" << format_double(per_fold[f].pearson) << "\n";
    }
    return out.str();
}

}  // namespace normpred
