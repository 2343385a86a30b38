#include "normpred/pipelines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <thread>

#include "normpred/errors.hpp"
#include "normpred/rng.hpp"

namespace normpred {

const char* model_kind_name(ModelKind m) {
    return m == ModelKind::svr ? "svr" : "ffn";
}

Eigen::VectorXd trained_predict(const TrainedModel& model, const Eigen::MatrixXd& X) {
    if (std::holds_alternative<SvrModel>(model)) {
        return svr_predict(std::get<SvrModel>(model), X);
    }
    return ffn_predict(std::get<FfnModel>(model), X);
}

namespace {

// Rows of the intersection that actually carry the requested variable.
struct VariableSubset {
    Eigen::MatrixXd features;  // raw (unstandardized) rows
    Eigen::VectorXd targets;
    std::vector<std::string> words;
};

VariableSubset select_variable(const IntersectResult& inter, Variable variable) {
    const Eigen::VectorXd& raw = inter.targets(variable);
    std::vector<int> keep;
    for (int i = 0; i < inter.size(); ++i) {
        if (std::isfinite(raw[i])) keep.push_back(i);
    }
    if (keep.empty()) {
        throw DataError(std::string("no lexicon entry carries variable ") +
                        variable_name(variable));
    }
    VariableSubset out;
    out.features.resize(static_cast<int>(keep.size()), inter.features.cols());
    out.targets.resize(static_cast<int>(keep.size()));
    out.words.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.features.row(static_cast<int>(r)) = inter.features.row(keep[r]);
        out.targets[static_cast<int>(r)] = raw[keep[r]];
        out.words.push_back(inter.words[keep[r]]);
    }
    return out;
}

double effective_dropout(const ExperimentOptions& opts, bool cross_lingual) {
    if (opts.ffn_dropout_overridden) return opts.ffn.dropout_p;
    return cross_lingual ? 0.8 : 0.5;
}

TrainedModel train_model(const ExperimentOptions& opts, bool cross_lingual,
                         const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::uint64_t seed) {
    if (opts.model == ModelKind::svr) {
        return svr_train(X, y, opts.svr, seed);
    }
    FfnHyperParams hp = opts.ffn;
    hp.dropout_p = effective_dropout(opts, cross_lingual);
    FfnModel model = ffn_init(static_cast<int>(X.cols()), hp, mix_seed(seed, 7));
    return ffn_train(std::move(model), X, y, mix_seed(seed, 11));
}

nlohmann::ordered_json svr_config_json(const SvrHyperParams& hp) {
    return {{"kernel", kernel_name(hp.kernel)}, {"c", hp.c},     {"gamma", hp.gamma},
            {"epsilon", hp.epsilon},            {"tol", hp.tol}, {"max_passes", hp.max_passes}};
}

nlohmann::ordered_json ffn_config_json(const FfnHyperParams& hp, double dropout) {
    return {{"hidden_sizes", hp.hidden_sizes},
            {"dropout_p", dropout},
            {"epochs", hp.epochs},
            {"batch_size", hp.batch_size},
            {"learning_rate", hp.learning_rate},
            {"optimizer", hp.optimizer == FfnOptimizer::adam ? "adam" : "sgd"}};
}

nlohmann::ordered_json base_config(const ExperimentOptions& opts, bool cross_lingual) {
    nlohmann::ordered_json cfg;
    cfg["seed"] = opts.seed;
    cfg["folds"] = opts.folds;
    cfg["svr"] = svr_config_json(opts.svr);
    cfg["ffn"] = ffn_config_json(opts.ffn, effective_dropout(opts, cross_lingual));
    return cfg;
}

}  // namespace

CvResult run_in_language_cv(const EmbeddingSpace& space, const NormLexicon& lexicon,
                            const ExperimentOptions& opts) {
    IntersectResult inter = intersect(space, lexicon);
    VariableSubset data = select_variable(inter, opts.variable);
    const int n = static_cast<int>(data.targets.size());
    if (n < opts.folds) {
        throw DataError("in-language CV: only " + std::to_string(n) +
                        " usable words for variable " + variable_name(opts.variable));
    }

    const Standardizer scaler = fit_standardizer(space);
    const Eigen::MatrixXd X = standardize_matrix(data.features, scaler);
    const FoldPlan plan = make_folds(n, opts.folds, opts.seed);

    Eigen::VectorXd pooled(n);
    std::vector<FoldScore> fold_scores(opts.folds);

    auto run_fold = [&](int f) {
        const std::vector<int> train_idx = plan.indices_not_in_fold(f);
        const std::vector<int> test_idx = plan.indices_of_fold(f);
        Eigen::MatrixXd xtr(static_cast<int>(train_idx.size()), X.cols());
        Eigen::VectorXd ytr(static_cast<int>(train_idx.size()));
        for (std::size_t r = 0; r < train_idx.size(); ++r) {
            xtr.row(static_cast<int>(r)) = X.row(train_idx[r]);
            ytr[static_cast<int>(r)] = data.targets[train_idx[r]];
        }
        Eigen::MatrixXd xte(static_cast<int>(test_idx.size()), X.cols());
        for (std::size_t r = 0; r < test_idx.size(); ++r) {
            xte.row(static_cast<int>(r)) = X.row(test_idx[r]);
        }

        const TrainedModel model =
            train_model(opts, /*cross_lingual=*/false, xtr, ytr, mix_seed(opts.seed, 100 + f));
        const Eigen::VectorXd preds = trained_predict(model, xte);

        std::vector<double> gold_f, pred_f;
        for (std::size_t r = 0; r < test_idx.size(); ++r) {
            pooled[test_idx[r]] = preds[static_cast<int>(r)];
            gold_f.push_back(data.targets[test_idx[r]]);
            pred_f.push_back(preds[static_cast<int>(r)]);
        }
        FoldScore score;
        score.n = static_cast<int>(test_idx.size());
        score.spearman = spearman(gold_f, pred_f);
        score.pearson = pearson(gold_f, pred_f);
        fold_scores[f] = score;
    };

    if (opts.jobs > 1) {
        std::vector<std::thread> workers;
        for (int f = 0; f < opts.folds; ++f) {
            workers.emplace_back(run_fold, f);
            if (static_cast<int>(workers.size()) == opts.jobs || f == opts.folds - 1) {
                for (auto& w : workers) w.join();
                workers.clear();
            }
        }
    } else {
        for (int f = 0; f < opts.folds; ++f) run_fold(f);
    }

    std::vector<double> gold(data.targets.data(), data.targets.data() + n);
    std::vector<double> preds(pooled.data(), pooled.data() + n);

    CvResult res;
    res.words = data.words;
    res.pooled_predictions = pooled;
    res.gold = data.targets;
    res.dropped_words = inter.dropped;
    res.report.task = "in_language_cv";
    res.report.model = model_kind_name(opts.model);
    res.report.variable = variable_name(opts.variable);
    res.report.n = n;
    res.report.spearman = spearman(gold, preds);
    res.report.pearson = pearson(gold, preds);
    res.report.per_fold = fold_scores;
    res.report.config = base_config(opts, false);
    res.report.config["dropped_words"] = inter.dropped;
    res.report.config["lang"] = space.lang;
    return res;
}

TransferResult run_embedding_transfer(const EmbeddingSpace& src_space,
                                      const NormLexicon& src_lexicon,
                                      const EmbeddingSpace& tgt_space,
                                      const std::optional<AlignmentTransform>& transform,
                                      const NormLexicon* tgt_gold, const ExperimentOptions& opts) {
    const EmbeddingSpace aligned = transform ? apply_transform(src_space, *transform) : src_space;
    if (aligned.dim != tgt_space.dim) {
        throw DataError("embedding transfer: source and target dimensionality differ (" +
                        std::to_string(aligned.dim) + " vs " + std::to_string(tgt_space.dim) +
                        "); supply an alignment transform");
    }

    IntersectResult inter = intersect(aligned, src_lexicon);
    VariableSubset data = select_variable(inter, opts.variable);

    // each space is standardized with its own statistics
    const Standardizer src_scaler = fit_standardizer(aligned);
    const Standardizer tgt_scaler = fit_standardizer(tgt_space);

    const Eigen::MatrixXd xtr = standardize_matrix(data.features, src_scaler);
    const TrainedModel model =
        train_model(opts, /*cross_lingual=*/true, xtr, data.targets, mix_seed(opts.seed, 200));

    const Eigen::MatrixXd tgt_features = standardize_matrix(tgt_space.matrix, tgt_scaler);
    const Eigen::VectorXd preds = trained_predict(model, tgt_features);

    TransferResult res;
    res.model = model;
    res.predicted.lang = tgt_space.lang;
    res.predicted.lowercased = tgt_space.lowercased;
    res.predicted.scale_min = std::min(src_lexicon.scale_min, preds.minCoeff());
    res.predicted.scale_max = std::max(src_lexicon.scale_max, preds.maxCoeff());
    res.predicted.entries.reserve(tgt_space.size());
    for (int i = 0; i < tgt_space.size(); ++i) {
        NormEntry e;
        e.word = tgt_space.vocab[i];
        e.set(opts.variable, preds[i]);
        res.predicted.entries.push_back(std::move(e));
    }
    res.predicted.rebuild_index();

    if (tgt_gold != nullptr) {
        std::vector<double> gold, pred;
        for (const NormEntry& e : tgt_gold->entries) {
            if (!e.has(opts.variable)) continue;
            const auto row = tgt_space.row_of(e.word);
            if (!row) continue;
            gold.push_back(e.get(opts.variable));
            pred.push_back(preds[*row]);
        }
        if (gold.size() < 2) {
            throw DataError("embedding transfer: gold lexicon shares too few words with the "
                            "target space");
        }
        EvalReport rep;
        rep.task = "transfer_embed";
        rep.model = model_kind_name(opts.model);
        rep.variable = variable_name(opts.variable);
        rep.n = static_cast<int>(gold.size());
        rep.spearman = spearman(gold, pred);
        rep.pearson = pearson(gold, pred);
        rep.config = base_config(opts, true);
        rep.config["source_lang"] = src_space.lang;
        rep.config["target_lang"] = tgt_space.lang;
        rep.config["train_n"] = static_cast<int>(data.targets.size());
        rep.config["identity_transform"] = !transform.has_value();
        res.report = rep;
    }
    return res;
}

TransferResult run_dictionary_transfer(const NormLexicon& src_lexicon,
                                       const TransferDictionary& dict,
                                       const NormLexicon* tgt_gold,
                                       const ExperimentOptions& opts) {
    constexpr Variable kVars[] = {Variable::conc_mean, Variable::conc_std, Variable::imag_mean,
                                  Variable::imag_std};
    // target word -> per-variable transferred ratings (order-independent:
    // the map is sorted and collision averaging is symmetric)
    std::map<std::string, std::array<std::vector<double>, 4>> contributions;
    for (const auto& [src_word, tgt_word] : dict.pairs) {
        const NormEntry* entry = src_lexicon.find(src_word);
        if (entry == nullptr) continue;
        auto& slot = contributions[tgt_word];
        for (int k = 0; k < 4; ++k) {
            if (entry->has(kVars[k])) slot[k].push_back(entry->get(kVars[k]));
        }
    }
    if (contributions.empty()) {
        throw DataError("dictionary transfer produced an empty lexicon (no dictionary source "
                        "word appears in the source lexicon)");
    }

    auto combine = [&](std::vector<double>& values) {
        if (opts.collision == CollisionAveraging::mean) {
            double sum = 0.0;
            for (double v : values) sum += v;
            return sum / static_cast<double>(values.size());
        }
        std::sort(values.begin(), values.end());
        const std::size_t mid = values.size() / 2;
        return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    };

    TransferResult res;
    res.predicted.lang = tgt_gold != nullptr ? tgt_gold->lang : "";
    res.predicted.scale_min = src_lexicon.scale_min;
    res.predicted.scale_max = src_lexicon.scale_max;
    res.predicted.lowercased = src_lexicon.lowercased;
    for (auto& [word, slots] : contributions) {
        NormEntry e;
        e.word = word;
        for (int k = 0; k < 4; ++k) {
            if (!slots[k].empty()) e.set(kVars[k], combine(slots[k]));
        }
        if (e.has_any()) res.predicted.entries.push_back(std::move(e));
    }
    res.predicted.rebuild_index();

    if (tgt_gold != nullptr) {
        std::vector<double> gold, pred;
        for (const NormEntry& e : tgt_gold->entries) {
            if (!e.has(opts.variable)) continue;
            const NormEntry* p = res.predicted.find(e.word);
            if (p == nullptr || !p->has(opts.variable)) continue;
            gold.push_back(e.get(opts.variable));
            pred.push_back(p->get(opts.variable));
        }
        if (gold.size() < 2) {
            throw DataError("dictionary transfer: too few predicted words overlap the gold "
                            "lexicon");
        }
        EvalReport rep;
        rep.task = "transfer_dict";
        rep.model = "dic";
        rep.variable = variable_name(opts.variable);
        rep.n = static_cast<int>(gold.size());
        rep.spearman = spearman(gold, pred);
        rep.pearson = pearson(gold, pred);
        rep.config["seed"] = opts.seed;
        rep.config["collision_averaging"] =
            opts.collision == CollisionAveraging::mean ? "mean" : "median";
        rep.config["dictionary_pairs"] = dict.size();
        rep.config["predicted_words"] = res.predicted.size();
        res.report = rep;
    }
    return res;
}

CoefficientProfile coefficient_profile_from_weights(const Eigen::VectorXd& weights) {
    Eigen::VectorXd w = weights.cwiseAbs();
    const double total = w.sum();
    if (total <= 0.0) {
        throw DataError("coefficient analysis: all linear weights are zero");
    }
    w /= total;
    std::sort(w.data(), w.data() + w.size(), std::greater<double>());

    CoefficientProfile profile;
    profile.sorted_mass.resize(w.size());
    double cum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        cum += w[i];
        profile.sorted_mass[i] = cum;
    }
    auto dims_for = [&](double threshold) {
        for (Eigen::Index i = 0; i < profile.sorted_mass.size(); ++i) {
            if (profile.sorted_mass[i] >= threshold - 1e-9) return static_cast<int>(i) + 1;
        }
        return static_cast<int>(profile.sorted_mass.size());
    };
    profile.dims_for_50pct = dims_for(0.5);
    profile.dims_for_80pct = dims_for(0.8);
    return profile;
}

CoefficientProfile run_coefficient_analysis(const EmbeddingSpace& space,
                                            const NormLexicon& lexicon,
                                            const ExperimentOptions& opts) {
    IntersectResult inter = intersect(space, lexicon);
    VariableSubset data = select_variable(inter, opts.variable);

    const Standardizer scaler = fit_standardizer(space);
    const Eigen::MatrixXd X = standardize_matrix(data.features, scaler);

    SvrHyperParams hp = opts.svr;
    hp.kernel = Kernel::linear;
    const SvrModel model = svr_train(X, data.targets, hp, opts.seed);
    return coefficient_profile_from_weights(svr_linear_weights(model));
}

NormLexicon predict_lexicon(const TrainedModel& model, const EmbeddingSpace& tgt_space,
                            Variable variable, const NormLexicon* scale_source) {
    if (!is_mean_variable(variable)) {
        throw DataError("predict_lexicon supports mean variables only (std-variable transfer "
                        "correlations are too weak to publish)");
    }
    const Standardizer scaler = fit_standardizer(tgt_space);
    const Eigen::MatrixXd X = standardize_matrix(tgt_space.matrix, scaler);
    const Eigen::VectorXd preds = trained_predict(model, X);

    NormLexicon out;
    out.lang = tgt_space.lang;
    out.lowercased = tgt_space.lowercased;
    out.scale_min = preds.minCoeff();
    out.scale_max = preds.maxCoeff();
    if (scale_source != nullptr) {
        out.scale_min = std::min(out.scale_min, scale_source->scale_min);
        out.scale_max = std::max(out.scale_max, scale_source->scale_max);
    }
    out.entries.reserve(tgt_space.size());
    for (int i = 0; i < tgt_space.size(); ++i) {
        NormEntry e;
        e.word = tgt_space.vocab[i];
        e.set(variable, preds[i]);
        out.entries.push_back(std::move(e));
    }
    out.rebuild_index();
    return out;
}

}  // namespace normpred
