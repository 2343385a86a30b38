// pybind11 bindings for the normpred core. Reports cross the boundary as
// JSON strings; the python package parses them into dicts.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <variant>

#include "normpred/alignment.hpp"
#include "normpred/embedding.hpp"
#include "normpred/errors.hpp"
#include "normpred/ffn.hpp"
#include "normpred/norms.hpp"
#include "normpred/pipelines.hpp"
#include "normpred/rng.hpp"
#include "normpred/stats.hpp"
#include "normpred/svr.hpp"

namespace py = pybind11;
using namespace normpred;

namespace {

Variable variable_arg(const std::string& name) {
    const auto v = variable_from_name(name);
    if (!v) throw DataError("unknown variable '" + name + "'");
    return *v;
}

Metric metric_arg(const std::string& name) {
    if (name == "spearman") return Metric::spearman;
    if (name == "pearson") return Metric::pearson;
    throw DataError("unknown metric '" + name + "'");
}

ModelKind model_arg(const std::string& name) {
    if (name == "svr") return ModelKind::svr;
    if (name == "ffn") return ModelKind::ffn;
    throw DataError("unknown model '" + name + "'");
}

ExperimentOptions options_from_args(const std::string& variable, const std::string& model,
                                    std::uint64_t seed, int folds, int jobs,
                                    std::optional<SvrHyperParams> svr,
                                    std::optional<FfnHyperParams> ffn, bool dropout_overridden,
                                    const std::string& collision) {
    ExperimentOptions opts;
    opts.variable = variable_arg(variable);
    opts.model = model_arg(model);
    if (svr) opts.svr = *svr;
    if (ffn) opts.ffn = *ffn;
    opts.ffn_dropout_overridden = dropout_overridden;
    opts.folds = folds;
    opts.seed = seed;
    opts.jobs = jobs;
    opts.collision =
        collision == "median" ? CollisionAveraging::median : CollisionAveraging::mean;
    return opts;
}

EmbeddingSpace space_from_arrays(const std::vector<std::string>& words,
                                 const Eigen::MatrixXd& matrix, const std::string& lang,
                                 bool lowercase) {
    if (static_cast<Eigen::Index>(words.size()) != matrix.rows()) {
        throw DataError("words/matrix row count mismatch");
    }
    EmbeddingSpace space;
    space.lang = lang;
    space.dim = static_cast<int>(matrix.cols());
    space.lowercased = lowercase;
    space.vocab = words;
    space.matrix = matrix;
    space.rebuild_index();
    return space;
}

NormLexicon lexicon_from_values(const std::vector<std::string>& words,
                                const std::vector<double>& values, const std::string& variable,
                                std::pair<double, double> scale, const std::string& lang) {
    if (words.size() != values.size()) throw DataError("words/values length mismatch");
    const Variable var = variable_arg(variable);
    NormLexicon lex;
    lex.lang = lang;
    lex.scale_min = scale.first;
    lex.scale_max = scale.second;
    for (std::size_t i = 0; i < words.size(); ++i) {
        NormEntry e;
        e.word = words[i];
        e.set(var, values[i]);
        lex.entries.push_back(std::move(e));
    }
    lex.rebuild_index();
    return lex;
}

py::dict entry_to_dict(const NormEntry& e) {
    py::dict d;
    d["word"] = e.word;
    for (Variable v : {Variable::conc_mean, Variable::conc_std, Variable::imag_mean,
                       Variable::imag_std}) {
        if (e.has(v)) d[variable_name(v)] = e.get(v);
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Concreteness/imageability norm prediction over word embeddings";

    py::register_exception<DataError>(m, "DataError");

    // ---- embeddings ----
    py::class_<EmbeddingSpace>(m, "EmbeddingSpace")
        .def_readonly("lang", &EmbeddingSpace::lang)
        .def_readonly("dim", &EmbeddingSpace::dim)
        .def_readonly("lowercased", &EmbeddingSpace::lowercased)
        .def_readonly("words", &EmbeddingSpace::vocab)
        .def_readonly("matrix", &EmbeddingSpace::matrix)
        .def("__len__", &EmbeddingSpace::size)
        .def("row_of",
             [](const EmbeddingSpace& s, const std::string& w) -> std::optional<int> {
                 return s.row_of(w);
             })
        .def("vector",
             [](const EmbeddingSpace& s, const std::string& w) -> Eigen::VectorXd {
                 const auto row = s.row_of(w);
                 if (!row) throw DataError("word not in vocabulary: " + w);
                 return s.matrix.row(*row);
             })
        .def("save", [](const EmbeddingSpace& s, const std::string& path) {
            save_vec_file(s, path);
        });

    m.def("make_space", &space_from_arrays, py::arg("words"), py::arg("matrix"),
          py::arg("lang") = "", py::arg("lowercase") = true);
    m.def(
        "parse_vec_file",
        [](const std::string& path, long long max_words, bool lowercase,
           const std::string& lang) {
            return parse_vec_file(path, max_words, lowercase, lang);
        },
        py::arg("path"), py::arg("max_words") = 0, py::arg("lowercase") = true,
        py::arg("lang") = "");

    py::class_<Standardizer>(m, "Standardizer")
        .def_readonly("means", &Standardizer::means)
        .def_readonly("stds", &Standardizer::stds);
    m.def("fit_standardizer",
          py::overload_cast<const EmbeddingSpace&>(&fit_standardizer));
    m.def("fit_standardizer_matrix",
          py::overload_cast<const Eigen::MatrixXd&>(&fit_standardizer));
    m.def("standardize", py::overload_cast<const EmbeddingSpace&, const Standardizer&>(
                             &standardize));
    m.def("standardize_matrix", &standardize_matrix);

    // ---- lexicons ----
    py::class_<NormLexicon>(m, "NormLexicon")
        .def_readonly("lang", &NormLexicon::lang)
        .def_readonly("scale_min", &NormLexicon::scale_min)
        .def_readonly("scale_max", &NormLexicon::scale_max)
        .def("__len__", &NormLexicon::size)
        .def("words",
             [](const NormLexicon& lex) {
                 std::vector<std::string> out;
                 out.reserve(lex.entries.size());
                 for (const NormEntry& e : lex.entries) out.push_back(e.word);
                 return out;
             })
        .def("entries",
             [](const NormLexicon& lex) {
                 py::list out;
                 for (const NormEntry& e : lex.entries) out.append(entry_to_dict(e));
                 return out;
             })
        .def("get",
             [](const NormLexicon& lex, const std::string& word) -> py::object {
                 const NormEntry* e = lex.find(word);
                 if (e == nullptr) return py::none();
                 return entry_to_dict(*e);
             })
        .def("save", [](const NormLexicon& lex, const std::string& path) {
            save_lexicon(lex, path);
        });

    m.def("make_lexicon", &lexicon_from_values, py::arg("words"), py::arg("values"),
          py::arg("variable") = "conc_mean",
          py::arg("scale") = std::pair<double, double>{1.0, 5.0}, py::arg("lang") = "");
    m.def(
        "load_lexicon",
        [](const std::string& path, std::pair<double, double> scale, const std::string& lang,
           bool lowercase, const std::string& word_col, const std::string& conc_mean_col,
           const std::string& conc_std_col, const std::string& imag_mean_col,
           const std::string& imag_std_col) {
            LexiconSchema schema;
            schema.word = word_col;
            schema.conc_mean = conc_mean_col;
            schema.conc_std = conc_std_col;
            schema.imag_mean = imag_mean_col;
            schema.imag_std = imag_std_col;
            return load_lexicon(path, schema, scale, lang, lowercase);
        },
        py::arg("path"), py::arg("scale") = std::pair<double, double>{1.0, 5.0},
        py::arg("lang") = "", py::arg("lowercase") = true, py::arg("word_col") = "word",
        py::arg("conc_mean_col") = "conc_mean", py::arg("conc_std_col") = "conc_std",
        py::arg("imag_mean_col") = "imag_mean", py::arg("imag_std_col") = "imag_std");
    m.def("downsample", &downsample, py::arg("lexicon"), py::arg("n"), py::arg("seed"));

    py::class_<TransferDictionary>(m, "TransferDictionary")
        .def_readonly("pairs", &TransferDictionary::pairs)
        .def("__len__", &TransferDictionary::size);
    m.def("load_transfer_dictionary", &load_transfer_dictionary);
    m.def("make_transfer_dictionary",
          [](const std::vector<std::pair<std::string, std::string>>& pairs) {
              TransferDictionary d;
              d.pairs = pairs;
              return d;
          });

    // ---- alignment ----
    py::class_<BilingualPairs>(m, "BilingualPairs")
        .def_readonly("pairs", &BilingualPairs::pairs)
        .def("__len__", &BilingualPairs::size);
    m.def("load_pairs", &load_pairs);
    m.def("make_pairs", [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        BilingualPairs p;
        p.pairs = pairs;
        return p;
    });

    py::class_<AlignmentTransform>(m, "AlignmentTransform")
        .def_readonly("matrix", &AlignmentTransform::W)
        .def_readonly("source_lang", &AlignmentTransform::source_lang)
        .def_readonly("target_lang", &AlignmentTransform::target_lang)
        .def_readonly("pairs_used", &AlignmentTransform::pairs_used)
        .def("inverse", &AlignmentTransform::inverse)
        .def("save", [](const AlignmentTransform& t, const std::string& path) {
            save_transform(t, path);
        });
    m.def(
        "learn_procrustes",
        [](const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualPairs& pairs) {
            return learn_procrustes(src, tgt, pairs);
        },
        py::arg("source"), py::arg("target"), py::arg("pairs"));
    m.def("apply_transform", &apply_transform);
    m.def("load_transform", &load_transform);

    // ---- SVR ----
    py::class_<SvrHyperParams>(m, "SvrParams")
        .def(py::init([](double c, double gamma, double epsilon, const std::string& kernel,
                         double tol, long long max_passes) {
                 SvrHyperParams hp;
                 hp.c = c;
                 hp.gamma = gamma;
                 hp.epsilon = epsilon;
                 hp.tol = tol;
                 hp.max_passes = max_passes;
                 if (kernel == "linear") {
                     hp.kernel = Kernel::linear;
                 } else if (kernel == "rbf") {
                     hp.kernel = Kernel::rbf;
                 } else {
                     throw DataError("unknown kernel '" + kernel + "'");
                 }
                 return hp;
             }),
             py::arg("c") = 1.0, py::arg("gamma") = 0.003, py::arg("epsilon") = 0.1,
             py::arg("kernel") = "rbf", py::arg("tol") = 1e-3, py::arg("max_passes") = 0)
        .def_readwrite("c", &SvrHyperParams::c)
        .def_readwrite("gamma", &SvrHyperParams::gamma)
        .def_readwrite("epsilon", &SvrHyperParams::epsilon)
        .def_readwrite("tol", &SvrHyperParams::tol)
        .def_readwrite("max_passes", &SvrHyperParams::max_passes);

    py::class_<SvrModel>(m, "SvrModel")
        .def_property_readonly("bias", [](const SvrModel& s) { return s.bias; })
        .def_property_readonly("n_support", &SvrModel::n_support)
        .def_readonly("dual_coefs", &SvrModel::dual_coefs)
        .def_readonly("support_vectors", &SvrModel::support_vectors)
        .def("predict", [](const SvrModel& s, const Eigen::MatrixXd& X) {
            return svr_predict(s, X);
        })
        .def("linear_weights", [](const SvrModel& s) { return svr_linear_weights(s); })
        .def("save", [](const SvrModel& s, const std::string& path,
                        const std::string& variable) { save_svr_model(s, variable, path); },
             py::arg("path"), py::arg("variable") = "");
    m.def(
        "svr_train",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrHyperParams& hp,
           std::uint64_t seed) { return svr_train(X, y, hp, seed); },
        py::arg("X"), py::arg("y"), py::arg("params") = SvrHyperParams{}, py::arg("seed") = 0);
    m.def("load_svr_model", [](const std::string& path) { return load_svr_model(path); });

    // ---- FFN ----
    py::class_<FfnHyperParams>(m, "FfnParams")
        .def(py::init([](std::vector<int> hidden_sizes, double dropout_p, int epochs,
                         int batch_size, double learning_rate, const std::string& optimizer) {
                 FfnHyperParams hp;
                 hp.hidden_sizes = std::move(hidden_sizes);
                 hp.dropout_p = dropout_p;
                 hp.epochs = epochs;
                 hp.batch_size = batch_size;
                 hp.learning_rate = learning_rate;
                 hp.optimizer = optimizer == "sgd" ? FfnOptimizer::sgd : FfnOptimizer::adam;
                 return hp;
             }),
             py::arg("hidden_sizes") = std::vector<int>{128, 32}, py::arg("dropout_p") = 0.5,
             py::arg("epochs") = 50, py::arg("batch_size") = 32,
             py::arg("learning_rate") = 1e-3, py::arg("optimizer") = "adam")
        .def_readwrite("hidden_sizes", &FfnHyperParams::hidden_sizes)
        .def_readwrite("dropout_p", &FfnHyperParams::dropout_p)
        .def_readwrite("epochs", &FfnHyperParams::epochs)
        .def_readwrite("batch_size", &FfnHyperParams::batch_size)
        .def_readwrite("learning_rate", &FfnHyperParams::learning_rate);

    py::class_<FfnModel>(m, "FfnModel")
        .def_readonly("final_train_mse", &FfnModel::final_train_mse)
        .def("predict", [](const FfnModel& f, const Eigen::MatrixXd& X) {
            return ffn_predict(f, X);
        })
        .def("save", [](const FfnModel& f, const std::string& path,
                        const std::string& variable) { save_ffn_model(f, variable, path); },
             py::arg("path"), py::arg("variable") = "");
    m.def(
        "ffn_train",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FfnHyperParams& hp,
           std::uint64_t seed) {
            FfnModel model = ffn_init(static_cast<int>(X.cols()), hp, mix_seed(seed, 7));
            return ffn_train(std::move(model), X, y, mix_seed(seed, 11));
        },
        py::arg("X"), py::arg("y"), py::arg("params") = FfnHyperParams{}, py::arg("seed") = 0);
    m.def("load_ffn_model", [](const std::string& path) { return load_ffn_model(path); });

    // ---- statistics ----
    m.def("spearman", [](const std::vector<double>& a, const std::vector<double>& b) {
        return spearman(a, b);
    });
    m.def("pearson", [](const std::vector<double>& a, const std::vector<double>& b) {
        return pearson(a, b);
    });
    m.def(
        "make_folds",
        [](int n, int k, std::uint64_t seed) { return make_folds(n, k, seed).assignments; },
        py::arg("n"), py::arg("k") = 3, py::arg("seed") = 0);
    m.def(
        "approx_randomization_test",
        [](const std::vector<double>& gold, const std::vector<double>& a,
           const std::vector<double>& b, const std::string& metric, int iterations,
           std::uint64_t seed) {
            return approx_randomization_test(gold, a, b, metric_arg(metric), iterations, seed);
        },
        py::arg("gold"), py::arg("preds_a"), py::arg("preds_b"),
        py::arg("metric") = "spearman", py::arg("iterations") = 10000, py::arg("seed") = 0);

    // ---- pipelines (reports cross as JSON strings) ----
    m.def(
        "run_in_language_cv_json",
        [](const EmbeddingSpace& space, const NormLexicon& lexicon, const std::string& variable,
           const std::string& model, std::uint64_t seed, int folds, int jobs,
           std::optional<SvrHyperParams> svr, std::optional<FfnHyperParams> ffn,
           bool dropout_overridden) {
            const ExperimentOptions opts =
                options_from_args(variable, model, seed, folds, jobs, std::move(svr),
                                  std::move(ffn), dropout_overridden, "mean");
            const CvResult res = run_in_language_cv(space, lexicon, opts);
            std::vector<double> preds(res.pooled_predictions.data(),
                                      res.pooled_predictions.data() +
                                          res.pooled_predictions.size());
            return py::make_tuple(res.report.to_json().dump(), res.words, preds);
        },
        py::arg("space"), py::arg("lexicon"), py::arg("variable") = "conc_mean",
        py::arg("model") = "svr", py::arg("seed") = 42, py::arg("folds") = 3,
        py::arg("jobs") = 1, py::arg("svr_params") = py::none(),
        py::arg("ffn_params") = py::none(), py::arg("dropout_overridden") = false);

    m.def(
        "run_embedding_transfer_json",
        [](const EmbeddingSpace& src_space, const NormLexicon& src_lexicon,
           const EmbeddingSpace& tgt_space, std::optional<AlignmentTransform> transform,
           std::optional<NormLexicon> tgt_gold, const std::string& variable,
           const std::string& model, std::uint64_t seed, std::optional<SvrHyperParams> svr,
           std::optional<FfnHyperParams> ffn, bool dropout_overridden) {
            const ExperimentOptions opts =
                options_from_args(variable, model, seed, 3, 1, std::move(svr), std::move(ffn),
                                  dropout_overridden, "mean");
            const TransferResult res =
                run_embedding_transfer(src_space, src_lexicon, tgt_space, transform,
                                       tgt_gold ? &*tgt_gold : nullptr, opts);
            py::object report = py::none();
            if (res.report) report = py::str(res.report->to_json().dump());
            py::object model_obj = py::none();
            if (res.model) {
                if (std::holds_alternative<SvrModel>(*res.model)) {
                    model_obj = py::cast(std::get<SvrModel>(*res.model));
                } else {
                    model_obj = py::cast(std::get<FfnModel>(*res.model));
                }
            }
            return py::make_tuple(report, res.predicted, model_obj);
        },
        py::arg("source_space"), py::arg("source_lexicon"), py::arg("target_space"),
        py::arg("transform") = py::none(), py::arg("target_gold") = py::none(),
        py::arg("variable") = "conc_mean", py::arg("model") = "svr", py::arg("seed") = 42,
        py::arg("svr_params") = py::none(), py::arg("ffn_params") = py::none(),
        py::arg("dropout_overridden") = false);

    m.def(
        "run_dictionary_transfer_json",
        [](const NormLexicon& src_lexicon, const TransferDictionary& dict,
           std::optional<NormLexicon> tgt_gold, const std::string& variable,
           const std::string& collision, std::uint64_t seed) {
            const ExperimentOptions opts = options_from_args(
                variable, "svr", seed, 3, 1, std::nullopt, std::nullopt, false, collision);
            const TransferResult res =
                run_dictionary_transfer(src_lexicon, dict, tgt_gold ? &*tgt_gold : nullptr, opts);
            py::object report = py::none();
            if (res.report) report = py::str(res.report->to_json().dump());
            return py::make_tuple(report, res.predicted);
        },
        py::arg("source_lexicon"), py::arg("dictionary"), py::arg("target_gold") = py::none(),
        py::arg("variable") = "conc_mean", py::arg("collision") = "mean", py::arg("seed") = 42);

    m.def(
        "run_coefficient_analysis",
        [](const EmbeddingSpace& space, const NormLexicon& lexicon, const std::string& variable,
           std::uint64_t seed, std::optional<SvrHyperParams> svr) {
            const ExperimentOptions opts = options_from_args(
                variable, "svr", seed, 3, 1, std::move(svr), std::nullopt, false, "mean");
            const CoefficientProfile p = run_coefficient_analysis(space, lexicon, opts);
            return py::make_tuple(p.sorted_mass, p.dims_for_50pct, p.dims_for_80pct);
        },
        py::arg("space"), py::arg("lexicon"), py::arg("variable") = "conc_mean",
        py::arg("seed") = 42, py::arg("svr_params") = py::none());

    m.def(
        "predict_lexicon",
        [](py::object model, const EmbeddingSpace& tgt_space, const std::string& variable)
            -> NormLexicon {
            TrainedModel trained;
            if (py::isinstance<SvrModel>(model)) {
                trained = model.cast<SvrModel>();
            } else if (py::isinstance<FfnModel>(model)) {
                trained = model.cast<FfnModel>();
            } else {
                throw DataError("model must be an SvrModel or FfnModel");
            }
            return predict_lexicon(trained, tgt_space, variable_arg(variable));
        },
        py::arg("model"), py::arg("target_space"), py::arg("variable") = "conc_mean");
}
