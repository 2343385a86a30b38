#include "normpred/ffn.hpp"

#include <cmath>
#include <sstream>

#include "normpred/errors.hpp"
#include "normpred/rng.hpp"
#include "normpred/text_io.hpp"

namespace normpred {

FfnModel ffn_init(int dim, const FfnHyperParams& hp, std::uint64_t seed) {
    if (dim < 1) throw DataError("ffn_init: input dim must be >= 1");
    for (int h : hp.hidden_sizes) {
        if (h < 1) throw DataError("ffn_init: hidden sizes must be positive");
    }
    if (hp.dropout_p < 0.0 || hp.dropout_p >= 1.0) {
        throw DataError("ffn_init: dropout_p must lie in [0, 1)");
    }

    FfnModel m;
    m.hp = hp;
    Rng rng(seed);
    std::vector<int> sizes;
    sizes.push_back(dim);
    for (int h : hp.hidden_sizes) sizes.push_back(h);
    sizes.push_back(1);

    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_in, fan_out);
        for (int i = 0; i < fan_in; ++i) {
            for (int j = 0; j < fan_out; ++j) {
                w(i, j) = rng.uniform(-limit, limit);
            }
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

std::vector<Eigen::MatrixXd> draw_dropout_masks(const FfnModel& m, int batch_rows,
                                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Eigen::MatrixXd> masks;
    const double keep = 1.0 - m.hp.dropout_p;
    for (std::size_t l = 0; l + 1 < m.weights.size(); ++l) {
        const int units = static_cast<int>(m.weights[l].cols());
        Eigen::MatrixXd mask(batch_rows, units);
        for (int r = 0; r < batch_rows; ++r) {
            for (int u = 0; u < units; ++u) {
                mask(r, u) = rng.uniform() < keep ? 1.0 : 0.0;
            }
        }
        masks.push_back(std::move(mask));
    }
    return masks;
}

namespace {

struct ForwardCache {
    // pre[l]: batch x units pre-activation of hidden layer l; post[l] is the
    // activation after ReLU and (train mode) mask scaling.
    std::vector<Eigen::MatrixXd> pre;
    std::vector<Eigen::MatrixXd> post;
    Eigen::VectorXd output;
};

ForwardCache forward_pass(const FfnModel& m, const Eigen::MatrixXd& X,
                          const std::vector<Eigen::MatrixXd>* masks) {
    const std::size_t n_hidden = m.weights.size() - 1;
    const double inv_keep = 1.0 / (1.0 - m.hp.dropout_p);
    ForwardCache cache;
    Eigen::MatrixXd h = X;
    for (std::size_t l = 0; l < n_hidden; ++l) {
        Eigen::MatrixXd z = (h * m.weights[l]).rowwise() + m.biases[l].transpose();
        cache.pre.push_back(z);
        Eigen::MatrixXd act = z.cwiseMax(0.0);
        if (masks != nullptr) {
            act.array() *= (*masks)[l].array() * inv_keep;
        }
        cache.post.push_back(act);
        h = cache.post.back();
    }
    cache.output =
        (h * m.weights.back()).col(0) + Eigen::VectorXd::Constant(X.rows(), m.biases.back()[0]);
    return cache;
}

}  // namespace

Eigen::VectorXd ffn_forward_train(const FfnModel& m, const Eigen::MatrixXd& X,
                                  const std::vector<Eigen::MatrixXd>& masks) {
    if (X.cols() != m.input_dim()) throw DataError("ffn_forward: dimension mismatch");
    return forward_pass(m, X, &masks).output;
}

Eigen::VectorXd ffn_predict(const FfnModel& m, const Eigen::MatrixXd& X) {
    if (X.cols() != m.input_dim()) throw DataError("ffn_predict: dimension mismatch");
    return forward_pass(m, X, nullptr).output;
}

double ffn_forward_infer(const FfnModel& m, const Eigen::VectorXd& x) {
    return ffn_predict(m, x.transpose())[0];
}

double ffn_loss_and_gradients(const FfnModel& m, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, const std::vector<Eigen::MatrixXd>& masks,
                              FfnGradients* grads) {
    if (X.cols() != m.input_dim()) throw DataError("ffn loss: dimension mismatch");
    if (X.rows() != y.size()) throw DataError("ffn loss: X/y size mismatch");
    const std::size_t n_hidden = m.weights.size() - 1;
    const double batch = static_cast<double>(X.rows());
    const double inv_keep = 1.0 / (1.0 - m.hp.dropout_p);

    ForwardCache cache = forward_pass(m, X, &masks);
    const Eigen::VectorXd residual = cache.output - y;
    const double loss = residual.squaredNorm() / batch;

    if (grads == nullptr) return loss;
    grads->weights.assign(m.weights.size(), Eigen::MatrixXd());
    grads->biases.assign(m.biases.size(), Eigen::VectorXd());

    // d(MSE)/d(output) = 2 * residual / batch
    Eigen::VectorXd d_out = 2.0 * residual / batch;

    const Eigen::MatrixXd& last_in = n_hidden > 0 ? cache.post.back() : X;
    grads->weights.back() = last_in.transpose() * d_out;
    grads->biases.back() = Eigen::VectorXd::Constant(1, d_out.sum());

    Eigen::MatrixXd delta = d_out * m.weights.back().transpose();  // batch x h_last
    for (std::size_t l = n_hidden; l-- > 0;) {
        // back through dropout scaling, then ReLU
        delta.array() *= masks[l].array() * inv_keep;
        delta.array() *= (cache.pre[l].array() > 0.0).cast<double>();

        const Eigen::MatrixXd& layer_in = l == 0 ? X : cache.post[l - 1];
        grads->weights[l] = layer_in.transpose() * delta;
        grads->biases[l] = delta.colwise().sum().transpose();
        if (l > 0) delta = (delta * m.weights[l].transpose()).eval();
    }
    return loss;
}

FfnModel ffn_train(FfnModel model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    if (n < 1) throw DataError("ffn_train: need at least 1 row");
    if (y.size() != n) throw DataError("ffn_train: X/y size mismatch");
    if (!X.allFinite() || !y.allFinite()) throw DataError("ffn_train: non-finite inputs");

    const FfnHyperParams& hp = model.hp;
    const int batch_size = std::max(1, hp.batch_size);

    // Adam moments per tensor
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        mw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        mb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        vb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }

    Rng shuffle_rng(mix_seed(seed, 1));
    long long step = 0;
    double epoch_mse = 0.0;
    FfnGradients grads;

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffle_rng.permutation(n);
        double loss_sum = 0.0;
        long long sample_count = 0;

        for (int start = 0; start < n; start += batch_size) {
            const int rows = std::min(batch_size, n - start);
            Eigen::MatrixXd xb(rows, X.cols());
            Eigen::VectorXd yb(rows);
            for (int r = 0; r < rows; ++r) {
                xb.row(r) = X.row(static_cast<int>(order[start + r]));
                yb[r] = y[static_cast<int>(order[start + r])];
            }

            const std::vector<Eigen::MatrixXd> masks =
                draw_dropout_masks(model, rows, mix_seed(seed, 0x10000 + static_cast<std::uint64_t>(step)));
            const double loss = ffn_loss_and_gradients(model, xb, yb, masks, &grads);
            if (!std::isfinite(loss)) {
                throw DataError("ffn_train: NaN/Inf loss at epoch " + std::to_string(epoch) +
                                " (learning rate too high?)");
            }
            loss_sum += loss * rows;
            sample_count += rows;
            ++step;

            if (hp.optimizer == FfnOptimizer::sgd) {
                for (std::size_t l = 0; l < model.weights.size(); ++l) {
                    model.weights[l] -= hp.learning_rate * grads.weights[l];
                    model.biases[l] -= hp.learning_rate * grads.biases[l];
                }
            } else {
                const double t = static_cast<double>(step);
                const double bias_corr =
                    std::sqrt(1.0 - std::pow(hp.adam_beta2, t)) / (1.0 - std::pow(hp.adam_beta1, t));
                const double lr_t = hp.learning_rate * bias_corr;
                for (std::size_t l = 0; l < model.weights.size(); ++l) {
                    mw[l] = hp.adam_beta1 * mw[l] + (1.0 - hp.adam_beta1) * grads.weights[l];
                    vw[l] = hp.adam_beta2 * vw[l] +
                            (1.0 - hp.adam_beta2) * grads.weights[l].array().square().matrix();
                    model.weights[l].array() -=
                        lr_t * mw[l].array() / (vw[l].array().sqrt() + hp.adam_eps);
                    mb[l] = hp.adam_beta1 * mb[l] + (1.0 - hp.adam_beta1) * grads.biases[l];
                    vb[l] = hp.adam_beta2 * vb[l] +
                            (1.0 - hp.adam_beta2) * grads.biases[l].array().square().matrix();
                    model.biases[l].array() -=
                        lr_t * mb[l].array() / (vb[l].array().sqrt() + hp.adam_eps);
                }
            }
        }
        epoch_mse = loss_sum / static_cast<double>(sample_count);
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            if (!model.weights[l].allFinite() || !model.biases[l].allFinite()) {
                throw DataError("ffn_train: non-finite parameters after epoch " +
                                std::to_string(epoch));
            }
        }
    }
    model.final_train_mse = epoch_mse;
    return model;
}

void save_ffn_model(const FfnModel& m, const std::string& variable, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << "normpred-ffn 1\n";
        out << "dim " << m.input_dim() << '\n';
        out << "hidden";
        for (int h : m.hp.hidden_sizes) out << ' ' << h;
        out << '\n';
        out << "dropout " << format_double(m.hp.dropout_p) << '\n';
        out << "epochs " << m.hp.epochs << '\n';
        out << "batch_size " << m.hp.batch_size << '\n';
        out << "learning_rate " << format_double(m.hp.learning_rate) << '\n';
        out << "optimizer " << (m.hp.optimizer == FfnOptimizer::adam ? "adam" : "sgd") << '\n';
        out << "variable " << (variable.empty() ? "-" : variable) << '\n';
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            out << "layer " << l << ' ' << m.weights[l].rows() << ' ' << m.weights[l].cols()
                << '\n';
            for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
                for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j) {
                    if (j > 0) out << '\t';
                    out << format_double(m.weights[l](i, j));
                }
                out << '\n';
            }
            out << "bias " << l << ' ' << m.biases[l].size() << '\n';
            for (Eigen::Index j = 0; j < m.biases[l].size(); ++j) {
                if (j > 0) out << '\t';
                out << format_double(m.biases[l][j]);
            }
            out << '\n';
        }
        out << "end\n";
    });
}

FfnModel load_ffn_model(const std::string& path, std::string* variable) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line) || line != "normpred-ffn 1") {
        throw DataError(path + ": not a normpred-ffn model file");
    }
    FfnModel m;
    auto next_line = [&]() -> const std::string& {
        if (!reader.next(line)) throw DataError(path + ": truncated model file");
        return line;
    };
    auto parse_kv_num = [&](const std::string& l, const char* key) {
        std::istringstream iss(l);
        std::string k;
        double v;
        if (!(iss >> k >> v) || k != key) {
            throw DataError(path + ": expected '" + key + "', got '" + l + "'");
        }
        return v;
    };

    const int dim = static_cast<int>(parse_kv_num(next_line(), "dim"));
    {
        std::istringstream iss(next_line());
        std::string k;
        iss >> k;
        if (k != "hidden") throw DataError(path + ": expected hidden sizes");
        m.hp.hidden_sizes.clear();
        int h;
        while (iss >> h) m.hp.hidden_sizes.push_back(h);
    }
    m.hp.dropout_p = parse_kv_num(next_line(), "dropout");
    m.hp.epochs = static_cast<int>(parse_kv_num(next_line(), "epochs"));
    m.hp.batch_size = static_cast<int>(parse_kv_num(next_line(), "batch_size"));
    m.hp.learning_rate = parse_kv_num(next_line(), "learning_rate");
    {
        std::istringstream iss(next_line());
        std::string k, v;
        iss >> k >> v;
        if (k != "optimizer") throw DataError(path + ": expected optimizer line");
        m.hp.optimizer = v == "sgd" ? FfnOptimizer::sgd : FfnOptimizer::adam;
    }
    {
        std::istringstream iss(next_line());
        std::string k, v;
        iss >> k >> v;
        if (k != "variable") throw DataError(path + ": expected variable line");
        if (variable != nullptr) *variable = v == "-" ? "" : v;
    }

    const std::size_t n_layers = m.hp.hidden_sizes.size() + 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::istringstream iss(next_line());
        std::string k;
        std::size_t idx;
        Eigen::Index rows, cols;
        if (!(iss >> k >> idx >> rows >> cols) || k != "layer" || idx != l) {
            throw DataError(path + ": malformed layer header");
        }
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto cells = split_tab(next_line());
            if (static_cast<Eigen::Index>(cells.size()) != cols) {
                throw DataError(path + ": weight row arity mismatch");
            }
            for (Eigen::Index j = 0; j < cols; ++j) {
                const auto v = parse_double(cells[j]);
                if (!v) throw DataError(path + ": bad weight value");
                w(i, j) = *v;
            }
        }
        m.weights.push_back(std::move(w));

        std::istringstream biss(next_line());
        Eigen::Index blen;
        if (!(biss >> k >> idx >> blen) || k != "bias" || idx != l) {
            throw DataError(path + ": malformed bias header");
        }
        Eigen::VectorXd b(blen);
        const auto cells = split_tab(next_line());
        if (static_cast<Eigen::Index>(cells.size()) != blen) {
            throw DataError(path + ": bias arity mismatch");
        }
        for (Eigen::Index j = 0; j < blen; ++j) {
            const auto v = parse_double(cells[j]);
            if (!v) throw DataError(path + ": bad bias value");
            b[j] = *v;
        }
        m.biases.push_back(std::move(b));
    }
    if (!reader.next(line) || line != "end") throw DataError(path + ": missing end marker");
    if (m.input_dim() != dim) throw DataError(path + ": dim header disagrees with layer shapes");
    return m;
}

}  // namespace normpred
