#include "normpred/svr.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <list>
#include <unordered_map>
#include <vector>

#include "normpred/errors.hpp"
#include "normpred/rng.hpp"
#include "normpred/text_io.hpp"

namespace normpred {

const char* kernel_name(Kernel k) {
    return k == Kernel::rbf ? "rbf" : "linear";
}

double kernel_value(Kernel k, double gamma, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (k == Kernel::linear) return u.dot(v);
    return std::exp(-gamma * (u - v).squaredNorm());
}

namespace {

// Lazily computed rows of the training kernel matrix with LRU eviction, so
// training memory stays bounded for large lexicons.
class KernelRowCache {
  public:
    KernelRowCache(const Eigen::MatrixXd& X, Kernel kernel, double gamma,
                   std::size_t budget_bytes = std::size_t{256} << 20)
        : X_(X), kernel_(kernel), gamma_(gamma), n_(static_cast<int>(X.rows())) {
        if (kernel_ == Kernel::rbf) {
            sq_norms_ = X_.rowwise().squaredNorm();
        }
        std::size_t max_rows = budget_bytes / (sizeof(double) * static_cast<std::size_t>(n_) + 64);
        if (max_rows < 2) max_rows = 2;
        if (max_rows > static_cast<std::size_t>(n_)) max_rows = static_cast<std::size_t>(n_);
        capacity_ = max_rows;
    }

    const Eigen::VectorXd& row(int i) {
        auto it = slots_.find(i);
        if (it != slots_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.lru_it);
            return it->second.values;
        }
        if (slots_.size() >= capacity_) {
            const int victim = lru_.back();
            lru_.pop_back();
            slots_.erase(victim);
        }
        Slot slot;
        slot.values = compute_row(i);
        lru_.push_front(i);
        slot.lru_it = lru_.begin();
        return slots_.emplace(i, std::move(slot)).first->second.values;
    }

    double diag(int i) const {
        if (kernel_ == Kernel::rbf) return 1.0;
        return X_.row(i).squaredNorm();
    }

  private:
    Eigen::VectorXd compute_row(int i) const {
        Eigen::VectorXd r = X_ * X_.row(i).transpose();
        if (kernel_ == Kernel::rbf) {
            const double si = sq_norms_[i];
            for (int j = 0; j < n_; ++j) {
                r[j] = std::exp(-gamma_ * (sq_norms_[j] + si - 2.0 * r[j]));
            }
        }
        return r;
    }

    struct Slot {
        Eigen::VectorXd values;
        std::list<int>::iterator lru_it;
    };

    const Eigen::MatrixXd& X_;
    Kernel kernel_;
    double gamma_;
    int n_;
    Eigen::VectorXd sq_norms_;
    std::size_t capacity_ = 2;
    std::unordered_map<int, Slot> slots_;
    std::list<int> lru_;
};

constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs

}  // namespace

// SMO over the 2n-variable dual: variables a_s in [0, C] with sign
// sigma_s = +1 for s < n (alpha) and -1 otherwise (alpha*), objective
// 1/2 sum sigma_s sigma_u a_s a_u K(ms, mu) + sum p_s a_s with
// p = (eps - y; eps + y), subject to sum sigma_s a_s = 0. Working pair =
// maximal KKT violation (argmax/argmin of -sigma*G over the up/low sets),
// with a seeded random second choice when the maximal pair cannot move.
SvrModel svr_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrHyperParams& hp,
                   std::uint64_t seed, SvrTrainReport* report) {
    const int n = static_cast<int>(X.rows());
    if (n < 2) throw DataError("svr_train: need at least 2 rows");
    if (y.size() != n) throw DataError("svr_train: X/y size mismatch");
    if (!X.allFinite() || !y.allFinite()) throw DataError("svr_train: non-finite inputs");
    if (hp.c <= 0.0 || hp.epsilon < 0.0 || (hp.kernel == Kernel::rbf && hp.gamma <= 0.0)) {
        throw DataError("svr_train: invalid hyperparameters");
    }

    const double C = hp.c;
    const int m2 = 2 * n;
    auto sigma = [n](int s) { return s < n ? 1.0 : -1.0; };
    auto base = [n](int s) { return s < n ? s : s - n; };

    std::vector<double> a(m2, 0.0);
    std::vector<double> grad(m2);
    for (int i = 0; i < n; ++i) {
        grad[i] = hp.epsilon - y[i];
        grad[n + i] = hp.epsilon + y[i];
    }

    KernelRowCache cache(X, hp.kernel, hp.gamma);
    Rng rng(mix_seed(seed, 0x5376u /* 'Sv' */));

    const long long max_iter = hp.max_passes > 0 ? hp.max_passes : 10LL * n;
    long long iter = 0;
    bool converged = false;
    double gap = std::numeric_limits<double>::infinity();

    auto in_up = [&](int s) { return sigma(s) > 0 ? a[s] < C : a[s] > 0.0; };
    auto in_low = [&](int s) { return sigma(s) > 0 ? a[s] > 0.0 : a[s] < C; };
    auto violation = [&](int s) { return -sigma(s) * grad[s]; };

    while (iter < max_iter) {
        int i = -1, j = -1;
        double vmax = -std::numeric_limits<double>::infinity();
        double vmin = std::numeric_limits<double>::infinity();
        for (int s = 0; s < m2; ++s) {
            const double v = violation(s);
            if (in_up(s) && v > vmax) {
                vmax = v;
                i = s;
            }
            if (in_low(s) && v < vmin) {
                vmin = v;
                j = s;
            }
        }
        gap = vmax - vmin;
        if (i < 0 || j < 0 || gap <= hp.tol) {
            converged = true;
            break;
        }

        // Analytic step for the pair, clipped to the box. The feasible
        // direction keeps sum sigma*a fixed: da_j = -sigma_i*sigma_j * u.
        auto try_pair = [&](int pi, int pj) -> bool {
            const double ss = sigma(pi) * sigma(pj);
            const int bi = base(pi), bj = base(pj);
            const double kij = cache.row(bi)[bj];
            double eta = cache.diag(bi) + cache.diag(bj) - 2.0 * kij;
            if (eta < kTau) eta = kTau;
            const double slope = grad[pi] - ss * grad[pj];
            double u = -slope / eta;

            double lo = -a[pi], hi = C - a[pi];
            if (ss > 0) {
                lo = std::max(lo, a[pj] - C);
                hi = std::min(hi, a[pj]);
            } else {
                lo = std::max(lo, -a[pj]);
                hi = std::min(hi, C - a[pj]);
            }
            u = std::min(std::max(u, lo), hi);
            if (u == 0.0) return false;

            double new_i = a[pi] + u;
            double new_j = a[pj] - ss * u;
            // snap to the box against rounding drift
            if (new_i < kTau * C) new_i = 0.0;
            if (new_i > C - kTau * C) new_i = C;
            if (new_j < kTau * C) new_j = 0.0;
            if (new_j > C - kTau * C) new_j = C;
            const double d_beta_i = sigma(pi) * (new_i - a[pi]);
            const double d_beta_j = sigma(pj) * (new_j - a[pj]);
            a[pi] = new_i;
            a[pj] = new_j;

            const Eigen::VectorXd& row_i = cache.row(bi);
            const Eigen::VectorXd& row_j = cache.row(bj);
            for (int s = 0; s < m2; ++s) {
                const int bs = base(s);
                grad[s] += sigma(s) * (row_i[bs] * d_beta_i + row_j[bs] * d_beta_j);
            }
            return true;
        };

        bool moved = try_pair(i, j);
        if (!moved) {
            // maximal pair blocked (degenerate curvature at a corner);
            // seeded random second choice from the low set
            for (int attempt = 0; attempt < 2 * n && !moved; ++attempt) {
                const int cand = static_cast<int>(rng.below(static_cast<std::size_t>(m2)));
                if (cand != i && in_low(cand) && violation(cand) < vmax) {
                    moved = try_pair(i, cand);
                }
            }
        }
        if (!moved) break;  // stalled
        ++iter;
    }

    if (!converged) {
        std::cerr << "[normpred] warning: SMO stopped after " << iter
                  << " iterations with KKT gap " << gap << " > tol " << hp.tol
                  << "; returning best iterate\n";
    }

    // bias from free dual variables, midpoint of the KKT interval otherwise
    double b;
    {
        double free_sum = 0.0;
        int free_count = 0;
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (int s = 0; s < m2; ++s) {
            const double v = violation(s);
            if (a[s] > 0.0 && a[s] < C) {
                free_sum += v;
                ++free_count;
            }
            if (in_up(s)) up_max = std::max(up_max, v);
            if (in_low(s)) low_min = std::min(low_min, v);
        }
        b = free_count > 0 ? free_sum / free_count : 0.5 * (up_max + low_min);
    }

    SvrModel model;
    model.hp = hp;
    model.dim = static_cast<int>(X.cols());
    model.bias = b;
    std::vector<int> sv_rows;
    for (int i = 0; i < n; ++i) {
        if (a[i] - a[n + i] != 0.0) sv_rows.push_back(i);
    }
    model.support_vectors.resize(static_cast<int>(sv_rows.size()), X.cols());
    model.dual_coefs.resize(static_cast<int>(sv_rows.size()));
    for (std::size_t k = 0; k < sv_rows.size(); ++k) {
        model.support_vectors.row(static_cast<int>(k)) = X.row(sv_rows[k]);
        model.dual_coefs[static_cast<int>(k)] = a[sv_rows[k]] - a[n + sv_rows[k]];
    }

    if (report != nullptr) {
        report->iterations = iter;
        report->converged = converged;
        report->final_gap = gap;
    }
    return model;
}

double svr_predict_one(const SvrModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.dim) throw DataError("svr_predict: dimension mismatch");
    double f = m.bias;
    if (m.hp.kernel == Kernel::linear) {
        f += (m.support_vectors * x).dot(m.dual_coefs);
    } else {
        for (int i = 0; i < m.n_support(); ++i) {
            const double d2 = (m.support_vectors.row(i).transpose() - x).squaredNorm();
            f += m.dual_coefs[i] * std::exp(-m.hp.gamma * d2);
        }
    }
    return f;
}

Eigen::VectorXd svr_predict(const SvrModel& m, const Eigen::MatrixXd& X) {
    if (X.cols() != m.dim) throw DataError("svr_predict: dimension mismatch");
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd out(n);
    if (m.n_support() == 0) {
        out.setConstant(m.bias);
        return out;
    }
    if (m.hp.kernel == Kernel::linear) {
        out = X * (m.support_vectors.transpose() * m.dual_coefs);
        out.array() += m.bias;
        return out;
    }
    const Eigen::VectorXd sv_sq = m.support_vectors.rowwise().squaredNorm();
    for (int r = 0; r < n; ++r) {
        const double x_sq = X.row(r).squaredNorm();
        Eigen::VectorXd cross = m.support_vectors * X.row(r).transpose();
        double f = m.bias;
        for (int i = 0; i < m.n_support(); ++i) {
            f += m.dual_coefs[i] * std::exp(-m.hp.gamma * (sv_sq[i] + x_sq - 2.0 * cross[i]));
        }
        out[r] = f;
    }
    return out;
}

Eigen::VectorXd svr_linear_weights(const SvrModel& m) {
    if (m.hp.kernel != Kernel::linear) {
        throw DataError("svr_linear_weights: model does not use the linear kernel");
    }
    return m.support_vectors.transpose() * m.dual_coefs;
}

void save_svr_model(const SvrModel& m, const std::string& variable, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << "normpred-svr 1\n";
        out << "kernel " << kernel_name(m.hp.kernel) << '\n';
        out << "c " << format_double(m.hp.c) << '\n';
        out << "gamma " << format_double(m.hp.gamma) << '\n';
        out << "epsilon " << format_double(m.hp.epsilon) << '\n';
        out << "tol " << format_double(m.hp.tol) << '\n';
        out << "variable " << (variable.empty() ? "-" : variable) << '\n';
        out << "dim " << m.dim << '\n';
        out << "bias " << format_double(m.bias) << '\n';
        out << "n_sv " << m.n_support() << '\n';
        for (int i = 0; i < m.n_support(); ++i) {
            out << format_double(m.dual_coefs[i]);
            for (int j = 0; j < m.dim; ++j) {
                out << '\t' << format_double(m.support_vectors(i, j));
            }
            out << '\n';
        }
        out << "end\n";
    });
}

SvrModel load_svr_model(const std::string& path, std::string* variable) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line) || line != "normpred-svr 1") {
        throw DataError(path + ": not a normpred-svr model file");
    }
    SvrModel m;
    int n_sv = -1;
    auto expect_kv = [&](const char* key) -> std::string {
        if (!reader.next(line)) throw DataError(path + ": truncated model file");
        const std::string prefix = std::string(key) + " ";
        if (line.rfind(prefix, 0) != 0) {
            throw DataError(path + ": expected '" + key + "' line, got '" + line + "'");
        }
        return line.substr(prefix.size());
    };
    const std::string kernel = expect_kv("kernel");
    if (kernel == "rbf") {
        m.hp.kernel = Kernel::rbf;
    } else if (kernel == "linear") {
        m.hp.kernel = Kernel::linear;
    } else {
        throw DataError(path + ": unknown kernel '" + kernel + "'");
    }
    auto num = [&](const std::string& s) {
        const auto v = parse_double(s);
        if (!v) throw DataError(path + ": bad numeric field '" + s + "'");
        return *v;
    };
    m.hp.c = num(expect_kv("c"));
    m.hp.gamma = num(expect_kv("gamma"));
    m.hp.epsilon = num(expect_kv("epsilon"));
    m.hp.tol = num(expect_kv("tol"));
    const std::string var = expect_kv("variable");
    if (variable != nullptr) *variable = var == "-" ? "" : var;
    m.dim = static_cast<int>(num(expect_kv("dim")));
    m.bias = num(expect_kv("bias"));
    n_sv = static_cast<int>(num(expect_kv("n_sv")));
    if (m.dim <= 0 || n_sv < 0) throw DataError(path + ": invalid dimensions");

    m.support_vectors.resize(n_sv, m.dim);
    m.dual_coefs.resize(n_sv);
    for (int i = 0; i < n_sv; ++i) {
        if (!reader.next(line)) throw DataError(path + ": truncated support vectors");
        const auto cells = split_tab(line);
        if (static_cast<int>(cells.size()) != m.dim + 1) {
            throw DataError(path + ": support vector row has wrong arity");
        }
        m.dual_coefs[i] = num(std::string(cells[0]));
        for (int j = 0; j < m.dim; ++j) {
            m.support_vectors(i, j) = num(std::string(cells[j + 1]));
        }
    }
    if (!reader.next(line) || line != "end") throw DataError(path + ": missing end marker");
    return m;
}

}  // namespace normpred
