#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace normpred {

enum class Kernel { rbf, linear };
const char* kernel_name(Kernel k);

struct SvrHyperParams {
    double c = 1.0;
    double gamma = 0.003;
    double epsilon = 0.1;  // insensitivity tube
    Kernel kernel = Kernel::rbf;
    double tol = 1e-3;      // KKT tolerance (max violating pair gap)
    long long max_passes = 0;  // pair-update cap; 0 means 10 * n
};

struct SvrTrainReport {
    long long iterations = 0;
    bool converged = false;
    double final_gap = 0.0;  // m - M at exit
};

// Epsilon-insensitive SVR trained by SMO over the 2n-variable dual.
// dual_coefs holds beta_i = alpha_i - alpha_i* for each support vector.
struct SvrModel {
    SvrHyperParams hp;
    int dim = 0;
    Eigen::MatrixXd support_vectors;  // n_sv x dim
    Eigen::VectorXd dual_coefs;       // n_sv
    double bias = 0.0;

    int n_support() const { return static_cast<int>(dual_coefs.size()); }
};

// Trains on rows of X against y. The seed only feeds the random
// second-choice fallback of the working-pair selection; converged models do
// not depend on it.
SvrModel svr_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrHyperParams& hp,
                   std::uint64_t seed, SvrTrainReport* report = nullptr);

Eigen::VectorXd svr_predict(const SvrModel& m, const Eigen::MatrixXd& X);
double svr_predict_one(const SvrModel& m, const Eigen::VectorXd& x);

// w such that f(x) = w.x + bias; linear kernel only.
Eigen::VectorXd svr_linear_weights(const SvrModel& m);

double kernel_value(Kernel k, double gamma, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Versioned flat file: hyperparameter block, then one TSV line per support
// vector (beta first). `variable` labels what the model predicts.
void save_svr_model(const SvrModel& m, const std::string& variable, const std::string& path);
SvrModel load_svr_model(const std::string& path, std::string* variable = nullptr);

}  // namespace normpred
