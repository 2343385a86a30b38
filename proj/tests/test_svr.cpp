#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "normpred/errors.hpp"
#include "normpred/rng.hpp"
#include "normpred/stats.hpp"
#include "normpred/svr.hpp"
#include "oracles.hpp"

using namespace normpred;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.uniform(-1.0, 1.0);
    }
    return m;
}

}  // namespace

TEST_CASE("constant targets give an all-zero dual and bias = c") {
    Rng rng(1);
    const Eigen::MatrixXd X = random_matrix(12, 3, rng);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.7);
    SvrHyperParams hp;
    SvrTrainReport rep;
    const SvrModel m = svr_train(X, y, hp, 0, &rep);
    CHECK(rep.converged);
    CHECK(m.n_support() == 0);
    CHECK(m.bias == doctest::Approx(3.7).epsilon(1e-12));
    const Eigen::VectorXd preds = svr_predict(m, X);
    for (int i = 0; i < 12; ++i) CHECK(preds[i] == doctest::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("5-point 1-D dataset matches the dense dual-QP oracle") {
    Eigen::MatrixXd X(5, 1);
    X << -2.0, -1.0, 0.0, 1.0, 2.0;
    Eigen::VectorXd y(5);
    y << -1.9, -1.1, 0.2, 0.8, 2.1;

    SvrHyperParams hp;
    hp.kernel = Kernel::linear;
    hp.c = 1.0;
    hp.epsilon = 0.1;
    hp.tol = 1e-6;
    hp.max_passes = 100000;
    const SvrModel m = svr_train(X, y, hp, 0);

    const oracles::QpSolution sol =
        oracles::solve_svr_dual_qp(X, y, hp.c, hp.epsilon, hp.kernel, hp.gamma);
    REQUIRE(sol.kkt_gap < 1e-6);
    const Eigen::VectorXd oracle_preds =
        oracles::qp_oracle_predict(X, sol, X, hp.kernel, hp.gamma);
    const Eigen::VectorXd preds = svr_predict(m, X);
    CHECK((preds - oracle_preds).cwiseAbs().maxCoeff() < 1e-3);

    // linear weights agree with the oracle-derived w
    Eigen::VectorXd w_oracle = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < 5; ++i) w_oracle += sol.beta[i] * X.row(i).transpose();
    CHECK((svr_linear_weights(m) - w_oracle).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("smooth RBF fit reaches high training Spearman") {
    Rng rng(7);
    const int n = 30;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform(-2.0, 2.0);
        y[i] = std::sin(X(i, 0)) + 0.5 * X(i, 0);
    }
    SvrHyperParams hp;
    hp.kernel = Kernel::rbf;
    hp.c = 10.0;
    hp.gamma = 0.5;
    hp.epsilon = 0.01;
    hp.max_passes = 20000;
    const SvrModel m = svr_train(X, y, hp, 0);
    const Eigen::VectorXd preds = svr_predict(m, X);
    const std::vector<double> g(y.data(), y.data() + n), p(preds.data(), preds.data() + n);
    CHECK(spearman(g, p) >= 0.95);
}

TEST_CASE("predict obeys the kernel definitions") {
    SvrModel m;
    m.hp.kernel = Kernel::rbf;
    m.hp.gamma = 0.25;
    m.dim = 2;
    m.bias = 3.2;
    m.support_vectors.resize(0, 2);
    m.dual_coefs.resize(0);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 2);
    const Eigen::VectorXd preds = svr_predict(m, X);
    for (int i = 0; i < 4; ++i) CHECK(preds[i] == 3.2);

    Eigen::VectorXd x(3);
    x << 1.0, -2.0, 0.5;
    CHECK(kernel_value(Kernel::rbf, 0.7, x, x) == 1.0);
    Eigen::VectorXd u(2), v(2);
    u << 1.0, 0.0;
    v << 0.0, 1.0;
    CHECK(kernel_value(Kernel::linear, 0.0, u, v) == 0.0);
    CHECK(kernel_value(Kernel::rbf, 0.5, u, v) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Eigen::MatrixXd wrong(2, 3);
    CHECK_THROWS_AS(svr_predict(m, wrong), DataError);
}

TEST_CASE("linear weights identity") {
    SvrModel m;
    m.hp.kernel = Kernel::linear;
    m.dim = 2;
    m.bias = 0.5;
    m.support_vectors.resize(1, 2);
    m.support_vectors << 1.0, 0.0;
    m.dual_coefs.resize(1);
    m.dual_coefs << 2.0;
    const Eigen::VectorXd w = svr_linear_weights(m);
    CHECK(w[0] == 2.0);
    CHECK(w[1] == 0.0);

    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd x(2);
        x << rng.gaussian(), rng.gaussian();
        CHECK(std::abs(w.dot(x) + m.bias - svr_predict_one(m, x)) < 1e-9);
    }

    SvrModel rbf = m;
    rbf.hp.kernel = Kernel::rbf;
    CHECK_THROWS_AS(svr_linear_weights(rbf), DataError);
}

TEST_CASE("SMO matches the QP oracle across random tiny datasets") {
    Rng rng(20250101);
    double max_pred_err = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(7));
        const int dim = 1 + static_cast<int>(rng.below(3));
        const Eigen::MatrixXd X = random_matrix(n, dim, rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = rng.uniform(-2.0, 2.0);

        SvrHyperParams hp;
        hp.kernel = trial % 2 == 0 ? Kernel::rbf : Kernel::linear;
        hp.c = rng.uniform(0.5, 4.0);
        hp.gamma = rng.uniform(0.1, 2.0);
        hp.epsilon = rng.uniform(0.01, 0.3);
        hp.tol = 1e-6;
        hp.max_passes = 200000;
        const SvrModel m = svr_train(X, y, hp, trial);

        const oracles::QpSolution sol =
            oracles::solve_svr_dual_qp(X, y, hp.c, hp.epsilon, hp.kernel, hp.gamma);
        REQUIRE(sol.kkt_gap < 1e-6);
        const Eigen::MatrixXd tests = random_matrix(10, dim, rng);
        const Eigen::VectorXd o_preds =
            oracles::qp_oracle_predict(X, sol, tests, hp.kernel, hp.gamma);
        const Eigen::VectorXd preds = svr_predict(m, tests);
        max_pred_err = std::max(max_pred_err, (preds - o_preds).cwiseAbs().maxCoeff());

        const oracles::SvrKktResiduals chk = oracles::svr_kkt_residuals(m, X, y);
        CHECK(chk.max_box_violation <= 1e-12);
        CHECK(chk.max_inside_tube_violation <= hp.tol + 1e-9);
        CHECK(chk.max_at_bound_violation <= hp.tol + 1e-9);
        CHECK(std::abs(chk.sum_beta) <= hp.tol * hp.c * n);
    }
    CHECK(max_pred_err < 1e-3);
}

TEST_CASE("KKT residuals hold at the default tolerance too") {
    Rng rng(88);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 20;
        const Eigen::MatrixXd X = random_matrix(n, 4, rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = X(i, 0) * 2.0 + rng.gaussian(0, 0.2);
        SvrHyperParams hp;  // defaults: rbf, C=1, gamma=0.003, eps=0.1, tol=1e-3
        hp.max_passes = 5000;
        const SvrModel m = svr_train(X, y, hp, trial);
        const oracles::SvrKktResiduals chk = oracles::svr_kkt_residuals(m, X, y);
        CHECK(chk.max_box_violation <= 1e-12);
        CHECK(chk.max_inside_tube_violation <= hp.tol + 1e-9);
        CHECK(chk.max_at_bound_violation <= hp.tol + 1e-9);
        CHECK(std::abs(chk.sum_beta) <= hp.tol * hp.c * n);
    }
}

TEST_CASE("prediction is invariant to training-row permutation") {
    Rng rng(55);
    const int n = 40;
    const Eigen::MatrixXd X = random_matrix(n, 5, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = std::tanh(X.row(i).sum()) + rng.gaussian(0, 0.1);

    SvrHyperParams hp;
    hp.gamma = 0.2;
    hp.max_passes = 50000;
    const SvrModel m1 = svr_train(X, y, hp, 1);

    const std::vector<std::size_t> perm = Rng(9).permutation(n);
    Eigen::MatrixXd Xp(n, 5);
    Eigen::VectorXd yp(n);
    for (int i = 0; i < n; ++i) {
        Xp.row(i) = X.row(static_cast<int>(perm[i]));
        yp[i] = y[static_cast<int>(perm[i])];
    }
    const SvrModel m2 = svr_train(Xp, yp, hp, 2);

    const Eigen::MatrixXd tests = random_matrix(30, 5, rng);
    const Eigen::VectorXd p1 = svr_predict(m1, tests);
    const Eigen::VectorXd p2 = svr_predict(m2, tests);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("identical rows with conflicting targets converge to a mean-like fit") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 1, 1, 1, 1, 1, 1, 1;
    Eigen::VectorXd y(4);
    y << 0.0, 1.0, 2.0, 3.0;
    SvrHyperParams hp;
    hp.kernel = Kernel::linear;
    hp.max_passes = 1000;
    const SvrModel m = svr_train(X, y, hp, 0);  // not an error
    const Eigen::VectorXd preds = svr_predict(m, X);
    // all predictions identical; pulled toward the target mass
    for (int i = 1; i < 4; ++i) CHECK(preds[i] == doctest::Approx(preds[0]).epsilon(1e-9));
    CHECK(preds[0] > 0.0);
    CHECK(preds[0] < 3.0);
}

TEST_CASE("training input validation") {
    Eigen::MatrixXd X(1, 2);
    Eigen::VectorXd y(1);
    SvrHyperParams hp;
    CHECK_THROWS_AS(svr_train(X, y, hp, 0), DataError);

    Eigen::MatrixXd X2 = Eigen::MatrixXd::Zero(3, 2);
    Eigen::VectorXd bad(3);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN(), 2.0;
    CHECK_THROWS_AS(svr_train(X2, bad, hp, 0), DataError);

    SvrHyperParams neg = hp;
    neg.c = -1.0;
    Eigen::VectorXd y3 = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(svr_train(X2, y3, neg, 0), DataError);
}

TEST_CASE("model file round-trip preserves predictions bit-exactly") {
    Rng rng(123);
    const Eigen::MatrixXd X = random_matrix(15, 3, rng);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) y[i] = X(i, 0) - 0.5 * X(i, 1) + rng.gaussian(0, 0.05);
    SvrHyperParams hp;
    hp.gamma = 0.8;
    hp.max_passes = 20000;
    const SvrModel m = svr_train(X, y, hp, 0);

    const auto path = std::filesystem::temp_directory_path() / "normpred_svr_model.tsv";
    save_svr_model(m, "conc_mean", path.string());
    std::string variable;
    const SvrModel back = load_svr_model(path.string(), &variable);
    CHECK(variable == "conc_mean");
    CHECK(back.n_support() == m.n_support());
    const Eigen::MatrixXd tests = random_matrix(10, 3, rng);
    CHECK(svr_predict(back, tests) == svr_predict(m, tests));
}
