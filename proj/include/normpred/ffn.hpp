#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace normpred {

enum class FfnOptimizer { adam, sgd };

struct FfnHyperParams {
    std::vector<int> hidden_sizes{128, 32};
    double dropout_p = 0.5;  // 0.5 in-language, 0.8 cross-lingual
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-3;
    FfnOptimizer optimizer = FfnOptimizer::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

// Fully connected ReLU net with a linear scalar output. Dropout (inverted
// scaling) applies after each hidden activation at train time only, so
// inference is deterministic.
struct FfnModel {
    FfnHyperParams hp;
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: in x out
    std::vector<Eigen::VectorXd> biases;
    double final_train_mse = -1.0;  // recorded by ffn_train

    int input_dim() const { return static_cast<int>(weights.front().rows()); }
    int n_layers() const { return static_cast<int>(weights.size()); }
};

// Uniform Glorot weights, zero biases, deterministic under seed.
FfnModel ffn_init(int dim, const FfnHyperParams& hp, std::uint64_t seed);

// Per-hidden-layer 0/1 keep masks for a batch (rows x units).
std::vector<Eigen::MatrixXd> draw_dropout_masks(const FfnModel& m, int batch_rows,
                                                std::uint64_t seed);

// Inference forward pass (no dropout).
double ffn_forward_infer(const FfnModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd ffn_predict(const FfnModel& m, const Eigen::MatrixXd& X);

// Train-mode forward with explicit masks (rows match the batch).
Eigen::VectorXd ffn_forward_train(const FfnModel& m, const Eigen::MatrixXd& X,
                                  const std::vector<Eigen::MatrixXd>& masks);

struct FfnGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// MSE over the batch and its analytic gradients, with the given frozen
// masks. Exposed so gradient checks can freeze the dropout pattern.
double ffn_loss_and_gradients(const FfnModel& m, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, const std::vector<Eigen::MatrixXd>& masks,
                              FfnGradients* grads);

// Seeded-shuffled mini-batch training with fresh dropout masks per batch.
// The last partial batch is used. Aborts on NaN loss.
FfnModel ffn_train(FfnModel model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   std::uint64_t seed);

void save_ffn_model(const FfnModel& m, const std::string& variable, const std::string& path);
FfnModel load_ffn_model(const std::string& path, std::string* variable = nullptr);

}  // namespace normpred
