#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "femnn/common.hpp"

namespace femnn {

enum class Activation { relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Lipschitz constant of the activation (1 for relu); enters the network
/// Lipschitz bound as act^(L-1) since the last layer stays linear.
double activation_lipschitz(Activation a);

/// Fully connected network: x -> W_L(s(W_{L-1}(... s(W_1 x + b_1) ...))) + b_L
/// with the activation s applied between layers but not after the last one.
struct Mlp {
	std::vector<Eigen::MatrixXd> weights;  // W_l maps dims[l] -> dims[l+1]
	std::vector<Eigen::VectorXd> biases;
	Activation activation = Activation::relu;

	int depth() const { return static_cast<int>(weights.size()); }
	int input_dim() const { return static_cast<int>(weights.front().cols()); }
	int output_dim() const { return static_cast<int>(weights.back().rows()); }
	std::int64_t parameter_count() const;
};

/// Layer widths for a patch-correction network: input is 4 coarse corner
/// values plus (2^k+1)^2 rhs values, output is (2^k+1)^2 corrections.
std::vector<int> patch_dims(int refine_steps, int hidden_layers = 4, int hidden_width = 512);

/// Weights uniform in +-sqrt(6 / fan_in), drawn row-major layer by layer;
/// biases start at zero. Identical seeds give identical networks.
Mlp init_mlp(const std::vector<int>& dims, Activation act, std::uint64_t seed);

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x);
Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& x);

/// alpha / n_param scales the Frobenius-product penalty; alpha = 0 recovers
/// the plain mean-squared loss.
struct LossConfig {
	double alpha = 0.0;
	std::int64_t n_param = 1;
};

/// Mean over columns of |N(x) - z|^2.
double loss_mse(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z);

/// (alpha / n_param) * prod_l |W_l|_F.
double frobenius_penalty(const Mlp& net, const LossConfig& cfg);

double loss_regularized(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                        const LossConfig& cfg);

struct Gradients {
	std::vector<Eigen::MatrixXd> weights;
	std::vector<Eigen::VectorXd> biases;
};

/// Backpropagation for loss_regularized; returns the loss value and fills
/// grad. The penalty derivative for W_j is (prod_{i!=j} |W_i|_F) * W_j/|W_j|_F
/// scaled by alpha / n_param, taken as zero where |W_j|_F vanishes.
double backward(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                const LossConfig& cfg, Gradients& grad);

struct AdamState {
	double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
	std::int64_t step = 0;
	std::vector<Eigen::MatrixXd> m_w, v_w;
	std::vector<Eigen::VectorXd> m_b, v_b;
};

AdamState make_adam(const Mlp& net, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                    double eps = 1e-8);
void adam_step(Mlp& net, const Gradients& grad, AdamState& state);

/// Largest singular value by power iteration on W^T W, converged when the
/// estimate moves by less than tol relatively. Exact 0 for a zero matrix.
double spectral_norm(const Eigen::MatrixXd& w, double tol = 1e-9, int max_iter = 100000);

/// c_W = prod_l |W_l|_2.
double spectral_bound(const Mlp& net, double tol = 1e-9);

/// Returns (|N(x) - N(x')|_2, act^(L-1) * c_W * |x - x'|_2).
std::pair<double, double> lipschitz_output_bound(const Mlp& net, const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& x_alt);

struct TrainConfig {
	int epochs = 200;
	int batch_size = 1024;
	int patience = 20;  // early stopping on validation mse
	double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
	double alpha = 0.0;
	std::uint64_t shuffle_seed = 0;
};

struct TrainLogRow {
	int epoch;
	double train_loss;  // mean minibatch loss over the epoch, penalty included
	double val_mse;
	double c_w;
};

struct TrainResult {
	int epochs_run = 0;
	int best_epoch = 0;
	double best_val_mse = 0.0;
	std::vector<TrainLogRow> log;
};

/// Minibatch Adam over column-sample matrices; keeps the parameters of the
/// epoch with the best validation mse and stops after `patience` epochs
/// without improvement. Bitwise deterministic for fixed seeds.
TrainResult train(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                  const Eigen::MatrixXd& x_val, const Eigen::MatrixXd& z_val,
                  const TrainConfig& cfg);

/// Checkpoint file: magic "FEMNNCP1", u64 header length, JSON header (dims,
/// activation, caller metadata), then all parameters as little-endian float64
/// (per layer: W column-major, then b).
void save_checkpoint(const std::string& path, const Mlp& net, const nlohmann::json& meta);
Mlp load_checkpoint(const std::string& path, nlohmann::json* meta_out = nullptr);

}  // namespace femnn
