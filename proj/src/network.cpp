#include "femnn/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

namespace femnn {

std::string to_string(Activation a) {
	switch (a) {
		case Activation::relu: return "relu";
	}
	throw StructuralError("unknown activation");
}

Activation activation_from_string(const std::string& name) {
	if (name == "relu") return Activation::relu;
	throw ConfigError("unknown activation: " + name);
}

double activation_lipschitz(Activation a) {
	switch (a) {
		case Activation::relu: return 1.0;
	}
	throw StructuralError("unknown activation");
}

std::int64_t Mlp::parameter_count() const {
	std::int64_t n = 0;
	for (std::size_t l = 0; l < weights.size(); ++l)
		n += weights[l].size() + biases[l].size();
	return n;
}

std::vector<int> patch_dims(int refine_steps, int hidden_layers, int hidden_width) {
	if (refine_steps < 1 || hidden_layers < 1 || hidden_width < 1)
		throw ConfigError("network shape parameters must be positive");
	const int per_side = (1 << refine_steps) + 1;
	const int fine_count = per_side * per_side;
	std::vector<int> dims;
	dims.push_back(4 + fine_count);
	dims.insert(dims.end(), hidden_layers, hidden_width);
	dims.push_back(fine_count);
	return dims;
}

Mlp init_mlp(const std::vector<int>& dims, Activation act, std::uint64_t seed) {
	if (dims.size() < 2) throw ConfigError("a network needs at least one layer");
	for (int d : dims)
		if (d < 1) throw ConfigError("layer widths must be positive");

	Mlp net;
	net.activation = act;
	std::mt19937_64 rng(seed);
	for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
		Eigen::MatrixXd w(dims[l + 1], dims[l]);
		const double limit = std::sqrt(6.0 / dims[l]);  // fan-in scaled
		for (Eigen::Index r = 0; r < w.rows(); ++r)
			for (Eigen::Index c = 0; c < w.cols(); ++c)
				w(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
		net.weights.push_back(std::move(w));
		net.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
	}
	return net;
}

namespace {

inline void relu_inplace(Eigen::MatrixXd& a) { a = a.cwiseMax(0.0); }

// Forward pass keeping every post-activation; acts[0] is the input batch and
// acts[L] the linear output.
void forward_store(const Mlp& net, const Eigen::MatrixXd& x,
                   std::vector<Eigen::MatrixXd>& acts) {
	const int depth = net.depth();
	acts.resize(depth + 1);
	acts[0] = x;
	for (int l = 0; l < depth; ++l) {
		acts[l + 1] = (net.weights[l] * acts[l]).colwise() + net.biases[l];
		if (l + 1 < depth) relu_inplace(acts[l + 1]);
	}
}

}  // namespace

Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& x) {
	if (x.rows() != net.input_dim())
		throw StructuralError("forward: input dimension mismatch");
	Eigen::MatrixXd a = x;
	for (int l = 0; l < net.depth(); ++l) {
		a = (net.weights[l] * a).colwise() + net.biases[l];
		if (l + 1 < net.depth()) relu_inplace(a);
	}
	return a;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x) {
	return forward_batch(net, x).col(0);
}

double loss_mse(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z) {
	if (x.cols() != z.cols()) throw StructuralError("loss: sample count mismatch");
	const Eigen::MatrixXd r = forward_batch(net, x) - z;
	return r.squaredNorm() / static_cast<double>(x.cols());
}

double frobenius_penalty(const Mlp& net, const LossConfig& cfg) {
	if (cfg.alpha == 0.0) return 0.0;
	double prod = 1.0;
	for (const auto& w : net.weights) prod *= w.norm();
	return cfg.alpha / static_cast<double>(cfg.n_param) * prod;
}

double loss_regularized(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                        const LossConfig& cfg) {
	return loss_mse(net, x, z) + frobenius_penalty(net, cfg);
}

double backward(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                const LossConfig& cfg, Gradients& grad) {
	const int depth = net.depth();
	grad.weights.resize(depth);
	grad.biases.resize(depth);

	std::vector<Eigen::MatrixXd> acts;
	forward_store(net, x, acts);

	const double inv_n = 1.0 / static_cast<double>(x.cols());
	const Eigen::MatrixXd residual = acts[depth] - z;
	double loss = residual.squaredNorm() * inv_n;

	Eigen::MatrixXd delta = 2.0 * inv_n * residual;
	for (int l = depth - 1; l >= 0; --l) {
		grad.weights[l].noalias() = delta * acts[l].transpose();
		grad.biases[l] = delta.rowwise().sum();
		if (l > 0) {
			Eigen::MatrixXd back = net.weights[l].transpose() * delta;
			// relu gate: the stored post-activation is positive iff the
			// pre-activation was
			delta = (acts[l].array() > 0.0).select(back, 0.0);
		}
	}

	if (cfg.alpha != 0.0) {
		const double scale = cfg.alpha / static_cast<double>(cfg.n_param);
		std::vector<double> norms(depth);
		for (int l = 0; l < depth; ++l) norms[l] = net.weights[l].norm();
		double prod = 1.0;
		for (int l = 0; l < depth; ++l) prod *= norms[l];
		loss += scale * prod;
		for (int l = 0; l < depth; ++l) {
			if (norms[l] == 0.0) continue;  // the product term vanishes flat
			double prod_rest = 1.0;
			for (int i = 0; i < depth; ++i)
				if (i != l) prod_rest *= norms[i];
			grad.weights[l] += (scale * prod_rest / norms[l]) * net.weights[l];
		}
	}
	return loss;
}

AdamState make_adam(const Mlp& net, double lr, double beta1, double beta2, double eps) {
	AdamState s;
	s.lr = lr;
	s.beta1 = beta1;
	s.beta2 = beta2;
	s.eps = eps;
	for (int l = 0; l < net.depth(); ++l) {
		s.m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
		s.v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
		s.m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
		s.v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
	}
	return s;
}

void adam_step(Mlp& net, const Gradients& grad, AdamState& s) {
	++s.step;
	const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
	const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
	const double step_size = s.lr / bc1;

	auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
		m = s.beta1 * m + (1.0 - s.beta1) * g;
		v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
		param -= step_size * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + s.eps).matrix());
	};
	for (int l = 0; l < net.depth(); ++l) {
		update(net.weights[l], grad.weights[l], s.m_w[l], s.v_w[l]);
		update(net.biases[l], grad.biases[l], s.m_b[l], s.v_b[l]);
	}
}

double spectral_norm(const Eigen::MatrixXd& w, double tol, int max_iter) {
	if (w.size() == 0) return 0.0;

	// fixed-seed start vector keeps the estimate reproducible
	std::mt19937_64 rng(0x5eed5eedULL);
	Eigen::VectorXd v(w.cols());
	for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 2.0 * uniform01(rng) - 1.0;

	double sigma = 0.0;
	double vnorm = v.norm();
	if (vnorm == 0.0) return 0.0;
	for (int it = 0; it < max_iter; ++it) {
		const Eigen::VectorXd wv = w * v;
		const double sigma_next = wv.norm() / vnorm;  // exact 1 for the identity
		if (sigma_next == 0.0) return 0.0;            // v fell in the null space
		const bool settled = std::abs(sigma_next - sigma) <= tol * sigma_next;
		sigma = sigma_next;
		if (settled) break;
		v = w.transpose() * wv;
		vnorm = v.norm();
		if (vnorm == 0.0) return sigma;
		v /= vnorm;
		vnorm = v.norm();
	}
	return sigma;
}

double spectral_bound(const Mlp& net, double tol) {
	double prod = 1.0;
	for (const auto& w : net.weights) prod *= spectral_norm(w, tol);
	return prod;
}

std::pair<double, double> lipschitz_output_bound(const Mlp& net, const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& x_alt) {
	const double lhs = (forward(net, x) - forward(net, x_alt)).norm();
	const double act = activation_lipschitz(net.activation);
	const double rhs = std::pow(act, net.depth() - 1) * spectral_bound(net) *
	                   (x - x_alt).norm();
	return {lhs, rhs};
}

namespace {

double validation_mse(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z) {
	// chunked so large validation sets do not blow up the activation storage
	const Eigen::Index chunk = 4096;
	double acc = 0.0;
	for (Eigen::Index c0 = 0; c0 < x.cols(); c0 += chunk) {
		const Eigen::Index n = std::min(chunk, x.cols() - c0);
		acc += (forward_batch(net, x.middleCols(c0, n)) - z.middleCols(c0, n)).squaredNorm();
	}
	return acc / static_cast<double>(x.cols());
}

}  // namespace

TrainResult train(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                  const Eigen::MatrixXd& x_val, const Eigen::MatrixXd& z_val,
                  const TrainConfig& cfg) {
	if (x.cols() != z.cols()) throw StructuralError("train: sample count mismatch");
	if (cfg.batch_size < 1 || cfg.epochs < 0) throw ConfigError("bad training budget");

	const Eigen::Index n = x.cols();
	const LossConfig loss_cfg{cfg.alpha, net.parameter_count()};
	AdamState adam = make_adam(net, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
	std::mt19937_64 shuffle_rng(cfg.shuffle_seed);
	std::vector<Eigen::Index> order(n);
	std::iota(order.begin(), order.end(), Eigen::Index{0});

	TrainResult result;
	result.best_val_mse = validation_mse(net, x_val, z_val);
	Mlp best = net;
	int since_best = 0;

	Gradients grad;
	Eigen::MatrixXd xb, zb;
	for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
		// Fisher-Yates with an explicit draw so runs replay exactly
		for (Eigen::Index i = n - 1; i > 0; --i) {
			const auto j = static_cast<Eigen::Index>(
			    uniform_below(shuffle_rng, static_cast<std::uint64_t>(i + 1)));
			std::swap(order[i], order[j]);
		}

		double epoch_loss = 0.0;
		for (Eigen::Index b0 = 0; b0 < n; b0 += cfg.batch_size) {
			const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - b0);
			xb.resize(x.rows(), bs);
			zb.resize(z.rows(), bs);
			for (Eigen::Index i = 0; i < bs; ++i) {
				xb.col(i) = x.col(order[b0 + i]);
				zb.col(i) = z.col(order[b0 + i]);
			}
			epoch_loss += backward(net, xb, zb, loss_cfg, grad) * static_cast<double>(bs);
			adam_step(net, grad, adam);
		}
		epoch_loss /= static_cast<double>(n);

		const double val = validation_mse(net, x_val, z_val);
		result.log.push_back({epoch, epoch_loss, val, spectral_bound(net, 1e-6)});
		result.epochs_run = epoch;

		if (val < result.best_val_mse) {
			result.best_val_mse = val;
			result.best_epoch = epoch;
			best = net;
			since_best = 0;
		} else if (++since_best >= cfg.patience) {
			break;
		}
	}

	net = best;
	return result;
}

namespace {
constexpr char kMagic[8] = {'F', 'E', 'M', 'N', 'N', 'C', 'P', '1'};
}

void save_checkpoint(const std::string& path, const Mlp& net, const nlohmann::json& meta) {
	std::vector<int> dims{net.input_dim()};
	for (const auto& w : net.weights) dims.push_back(static_cast<int>(w.rows()));
	const nlohmann::json header = {{"version", 1},
	                               {"dims", dims},
	                               {"activation", to_string(net.activation)},
	                               {"meta", meta}};
	const std::string head = header.dump();

	std::ofstream out(path, std::ios::binary);
	if (!out) throw ConfigError("cannot write checkpoint: " + path);
	out.write(kMagic, sizeof(kMagic));
	const std::uint64_t len = head.size();
	out.write(reinterpret_cast<const char*>(&len), sizeof(len));
	out.write(head.data(), static_cast<std::streamsize>(head.size()));
	for (int l = 0; l < net.depth(); ++l) {
		out.write(reinterpret_cast<const char*>(net.weights[l].data()),
		          static_cast<std::streamsize>(sizeof(double) * net.weights[l].size()));
		out.write(reinterpret_cast<const char*>(net.biases[l].data()),
		          static_cast<std::streamsize>(sizeof(double) * net.biases[l].size()));
	}
	if (!out) throw ConfigError("short write on checkpoint: " + path);
}

Mlp load_checkpoint(const std::string& path, nlohmann::json* meta_out) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw ConfigError("cannot read checkpoint: " + path);
	char magic[8];
	in.read(magic, sizeof(magic));
	if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
		throw ConfigError("not a checkpoint file: " + path);
	std::uint64_t len = 0;
	in.read(reinterpret_cast<char*>(&len), sizeof(len));
	std::string head(len, '\0');
	in.read(head.data(), static_cast<std::streamsize>(len));
	const nlohmann::json header = nlohmann::json::parse(head);

	const auto dims = header.at("dims").get<std::vector<int>>();
	Mlp net;
	net.activation = activation_from_string(header.at("activation").get<std::string>());
	for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
		Eigen::MatrixXd w(dims[l + 1], dims[l]);
		Eigen::VectorXd b(dims[l + 1]);
		in.read(reinterpret_cast<char*>(w.data()),
		        static_cast<std::streamsize>(sizeof(double) * w.size()));
		in.read(reinterpret_cast<char*>(b.data()),
		        static_cast<std::streamsize>(sizeof(double) * b.size()));
		net.weights.push_back(std::move(w));
		net.biases.push_back(std::move(b));
	}
	if (!in) throw ConfigError("truncated checkpoint: " + path);
	if (meta_out) *meta_out = header.at("meta");
	return net;
}

}  // namespace femnn
