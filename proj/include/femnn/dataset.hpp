#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <utility>

#include "femnn/fem.hpp"

namespace femnn {

/// Draws right-hand sides with frequencies uniform in [1, 1.5] and phases
/// uniform in [0, 1); the draw order per problem is c1, c2, c3, c4.
struct RhsSampler {
	explicit RhsSampler(std::uint64_t seed) : seed(seed), rng(seed) {}

	RhsFunction next() {
		RhsFunction f;
		f.c1 = uniform_in(rng, freq_lo, freq_hi);
		f.c2 = uniform_in(rng, phase_lo, phase_hi);
		f.c3 = uniform_in(rng, freq_lo, freq_hi);
		f.c4 = uniform_in(rng, phase_lo, phase_hi);
		return f;
	}

	std::uint64_t seed;
	double freq_lo = 1.0, freq_hi = 1.5;
	double phase_lo = 0.0, phase_hi = 1.0;
	std::mt19937_64 rng;
};

enum class Scaling { none, minmax, standardize };

std::string to_string(Scaling s);
Scaling scaling_from_string(const std::string& name);

/// Feature-wise affine transform x -> (x - shift) / scale fitted on training
/// inputs and targets. minmax uses (min, max - min); standardize uses
/// (mean, population standard deviation), or (mean, population variance) when
/// divide_by_variance is set. A feature with zero scale maps to 0 and a
/// warning is printed once at fit time.
struct Scaler {
	Scaling mode = Scaling::none;
	bool divide_by_variance = false;
	Eigen::VectorXd in_shift, in_scale;
	Eigen::VectorXd out_shift, out_scale;

	Eigen::MatrixXd transform_inputs(const Eigen::MatrixXd& x) const;
	Eigen::MatrixXd transform_targets(const Eigen::MatrixXd& z) const;
	Eigen::VectorXd transform_input(const Eigen::VectorXd& x) const;
	Eigen::VectorXd inverse_target(const Eigen::VectorXd& z) const;
	Eigen::MatrixXd inverse_targets(const Eigen::MatrixXd& z) const;
};

/// Per-patch training pairs cut from two-level solves, one column per sample.
/// Column p * n_patches + q belongs to problem p, patch q. An input column is
/// the four coarse corner values (SW, SE, NW, NE) followed by the rhs at the
/// patch fine nodes; the target column is fine minus injected-coarse solution
/// at those nodes. Values are stored untransformed.
struct DataSet {
	int n_problems = 0;
	int n_patches = 0;
	int refine_steps = 0;
	double coarse_h = 0.0;
	Rect domain;
	std::uint64_t seed = 0;
	Eigen::MatrixXd inputs;
	Eigen::MatrixXd targets;

	int input_dim() const { return static_cast<int>(inputs.rows()); }
	int output_dim() const { return static_cast<int>(targets.rows()); }
	int n_samples() const { return static_cast<int>(inputs.cols()); }
	int problem_of(int sample) const { return sample / n_patches; }
	int patch_of(int sample) const { return sample % n_patches; }
};

struct SolverOptions {
	double cg_tol = 1e-10;
	int cg_max_iter = 10000;
	int quad_order = 3;
};

/// Solve the coarse and fine problem for n_problems sampled right-hand sides
/// and cut one sample per patch. refine_steps is k with fine h = H / 2^k.
DataSet generate(RhsSampler& sampler, MeshPtr coarse, int refine_steps, int n_problems,
                 const SolverOptions& opts = {});

/// Train set from `seed`, test set of the same size from `seed + 1`; patches
/// of one problem never straddle the two sets.
std::pair<DataSet, DataSet> generate_split(MeshPtr coarse, int refine_steps, int n_problems,
                                           std::uint64_t seed, const SolverOptions& opts = {});

Scaler fit_scaler(const DataSet& train, Scaling mode, bool divide_by_variance = false);

nlohmann::json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::json& j);

/// Binary dataset file: magic "FEMNNDS1", u64 little-endian header length,
/// JSON header, then inputs and targets as little-endian float64 blobs in
/// column-major (sample-major) order. The header records shapes, provenance
/// and, when given, the fitted scaler.
void save_dataset(const std::string& path, const DataSet& ds, const Scaler* scaler = nullptr);
DataSet load_dataset(const std::string& path, Scaler* scaler_out = nullptr);

}  // namespace femnn
