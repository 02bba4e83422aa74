#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "femnn/hybrid.hpp"

namespace femnn {

/// One training/evaluation run, fully determined by this struct. JSON
/// round-trippable; unknown keys are rejected so config typos surface early.
struct ExperimentConfig {
	Rect domain{0.0, 1.0, 0.0, 1.0};
	int coarse_nx = 8;      // coarse cells along x (h = width / nx)
	int coarse_ny = 8;      // coarse cells along y
	int refine_steps = 1;   // fine h = coarse h / 2^refine_steps

	int n_train = 4096;  // training problems (each yields one sample per patch)
	int n_val = 256;     // validation problems, sampled from data_seed + 2
	int n_eval = 256;    // test problems, sampled from data_seed + 1

	int hidden_layers = 4;
	int hidden_width = 512;
	double alpha = 0.0;  // weight of the Frobenius-product penalty
	Scaling preprocessing = Scaling::standardize;
	bool divide_by_variance = false;

	std::uint64_t data_seed = 1;
	std::uint64_t init_seed = 2;
	std::uint64_t shuffle_seed = 3;

	int epochs = 200;
	int batch_size = 1024;
	int patience = 20;
	double lr = 1e-3;
	double beta1 = 0.9;
	double beta2 = 0.999;
	double adam_eps = 1e-8;

	int quad_order = 3;
	double cg_tol = 1e-10;
	int cg_max_iter = 10000;

	/// Lifts the training-set size cap meant to keep runs desk-sized.
	bool full_scale = false;

	SolverOptions solver() const { return {cg_tol, cg_max_iter, quad_order}; }
	std::vector<int> network_dims() const;

	/// Throws ConfigError on out-of-range values; called by every entry point.
	void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Network, fitted scaler and a provenance manifest from one training run.
struct TrainedModel {
	Mlp net;
	Scaler scaler;
	TrainResult result;
	nlohmann::json manifest;
};

/// Generate train/validation data, fit the scaler, train the network.
TrainedModel run_training(const ExperimentConfig& cfg);

/// Mean absolute errors against a twice-refined reference solution, averaged
/// over evaluation problems. nodal_* is the fine-grid discrete L2 distance
/// (h-weighted); l2_* integrates the difference over the reference mesh.
struct EvalStats {
	double nodal_uH = 0.0, nodal_uh = 0.0, nodal_uN = 0.0;
	double l2_uH = 0.0, l2_uh = 0.0, l2_uN = 0.0;
	int n_problems = 0;
};

/// Evaluate on explicit problems over an arbitrary domain (the mesh pair is
/// rebuilt from the geometry arguments; the network sees each patch locally,
/// so the evaluation domain may differ from the training domain).
EvalStats evaluate_problems(const Mlp& net, const Scaler& scaler, const Rect& domain, int nx,
                            int ny, int refine_steps, const std::vector<RhsFunction>& problems,
                            const SolverOptions& opts = {});

/// Evaluate on cfg.n_eval problems drawn from data_seed + 1 over cfg's domain.
EvalStats evaluate_model(const Mlp& net, const Scaler& scaler, const ExperimentConfig& cfg);

/// Deterministic CSV writer: header row, then rows printed with %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& content);

/// Commands behind the CLI. Each writes its outputs under out_dir (created if
/// missing) and returns the manifest it wrote. File layout:
///   generate     train.bin, test.bin, manifest.json [, mesh.json]
///   train        model.bin, training_log.csv, manifest.json
///   eval         errors.csv, manifest.json
///   convergence  convergence.csv, manifest.json          (one row per mesh)
///   sweep        sweep.csv, manifest.json                (one row per alpha)
///   preprocessing preprocessing.csv, manifest.json       (mode x seed rows)
///   generalize   generalize.csv, manifest.json           (one row per domain)
nlohmann::json cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir,
                            bool dump_mesh = false);
nlohmann::json cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_eval(const ExperimentConfig& cfg, const std::string& model_path,
                        const std::string& out_dir);
nlohmann::json cmd_convergence(const ExperimentConfig& cfg, const std::vector<int>& coarse_sizes,
                               const std::string& out_dir, bool zero_network = false);
nlohmann::json cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                         const std::string& out_dir);
nlohmann::json cmd_preprocessing(const ExperimentConfig& cfg, int n_seeds,
                                 const std::string& out_dir);
nlohmann::json cmd_generalize(const ExperimentConfig& cfg, const Rect& eval_domain, int eval_nx,
                              int eval_ny, const RhsFunction& eval_rhs,
                              const std::string& out_dir);

}  // namespace femnn
