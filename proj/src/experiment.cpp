#include "femnn/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace femnn {

namespace {

// %.17g prints doubles losslessly and identically across runs
std::string fmt(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

nlohmann::json rect_to_json(const Rect& r) {
	return nlohmann::json::array({r.x0, r.x1, r.y0, r.y1});
}

Rect rect_from_json(const nlohmann::json& j) {
	if (!j.is_array() || j.size() != 4) throw ConfigError("domain must be [x0, x1, y0, y1]");
	return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

MeshPtr refined(MeshPtr mesh, int steps) {
	for (int s = 0; s < steps; ++s) mesh = refine(mesh);
	return mesh;
}

}  // namespace

std::vector<int> ExperimentConfig::network_dims() const {
	return patch_dims(refine_steps, hidden_layers, hidden_width);
}

void ExperimentConfig::validate() const {
	if (domain.width() <= 0.0 || domain.height() <= 0.0)
		throw ConfigError("domain must have positive width and height");
	if (coarse_nx < 1 || coarse_ny < 1) throw ConfigError("coarse grid needs at least one cell");
	if (refine_steps < 1) throw ConfigError("refine_steps must be at least 1");
	if (n_train < 1 || n_val < 1 || n_eval < 1)
		throw ConfigError("n_train, n_val and n_eval must be positive");
	if (n_train > 16384 && !full_scale)
		throw ConfigError("n_train above 16384 needs full_scale: true");
	if (hidden_layers < 1 || hidden_width < 1)
		throw ConfigError("network needs at least one hidden layer of positive width");
	if (alpha < 0.0) throw ConfigError("alpha must be nonnegative");
	if (epochs < 1 || batch_size < 1 || patience < 1)
		throw ConfigError("epochs, batch_size and patience must be positive");
	if (lr <= 0.0) throw ConfigError("learning rate must be positive");
	if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
		throw ConfigError("adam betas must lie in [0, 1)");
	if (adam_eps <= 0.0) throw ConfigError("adam_eps must be positive");
	if (quad_order < 1 || quad_order > 5) throw ConfigError("quad_order must be in 1..5");
	if (cg_tol <= 0.0 || cg_max_iter < 1) throw ConfigError("cg settings must be positive");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
	return {{"domain", rect_to_json(cfg.domain)},
	        {"coarse_nx", cfg.coarse_nx},
	        {"coarse_ny", cfg.coarse_ny},
	        {"refine_steps", cfg.refine_steps},
	        {"n_train", cfg.n_train},
	        {"n_val", cfg.n_val},
	        {"n_eval", cfg.n_eval},
	        {"hidden_layers", cfg.hidden_layers},
	        {"hidden_width", cfg.hidden_width},
	        {"alpha", cfg.alpha},
	        {"preprocessing", to_string(cfg.preprocessing)},
	        {"divide_by_variance", cfg.divide_by_variance},
	        {"data_seed", cfg.data_seed},
	        {"init_seed", cfg.init_seed},
	        {"shuffle_seed", cfg.shuffle_seed},
	        {"epochs", cfg.epochs},
	        {"batch_size", cfg.batch_size},
	        {"patience", cfg.patience},
	        {"lr", cfg.lr},
	        {"beta1", cfg.beta1},
	        {"beta2", cfg.beta2},
	        {"adam_eps", cfg.adam_eps},
	        {"quad_order", cfg.quad_order},
	        {"cg_tol", cfg.cg_tol},
	        {"cg_max_iter", cfg.cg_max_iter},
	        {"full_scale", cfg.full_scale}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
	if (!j.is_object()) throw ConfigError("config must be a JSON object");
	static const std::set<std::string> known = {
	    "domain",     "coarse_nx",   "coarse_ny", "refine_steps",  "n_train",
	    "n_val",      "n_eval",      "hidden_layers", "hidden_width", "alpha",
	    "preprocessing", "divide_by_variance", "data_seed", "init_seed", "shuffle_seed",
	    "epochs",     "batch_size",  "patience",  "lr",            "beta1",
	    "beta2",      "adam_eps",    "quad_order", "cg_tol",       "cg_max_iter",
	    "full_scale"};
	for (const auto& item : j.items())
		if (!known.count(item.key())) throw ConfigError("unknown config key: " + item.key());

	ExperimentConfig cfg;
	try {
		if (j.contains("domain")) cfg.domain = rect_from_json(j["domain"]);
		auto get = [&](const char* key, auto& out) {
			if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
		};
		get("coarse_nx", cfg.coarse_nx);
		get("coarse_ny", cfg.coarse_ny);
		get("refine_steps", cfg.refine_steps);
		get("n_train", cfg.n_train);
		get("n_val", cfg.n_val);
		get("n_eval", cfg.n_eval);
		get("hidden_layers", cfg.hidden_layers);
		get("hidden_width", cfg.hidden_width);
		get("alpha", cfg.alpha);
		if (j.contains("preprocessing"))
			cfg.preprocessing = scaling_from_string(j["preprocessing"].get<std::string>());
		get("divide_by_variance", cfg.divide_by_variance);
		get("data_seed", cfg.data_seed);
		get("init_seed", cfg.init_seed);
		get("shuffle_seed", cfg.shuffle_seed);
		get("epochs", cfg.epochs);
		get("batch_size", cfg.batch_size);
		get("patience", cfg.patience);
		get("lr", cfg.lr);
		get("beta1", cfg.beta1);
		get("beta2", cfg.beta2);
		get("adam_eps", cfg.adam_eps);
		get("quad_order", cfg.quad_order);
		get("cg_tol", cfg.cg_tol);
		get("cg_max_iter", cfg.cg_max_iter);
		get("full_scale", cfg.full_scale);
	} catch (const nlohmann::json::exception& e) {
		throw ConfigError(std::string("malformed config value: ") + e.what());
	}
	cfg.validate();
	return cfg;
}

ExperimentConfig load_config(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw ConfigError("cannot open config file: " + path);
	nlohmann::json j;
	try {
		in >> j;
	} catch (const nlohmann::json::exception& e) {
		throw ConfigError("cannot parse config file " + path + ": " + e.what());
	}
	return config_from_json(j);
}

TrainedModel run_training(const ExperimentConfig& cfg) {
	cfg.validate();
	const MeshPtr coarse = make_mesh(cfg.domain, cfg.coarse_nx, cfg.coarse_ny);

	RhsSampler train_sampler(cfg.data_seed);
	RhsSampler val_sampler(cfg.data_seed + 2);
	const DataSet train_set =
	    generate(train_sampler, coarse, cfg.refine_steps, cfg.n_train, cfg.solver());
	const DataSet val_set =
	    generate(val_sampler, coarse, cfg.refine_steps, cfg.n_val, cfg.solver());

	TrainedModel model;
	model.scaler = fit_scaler(train_set, cfg.preprocessing, cfg.divide_by_variance);
	const Eigen::MatrixXd x = model.scaler.transform_inputs(train_set.inputs);
	const Eigen::MatrixXd z = model.scaler.transform_targets(train_set.targets);
	const Eigen::MatrixXd xv = model.scaler.transform_inputs(val_set.inputs);
	const Eigen::MatrixXd zv = model.scaler.transform_targets(val_set.targets);

	model.net = init_mlp(cfg.network_dims(), Activation::relu, cfg.init_seed);

	TrainConfig tc;
	tc.epochs = cfg.epochs;
	tc.batch_size = cfg.batch_size;
	tc.patience = cfg.patience;
	tc.lr = cfg.lr;
	tc.beta1 = cfg.beta1;
	tc.beta2 = cfg.beta2;
	tc.eps = cfg.adam_eps;
	tc.alpha = cfg.alpha;
	tc.shuffle_seed = cfg.shuffle_seed;
	model.result = train(model.net, x, z, xv, zv, tc);

	model.manifest = {
	    {"config", to_json(cfg)},
	    {"scaler", scaler_to_json(model.scaler)},
	    {"dataset",
	     {{"train_samples", train_set.n_samples()},
	      {"val_samples", val_set.n_samples()},
	      {"input_dim", train_set.input_dim()},
	      {"output_dim", train_set.output_dim()},
	      {"patches_per_problem", train_set.n_patches}}},
	    {"network",
	     {{"dims", cfg.network_dims()}, {"parameters", model.net.parameter_count()}}},
	    {"training",
	     {{"epochs_run", model.result.epochs_run},
	      {"best_epoch", model.result.best_epoch},
	      {"best_val_mse", model.result.best_val_mse},
	      {"spectral_bound", spectral_bound(model.net)}}}};
	return model;
}

EvalStats evaluate_problems(const Mlp& net, const Scaler& scaler, const Rect& domain, int nx,
                            int ny, int refine_steps, const std::vector<RhsFunction>& problems,
                            const SolverOptions& opts) {
	if (problems.empty()) throw ConfigError("evaluation needs at least one problem");
	const MeshPtr coarse = make_mesh(domain, nx, ny);
	const MeshPtr fine = refined(coarse, refine_steps);
	const MeshPtr reference = refined(fine, 2);
	const PatchSet patches = build_patches(*coarse, *fine);

	FemSystem coarse_sys = assemble_matrix(coarse);
	FemSystem fine_sys = assemble_matrix(fine);
	FemSystem ref_sys = assemble_matrix(reference);

	EvalStats stats;
	stats.n_problems = static_cast<int>(problems.size());
	for (const RhsFunction& f : problems) {
		set_load(coarse_sys, f, opts.quad_order);
		set_load(fine_sys, f, opts.quad_order);
		set_load(ref_sys, f, opts.quad_order);
		const FemSolution u_H = solve_cg(coarse_sys, opts.cg_tol, opts.cg_max_iter).solution;
		const FemSolution u_h = solve_cg(fine_sys, opts.cg_tol, opts.cg_max_iter).solution;
		const FemSolution u_ref = solve_cg(ref_sys, opts.cg_tol, opts.cg_max_iter).solution;
		const FemSolution u_N = predict_hybrid(net, scaler, u_H, f, patches, fine);
		const FemSolution u_H_fine = inject(u_H, fine);

		const Eigen::VectorXd ref_at_fine = restrict_nodal(u_ref, *fine);
		stats.nodal_uH += fine->h * (u_H_fine.coeffs - ref_at_fine).norm();
		stats.nodal_uh += fine->h * (u_h.coeffs - ref_at_fine).norm();
		stats.nodal_uN += fine->h * (u_N.coeffs - ref_at_fine).norm();
		stats.l2_uH += l2_error(u_H, u_ref, opts.quad_order);
		stats.l2_uh += l2_error(u_h, u_ref, opts.quad_order);
		stats.l2_uN += l2_error(u_N, u_ref, opts.quad_order);
	}
	const double n = static_cast<double>(stats.n_problems);
	stats.nodal_uH /= n;
	stats.nodal_uh /= n;
	stats.nodal_uN /= n;
	stats.l2_uH /= n;
	stats.l2_uh /= n;
	stats.l2_uN /= n;
	return stats;
}

EvalStats evaluate_model(const Mlp& net, const Scaler& scaler, const ExperimentConfig& cfg) {
	cfg.validate();
	RhsSampler sampler(cfg.data_seed + 1);
	std::vector<RhsFunction> problems(cfg.n_eval);
	for (auto& f : problems) f = sampler.next();
	return evaluate_problems(net, scaler, cfg.domain, cfg.coarse_nx, cfg.coarse_ny,
	                         cfg.refine_steps, problems, cfg.solver());
}

void write_text(const std::string& path, const std::string& content) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw ConfigError("cannot write file: " + path);
	out << content;
	if (!out) throw ConfigError("write failed: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
	std::string text;
	for (std::size_t c = 0; c < header.size(); ++c)
		text += (c ? "," : "") + header[c];
	text += "\n";
	for (const auto& row : rows) {
		if (row.size() != header.size())
			throw StructuralError("csv row width does not match the header");
		for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + fmt(row[c]);
		text += "\n";
	}
	write_text(path, text);
}

namespace {

std::string ensure_dir(const std::string& out_dir) {
	std::error_code ec;
	std::filesystem::create_directories(out_dir, ec);
	if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
	return out_dir;
}

std::string join(const std::string& dir, const std::string& name) {
	return (std::filesystem::path(dir) / name).string();
}

void write_manifest(const std::string& out_dir, const nlohmann::json& manifest) {
	write_text(join(out_dir, "manifest.json"), manifest.dump(2) + "\n");
}

std::vector<std::string> eval_header(const std::string& axis) {
	return {axis,          "err_uH_nodal", "err_uH_l2", "err_uh_nodal", "err_uh_l2",
	        "err_uN_nodal", "err_uN_l2"};
}

std::vector<double> eval_row(double axis, const EvalStats& s) {
	return {axis, s.nodal_uH, s.l2_uH, s.nodal_uh, s.l2_uh, s.nodal_uN, s.l2_uN};
}

nlohmann::json stats_to_json(const EvalStats& s) {
	return {{"n_problems", s.n_problems},
	        {"err_uH_nodal", s.nodal_uH},
	        {"err_uH_l2", s.l2_uH},
	        {"err_uh_nodal", s.nodal_uh},
	        {"err_uh_l2", s.l2_uh},
	        {"err_uN_nodal", s.nodal_uN},
	        {"err_uN_l2", s.l2_uN}};
}

// the training-seed derivations keep repeated runs decorrelated but reproducible
ExperimentConfig derived_seeds(ExperimentConfig cfg, std::uint64_t salt) {
	cfg.data_seed = mix_seed(cfg.data_seed, salt);
	cfg.init_seed = mix_seed(cfg.init_seed, salt + 1);
	cfg.shuffle_seed = mix_seed(cfg.shuffle_seed, salt + 2);
	return cfg;
}

void save_model(const std::string& path, const TrainedModel& model) {
	save_checkpoint(path, model.net, model.manifest);
}

}  // namespace

nlohmann::json cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir,
                            bool dump_mesh) {
	cfg.validate();
	ensure_dir(out_dir);
	const MeshPtr coarse = make_mesh(cfg.domain, cfg.coarse_nx, cfg.coarse_ny);

	auto [train_set, test_set] =
	    generate_split(coarse, cfg.refine_steps, cfg.n_train, cfg.data_seed, cfg.solver());
	const Scaler scaler = fit_scaler(train_set, cfg.preprocessing, cfg.divide_by_variance);
	save_dataset(join(out_dir, "train.bin"), train_set, &scaler);
	save_dataset(join(out_dir, "test.bin"), test_set, &scaler);

	nlohmann::json manifest = {
	    {"command", "generate"},
	    {"config", to_json(cfg)},
	    {"outputs", {"train.bin", "test.bin"}},
	    {"train_samples", train_set.n_samples()},
	    {"test_samples", test_set.n_samples()},
	    {"input_dim", train_set.input_dim()},
	    {"output_dim", train_set.output_dim()}};
	if (dump_mesh) {
		const MeshPtr fine = refined(coarse, cfg.refine_steps);
		write_text(join(out_dir, "coarse_mesh.json"), mesh_to_json(*coarse) + "\n");
		write_text(join(out_dir, "fine_mesh.json"), mesh_to_json(*fine) + "\n");
		manifest["outputs"].push_back("coarse_mesh.json");
		manifest["outputs"].push_back("fine_mesh.json");
	}
	write_manifest(out_dir, manifest);
	return manifest;
}

nlohmann::json cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
	cfg.validate();
	ensure_dir(out_dir);
	const TrainedModel model = run_training(cfg);
	save_model(join(out_dir, "model.bin"), model);

	std::vector<std::vector<double>> rows;
	for (const auto& r : model.result.log)
		rows.push_back({static_cast<double>(r.epoch), r.train_loss, r.val_mse, r.c_w});
	write_csv(join(out_dir, "training_log.csv"), {"epoch", "train_loss", "val_mse", "c_w"},
	          rows);

	nlohmann::json manifest = model.manifest;
	manifest["command"] = "train";
	manifest["outputs"] = {"model.bin", "training_log.csv"};
	write_manifest(out_dir, manifest);
	return manifest;
}

nlohmann::json cmd_eval(const ExperimentConfig& cfg, const std::string& model_path,
                        const std::string& out_dir) {
	cfg.validate();
	ensure_dir(out_dir);
	nlohmann::json meta;
	const Mlp net = load_checkpoint(model_path, &meta);
	if (!meta.contains("scaler"))
		throw ConfigError("checkpoint carries no scaler; cannot evaluate " + model_path);
	const Scaler scaler = scaler_from_json(meta["scaler"]);

	const EvalStats stats = evaluate_model(net, scaler, cfg);
	write_csv(join(out_dir, "errors.csv"), eval_header("coarse_h"),
	          {eval_row(make_mesh(cfg.domain, cfg.coarse_nx, cfg.coarse_ny)->h, stats)});

	nlohmann::json manifest = {{"command", "eval"},
	                           {"config", to_json(cfg)},
	                           {"model", model_path},
	                           {"outputs", {"errors.csv"}},
	                           {"errors", stats_to_json(stats)}};
	write_manifest(out_dir, manifest);
	return manifest;
}

nlohmann::json cmd_convergence(const ExperimentConfig& cfg, const std::vector<int>& coarse_sizes,
                               const std::string& out_dir, bool zero_network) {
	cfg.validate();
	if (coarse_sizes.empty()) throw ConfigError("convergence needs at least one mesh size");
	ensure_dir(out_dir);

	std::vector<std::vector<double>> rows;
	nlohmann::json runs = nlohmann::json::array();
	for (std::size_t i = 0; i < coarse_sizes.size(); ++i) {
		// rows share every seed: the same problems on a sequence of meshes
		ExperimentConfig run = cfg;
		run.coarse_nx = coarse_sizes[i];
		run.coarse_ny = coarse_sizes[i];
		run.validate();

		EvalStats stats;
		nlohmann::json training = nullptr;
		if (zero_network) {
			// ablation: inspect the pure two-level errors without a network
			Mlp zero = init_mlp(run.network_dims(), Activation::relu, 0);
			for (auto& w : zero.weights) w.setZero();
			Scaler identity;
			identity.mode = Scaling::none;
			const int npp = run.network_dims().back();
			identity.in_shift = Eigen::VectorXd::Zero(4 + npp);
			identity.in_scale = Eigen::VectorXd::Ones(4 + npp);
			identity.out_shift = Eigen::VectorXd::Zero(npp);
			identity.out_scale = Eigen::VectorXd::Ones(npp);
			stats = evaluate_model(zero, identity, run);
		} else {
			const TrainedModel model = run_training(run);
			stats = evaluate_model(model.net, model.scaler, run);
			training = model.manifest["training"];
		}
		const double h = make_mesh(run.domain, run.coarse_nx, run.coarse_ny)->h;
		rows.push_back(eval_row(h, stats));
		runs.push_back({{"coarse_nx", run.coarse_nx},
		                {"coarse_h", h},
		                {"errors", stats_to_json(stats)},
		                {"training", training}});
	}
	write_csv(join(out_dir, "convergence.csv"), eval_header("coarse_h"), rows);

	nlohmann::json manifest = {{"command", "convergence"},
	                           {"config", to_json(cfg)},
	                           {"zero_network", zero_network},
	                           {"outputs", {"convergence.csv"}},
	                           {"runs", runs}};
	write_manifest(out_dir, manifest);
	return manifest;
}

nlohmann::json cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas,
                         const std::string& out_dir) {
	cfg.validate();
	if (alphas.empty()) throw ConfigError("sweep needs at least one alpha");
	ensure_dir(out_dir);

	std::vector<std::string> header = eval_header("alpha");
	header.push_back("c_w");
	header.push_back("best_val_mse");

	std::vector<std::vector<double>> rows;
	nlohmann::json runs = nlohmann::json::array();
	for (double alpha : alphas) {
		ExperimentConfig run = cfg;  // same data and init: isolates the penalty
		run.alpha = alpha;
		run.validate();
		const TrainedModel model = run_training(run);
		const EvalStats stats = evaluate_model(model.net, model.scaler, run);
		const double c_w = model.manifest["training"]["spectral_bound"].get<double>();

		std::vector<double> row = eval_row(alpha, stats);
		row.push_back(c_w);
		row.push_back(model.result.best_val_mse);
		rows.push_back(row);
		runs.push_back({{"alpha", alpha},
		                {"errors", stats_to_json(stats)},
		                {"training", model.manifest["training"]}});
	}
	write_csv(join(out_dir, "sweep.csv"), header, rows);

	nlohmann::json manifest = {{"command", "sweep"},
	                           {"config", to_json(cfg)},
	                           {"outputs", {"sweep.csv"}},
	                           {"runs", runs}};
	write_manifest(out_dir, manifest);
	return manifest;
}

nlohmann::json cmd_preprocessing(const ExperimentConfig& cfg, int n_seeds,
                                 const std::string& out_dir) {
	cfg.validate();
	if (n_seeds < 1) throw ConfigError("preprocessing study needs at least one seed");
	ensure_dir(out_dir);

	std::vector<std::string> header = {"scaling",      "seed_index",   "err_uH_nodal",
	                                   "err_uH_l2",    "err_uh_nodal", "err_uh_l2",
	                                   "err_uN_nodal", "err_uN_l2",    "best_val_mse"};
	const Scaling modes[] = {Scaling::none, Scaling::minmax, Scaling::standardize};

	std::vector<std::vector<double>> rows;
	nlohmann::json runs = nlohmann::json::array();
	for (int m = 0; m < 3; ++m) {
		for (int s = 0; s < n_seeds; ++s) {
			ExperimentConfig run = derived_seeds(cfg, static_cast<std::uint64_t>(s) * 3);
			run.preprocessing = modes[m];
			const TrainedModel model = run_training(run);
			const EvalStats stats = evaluate_model(model.net, model.scaler, run);

			rows.push_back({static_cast<double>(m), static_cast<double>(s), stats.nodal_uH,
			                stats.l2_uH, stats.nodal_uh, stats.l2_uh, stats.nodal_uN,
			                stats.l2_uN, model.result.best_val_mse});
			runs.push_back({{"scaling", to_string(modes[m])},
			                {"seed_index", s},
			                {"errors", stats_to_json(stats)},
			                {"training", model.manifest["training"]}});
		}
	}
	write_csv(join(out_dir, "preprocessing.csv"), header, rows);

	nlohmann::json manifest = {
	    {"command", "preprocessing"},
	    {"config", to_json(cfg)},
	    {"n_seeds", n_seeds},
	    {"scaling_codes", {{"0", "none"}, {"1", "minmax"}, {"2", "standardize"}}},
	    {"outputs", {"preprocessing.csv"}},
	    {"runs", runs}};
	write_manifest(out_dir, manifest);
	return manifest;
}

nlohmann::json cmd_generalize(const ExperimentConfig& cfg, const Rect& eval_domain, int eval_nx,
                              int eval_ny, const RhsFunction& eval_rhs,
                              const std::string& out_dir) {
	cfg.validate();
	ensure_dir(out_dir);
	const TrainedModel model = run_training(cfg);

	// row 0: sampled test problems on the training domain
	const EvalStats on_train_domain = evaluate_model(model.net, model.scaler, cfg);
	// row 1: one fixed rhs on the unseen domain, same patch geometry
	const EvalStats on_eval_domain =
	    evaluate_problems(model.net, model.scaler, eval_domain, eval_nx, eval_ny,
	                      cfg.refine_steps, {eval_rhs}, cfg.solver());

	std::vector<std::vector<double>> rows = {eval_row(0.0, on_train_domain),
	                                         eval_row(1.0, on_eval_domain)};
	write_csv(join(out_dir, "generalize.csv"), eval_header("domain_index"), rows);

	nlohmann::json manifest = {
	    {"command", "generalize"},
	    {"config", to_json(cfg)},
	    {"eval_domain", rect_to_json(eval_domain)},
	    {"eval_nx", eval_nx},
	    {"eval_ny", eval_ny},
	    {"eval_rhs", {eval_rhs.c1, eval_rhs.c2, eval_rhs.c3, eval_rhs.c4}},
	    {"domain_codes", {{"0", "training domain"}, {"1", "evaluation domain"}}},
	    {"outputs", {"generalize.csv"}},
	    {"training", model.manifest["training"]},
	    {"errors_training_domain", stats_to_json(on_train_domain)},
	    {"errors_eval_domain", stats_to_json(on_eval_domain)}};
	write_manifest(out_dir, manifest);
	return manifest;
}

}  // namespace femnn
