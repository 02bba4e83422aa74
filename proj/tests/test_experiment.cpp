#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "femnn/experiment.hpp"

using namespace femnn;

namespace {

// small enough to train in milliseconds, big enough to exercise every path
ExperimentConfig tiny_config() {
	ExperimentConfig cfg;
	cfg.coarse_nx = 2;
	cfg.coarse_ny = 2;
	cfg.refine_steps = 1;
	cfg.n_train = 16;
	cfg.n_val = 4;
	cfg.n_eval = 8;
	cfg.hidden_layers = 1;
	cfg.hidden_width = 32;
	cfg.epochs = 5;
	cfg.batch_size = 16;
	cfg.patience = 5;
	return cfg;
}

std::string slurp(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	REQUIRE(in);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

// every cell must be a finite number that strtod consumes completely
std::vector<std::vector<double>> parse_csv(const std::string& path, std::size_t n_cols) {
	std::ifstream in(path);
	REQUIRE(in);
	std::string line;
	REQUIRE(std::getline(in, line));
	CHECK(std::count(line.begin(), line.end(), ',') == static_cast<long>(n_cols) - 1);

	std::vector<std::vector<double>> rows;
	while (std::getline(in, line)) {
		std::vector<double> row;
		std::stringstream ss(line);
		std::string cell;
		while (std::getline(ss, cell, ',')) {
			char* end = nullptr;
			const double v = std::strtod(cell.c_str(), &end);
			CHECK(end == cell.c_str() + cell.size());
			CHECK(std::isfinite(v));
			row.push_back(v);
		}
		CHECK(row.size() == n_cols);
		rows.push_back(row);
	}
	return rows;
}

Scaler identity_scaler(int in_dim, int out_dim) {
	Scaler s;
	s.in_shift = Eigen::VectorXd::Zero(in_dim);
	s.in_scale = Eigen::VectorXd::Ones(in_dim);
	s.out_shift = Eigen::VectorXd::Zero(out_dim);
	s.out_scale = Eigen::VectorXd::Ones(out_dim);
	return s;
}

}  // namespace

TEST_CASE("configs survive a json round trip and reject bad input") {
	const ExperimentConfig cfg = tiny_config();
	const nlohmann::json j = to_json(cfg);
	const ExperimentConfig back = config_from_json(j);
	CHECK(to_json(back) == j);

	// defaults fill anything the file leaves out
	const ExperimentConfig sparse = config_from_json({{"n_train", 32}});
	CHECK(sparse.n_train == 32);
	CHECK(sparse.coarse_nx == 8);
	CHECK(sparse.preprocessing == Scaling::standardize);

	CHECK_THROWS_AS(config_from_json({{"n_trian", 32}}), ConfigError);  // typo
	CHECK_THROWS_AS(config_from_json({{"n_train", 0}}), ConfigError);
	CHECK_THROWS_AS(config_from_json({{"lr", 0.0}}), ConfigError);
	CHECK_THROWS_AS(config_from_json({{"quad_order", 6}}), ConfigError);
	CHECK_THROWS_AS(config_from_json({{"domain", {0, 1, 0}}}), ConfigError);
	CHECK_THROWS_AS(config_from_json({{"epochs", "many"}}), ConfigError);
	CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);

	// the desk-scale cap opens up under full_scale
	CHECK_THROWS_AS(config_from_json({{"n_train", 30000}}), ConfigError);
	CHECK(config_from_json({{"n_train", 30000}, {"full_scale", true}}).n_train == 30000);

	CHECK_THROWS_AS(load_config("no_such_config.json"), ConfigError);

	ExperimentConfig dims = tiny_config();
	dims.refine_steps = 2;
	dims.hidden_layers = 2;
	dims.hidden_width = 7;
	CHECK(dims.network_dims() == std::vector<int>{29, 7, 7, 25});
}

TEST_CASE("training runs are reproducible end to end") {
	const ExperimentConfig cfg = tiny_config();
	const TrainedModel a = run_training(cfg);
	const TrainedModel b = run_training(cfg);

	REQUIRE(a.net.depth() == b.net.depth());
	for (int l = 0; l < a.net.depth(); ++l) {
		CHECK(a.net.weights[l] == b.net.weights[l]);
		CHECK(a.net.biases[l] == b.net.biases[l]);
	}
	CHECK(a.manifest == b.manifest);
	CHECK(a.result.epochs_run <= cfg.epochs);
	CHECK(static_cast<int>(a.result.log.size()) == a.result.epochs_run);
	CHECK(a.manifest["network"]["parameters"].get<std::int64_t>() ==
	      a.net.parameter_count());
	CHECK(a.manifest["dataset"]["train_samples"].get<int>() == 16 * 4);
}

TEST_CASE("a zero network evaluates to the coarse solution errors") {
	const ExperimentConfig cfg = tiny_config();
	Mlp zero = init_mlp(cfg.network_dims(), Activation::relu, 0);
	for (auto& w : zero.weights) w.setZero();

	const EvalStats s = evaluate_model(zero, identity_scaler(13, 9), cfg);
	CHECK(s.n_problems == cfg.n_eval);
	CHECK(s.nodal_uH > 0.0);
	CHECK(s.nodal_uh > 0.0);
	CHECK(s.nodal_uh < s.nodal_uH);  // the fine mesh beats the coarse mesh
	CHECK(s.l2_uh < s.l2_uH);
	// zero corrections leave exactly the injected coarse solution
	CHECK(s.nodal_uN == doctest::Approx(s.nodal_uH).epsilon(1e-12));
	CHECK(s.l2_uN == doctest::Approx(s.l2_uH).epsilon(1e-12));

	// same call, same numbers
	const EvalStats again = evaluate_model(zero, identity_scaler(13, 9), cfg);
	CHECK(again.nodal_uN == s.nodal_uN);
	CHECK(again.l2_uN == s.l2_uN);

	CHECK_THROWS_AS(
	    evaluate_problems(zero, identity_scaler(13, 9), cfg.domain, 2, 2, 1, {}, cfg.solver()),
	    ConfigError);
}

TEST_CASE("a trained network reduces the unseen-problem error") {
	ExperimentConfig cfg = tiny_config();
	cfg.n_train = 128;
	cfg.n_val = 16;
	cfg.hidden_width = 64;
	cfg.epochs = 120;
	cfg.batch_size = 64;
	cfg.patience = 120;
	cfg.lr = 3e-3;

	const TrainedModel model = run_training(cfg);
	const EvalStats s = evaluate_model(model.net, model.scaler, cfg);
	CHECK(s.nodal_uN < s.nodal_uH);
	CHECK(s.l2_uN < s.l2_uH);
}

TEST_CASE("the train command writes a reloadable, reproducible bundle") {
	const ExperimentConfig cfg = tiny_config();
	const std::string dir = "exp_train_out";
	std::filesystem::remove_all(dir);
	const nlohmann::json manifest = cmd_train(cfg, dir);

	const auto log = parse_csv(dir + "/training_log.csv", 4);
	CHECK(static_cast<int>(log.size()) == manifest["training"]["epochs_run"].get<int>());
	CHECK(log[0][0] == 1.0);  // epochs are 1-based in the log

	nlohmann::json meta;
	const Mlp net = load_checkpoint(dir + "/model.bin", &meta);
	CHECK(net.input_dim() == 13);
	CHECK(net.output_dim() == 9);
	CHECK(meta["config"] == to_json(cfg));
	CHECK_NOTHROW(scaler_from_json(meta["scaler"]));

	const nlohmann::json parsed = nlohmann::json::parse(slurp(dir + "/manifest.json"));
	CHECK(parsed == manifest);

	// byte-identical on a rerun: no timestamps, no hidden state
	const std::string model_bytes = slurp(dir + "/model.bin");
	const std::string log_bytes = slurp(dir + "/training_log.csv");
	const std::string manifest_bytes = slurp(dir + "/manifest.json");
	std::filesystem::remove_all(dir);
	cmd_train(cfg, dir);
	CHECK(slurp(dir + "/model.bin") == model_bytes);
	CHECK(slurp(dir + "/training_log.csv") == log_bytes);
	CHECK(slurp(dir + "/manifest.json") == manifest_bytes);

	const nlohmann::json eval_manifest = cmd_eval(cfg, dir + "/model.bin", "exp_eval_out");
	const auto errors = parse_csv("exp_eval_out/errors.csv", 7);
	REQUIRE(errors.size() == 1);
	CHECK(errors[0][0] == 0.5);  // coarse h on the unit square with 2 cells
	CHECK(eval_manifest["errors"]["err_uN_l2"].get<double>() > 0.0);
	CHECK_THROWS_AS(cmd_eval(cfg, "missing_model.bin", "exp_eval_out"), ConfigError);
}

TEST_CASE("the generate command writes loadable datasets") {
	const ExperimentConfig cfg = tiny_config();
	const std::string dir = "exp_gen_out";
	std::filesystem::remove_all(dir);
	cmd_generate(cfg, dir, true);

	Scaler scaler;
	const DataSet train = load_dataset(dir + "/train.bin", &scaler);
	const DataSet test = load_dataset(dir + "/test.bin");
	CHECK(train.n_samples() == cfg.n_train * 4);
	CHECK(test.n_samples() == train.n_samples());
	CHECK(train.seed == cfg.data_seed);
	CHECK(test.seed == cfg.data_seed + 1);
	CHECK(scaler.mode == cfg.preprocessing);

	CHECK_NOTHROW(
	    nlohmann::json::parse(slurp(dir + "/coarse_mesh.json")));
	CHECK_NOTHROW(nlohmann::json::parse(slurp(dir + "/fine_mesh.json")));
}

TEST_CASE("the convergence command tabulates shrinking errors") {
	ExperimentConfig cfg = tiny_config();
	const std::string dir = "exp_conv_out";
	std::filesystem::remove_all(dir);
	cmd_convergence(cfg, {4, 8}, dir, true);  // 2x2 is still preasymptotic

	const auto rows = parse_csv(dir + "/convergence.csv", 7);
	REQUIRE(rows.size() == 2);
	CHECK(rows[0][0] == 0.25);
	CHECK(rows[1][0] == 0.125);
	// second-order coarse solutions: halving h shrinks the error about 4x
	const double ratio = rows[0][1] / rows[1][1];
	CHECK(ratio > 2.5);
	CHECK(ratio < 6.0);
	// the zero-network ablation pins the hybrid to the coarse error
	CHECK(rows[0][5] == doctest::Approx(rows[0][1]).epsilon(1e-12));

	CHECK_THROWS_AS(cmd_convergence(cfg, {}, dir, true), ConfigError);
}

TEST_CASE("the study commands emit one well-formed row per run") {
	ExperimentConfig cfg = tiny_config();
	cfg.epochs = 2;

	std::filesystem::remove_all("exp_pre_out");
	cmd_preprocessing(cfg, 1, "exp_pre_out");
	const auto pre = parse_csv("exp_pre_out/preprocessing.csv", 9);
	REQUIRE(pre.size() == 3);
	CHECK(pre[0][0] == 0.0);
	CHECK(pre[1][0] == 1.0);
	CHECK(pre[2][0] == 2.0);

	std::filesystem::remove_all("exp_sweep_out");
	cmd_sweep(cfg, {0.0, 1e-2}, "exp_sweep_out");
	const auto sweep = parse_csv("exp_sweep_out/sweep.csv", 9);
	REQUIRE(sweep.size() == 2);
	CHECK(sweep[0][0] == 0.0);
	CHECK(sweep[1][0] == 1e-2);
	CHECK(sweep[0][7] > 0.0);  // c_w of the trained net

	std::filesystem::remove_all("exp_gener_out");
	cmd_generalize(cfg, {0.0, 2.0, 0.0, 1.0}, 4, 2, RhsFunction{1.2, 0.2, 1.4, 0.4},
	               "exp_gener_out");
	const auto gen = parse_csv("exp_gener_out/generalize.csv", 7);
	REQUIRE(gen.size() == 2);
	CHECK(gen[0][0] == 0.0);
	CHECK(gen[1][0] == 1.0);
	for (int c = 1; c < 7; ++c) CHECK(gen[1][c] > 0.0);
}
