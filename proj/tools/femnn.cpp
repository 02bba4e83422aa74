#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>

#include "femnn/experiment.hpp"

using namespace femnn;

namespace {

// every subcommand accepts the same config file + field overrides
struct CommonFlags {
	std::string config_path;
	std::string out_dir;
	std::vector<double> domain;
	int coarse_nx = 0, coarse_ny = 0, refine_steps = 0;
	int n_train = 0, n_val = 0, n_eval = 0;
	int hidden_layers = 0, hidden_width = 0;
	double alpha = 0.0;
	std::string preprocessing;
	bool divide_by_variance = false;
	std::uint64_t data_seed = 0, init_seed = 0, shuffle_seed = 0;
	int epochs = 0, batch_size = 0, patience = 0;
	double lr = 0.0, beta1 = 0.0, beta2 = 0.0, adam_eps = 0.0;
	int quad_order = 0;
	double cg_tol = 0.0;
	int cg_max_iter = 0;
	bool full_scale = false;
};

void add_common_flags(CLI::App* sub, CommonFlags& f) {
	sub->add_option("--config", f.config_path, "JSON config file; flags override its fields")
	    ->check(CLI::ExistingFile);
	sub->add_option("--out", f.out_dir,
	                "output directory (default: $FEMNN_OUT/<command> or femnn_out/<command>)");
	sub->add_option("--domain", f.domain, "domain rectangle x0 x1 y0 y1")->expected(4);
	sub->add_option("--coarse-nx", f.coarse_nx, "coarse cells along x");
	sub->add_option("--coarse-ny", f.coarse_ny, "coarse cells along y");
	sub->add_option("--refine-steps,-k", f.refine_steps, "refinements from coarse to fine");
	sub->add_option("--n-train", f.n_train, "training problems");
	sub->add_option("--n-val", f.n_val, "validation problems");
	sub->add_option("--n-eval", f.n_eval, "evaluation problems");
	sub->add_option("--hidden-layers", f.hidden_layers, "hidden layer count");
	sub->add_option("--hidden-width", f.hidden_width, "hidden layer width");
	sub->add_option("--alpha", f.alpha, "weight-norm penalty strength");
	sub->add_option("--preprocessing", f.preprocessing, "none | minmax | standardize");
	sub->add_flag("--divide-by-variance", f.divide_by_variance,
	              "standardize with variance instead of standard deviation");
	sub->add_option("--data-seed", f.data_seed, "seed for problem sampling");
	sub->add_option("--init-seed", f.init_seed, "seed for network initialization");
	sub->add_option("--shuffle-seed", f.shuffle_seed, "seed for minibatch shuffling");
	sub->add_option("--epochs", f.epochs, "training epochs");
	sub->add_option("--batch-size", f.batch_size, "minibatch size");
	sub->add_option("--patience", f.patience, "early-stopping patience in epochs");
	sub->add_option("--lr", f.lr, "adam learning rate");
	sub->add_option("--beta1", f.beta1, "adam first-moment decay");
	sub->add_option("--beta2", f.beta2, "adam second-moment decay");
	sub->add_option("--adam-eps", f.adam_eps, "adam denominator offset");
	sub->add_option("--quad-order", f.quad_order, "Gauss points per direction (1..5)");
	sub->add_option("--cg-tol", f.cg_tol, "solver relative residual tolerance");
	sub->add_option("--cg-max-iter", f.cg_max_iter, "solver iteration cap");
	sub->add_flag("--full-scale", f.full_scale, "lift the desk-scale training set cap");
}

ExperimentConfig build_config(const CLI::App* sub, const CommonFlags& f) {
	ExperimentConfig cfg;
	if (sub->count("--config")) cfg = load_config(f.config_path);

	auto seen = [&](const char* flag) { return sub->count(flag) > 0; };
	if (seen("--domain")) cfg.domain = {f.domain[0], f.domain[1], f.domain[2], f.domain[3]};
	if (seen("--coarse-nx")) cfg.coarse_nx = f.coarse_nx;
	if (seen("--coarse-ny")) cfg.coarse_ny = f.coarse_ny;
	if (seen("--refine-steps")) cfg.refine_steps = f.refine_steps;
	if (seen("--n-train")) cfg.n_train = f.n_train;
	if (seen("--n-val")) cfg.n_val = f.n_val;
	if (seen("--n-eval")) cfg.n_eval = f.n_eval;
	if (seen("--hidden-layers")) cfg.hidden_layers = f.hidden_layers;
	if (seen("--hidden-width")) cfg.hidden_width = f.hidden_width;
	if (seen("--alpha")) cfg.alpha = f.alpha;
	if (seen("--preprocessing")) cfg.preprocessing = scaling_from_string(f.preprocessing);
	if (seen("--divide-by-variance")) cfg.divide_by_variance = f.divide_by_variance;
	if (seen("--data-seed")) cfg.data_seed = f.data_seed;
	if (seen("--init-seed")) cfg.init_seed = f.init_seed;
	if (seen("--shuffle-seed")) cfg.shuffle_seed = f.shuffle_seed;
	if (seen("--epochs")) cfg.epochs = f.epochs;
	if (seen("--batch-size")) cfg.batch_size = f.batch_size;
	if (seen("--patience")) cfg.patience = f.patience;
	if (seen("--lr")) cfg.lr = f.lr;
	if (seen("--beta1")) cfg.beta1 = f.beta1;
	if (seen("--beta2")) cfg.beta2 = f.beta2;
	if (seen("--adam-eps")) cfg.adam_eps = f.adam_eps;
	if (seen("--quad-order")) cfg.quad_order = f.quad_order;
	if (seen("--cg-tol")) cfg.cg_tol = f.cg_tol;
	if (seen("--cg-max-iter")) cfg.cg_max_iter = f.cg_max_iter;
	if (seen("--full-scale")) cfg.full_scale = f.full_scale;
	cfg.validate();
	return cfg;
}

std::string output_dir(const CLI::App* sub, const CommonFlags& f, const char* command) {
	if (sub->count("--out")) return f.out_dir;
	const char* root = std::getenv("FEMNN_OUT");
	return std::string(root ? root : "femnn_out") + "/" + command;
}

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{"two-level finite element solver with a learned patch correction"};
	app.require_subcommand(1);
	app.footer("example:\n  femnn train --coarse-nx 8 --n-train 512 --epochs 20 --out run1\n"
	           "  femnn eval --model run1/model.bin --coarse-nx 8 --out run1/eval");

	CommonFlags f;
	bool dump_mesh = false;
	std::string model_path;
	std::vector<int> sizes = {4, 8, 16};
	bool zero_network = false;
	std::vector<double> alphas = {0.0, 1e-3, 1e-2, 1e-1};
	int n_seeds = 3;
	std::vector<double> eval_domain = {0.0, 2.0, 0.0, 1.0};
	int eval_nx = 0, eval_ny = 0;
	std::vector<double> eval_rhs = {1.2, 0.2, 1.4, 0.4};

	CLI::App* generate = app.add_subcommand("generate", "write train/test datasets");
	generate->add_flag("--dump-mesh", dump_mesh, "also write the mesh pair as JSON");

	CLI::App* train = app.add_subcommand("train", "train a patch-correction network");

	CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model on test problems");
	eval->add_option("--model", model_path, "checkpoint written by train")->required();

	CLI::App* convergence =
	    app.add_subcommand("convergence", "error table over a sequence of coarse meshes");
	convergence->add_option("--sizes", sizes, "coarse cells per side, one run each");
	convergence->add_flag("--zero-network", zero_network,
	                      "skip training and tabulate the pure two-level errors");

	CLI::App* sweep = app.add_subcommand("sweep", "error and weight-norm table over alpha");
	sweep->add_option("--alphas", alphas, "penalty strengths, one run each");

	CLI::App* preprocessing = app.add_subcommand(
	    "preprocessing", "compare none/minmax/standardize over repeated seeds");
	preprocessing->add_option("--n-seeds", n_seeds, "independent runs per scaling mode");

	CLI::App* generalize =
	    app.add_subcommand("generalize", "train on the config domain, test on another");
	generalize->add_option("--eval-domain", eval_domain, "evaluation rectangle x0 x1 y0 y1")
	    ->expected(4);
	generalize->add_option("--eval-nx", eval_nx, "coarse cells along x (default: keep h)");
	generalize->add_option("--eval-ny", eval_ny, "coarse cells along y (default: keep h)");
	generalize->add_option("--eval-rhs", eval_rhs, "rhs coefficients c1 c2 c3 c4")->expected(4);

	for (CLI::App* sub :
	     {generate, train, eval, convergence, sweep, preprocessing, generalize})
		add_common_flags(sub, f);

	CLI11_PARSE(app, argc, argv);

	try {
		CLI::App* sub = app.get_subcommands().front();
		const ExperimentConfig cfg = build_config(sub, f);
		const std::string out = output_dir(sub, f, sub->get_name().c_str());

		nlohmann::json manifest;
		if (sub == generate) {
			manifest = cmd_generate(cfg, out, dump_mesh);
		} else if (sub == train) {
			manifest = cmd_train(cfg, out);
		} else if (sub == eval) {
			manifest = cmd_eval(cfg, model_path, out);
		} else if (sub == convergence) {
			manifest = cmd_convergence(cfg, sizes, out, zero_network);
		} else if (sub == sweep) {
			manifest = cmd_sweep(cfg, alphas, out);
		} else if (sub == preprocessing) {
			manifest = cmd_preprocessing(cfg, n_seeds, out);
		} else {
			const Rect rect{eval_domain[0], eval_domain[1], eval_domain[2], eval_domain[3]};
			const double h = cfg.domain.width() / cfg.coarse_nx;
			const int nx = eval_nx > 0 ? eval_nx : static_cast<int>(std::lround(rect.width() / h));
			const int ny = eval_ny > 0 ? eval_ny : static_cast<int>(std::lround(rect.height() / h));
			manifest = cmd_generalize(cfg, rect, nx, ny,
			                          RhsFunction{eval_rhs[0], eval_rhs[1], eval_rhs[2], eval_rhs[3]},
			                          out);
		}
		std::cout << "wrote " << out << "\n";
		for (const auto& file : manifest["outputs"]) std::cout << "  " << file.get<std::string>() << "\n";
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
	return 0;
}
