#include "femnn/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "dataset files are little-endian; big-endian hosts need byte swaps");

namespace femnn {

std::string to_string(Scaling s) {
	switch (s) {
		case Scaling::none: return "none";
		case Scaling::minmax: return "minmax";
		case Scaling::standardize: return "standardize";
	}
	throw StructuralError("unknown scaling mode");
}

Scaling scaling_from_string(const std::string& name) {
	if (name == "none") return Scaling::none;
	if (name == "minmax") return Scaling::minmax;
	if (name == "standardize") return Scaling::standardize;
	throw ConfigError("unknown scaling mode: " + name);
}

namespace {

Eigen::VectorXd safe_inverse(const Eigen::VectorXd& scale) {
	Eigen::VectorXd inv(scale.size());
	for (Eigen::Index i = 0; i < scale.size(); ++i)
		inv[i] = scale[i] != 0.0 ? 1.0 / scale[i] : 0.0;  // constant feature -> 0
	return inv;
}

Eigen::MatrixXd apply(const Eigen::MatrixXd& x, const Eigen::VectorXd& shift,
                      const Eigen::VectorXd& scale) {
	const Eigen::VectorXd inv = safe_inverse(scale);
	return ((x.colwise() - shift).array().colwise() * inv.array()).matrix();
}

// Column-wise stats over each feature (matrix row).
void fit_rows(const Eigen::MatrixXd& data, Scaling mode, bool divide_by_variance,
              Eigen::VectorXd& shift, Eigen::VectorXd& scale, int& n_constant) {
	const Eigen::Index dim = data.rows();
	const double n = static_cast<double>(data.cols());
	shift.resize(dim);
	scale.resize(dim);
	for (Eigen::Index i = 0; i < dim; ++i) {
		const auto row = data.row(i);
		switch (mode) {
			case Scaling::none:
				shift[i] = 0.0;
				scale[i] = 1.0;
				break;
			case Scaling::minmax:
				shift[i] = row.minCoeff();
				scale[i] = row.maxCoeff() - row.minCoeff();
				break;
			case Scaling::standardize: {
				const double mean = row.sum() / n;
				const double var = (row.array() - mean).square().sum() / n;
				shift[i] = mean;
				scale[i] = divide_by_variance ? var : std::sqrt(var);
				break;
			}
		}
		if (mode != Scaling::none && scale[i] == 0.0) ++n_constant;
	}
}

}  // namespace

Eigen::MatrixXd Scaler::transform_inputs(const Eigen::MatrixXd& x) const {
	return apply(x, in_shift, in_scale);
}

Eigen::MatrixXd Scaler::transform_targets(const Eigen::MatrixXd& z) const {
	return apply(z, out_shift, out_scale);
}

Eigen::VectorXd Scaler::transform_input(const Eigen::VectorXd& x) const {
	return apply(x, in_shift, in_scale).col(0);
}

Eigen::VectorXd Scaler::inverse_target(const Eigen::VectorXd& z) const {
	return out_shift + out_scale.cwiseProduct(z);
}

Eigen::MatrixXd Scaler::inverse_targets(const Eigen::MatrixXd& z) const {
	return (z.array().colwise() * out_scale.array()).colwise() + out_shift.array();
}

Scaler fit_scaler(const DataSet& train, Scaling mode, bool divide_by_variance) {
	if (train.n_samples() == 0) throw StructuralError("cannot fit a scaler on no samples");
	Scaler s;
	s.mode = mode;
	s.divide_by_variance = divide_by_variance;
	int n_constant = 0;
	fit_rows(train.inputs, mode, divide_by_variance, s.in_shift, s.in_scale, n_constant);
	fit_rows(train.targets, mode, divide_by_variance, s.out_shift, s.out_scale, n_constant);
	if (n_constant > 0)
		std::cerr << "warning: " << n_constant
		          << " constant feature(s) collapse to 0 under " << to_string(mode) << "\n";
	return s;
}

DataSet generate(RhsSampler& sampler, MeshPtr coarse, int refine_steps, int n_problems,
                 const SolverOptions& opts) {
	if (refine_steps < 1) throw ConfigError("refine_steps must be at least 1");
	if (n_problems < 1) throw ConfigError("n_problems must be at least 1");

	MeshPtr fine = coarse;
	for (int s = 0; s < refine_steps; ++s) fine = refine(fine);
	const PatchSet patches = build_patches(*coarse, *fine);
	const int npp = patches.nodes_per_patch();

	DataSet ds;
	ds.n_problems = n_problems;
	ds.n_patches = patches.n_patches();
	ds.refine_steps = refine_steps;
	ds.coarse_h = coarse->h;
	ds.domain = coarse->rect;
	ds.seed = sampler.seed;
	ds.inputs.resize(4 + npp, static_cast<Eigen::Index>(n_problems) * ds.n_patches);
	ds.targets.resize(npp, ds.inputs.cols());

	FemSystem coarse_sys = assemble_matrix(coarse);
	FemSystem fine_sys = assemble_matrix(fine);
	Eigen::VectorXd f_at_fine_nodes(fine->n_nodes());

	for (int p = 0; p < n_problems; ++p) {
		const RhsFunction f = sampler.next();
		set_load(coarse_sys, f, opts.quad_order);
		set_load(fine_sys, f, opts.quad_order);
		const FemSolution u_H = solve_cg(coarse_sys, opts.cg_tol, opts.cg_max_iter).solution;
		const FemSolution u_h = solve_cg(fine_sys, opts.cg_tol, opts.cg_max_iter).solution;
		const FemSolution u_H_fine = inject(u_H, fine);
		const Eigen::VectorXd z = u_h.coeffs - u_H_fine.coeffs;
		for (int n = 0; n < fine->n_nodes(); ++n)
			f_at_fine_nodes[n] = f(fine->nodes[n][0], fine->nodes[n][1]);

		for (int q = 0; q < ds.n_patches; ++q) {
			const Patch& patch = patches.patches[q];
			const Eigen::Index col = static_cast<Eigen::Index>(p) * ds.n_patches + q;
			for (int c = 0; c < 4; ++c)
				ds.inputs(c, col) = u_H.coeffs[patch.coarse_nodes[c]];
			for (int l = 0; l < npp; ++l) {
				ds.inputs(4 + l, col) = f_at_fine_nodes[patch.fine_nodes[l]];
				ds.targets(l, col) = z[patch.fine_nodes[l]];
			}
		}
	}
	return ds;
}

std::pair<DataSet, DataSet> generate_split(MeshPtr coarse, int refine_steps, int n_problems,
                                           std::uint64_t seed, const SolverOptions& opts) {
	RhsSampler train_sampler(seed);
	RhsSampler test_sampler(seed + 1);
	return {generate(train_sampler, coarse, refine_steps, n_problems, opts),
	        generate(test_sampler, coarse, refine_steps, n_problems, opts)};
}

namespace {

constexpr char kMagic[8] = {'F', 'E', 'M', 'N', 'N', 'D', 'S', '1'};

}  // namespace

nlohmann::json scaler_to_json(const Scaler& s) {
	auto vec = [](const Eigen::VectorXd& v) {
		return std::vector<double>(v.data(), v.data() + v.size());
	};
	return {{"mode", to_string(s.mode)},
	        {"divide_by_variance", s.divide_by_variance},
	        {"in_shift", vec(s.in_shift)},
	        {"in_scale", vec(s.in_scale)},
	        {"out_shift", vec(s.out_shift)},
	        {"out_scale", vec(s.out_scale)}};
}

Scaler scaler_from_json(const nlohmann::json& j) {
	auto vec = [](const nlohmann::json& a) {
		Eigen::VectorXd v(a.size());
		for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
		return v;
	};
	Scaler s;
	s.mode = scaling_from_string(j.at("mode").get<std::string>());
	s.divide_by_variance = j.at("divide_by_variance").get<bool>();
	s.in_shift = vec(j.at("in_shift"));
	s.in_scale = vec(j.at("in_scale"));
	s.out_shift = vec(j.at("out_shift"));
	s.out_scale = vec(j.at("out_scale"));
	return s;
}

void save_dataset(const std::string& path, const DataSet& ds, const Scaler* scaler) {
	nlohmann::json header = {
	    {"version", 1},
	    {"N_T", ds.n_problems},
	    {"N_P", ds.n_patches},
	    {"k", ds.refine_steps},
	    {"H", ds.coarse_h},
	    {"input_dim", ds.input_dim()},
	    {"output_dim", ds.output_dim()},
	    {"seed", ds.seed},
	    {"domain", {ds.domain.x0, ds.domain.x1, ds.domain.y0, ds.domain.y1}},
	    {"preprocessing", scaler ? scaler_to_json(*scaler) : nlohmann::json(nullptr)},
	};
	const std::string head = header.dump();

	std::ofstream out(path, std::ios::binary);
	if (!out) throw ConfigError("cannot write dataset file: " + path);
	out.write(kMagic, sizeof(kMagic));
	const std::uint64_t len = head.size();
	out.write(reinterpret_cast<const char*>(&len), sizeof(len));
	out.write(head.data(), static_cast<std::streamsize>(head.size()));
	out.write(reinterpret_cast<const char*>(ds.inputs.data()),
	          static_cast<std::streamsize>(sizeof(double) * ds.inputs.size()));
	out.write(reinterpret_cast<const char*>(ds.targets.data()),
	          static_cast<std::streamsize>(sizeof(double) * ds.targets.size()));
	if (!out) throw ConfigError("short write on dataset file: " + path);
}

DataSet load_dataset(const std::string& path, Scaler* scaler_out) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw ConfigError("cannot read dataset file: " + path);
	char magic[8];
	in.read(magic, sizeof(magic));
	if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
		throw ConfigError("not a dataset file: " + path);
	std::uint64_t len = 0;
	in.read(reinterpret_cast<char*>(&len), sizeof(len));
	std::string head(len, '\0');
	in.read(head.data(), static_cast<std::streamsize>(len));
	const nlohmann::json header = nlohmann::json::parse(head);

	DataSet ds;
	ds.n_problems = header.at("N_T").get<int>();
	ds.n_patches = header.at("N_P").get<int>();
	ds.refine_steps = header.at("k").get<int>();
	ds.coarse_h = header.at("H").get<double>();
	ds.seed = header.at("seed").get<std::uint64_t>();
	const auto& dom = header.at("domain");
	ds.domain = {dom[0].get<double>(), dom[1].get<double>(), dom[2].get<double>(),
	             dom[3].get<double>()};
	const Eigen::Index cols = static_cast<Eigen::Index>(ds.n_problems) * ds.n_patches;
	ds.inputs.resize(header.at("input_dim").get<int>(), cols);
	ds.targets.resize(header.at("output_dim").get<int>(), cols);
	in.read(reinterpret_cast<char*>(ds.inputs.data()),
	        static_cast<std::streamsize>(sizeof(double) * ds.inputs.size()));
	in.read(reinterpret_cast<char*>(ds.targets.data()),
	        static_cast<std::streamsize>(sizeof(double) * ds.targets.size()));
	if (!in) throw ConfigError("truncated dataset file: " + path);

	if (scaler_out) {
		const auto& pre = header.at("preprocessing");
		*scaler_out = pre.is_null() ? Scaler{} : scaler_from_json(pre);
	}
	return ds;
}

}  // namespace femnn
