#include <doctest.h>

#include "femnn/hybrid.hpp"

using namespace femnn;

namespace {

struct TwoLevel {
	MeshPtr coarse;
	MeshPtr fine;
	PatchSet patches;
};

TwoLevel two_level(const Rect& rect, int nx, int ny, int refine_steps) {
	TwoLevel t;
	t.coarse = make_mesh(rect, nx, ny);
	t.fine = t.coarse;
	for (int s = 0; s < refine_steps; ++s) t.fine = refine(t.fine);
	t.patches = build_patches(*t.coarse, *t.fine);
	return t;
}

}  // namespace

TEST_CASE("exact per-patch corrections rebuild the fine solution") {
	for (int k : {1, 2}) {
		const TwoLevel t = two_level({0, 1, 0, 1}, 8, 8, k);
		RhsSampler sampler(11);
		const DataSet ds = generate(sampler, t.coarse, k, 3);

		RhsSampler replay(11);
		FemSystem coarse_sys = assemble_matrix(t.coarse);
		FemSystem fine_sys = assemble_matrix(t.fine);
		for (int p = 0; p < ds.n_problems; ++p) {
			const RhsFunction f = replay.next();
			set_load(coarse_sys, f, 3);
			set_load(fine_sys, f, 3);
			const FemSolution u_H = solve_cg(coarse_sys).solution;
			const FemSolution u_h = solve_cg(fine_sys).solution;

			const auto block = ds.targets.middleCols(
			    static_cast<Eigen::Index>(p) * ds.n_patches, ds.n_patches);
			const FemSolution u_N = correct_with_patches(block, u_H, t.patches, t.fine);
			CHECK((u_N.coeffs - u_h.coeffs).cwiseAbs().maxCoeff() <= 1e-12);
		}
	}
}

TEST_CASE("restricting and accumulating reproduces any nodal field") {
	std::mt19937_64 rng(17);
	for (int k : {1, 2}) {
		const TwoLevel t = two_level({0, 1, 0, 1}, 4, 4, k);
		for (int trial = 0; trial < 20; ++trial) {
			Eigen::VectorXd v(t.fine->n_nodes());
			for (int n = 0; n < t.fine->n_nodes(); ++n) v[n] = 2.0 * uniform01(rng) - 1.0;

			Eigen::MatrixXd values(t.patches.nodes_per_patch(), t.patches.n_patches());
			for (int q = 0; q < t.patches.n_patches(); ++q)
				for (int l = 0; l < t.patches.nodes_per_patch(); ++l)
					values(l, q) = v[t.patches.patches[q].fine_nodes[l]];

			const Eigen::VectorXd back = accumulate_patches(values, t.patches, *t.fine);
			CHECK((back - v).cwiseAbs().maxCoeff() <= 1e-14);
		}
	}
}

TEST_CASE("shared nodes average contributions by multiplicity") {
	const TwoLevel t = two_level({0, 1, 0, 1}, 2, 2, 1);  // fine mesh is 4x4
	Eigen::MatrixXd values =
	    Eigen::MatrixXd::Zero(t.patches.nodes_per_patch(), t.patches.n_patches());
	values.col(0).setOnes();  // only the SW patch contributes

	const Eigen::VectorXd field = accumulate_patches(values, t.patches, *t.fine);
	const MeshLevel& fine = *t.fine;
	CHECK(field[fine.node_id(1, 1)] == 1.0);    // interior to the SW patch
	CHECK(field[fine.node_id(2, 1)] == 0.5);    // edge shared with the SE patch
	CHECK(field[fine.node_id(1, 2)] == 0.5);    // edge shared with the NW patch
	CHECK(field[fine.node_id(2, 2)] == 0.25);   // corner shared by all four
	CHECK(field[fine.node_id(3, 1)] == 0.0);    // interior to the SE patch
	CHECK(field[fine.node_id(0, 0)] == 1.0);    // domain corner, one owner

	Eigen::MatrixXd wrong(values.rows() + 1, values.cols());
	CHECK_THROWS_AS(accumulate_patches(wrong, t.patches, *t.fine), StructuralError);
}

TEST_CASE("patch inputs match the dataset generator bit for bit") {
	const TwoLevel t = two_level({0, 1, 0, 1}, 4, 4, 1);
	RhsSampler sampler(23);
	const DataSet ds = generate(sampler, t.coarse, 1, 2);

	RhsSampler replay(23);
	FemSystem coarse_sys = assemble_matrix(t.coarse);
	for (int p = 0; p < ds.n_problems; ++p) {
		const RhsFunction f = replay.next();
		set_load(coarse_sys, f, 3);
		const FemSolution u_H = solve_cg(coarse_sys).solution;
		const Eigen::MatrixXd x = patch_inputs(u_H, f, t.patches, t.fine);
		const auto block =
		    ds.inputs.middleCols(static_cast<Eigen::Index>(p) * ds.n_patches, ds.n_patches);
		CHECK(x == block);
	}

	// corner entries follow the documented SW, SE, NW, NE order
	FemSolution ids{t.coarse, Eigen::VectorXd::LinSpaced(t.coarse->n_nodes(), 0,
	                                                     t.coarse->n_nodes() - 1)};
	const Eigen::VectorXd f0 = Eigen::VectorXd::Zero(t.fine->n_nodes());
	const Patch& patch = t.patches.patches[1];  // second cell of the bottom row
	const Eigen::VectorXd x = patch_input(ids, f0, patch);
	const MeshLevel& coarse = *t.coarse;
	CHECK(x[0] == coarse.node_id(1, 0));
	CHECK(x[1] == coarse.node_id(2, 0));
	CHECK(x[2] == coarse.node_id(1, 1));
	CHECK(x[3] == coarse.node_id(2, 1));

	const TwoLevel other = two_level({0, 1, 0, 1}, 5, 5, 1);
	CHECK_THROWS_AS(patch_inputs(ids, RhsFunction{}, other.patches, other.fine),
	                StructuralError);
}

TEST_CASE("a zero network returns the injected coarse solution") {
	const TwoLevel t = two_level({0, 1, 0, 1}, 4, 4, 1);
	RhsSampler sampler(31);
	const DataSet ds = generate(sampler, t.coarse, 1, 4);
	const Scaler scaler = fit_scaler(ds, Scaling::standardize);

	Mlp zero = init_mlp({ds.input_dim(), 8, ds.output_dim()}, Activation::relu, 1);
	for (auto& w : zero.weights) w.setZero();
	// prediction in scaled space is 0; unscaling shifts by the target mean,
	// so use a scaler with zero shift to get the exact injection back
	Scaler plain = fit_scaler(ds, Scaling::none);

	RhsSampler replay(31);
	const RhsFunction f = replay.next();
	const FemSolution u_H = solve_cg(assemble(t.coarse, f)).solution;
	const FemSolution u_N = predict_hybrid(zero, plain, u_H, f, t.patches, t.fine);
	const FemSolution injected = inject(u_H, t.fine);
	CHECK((u_N.coeffs - injected.coeffs).cwiseAbs().maxCoeff() == 0.0);

	// a real scaler and network must reproduce the manual pipeline exactly
	const Mlp net = init_mlp({ds.input_dim(), 16, ds.output_dim()}, Activation::relu, 2);
	const FemSolution via_api = predict_hybrid(net, scaler, u_H, f, t.patches, t.fine);
	const Eigen::MatrixXd x = patch_inputs(u_H, f, t.patches, t.fine);
	const Eigen::MatrixXd pred =
	    scaler.inverse_targets(forward_batch(net, scaler.transform_inputs(x)));
	FemSolution manual = correct_with_patches(pred, u_H, t.patches, t.fine);
	for (int n = 0; n < t.fine->n_nodes(); ++n)
		if (t.fine->on_boundary[n]) manual.coeffs[n] = 0.0;
	CHECK(via_api.coeffs == manual.coeffs);

	// boundary condition survives arbitrary network output
	for (int n = 0; n < t.fine->n_nodes(); ++n)
		if (t.fine->on_boundary[n]) CHECK(via_api.coeffs[n] == 0.0);

	Mlp narrow = init_mlp({ds.input_dim() - 1, 8, ds.output_dim()}, Activation::relu, 3);
	CHECK_THROWS_AS(predict_hybrid(narrow, plain, u_H, f, t.patches, t.fine),
	                StructuralError);
	CHECK_THROWS_AS(predict_hybrid(net, Scaler{}, u_H, f, t.patches, t.fine),
	                StructuralError);
}

TEST_CASE("an overfit network beats the coarse solution on its training data") {
	const TwoLevel t = two_level({0, 1, 0, 1}, 2, 2, 1);
	RhsSampler sampler(41);
	const DataSet ds = generate(sampler, t.coarse, 1, 8);
	const Scaler scaler = fit_scaler(ds, Scaling::standardize);

	Mlp net = init_mlp({ds.input_dim(), 64, ds.output_dim()}, Activation::relu, 5);
	const Eigen::MatrixXd x = scaler.transform_inputs(ds.inputs);
	const Eigen::MatrixXd z = scaler.transform_targets(ds.targets);
	TrainConfig cfg;
	cfg.epochs = 400;
	cfg.batch_size = ds.n_samples();
	cfg.lr = 5e-3;
	cfg.patience = 400;
	train(net, x, z, x, z, cfg);

	RhsSampler replay(41);
	FemSystem coarse_sys = assemble_matrix(t.coarse);
	FemSystem fine_sys = assemble_matrix(t.fine);
	double err_N = 0.0, err_H = 0.0;
	for (int p = 0; p < ds.n_problems; ++p) {
		const RhsFunction f = replay.next();
		set_load(coarse_sys, f, 3);
		set_load(fine_sys, f, 3);
		const FemSolution u_H = solve_cg(coarse_sys).solution;
		const FemSolution u_h = solve_cg(fine_sys).solution;
		const FemSolution u_N = predict_hybrid(net, scaler, u_H, f, t.patches, t.fine);
		err_N += nodal_l2(u_N, u_h);
		err_H += nodal_l2(inject(u_H, t.fine), u_h);
	}
	CHECK(err_N < 0.5 * err_H);
}
