#include <doctest.h>

#include <cstdio>
#include <cstring>

#include "femnn/dataset.hpp"

using namespace femnn;

namespace {

DataSet tiny_feature_set(std::initializer_list<double> xs, std::initializer_list<double> zs) {
	DataSet ds;
	ds.n_problems = static_cast<int>(xs.size());
	ds.n_patches = 1;
	ds.inputs.resize(1, static_cast<Eigen::Index>(xs.size()));
	ds.targets.resize(1, static_cast<Eigen::Index>(zs.size()));
	Eigen::Index i = 0;
	for (double v : xs) ds.inputs(0, i++) = v;
	i = 0;
	for (double v : zs) ds.targets(0, i++) = v;
	return ds;
}

}  // namespace

TEST_CASE("sampler draws stay in range with the right averages") {
	RhsSampler sampler(42);
	double sum_c1 = 0.0, sum_c2 = 0.0;
	const int n = 100000;
	for (int i = 0; i < n; ++i) {
		const RhsFunction f = sampler.next();
		CHECK(f.c1 >= 1.0);
		CHECK(f.c1 < 1.5);
		CHECK(f.c2 >= 0.0);
		CHECK(f.c2 < 1.0);
		CHECK(f.c3 >= 1.0);
		CHECK(f.c3 < 1.5);
		CHECK(f.c4 >= 0.0);
		CHECK(f.c4 < 1.0);
		sum_c1 += f.c1;
		sum_c2 += f.c2;
	}
	// three-sigma bands around the uniform means
	CHECK(std::abs(sum_c1 / n - 1.25) < 2e-3);
	CHECK(std::abs(sum_c2 / n - 0.5) < 5e-3);
}

TEST_CASE("generation shapes one sample per patch per problem") {
	const auto coarse = make_mesh({0, 1, 0, 1}, 4, 4);
	RhsSampler sampler(7);
	const DataSet ds = generate(sampler, coarse, 1, 3);

	CHECK(ds.n_patches == 16);
	CHECK(ds.n_samples() == 48);
	CHECK(ds.input_dim() == 13);   // 4 coarse corners + 9 fine rhs values
	CHECK(ds.output_dim() == 9);
	CHECK(ds.problem_of(17) == 1);
	CHECK(ds.patch_of(17) == 1);
	CHECK(ds.coarse_h == 0.25);

	const auto coarse2 = make_mesh({0, 1, 0, 1}, 4, 4);
	RhsSampler s2(7);
	const DataSet again = generate(s2, coarse2, 2, 1);
	CHECK(again.input_dim() == 29);  // 4 + 25
	CHECK(again.output_dim() == 25);

	CHECK_THROWS_AS(generate(sampler, coarse, 0, 1), ConfigError);
	CHECK_THROWS_AS(generate(sampler, coarse, 1, 0), ConfigError);
}

TEST_CASE("samples reassemble the fine solution exactly") {
	const auto coarse = make_mesh({0, 1, 0, 1}, 4, 4);
	const auto fine = refine(coarse);
	const PatchSet patches = build_patches(*coarse, *fine);
	const std::uint64_t seed = 2026;

	RhsSampler sampler(seed);
	const DataSet ds = generate(sampler, coarse, 1, 2);

	// replay the generator's draws to get the same problems
	RhsSampler replay(seed);
	for (int p = 0; p < ds.n_problems; ++p) {
		const RhsFunction f = replay.next();
		const FemSolution u_H = solve_cg(assemble(coarse, f)).solution;
		const FemSolution u_h = solve_cg(assemble(fine, f)).solution;
		const FemSolution u_H_fine = inject(u_H, fine);

		Eigen::VectorXd rebuilt = u_H_fine.coeffs;
		for (int q = 0; q < ds.n_patches; ++q) {
			const Eigen::Index col = static_cast<Eigen::Index>(p) * ds.n_patches + q;
			const Patch& patch = patches.patches[q];

			// coarse corner block in the order SW, SE, NW, NE
			for (int c = 0; c < 4; ++c)
				CHECK(ds.inputs(c, col) == u_H.coeffs[patch.coarse_nodes[c]]);
			// rhs block matches f at the patch fine nodes
			for (int l = 0; l < patches.nodes_per_patch(); ++l) {
				const auto& xy = fine->nodes[patch.fine_nodes[l]];
				CHECK(ds.inputs(4 + l, col) == f(xy[0], xy[1]));
			}
			// averaged scatter of targets on top of the injected coarse field
			for (int l = 0; l < patches.nodes_per_patch(); ++l) {
				const int node = patch.fine_nodes[l];
				rebuilt[node] += ds.targets(l, col) / patches.multiplicity[node];
			}
		}
		CHECK((rebuilt - u_h.coeffs).cwiseAbs().maxCoeff() <= 1e-12);
	}
}

TEST_CASE("generation is deterministic and the test split is independent") {
	const auto coarse = make_mesh({0, 1, 0, 1}, 4, 4);
	RhsSampler a(5), b(5);
	const DataSet da = generate(a, coarse, 1, 2);
	const DataSet db = generate(b, coarse, 1, 2);
	CHECK(std::memcmp(da.inputs.data(), db.inputs.data(),
	                  sizeof(double) * da.inputs.size()) == 0);
	CHECK(std::memcmp(da.targets.data(), db.targets.data(),
	                  sizeof(double) * da.targets.size()) == 0);

	const auto [train, test] = generate_split(coarse, 1, 2, 5);
	CHECK(train.n_samples() == test.n_samples());
	CHECK(train.seed == 5);
	CHECK(test.seed == 6);
	// same positions, different problems
	CHECK(train.inputs(4, 0) != test.inputs(4, 0));
	// the split's train half equals a direct generation with the same seed
	CHECK(std::memcmp(train.inputs.data(), da.inputs.data(),
	                  sizeof(double) * da.inputs.size()) == 0);
}

TEST_CASE("minmax scaling maps a feature onto the unit interval") {
	const DataSet ds = tiny_feature_set({0, 1, 2}, {0, 10, 20});
	const Scaler s = fit_scaler(ds, Scaling::minmax);
	const Eigen::MatrixXd x = s.transform_inputs(ds.inputs);
	CHECK(x(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
	CHECK(x(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
	CHECK(x(0, 2) == doctest::Approx(1.0).epsilon(1e-15));
	const Eigen::MatrixXd z = s.transform_targets(ds.targets);
	CHECK(z(0, 2) == doctest::Approx(1.0).epsilon(1e-15));
	CHECK(s.inverse_target(z.col(1))[0] == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("standardization uses the population deviation") {
	const DataSet ds = tiny_feature_set({0, 1, 2}, {0, 10, 20});
	const Scaler s = fit_scaler(ds, Scaling::standardize);
	CHECK(s.in_shift[0] == doctest::Approx(1.0).epsilon(1e-15));
	CHECK(s.in_scale[0] == doctest::Approx(0.816496580927726).epsilon(1e-12));
	const Eigen::MatrixXd x = s.transform_inputs(ds.inputs);
	CHECK(x(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
	CHECK(x(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
	CHECK(x(0, 2) == doctest::Approx(1.224744871391589).epsilon(1e-12));

	// compatibility switch: divide by the variance instead
	const Scaler sv = fit_scaler(ds, Scaling::standardize, true);
	const Eigen::MatrixXd xv = sv.transform_inputs(ds.inputs);
	CHECK(xv(0, 0) == doctest::Approx(-1.5).epsilon(1e-12));
	CHECK(xv(0, 2) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("scaling round-trips and tolerates constant features") {
	const auto coarse = make_mesh({0, 1, 0, 1}, 4, 4);
	RhsSampler sampler(11);
	const DataSet ds = generate(sampler, coarse, 1, 4);

	for (Scaling mode : {Scaling::none, Scaling::minmax, Scaling::standardize}) {
		const Scaler s = fit_scaler(ds, mode);
		const Eigen::MatrixXd z = s.transform_targets(ds.targets);
		const Eigen::MatrixXd back = s.inverse_targets(z);
		CHECK((back - ds.targets).cwiseAbs().maxCoeff() <= 1e-12);
		if (mode == Scaling::none)
			CHECK((z - ds.targets).cwiseAbs().maxCoeff() == 0.0);
	}

	DataSet flat = tiny_feature_set({5, 5, 5}, {1, 2, 3});
	for (Scaling mode : {Scaling::minmax, Scaling::standardize}) {
		const Scaler s = fit_scaler(flat, mode);
		const Eigen::MatrixXd x = s.transform_inputs(flat.inputs);
		CHECK(x(0, 0) == 0.0);
		CHECK(x(0, 2) == 0.0);
	}
}

TEST_CASE("dataset files survive a save/load round trip") {
	const auto coarse = make_mesh({0, 1, 0, 1}, 4, 4);
	RhsSampler sampler(3);
	const DataSet ds = generate(sampler, coarse, 1, 2);
	const Scaler s = fit_scaler(ds, Scaling::standardize);

	const std::string path = "dataset_roundtrip.bin";
	save_dataset(path, ds, &s);
	Scaler s2;
	const DataSet back = load_dataset(path, &s2);

	CHECK(back.n_problems == ds.n_problems);
	CHECK(back.n_patches == ds.n_patches);
	CHECK(back.refine_steps == ds.refine_steps);
	CHECK(back.coarse_h == ds.coarse_h);
	CHECK(back.seed == ds.seed);
	CHECK(std::memcmp(back.inputs.data(), ds.inputs.data(),
	                  sizeof(double) * ds.inputs.size()) == 0);
	CHECK(std::memcmp(back.targets.data(), ds.targets.data(),
	                  sizeof(double) * ds.targets.size()) == 0);
	CHECK(s2.mode == Scaling::standardize);
	CHECK(s2.in_shift == s.in_shift);
	CHECK(s2.out_scale == s.out_scale);

	CHECK_THROWS_AS(load_dataset("no_such_file.bin"), ConfigError);
	std::FILE* junk = std::fopen("junk.bin", "wb");
	std::fputs("definitely not a dataset", junk);
	std::fclose(junk);
	CHECK_THROWS_AS(load_dataset("junk.bin"), ConfigError);
	std::remove(path.c_str());
	std::remove("junk.bin");
}
