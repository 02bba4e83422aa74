#include "femnn/hybrid.hpp"

namespace femnn {

Eigen::VectorXd patch_input(const FemSolution& coarse_u, const Eigen::VectorXd& f_at_fine_nodes,
                            const Patch& patch) {
	const int npp = static_cast<int>(patch.fine_nodes.size());
	Eigen::VectorXd x(4 + npp);
	for (int c = 0; c < 4; ++c) x[c] = coarse_u.coeffs[patch.coarse_nodes[c]];
	for (int l = 0; l < npp; ++l) x[4 + l] = f_at_fine_nodes[patch.fine_nodes[l]];
	return x;
}

Eigen::MatrixXd patch_inputs(const FemSolution& coarse_u, const RhsFunction& f,
                             const PatchSet& patches, const MeshPtr& fine) {
	if (nesting_ratio(*coarse_u.mesh, *fine) != (1 << patches.refine_steps))
		throw StructuralError("mesh pair does not match the patch set");
	Eigen::VectorXd f_at_fine_nodes(fine->n_nodes());
	for (int n = 0; n < fine->n_nodes(); ++n)
		f_at_fine_nodes[n] = f(fine->nodes[n][0], fine->nodes[n][1]);
	Eigen::MatrixXd x(4 + patches.nodes_per_patch(), patches.n_patches());
	for (int q = 0; q < patches.n_patches(); ++q)
		x.col(q) = patch_input(coarse_u, f_at_fine_nodes, patches.patches[q]);
	return x;
}

Eigen::VectorXd accumulate_patches(const Eigen::MatrixXd& patch_values, const PatchSet& patches,
                                   const MeshLevel& fine) {
	if (patch_values.rows() != patches.nodes_per_patch() ||
	    patch_values.cols() != patches.n_patches())
		throw StructuralError("patch value matrix does not match the patch layout");
	if (static_cast<int>(patches.multiplicity.size()) != fine.n_nodes())
		throw StructuralError("patch set does not belong to this fine mesh");

	Eigen::VectorXd field = Eigen::VectorXd::Zero(fine.n_nodes());
	for (int q = 0; q < patches.n_patches(); ++q) {
		const Patch& patch = patches.patches[q];
		for (int l = 0; l < static_cast<int>(patch.fine_nodes.size()); ++l)
			field[patch.fine_nodes[l]] += patch_values(l, q);
	}
	for (int n = 0; n < fine.n_nodes(); ++n) field[n] /= patches.multiplicity[n];
	return field;
}

FemSolution correct_with_patches(const Eigen::MatrixXd& patch_corrections,
                                 const FemSolution& coarse_u, const PatchSet& patches,
                                 MeshPtr fine) {
	FemSolution u = inject(coarse_u, fine);
	u.coeffs += accumulate_patches(patch_corrections, patches, *fine);
	return u;
}

FemSolution predict_hybrid(const Mlp& net, const Scaler& scaler, const FemSolution& coarse_u,
                           const RhsFunction& f, const PatchSet& patches, MeshPtr fine) {
	const Eigen::MatrixXd x = patch_inputs(coarse_u, f, patches, fine);
	if (net.weights.front().cols() != x.rows())
		throw StructuralError("network input width does not match the patch input size");
	if (net.weights.back().rows() != patches.nodes_per_patch())
		throw StructuralError("network output width does not match the patch node count");
	if (scaler.in_shift.size() != x.rows() ||
	    scaler.out_shift.size() != patches.nodes_per_patch())
		throw StructuralError("scaler was fitted for a different patch geometry");

	const Eigen::MatrixXd pred =
	    scaler.inverse_targets(forward_batch(net, scaler.transform_inputs(x)));
	FemSolution u = correct_with_patches(pred, coarse_u, patches, fine);
	// the network does not know the boundary condition; pin it exactly
	for (int n = 0; n < fine->n_nodes(); ++n)
		if (fine->on_boundary[n]) u.coeffs[n] = 0.0;
	return u;
}

}  // namespace femnn
