#pragma once

#include "femnn/dataset.hpp"
#include "femnn/network.hpp"

namespace femnn {

/// Network input for one patch: the four coarse corner values (SW, SE, NW, NE)
/// followed by the rhs values at the patch fine nodes — the same column layout
/// the dataset generator writes.
Eigen::VectorXd patch_input(const FemSolution& coarse_u, const Eigen::VectorXd& f_at_fine_nodes,
                            const Patch& patch);

/// Inputs for every patch of one problem, one column per patch.
Eigen::MatrixXd patch_inputs(const FemSolution& coarse_u, const RhsFunction& f,
                             const PatchSet& patches, const MeshPtr& fine);

/// Scatter per-patch nodal values (one column per patch, rows row-major within
/// the patch) into a fine nodal field. Nodes shared by several patches get the
/// average of their contributions, so restricting any nodal field to patches
/// and accumulating it back reproduces the field.
Eigen::VectorXd accumulate_patches(const Eigen::MatrixXd& patch_values, const PatchSet& patches,
                                   const MeshLevel& fine);

/// Coarse solution injected onto the fine mesh plus averaged per-patch
/// corrections. With the exact per-patch differences (fine minus injected
/// coarse) this reproduces the fine solution; a predictor only approximates
/// those differences.
FemSolution correct_with_patches(const Eigen::MatrixXd& patch_corrections,
                                 const FemSolution& coarse_u, const PatchSet& patches,
                                 MeshPtr fine);

/// Full two-level prediction: restrict the problem to per-patch inputs, run
/// the network on all patches at once, undo the target scaling and prolongate
/// the corrections onto the injected coarse solution. Boundary nodes are
/// pinned to zero afterwards — the network is not told about the boundary
/// condition, the mesh is.
FemSolution predict_hybrid(const Mlp& net, const Scaler& scaler, const FemSolution& coarse_u,
                           const RhsFunction& f, const PatchSet& patches, MeshPtr fine);

}  // namespace femnn
