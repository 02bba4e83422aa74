#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cmath>
#include <functional>
#include <memory>

#include "femnn/mesh.hpp"

namespace femnn {

using MeshPtr = std::shared_ptr<const MeshLevel>;

inline MeshPtr make_mesh(const Rect& rect, int nx, int ny) {
	return std::make_shared<MeshLevel>(build_mesh(rect, nx, ny));
}

inline MeshPtr refine(const MeshPtr& mesh) {
	return std::make_shared<MeshLevel>(refine(*mesh));
}

/// Right-hand side family: f(x, y) = sin(2 pi c1 (x + c2)) * sin(2 pi c3 (y + c4)).
struct RhsFunction {
	double c1 = 1.0, c2 = 0.0, c3 = 1.0, c4 = 0.0;

	double operator()(double x, double y) const {
		constexpr double two_pi = 6.283185307179586476925286766559;
		return std::sin(two_pi * c1 * (x + c2)) * std::sin(two_pi * c3 * (y + c4));
	}
};

/// Closed-form scalar field with gradient, for manufactured-solution tests.
struct AnalyticField {
	std::function<double(double, double)> value;
	std::function<std::array<double, 2>(double, double)> grad;
};

/// Linear system for -laplace(u) = f with zero Dirichlet boundary, assembled
/// over bilinear elements and reduced to the interior unknowns.
struct FemSystem {
	MeshPtr mesh;
	Eigen::SparseMatrix<double> matrix;  // interior x interior, symmetric
	Eigen::VectorXd rhs;                 // interior load vector
	std::vector<int> interior_nodes;     // interior index -> global node id
	std::vector<int> interior_index;     // global node id -> interior index or -1

	int n_interior() const { return static_cast<int>(interior_nodes.size()); }
};

/// Nodal coefficient vector over all mesh nodes; boundary entries are zero.
struct FemSolution {
	MeshPtr mesh;
	Eigen::VectorXd coeffs;
};

struct SolveResult {
	FemSolution solution;
	int iterations = 0;
	double rel_residual = 0.0;
};

/// Stiffness matrix and interior numbering only; rhs is left at zero so the
/// same system can be reused across load vectors via set_load().
FemSystem assemble_matrix(MeshPtr mesh);

/// Recompute the load vector for f with tensor Gauss quadrature of the given
/// 1D point count per direction.
void set_load(FemSystem& system, const std::function<double(double, double)>& f, int quad_order);

FemSystem assemble(MeshPtr mesh, const std::function<double(double, double)>& f,
                   int quad_order = 3);

/// Conjugate gradients with Jacobi preconditioning. Stops when the true
/// relative residual |b - A x| / |b| reaches rel_tol; throws SolveError with
/// the final residual if max_iter is exhausted first. A zero rhs returns the
/// zero solution in zero iterations.
SolveResult solve_cg(const FemSystem& system, double rel_tol = 1e-10, int max_iter = 10000);

/// Pointwise evaluation of the bilinear interpolant (x, y clamped to the
/// mesh rectangle).
double evaluate(const FemSolution& u, double x, double y);

/// Evaluate a coarse solution at every node of a nested finer mesh (exact for
/// bilinear elements, resolved by index arithmetic rather than point search).
FemSolution inject(const FemSolution& coarse, MeshPtr fine);

/// Values of a fine-mesh solution at the nodes of a nested coarser mesh.
Eigen::VectorXd restrict_nodal(const FemSolution& fine, const MeshLevel& coarse);

/// L2 norm of (a - b) by quadrature. Solutions on different meshes must be
/// nested; the coarser one is injected onto the finer mesh first.
double l2_error(const FemSolution& a, const FemSolution& b, int quad_order = 3);
double l2_error(const AnalyticField& u, const FemSolution& v, int quad_order = 3);

/// H1 seminorm |grad(a - b)| by quadrature, same mesh rules as l2_error.
double h1_seminorm_error(const FemSolution& a, const FemSolution& b, int quad_order = 3);
double h1_seminorm_error(const AnalyticField& u, const FemSolution& v, int quad_order = 3);

/// Plain Euclidean norm of the nodal difference; meshes must be identical.
double nodal_l2(const FemSolution& a, const FemSolution& b);

/// 1D Gauss-Legendre rule on [-1, 1], n in 1..5.
struct GaussRule {
	std::vector<double> points;
	std::vector<double> weights;
};
GaussRule gauss_rule(int n);

/// Stiffness matrix of one square bilinear element (edge length drops out in
/// 2D). Corner order SW, SE, NE, NW; diagonal 2/3, every row sums to zero.
Eigen::Matrix4d element_stiffness();

}  // namespace femnn
