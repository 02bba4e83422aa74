#include "femnn/fem.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace femnn {

namespace {

// Bilinear shapes on [-1, 1]^2, corner order SW, SE, NE, NW.
inline std::array<double, 4> shape_values(double xi, double eta) {
	return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
	        0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
}

// Reference gradients (d/dxi, d/deta) of the four shapes.
inline std::array<std::array<double, 2>, 4> shape_grads(double xi, double eta) {
	return {{{-0.25 * (1 - eta), -0.25 * (1 - xi)},
	         {0.25 * (1 - eta), -0.25 * (1 + xi)},
	         {0.25 * (1 + eta), 0.25 * (1 + xi)},
	         {-0.25 * (1 + eta), 0.25 * (1 - xi)}}};
}

}  // namespace

GaussRule gauss_rule(int n) {
	GaussRule r;
	switch (n) {
		case 1:
			r.points = {0.0};
			r.weights = {2.0};
			break;
		case 2: {
			const double p = 0.57735026918962576451;  // 1/sqrt(3)
			r.points = {-p, p};
			r.weights = {1.0, 1.0};
			break;
		}
		case 3: {
			const double p = 0.77459666924148337704;  // sqrt(3/5)
			r.points = {-p, 0.0, p};
			r.weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
			break;
		}
		case 4: {
			const double p1 = 0.33998104358485626480;
			const double p2 = 0.86113631159405257522;
			const double w1 = 0.65214515486254614263;
			const double w2 = 0.34785484513745385737;
			r.points = {-p2, -p1, p1, p2};
			r.weights = {w2, w1, w1, w2};
			break;
		}
		case 5: {
			const double p1 = 0.53846931010568309104;
			const double p2 = 0.90617984593866399280;
			const double w0 = 128.0 / 225.0;
			const double w1 = 0.47862867049936646804;
			const double w2 = 0.23692688505618908751;
			r.points = {-p2, -p1, 0.0, p1, p2};
			r.weights = {w2, w1, w0, w1, w2};
			break;
		}
		default:
			throw ConfigError("quadrature order must be in 1..5");
	}
	return r;
}

Eigen::Matrix4d element_stiffness() {
	Eigen::Matrix4d k;
	k << 4, -1, -2, -1,  //
	    -1, 4, -1, -2,   //
	    -2, -1, 4, -1,   //
	    -1, -2, -1, 4;
	return k / 6.0;
}

FemSystem assemble_matrix(MeshPtr mesh) {
	const MeshLevel& m = *mesh;
	FemSystem sys;
	sys.mesh = mesh;
	sys.interior_index.assign(m.n_nodes(), -1);
	for (int n = 0; n < m.n_nodes(); ++n) {
		if (!m.on_boundary[n]) {
			sys.interior_index[n] = static_cast<int>(sys.interior_nodes.size());
			sys.interior_nodes.push_back(n);
		}
	}

	const Eigen::Matrix4d ke = element_stiffness();
	std::vector<Eigen::Triplet<double>> triplets;
	triplets.reserve(static_cast<std::size_t>(m.n_cells()) * 16);
	for (int c = 0; c < m.n_cells(); ++c) {
		const auto& conn = m.cells[c];
		for (int a = 0; a < 4; ++a) {
			const int ia = sys.interior_index[conn[a]];
			if (ia < 0) continue;
			for (int b = 0; b < 4; ++b) {
				const int ib = sys.interior_index[conn[b]];
				if (ib < 0) continue;
				triplets.emplace_back(ia, ib, ke(a, b));
			}
		}
	}
	sys.matrix.resize(sys.n_interior(), sys.n_interior());
	sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
	sys.matrix.makeCompressed();
	sys.rhs = Eigen::VectorXd::Zero(sys.n_interior());
	return sys;
}

void set_load(FemSystem& sys, const std::function<double(double, double)>& f, int quad_order) {
	const MeshLevel& m = *sys.mesh;
	const GaussRule g = gauss_rule(quad_order);
	const double jac = 0.25 * m.h * m.h;  // det of the reference-to-cell map

	sys.rhs.setZero();
	for (int c = 0; c < m.n_cells(); ++c) {
		const auto& conn = m.cells[c];
		const auto& sw = m.nodes[conn[0]];
		for (std::size_t qy = 0; qy < g.points.size(); ++qy) {
			const double eta = g.points[qy];
			const double y = sw[1] + 0.5 * m.h * (1 + eta);
			for (std::size_t qx = 0; qx < g.points.size(); ++qx) {
				const double xi = g.points[qx];
				const double x = sw[0] + 0.5 * m.h * (1 + xi);
				const double scaled = f(x, y) * g.weights[qx] * g.weights[qy] * jac;
				const auto phi = shape_values(xi, eta);
				for (int a = 0; a < 4; ++a) {
					const int ia = sys.interior_index[conn[a]];
					if (ia >= 0) sys.rhs[ia] += scaled * phi[a];
				}
			}
		}
	}
}

FemSystem assemble(MeshPtr mesh, const std::function<double(double, double)>& f,
                   int quad_order) {
	FemSystem sys = assemble_matrix(std::move(mesh));
	set_load(sys, f, quad_order);
	return sys;
}

SolveResult solve_cg(const FemSystem& sys, double rel_tol, int max_iter) {
	const int n = sys.n_interior();
	SolveResult out;
	out.solution.mesh = sys.mesh;
	out.solution.coeffs = Eigen::VectorXd::Zero(sys.mesh->n_nodes());

	Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
	const double bnorm = sys.rhs.norm();
	if (n == 0 || bnorm == 0.0) {
		out.iterations = 0;
		out.rel_residual = 0.0;
		return out;
	}

	const Eigen::VectorXd inv_diag = sys.matrix.diagonal().cwiseInverse();
	Eigen::VectorXd r = sys.rhs;
	Eigen::VectorXd z = inv_diag.cwiseProduct(r);
	Eigen::VectorXd p = z;
	double rz = r.dot(z);

	int it = 0;
	double rel = 1.0;
	while (it < max_iter) {
		++it;
		const Eigen::VectorXd q = sys.matrix * p;
		const double alpha = rz / p.dot(q);
		x += alpha * p;
		r -= alpha * q;
		if (r.norm() <= rel_tol * bnorm) {
			// recurrence can drift; accept only the true residual
			r = sys.rhs - sys.matrix * x;
			rel = r.norm() / bnorm;
			if (rel <= rel_tol) break;
			z = inv_diag.cwiseProduct(r);
			p = z;
			rz = r.dot(z);
			continue;
		}
		z = inv_diag.cwiseProduct(r);
		const double rz_next = r.dot(z);
		p = z + (rz_next / rz) * p;
		rz = rz_next;
	}

	rel = (sys.rhs - sys.matrix * x).norm() / bnorm;
	if (rel > rel_tol)
		throw SolveError("cg failed to converge", rel, it);

	for (int i = 0; i < n; ++i) out.solution.coeffs[sys.interior_nodes[i]] = x[i];
	out.iterations = it;
	out.rel_residual = rel;
	return out;
}

double evaluate(const FemSolution& u, double x, double y) {
	const MeshLevel& m = *u.mesh;
	const double sx = (x - m.rect.x0) / m.h;
	const double sy = (y - m.rect.y0) / m.h;
	const int cx = std::clamp(static_cast<int>(std::floor(sx)), 0, m.nx - 1);
	const int cy = std::clamp(static_cast<int>(std::floor(sy)), 0, m.ny - 1);
	const double s = std::clamp(sx - cx, 0.0, 1.0);
	const double t = std::clamp(sy - cy, 0.0, 1.0);
	const double v00 = u.coeffs[m.node_id(cx, cy)];
	const double v10 = u.coeffs[m.node_id(cx + 1, cy)];
	const double v01 = u.coeffs[m.node_id(cx, cy + 1)];
	const double v11 = u.coeffs[m.node_id(cx + 1, cy + 1)];
	return v00 * (1 - s) * (1 - t) + v10 * s * (1 - t) + v01 * (1 - s) * t + v11 * s * t;
}

FemSolution inject(const FemSolution& coarse, MeshPtr fine) {
	const MeshLevel& mc = *coarse.mesh;
	const MeshLevel& mf = *fine;
	const int r = nesting_ratio(mc, mf);
	if (r == 0) throw StructuralError("inject: meshes are not nested");

	FemSolution out;
	out.mesh = fine;
	out.coeffs.resize(mf.n_nodes());
	const double inv_r = 1.0 / r;
	for (int fj = 0; fj <= mf.ny; ++fj) {
		const int cy = std::min(fj / r, mc.ny - 1);
		const double t = (fj - cy * r) * inv_r;
		for (int fi = 0; fi <= mf.nx; ++fi) {
			const int cx = std::min(fi / r, mc.nx - 1);
			const double s = (fi - cx * r) * inv_r;
			const double v00 = coarse.coeffs[mc.node_id(cx, cy)];
			const double v10 = coarse.coeffs[mc.node_id(cx + 1, cy)];
			const double v01 = coarse.coeffs[mc.node_id(cx, cy + 1)];
			const double v11 = coarse.coeffs[mc.node_id(cx + 1, cy + 1)];
			out.coeffs[mf.node_id(fi, fj)] =
			    v00 * (1 - s) * (1 - t) + v10 * s * (1 - t) + v01 * (1 - s) * t + v11 * s * t;
		}
	}
	return out;
}

Eigen::VectorXd restrict_nodal(const FemSolution& fine, const MeshLevel& coarse) {
	const MeshLevel& mf = *fine.mesh;
	const int r = nesting_ratio(coarse, mf);
	if (r == 0) throw StructuralError("restrict_nodal: meshes are not nested");
	Eigen::VectorXd out(coarse.n_nodes());
	for (int j = 0; j <= coarse.ny; ++j)
		for (int i = 0; i <= coarse.nx; ++i)
			out[coarse.node_id(i, j)] = fine.coeffs[mf.node_id(i * r, j * r)];
	return out;
}

namespace {

// Put both fields on one mesh: inject whichever is coarser onto the other's
// mesh, then integrate cellwise there.
std::pair<FemSolution, const FemSolution*> on_common_mesh(const FemSolution& a,
                                                          const FemSolution& b) {
	if (nesting_ratio(*a.mesh, *b.mesh) >= 1) return {inject(a, b.mesh), &b};
	if (nesting_ratio(*b.mesh, *a.mesh) >= 2) return {inject(b, a.mesh), &a};
	throw StructuralError("error norms need nested meshes");
}

template <class CellTerm>
double integrate_cells(const MeshLevel& m, int quad_order, CellTerm&& term) {
	const GaussRule g = gauss_rule(quad_order);
	const double jac = 0.25 * m.h * m.h;
	double acc = 0.0;
	for (int c = 0; c < m.n_cells(); ++c) {
		for (std::size_t qy = 0; qy < g.points.size(); ++qy) {
			for (std::size_t qx = 0; qx < g.points.size(); ++qx) {
				acc += g.weights[qx] * g.weights[qy] * jac *
				       term(c, g.points[qx], g.points[qy]);
			}
		}
	}
	return acc;
}

}  // namespace

double l2_error(const FemSolution& a, const FemSolution& b, int quad_order) {
	auto [inj, other] = on_common_mesh(a, b);
	const MeshLevel& m = *other->mesh;
	const Eigen::VectorXd diff = inj.coeffs - other->coeffs;
	const double acc = integrate_cells(m, quad_order, [&](int c, double xi, double eta) {
		const auto& conn = m.cells[c];
		const auto phi = shape_values(xi, eta);
		double d = 0.0;
		for (int l = 0; l < 4; ++l) d += diff[conn[l]] * phi[l];
		return d * d;
	});
	return std::sqrt(acc);
}

double h1_seminorm_error(const FemSolution& a, const FemSolution& b, int quad_order) {
	auto [inj, other] = on_common_mesh(a, b);
	const MeshLevel& m = *other->mesh;
	const Eigen::VectorXd diff = inj.coeffs - other->coeffs;
	const double scale = 2.0 / m.h;  // reference-to-physical gradient factor
	const double acc = integrate_cells(m, quad_order, [&](int c, double xi, double eta) {
		const auto& conn = m.cells[c];
		const auto dphi = shape_grads(xi, eta);
		double gx = 0.0, gy = 0.0;
		for (int l = 0; l < 4; ++l) {
			gx += diff[conn[l]] * dphi[l][0];
			gy += diff[conn[l]] * dphi[l][1];
		}
		gx *= scale;
		gy *= scale;
		return gx * gx + gy * gy;
	});
	return std::sqrt(acc);
}

double l2_error(const AnalyticField& u, const FemSolution& v, int quad_order) {
	const MeshLevel& m = *v.mesh;
	const double acc = integrate_cells(m, quad_order, [&](int c, double xi, double eta) {
		const auto& conn = m.cells[c];
		const auto& sw = m.nodes[conn[0]];
		const double x = sw[0] + 0.5 * m.h * (1 + xi);
		const double y = sw[1] + 0.5 * m.h * (1 + eta);
		const auto phi = shape_values(xi, eta);
		double vh = 0.0;
		for (int l = 0; l < 4; ++l) vh += v.coeffs[conn[l]] * phi[l];
		const double d = u.value(x, y) - vh;
		return d * d;
	});
	return std::sqrt(acc);
}

double h1_seminorm_error(const AnalyticField& u, const FemSolution& v, int quad_order) {
	const MeshLevel& m = *v.mesh;
	const double scale = 2.0 / m.h;
	const double acc = integrate_cells(m, quad_order, [&](int c, double xi, double eta) {
		const auto& conn = m.cells[c];
		const auto& sw = m.nodes[conn[0]];
		const double x = sw[0] + 0.5 * m.h * (1 + xi);
		const double y = sw[1] + 0.5 * m.h * (1 + eta);
		const auto dphi = shape_grads(xi, eta);
		double gx = 0.0, gy = 0.0;
		for (int l = 0; l < 4; ++l) {
			gx += v.coeffs[conn[l]] * dphi[l][0];
			gy += v.coeffs[conn[l]] * dphi[l][1];
		}
		const auto gu = u.grad(x, y);
		const double dx = gu[0] - gx * scale;
		const double dy = gu[1] - gy * scale;
		return dx * dx + dy * dy;
	});
	return std::sqrt(acc);
}

double nodal_l2(const FemSolution& a, const FemSolution& b) {
	if (nesting_ratio(*a.mesh, *b.mesh) != 1)
		throw StructuralError("nodal_l2: meshes differ");
	return (a.coeffs - b.coeffs).norm();
}

}  // namespace femnn
