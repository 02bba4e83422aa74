#include "femnn/mesh.hpp"

#include <cmath>
#include <sstream>

namespace femnn {

MeshLevel build_mesh(const Rect& rect, int nx, int ny) {
	if (nx < 1 || ny < 1)
		throw ConfigError("mesh needs at least one cell per direction");
	if (!(rect.width() > 0.0) || !(rect.height() > 0.0))
		throw ConfigError("mesh rectangle has non-positive extent");

	const double hx = rect.width() / nx;
	const double hy = rect.height() / ny;
	if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
		throw ConfigError("cell aspect ratio is not 1: pick nx, ny matching the rectangle");

	MeshLevel m;
	m.rect = rect;
	m.nx = nx;
	m.ny = ny;
	m.level = 0;
	m.h = hx;

	m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
	m.on_boundary.reserve(m.nodes.capacity());
	for (int j = 0; j <= ny; ++j) {
		for (int i = 0; i <= nx; ++i) {
			m.nodes.push_back({rect.x0 + i * hx, rect.y0 + j * hy});
			m.on_boundary.push_back(i == 0 || i == nx || j == 0 || j == ny ? 1 : 0);
		}
	}

	m.cells.reserve(static_cast<std::size_t>(nx) * ny);
	for (int cy = 0; cy < ny; ++cy) {
		for (int cx = 0; cx < nx; ++cx) {
			// counterclockwise: SW, SE, NE, NW
			m.cells.push_back({m.node_id(cx, cy), m.node_id(cx + 1, cy),
			                   m.node_id(cx + 1, cy + 1), m.node_id(cx, cy + 1)});
		}
	}
	return m;
}

MeshLevel refine(const MeshLevel& mesh) {
	MeshLevel fine = build_mesh(mesh.rect, 2 * mesh.nx, 2 * mesh.ny);
	fine.level = mesh.level + 1;
	return fine;
}

int nesting_ratio(const MeshLevel& coarse, const MeshLevel& fine) {
	if (coarse.rect.x0 != fine.rect.x0 || coarse.rect.x1 != fine.rect.x1 ||
	    coarse.rect.y0 != fine.rect.y0 || coarse.rect.y1 != fine.rect.y1)
		return 0;
	if (fine.nx % coarse.nx != 0 || fine.ny % coarse.ny != 0) return 0;
	const int r = fine.nx / coarse.nx;
	if (fine.ny / coarse.ny != r) return 0;
	if ((r & (r - 1)) != 0) return 0;  // power of two
	return r;
}

PatchSet build_patches(const MeshLevel& coarse, const MeshLevel& fine) {
	const int r = nesting_ratio(coarse, fine);
	if (r < 2)
		throw StructuralError("fine mesh is not a nested 2^k refinement of the coarse mesh");

	PatchSet ps;
	ps.refine_steps = 0;
	for (int t = r; t > 1; t >>= 1) ++ps.refine_steps;
	ps.nodes_per_side = r + 1;
	ps.multiplicity.assign(fine.n_nodes(), 0);
	ps.patches.reserve(static_cast<std::size_t>(coarse.n_cells()));

	for (int cy = 0; cy < coarse.ny; ++cy) {
		for (int cx = 0; cx < coarse.nx; ++cx) {
			Patch p;
			p.coarse_cell = coarse.cell_id(cx, cy);
			p.coarse_nodes = {coarse.node_id(cx, cy), coarse.node_id(cx + 1, cy),
			                  coarse.node_id(cx, cy + 1), coarse.node_id(cx + 1, cy + 1)};
			p.fine_cells.reserve(static_cast<std::size_t>(r) * r);
			for (int fy = cy * r; fy < (cy + 1) * r; ++fy)
				for (int fx = cx * r; fx < (cx + 1) * r; ++fx)
					p.fine_cells.push_back(fine.cell_id(fx, fy));
			p.fine_nodes.reserve(static_cast<std::size_t>(r + 1) * (r + 1));
			for (int fj = cy * r; fj <= (cy + 1) * r; ++fj) {
				for (int fi = cx * r; fi <= (cx + 1) * r; ++fi) {
					const int id = fine.node_id(fi, fj);
					p.fine_nodes.push_back(id);
					++ps.multiplicity[id];
				}
			}
			ps.patches.push_back(std::move(p));
		}
	}
	return ps;
}

std::string mesh_to_json(const MeshLevel& mesh) {
	std::ostringstream out;
	out.precision(17);
	out << "{\"nx\":" << mesh.nx << ",\"ny\":" << mesh.ny << ",\"level\":" << mesh.level
	    << ",\"h\":" << mesh.h << ",\"rect\":[" << mesh.rect.x0 << "," << mesh.rect.x1 << ","
	    << mesh.rect.y0 << "," << mesh.rect.y1 << "],\"nodes\":[";
	for (int n = 0; n < mesh.n_nodes(); ++n) {
		if (n) out << ",";
		out << "[" << mesh.nodes[n][0] << "," << mesh.nodes[n][1] << "]";
	}
	out << "],\"cells\":[";
	for (int c = 0; c < mesh.n_cells(); ++c) {
		if (c) out << ",";
		out << "[" << mesh.cells[c][0] << "," << mesh.cells[c][1] << "," << mesh.cells[c][2]
		    << "," << mesh.cells[c][3] << "]";
	}
	out << "],\"on_boundary\":[";
	for (int n = 0; n < mesh.n_nodes(); ++n) {
		if (n) out << ",";
		out << int(mesh.on_boundary[n]);
	}
	out << "]}";
	return out.str();
}

}  // namespace femnn
