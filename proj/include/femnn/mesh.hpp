#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "femnn/common.hpp"

namespace femnn {

struct Rect {
	double x0 = 0.0, x1 = 1.0;
	double y0 = 0.0, y1 = 1.0;

	double width() const { return x1 - x0; }
	double height() const { return y1 - y0; }
};

/// Uniform grid of square cells over a rectangle.
///
/// Nodes and cells are numbered row-major, x fastest: node (i, j) sits at
/// (x0 + i*h, y0 + j*h). Cell corner order is counterclockwise
/// (SW, SE, NE, NW). Node coordinates of a refined mesh reproduce the parent
/// coordinates bit-identically, so nested-mesh lookups never need a tolerance.
struct MeshLevel {
	Rect rect;
	int nx = 0;       // cells along x
	int ny = 0;       // cells along y
	int level = 0;    // refinement generation, 0 for a freshly built mesh
	double h = 0.0;   // cell edge length
	std::vector<std::array<double, 2>> nodes;
	std::vector<std::array<int, 4>> cells;
	std::vector<std::uint8_t> on_boundary;  // 1 for nodes on the rectangle edge

	int n_nodes() const { return static_cast<int>(nodes.size()); }
	int n_cells() const { return static_cast<int>(cells.size()); }
	int node_id(int i, int j) const { return j * (nx + 1) + i; }
	int cell_id(int cx, int cy) const { return cy * nx + cx; }
};

/// Build a mesh of nx * ny square cells; rejects geometry where the cells
/// would not come out square (within a relative tolerance of 1e-12).
MeshLevel build_mesh(const Rect& rect, int nx, int ny);

/// Halve the cell edge: doubles nx and ny, bumps level by one.
MeshLevel refine(const MeshLevel& mesh);

/// One coarse cell together with the fine cells and fine nodes it contains.
/// fine_nodes is row-major within the patch, (2^k + 1)^2 entries.
/// coarse_nodes holds the owning cell's corners in the order SW, SE, NW, NE.
struct Patch {
	int coarse_cell = -1;
	std::vector<int> fine_cells;
	std::vector<int> fine_nodes;
	std::array<int, 4> coarse_nodes{};
};

/// All patches of a coarse/fine mesh pair plus per-fine-node multiplicity
/// n(x) = number of patches containing fine node x (1 at corners of the
/// domain boundary, 2 on interior patch edges, 4 at interior patch corners).
struct PatchSet {
	int refine_steps = 0;    // k with fine h = coarse h / 2^k
	int nodes_per_side = 0;  // 2^k + 1
	std::vector<Patch> patches;
	std::vector<int> multiplicity;  // indexed by fine node id

	int n_patches() const { return static_cast<int>(patches.size()); }
	int nodes_per_patch() const { return nodes_per_side * nodes_per_side; }
};

/// Pair up a coarse mesh with a nested refinement of itself. Throws
/// StructuralError if the fine mesh is not a 2^k refinement, k >= 1.
PatchSet build_patches(const MeshLevel& coarse, const MeshLevel& fine);

/// fine.nx / coarse.nx when fine is a power-of-two refinement of coarse over
/// the same rectangle (1 for identical layouts), 0 when the pair is unrelated.
int nesting_ratio(const MeshLevel& coarse, const MeshLevel& fine);

/// Debug dump: nodes, cells and boundary flags as a JSON object.
std::string mesh_to_json(const MeshLevel& mesh);

}  // namespace femnn
