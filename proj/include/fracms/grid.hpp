#pragma once

// Nested uniform coarse/fine quadrilateral meshes on the unit square.
//
// Fine nodes are numbered lexicographically (x fastest) over the full
// (fine_n + 1)^2 node lattice. Only interior nodes carry a degree of freedom
// (homogeneous Dirichlet data on the boundary); DOFs are numbered in the same
// lexicographic order. Coarse elements and fine cells are numbered the same
// way. Sizes are stored as counts so that h * refine == H and
// H * coarse_n == 1 hold exactly.

#include <array>
#include <utility>
#include <vector>

namespace fracms {

/// Fine cells and fine nodes (closure) of one coarse element.
struct ElementMap {
    std::vector<int> cells;
    std::vector<int> nodes;
};

class GridHierarchy {
public:
    GridHierarchy(int coarse_n, int refine);

    int coarse_n() const noexcept { return coarse_n_; }
    int refine() const noexcept { return refine_; }
    int fine_n() const noexcept { return coarse_n_ * refine_; }
    double H() const noexcept { return 1.0 / coarse_n_; }
    double h() const noexcept { return 1.0 / fine_n(); }

    int num_elements() const noexcept { return coarse_n_ * coarse_n_; }
    int num_cells() const noexcept { return fine_n() * fine_n(); }
    int num_nodes() const noexcept { return (fine_n() + 1) * (fine_n() + 1); }
    int num_dofs() const noexcept { return (fine_n() - 1) * (fine_n() - 1); }
    int num_coarse_vertices() const noexcept { return (coarse_n_ + 1) * (coarse_n_ + 1); }

    int node_index(int ix, int iy) const noexcept { return ix + iy * (fine_n() + 1); }
    std::pair<int, int> node_coords(int node) const noexcept {
        return {node % (fine_n() + 1), node / (fine_n() + 1)};
    }
    std::pair<double, double> node_position(int node) const noexcept;

    /// DOF carried by a node, -1 for boundary nodes.
    int dof_of_node(int node) const noexcept { return node_dof_[node]; }
    int node_of_dof(int dof) const noexcept { return dof_node_[dof]; }

    int cell_index(int cx, int cy) const noexcept { return cx + cy * fine_n(); }
    std::pair<int, int> cell_coords(int cell) const noexcept {
        return {cell % fine_n(), cell / fine_n()};
    }
    /// Corner nodes of a fine cell, counter-clockwise from the lower left.
    std::array<int, 4> cell_nodes(int cell) const noexcept;

    int element_index(int ex, int ey) const noexcept { return ex + ey * coarse_n_; }
    std::pair<int, int> element_coords(int e) const noexcept {
        return {e % coarse_n_, e / coarse_n_};
    }
    int element_of_cell(int cell) const noexcept;
    const ElementMap& element(int e) const { return elem_maps_.at(e); }

    /// DOFs strictly inside coarse element e (the zero-trace space V(K_e)).
    std::vector<int> element_interior_dofs(int e) const;
    /// DOFs on the closure of coarse element e (boundary of the domain excluded).
    std::vector<int> element_closure_dofs(int e) const;

    int coarse_vertex_index(int vx, int vy) const noexcept { return vx + vy * (coarse_n_ + 1); }
    /// Fine node sitting on coarse vertex v.
    int coarse_vertex_node(int v) const noexcept;

    /// Nodes interior to the union of the given fine cells and not on the
    /// domain boundary, as ascending DOF indices.
    std::vector<int> interior_dofs_of_cells(const std::vector<int>& cells) const;

private:
    int coarse_n_;
    int refine_;
    std::vector<int> node_dof_;
    std::vector<int> dof_node_;
    std::vector<ElementMap> elem_maps_;
};

/// Validated construction; rejects coarse_n < 2 or refine < 2.
GridHierarchy build_grids(int coarse_n, int refine);

/// Coarse element i enlarged by `layers` rings of neighbours.
struct OversamplePatch {
    int center = 0;
    int layers = 0;
    std::vector<int> elements;    // ascending
    std::vector<int> cells;       // ascending
    std::vector<int> local_dofs;  // ascending global DOFs interior to the patch
};

OversamplePatch oversample(const GridHierarchy& grid, int element, int layers);

}  // namespace fracms
