#include "fracms/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "fracms/error.hpp"

namespace fracms {

GridHierarchy::GridHierarchy(int coarse_n, int refine) : coarse_n_(coarse_n), refine_(refine) {
    if (coarse_n < 2 || refine < 2)
        throw InvalidArgument("grid needs coarse_n >= 2 and refine >= 2, got " +
                              std::to_string(coarse_n) + " and " + std::to_string(refine));
    const int nf = fine_n();
    node_dof_.assign(num_nodes(), -1);
    dof_node_.reserve(num_dofs());
    for (int iy = 1; iy < nf; ++iy)
        for (int ix = 1; ix < nf; ++ix) {
            const int node = node_index(ix, iy);
            node_dof_[node] = static_cast<int>(dof_node_.size());
            dof_node_.push_back(node);
        }

    elem_maps_.resize(num_elements());
    for (int ey = 0; ey < coarse_n_; ++ey)
        for (int ex = 0; ex < coarse_n_; ++ex) {
            ElementMap& m = elem_maps_[element_index(ex, ey)];
            for (int j = 0; j < refine_; ++j)
                for (int i = 0; i < refine_; ++i)
                    m.cells.push_back(cell_index(ex * refine_ + i, ey * refine_ + j));
            for (int j = 0; j <= refine_; ++j)
                for (int i = 0; i <= refine_; ++i)
                    m.nodes.push_back(node_index(ex * refine_ + i, ey * refine_ + j));
        }
}

std::pair<double, double> GridHierarchy::node_position(int node) const noexcept {
    const auto [ix, iy] = node_coords(node);
    const double nf = fine_n();
    return {ix / nf, iy / nf};
}

std::array<int, 4> GridHierarchy::cell_nodes(int cell) const noexcept {
    const auto [cx, cy] = cell_coords(cell);
    return {node_index(cx, cy), node_index(cx + 1, cy), node_index(cx + 1, cy + 1),
            node_index(cx, cy + 1)};
}

int GridHierarchy::element_of_cell(int cell) const noexcept {
    const auto [cx, cy] = cell_coords(cell);
    return element_index(cx / refine_, cy / refine_);
}

std::vector<int> GridHierarchy::element_interior_dofs(int e) const {
    const auto [ex, ey] = element_coords(e);
    std::vector<int> dofs;
    for (int j = 1; j < refine_; ++j)
        for (int i = 1; i < refine_; ++i)
            dofs.push_back(node_dof_[node_index(ex * refine_ + i, ey * refine_ + j)]);
    return dofs;
}

std::vector<int> GridHierarchy::element_closure_dofs(int e) const {
    std::vector<int> dofs;
    for (int node : elem_maps_.at(e).nodes)
        if (node_dof_[node] >= 0) dofs.push_back(node_dof_[node]);
    return dofs;
}

int GridHierarchy::coarse_vertex_node(int v) const noexcept {
    const int vx = v % (coarse_n_ + 1);
    const int vy = v / (coarse_n_ + 1);
    return node_index(vx * refine_, vy * refine_);
}

std::vector<int> GridHierarchy::interior_dofs_of_cells(const std::vector<int>& cells) const {
    const int nf = fine_n();
    std::vector<char> in(num_cells(), 0);
    for (int c : cells) in[c] = 1;
    std::vector<int> dofs;
    for (int iy = 1; iy < nf; ++iy)
        for (int ix = 1; ix < nf; ++ix) {
            if (in[cell_index(ix - 1, iy - 1)] && in[cell_index(ix, iy - 1)] &&
                in[cell_index(ix - 1, iy)] && in[cell_index(ix, iy)])
                dofs.push_back(node_dof_[node_index(ix, iy)]);
        }
    return dofs;
}

GridHierarchy build_grids(int coarse_n, int refine) { return GridHierarchy(coarse_n, refine); }

OversamplePatch oversample(const GridHierarchy& grid, int element, int layers) {
    if (element < 0 || element >= grid.num_elements())
        throw InvalidArgument("element index " + std::to_string(element) + " out of range");
    if (layers < 0) throw InvalidArgument("oversampling layers must be >= 0");

    const int nc = grid.coarse_n();
    std::vector<char> in(grid.num_elements(), 0);
    in[element] = 1;
    for (int layer = 0; layer < layers; ++layer) {
        // Closed coarse squares intersect iff their indices differ by at most
        // one in each direction.
        std::vector<char> next = in;
        for (int e = 0; e < grid.num_elements(); ++e) {
            if (in[e]) continue;
            const auto [ex, ey] = grid.element_coords(e);
            for (int dy = -1; dy <= 1 && !next[e]; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = ex + dx, ny = ey + dy;
                    if (nx < 0 || ny < 0 || nx >= nc || ny >= nc) continue;
                    if (in[grid.element_index(nx, ny)]) {
                        next[e] = 1;
                        break;
                    }
                }
        }
        in.swap(next);
    }

    OversamplePatch patch;
    patch.center = element;
    patch.layers = layers;
    for (int e = 0; e < grid.num_elements(); ++e)
        if (in[e]) {
            patch.elements.push_back(e);
            const auto& cells = grid.element(e).cells;
            patch.cells.insert(patch.cells.end(), cells.begin(), cells.end());
        }
    std::sort(patch.cells.begin(), patch.cells.end());
    patch.local_dofs = grid.interior_dofs_of_cells(patch.cells);
    return patch;
}

}  // namespace fracms
