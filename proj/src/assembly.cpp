#include "fracms/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "fracms/error.hpp"

namespace fracms {

// --- PermeabilityField ------------------------------------------------------

PermeabilityField::PermeabilityField(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (n <= 0) throw InvalidArgument("permeability field needs a positive size");
    if (values_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw InvalidArgument("permeability field: expected " + std::to_string(n * n) + " values, got " +
                              std::to_string(values_.size()));
    for (std::size_t c = 0; c < values_.size(); ++c)
        if (!(std::isfinite(values_[c]) && values_[c] > 0.0))
            throw InvalidArgument("permeability must be finite and positive (cell " + std::to_string(c) + ")");
}

PermeabilityField PermeabilityField::constant(int n, double value) {
    return PermeabilityField(n, std::vector<double>(static_cast<std::size_t>(n) * n, value));
}

PermeabilityField PermeabilityField::from_raster(const Raster& r) {
    if (r.nx != r.ny) throw InvalidArgument("permeability raster must be square");
    return PermeabilityField(r.nx, r.values);
}

double PermeabilityField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PermeabilityField::max() const { return *std::max_element(values_.begin(), values_.end()); }

PermeabilityField PermeabilityField::scaled(double c) const {
    std::vector<double> v = values_;
    for (double& x : v) x *= c;
    return PermeabilityField(n_, std::move(v));
}

Raster PermeabilityField::to_raster() const { return Raster{n_, n_, values_}; }

std::uint64_t PermeabilityField::checksum() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(&n_, sizeof n_);
    mix(values_.data(), values_.size() * sizeof(double));
    return h;
}

// --- Element matrices -------------------------------------------------------

Matrix4 element_mass(double h) {
    Matrix4 m;
    m << 4, 2, 1, 2,
         2, 4, 2, 1,
         1, 2, 4, 2,
         2, 1, 2, 4;
    return m * (h * h / 36.0);
}

Matrix4 element_stiffness(double kappa, double /*h*/) {
    Matrix4 k;
    k << 4, -1, -2, -1,
        -1, 4, -1, -2,
        -2, -1, 4, -1,
        -1, -2, -1, 4;
    return k * (kappa / 6.0);
}

// --- Global assembly --------------------------------------------------------

SparseSym assemble(const GridHierarchy& grid, std::span<const double> cell_weights, Weight weight) {
    const int ncell = grid.num_cells();
    if (weight == Weight::mass) {
        if (!cell_weights.empty() && static_cast<int>(cell_weights.size()) != ncell)
            throw InvalidArgument("assemble: mass weights must be empty or one per cell");
    } else if (static_cast<int>(cell_weights.size()) != ncell) {
        throw InvalidArgument("assemble: expected " + std::to_string(ncell) + " cell weights, got " +
                              std::to_string(cell_weights.size()));
    }
    const double h = grid.h();
    const Matrix4 ref = weight == Weight::stiffness ? element_stiffness(1.0, h) : element_mass(h);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(ncell) * 16);
    for (int c = 0; c < ncell; ++c) {
        const double w = cell_weights.empty() ? 1.0 : cell_weights[c];
        if (w == 0.0) continue;
        const auto nodes = grid.cell_nodes(c);
        for (int a = 0; a < 4; ++a) {
            const int da = grid.dof_of_node(nodes[a]);
            if (da < 0) continue;
            for (int b = 0; b < 4; ++b) {
                const int db = grid.dof_of_node(nodes[b]);
                if (db >= 0) t.emplace_back(da, db, w * ref(a, b));
            }
        }
    }
    return SparseSym::from_triplets(grid.num_dofs(), t);
}

SparseSym assemble_mass(const GridHierarchy& grid) { return assemble(grid, {}, Weight::mass); }

SparseSym assemble_stiffness(const GridHierarchy& grid, const PermeabilityField& kappa) {
    if (kappa.n() != grid.fine_n()) throw InvalidArgument("permeability field does not match the fine grid");
    return assemble(grid, kappa.values(), Weight::stiffness);
}

SparseSym assemble_weighted_mass(const GridHierarchy& grid, const WeightedField& kt) {
    return assemble(grid, kt.values, Weight::weighted_mass);
}

FineOperators assemble_fine(const GridHierarchy& grid, const PermeabilityField& kappa) {
    return FineOperators{assemble_mass(grid), assemble_stiffness(grid, kappa)};
}

// --- MsFEM partition of unity ----------------------------------------------

PartitionOfUnity msfem_partition(const GridHierarchy& grid, const PermeabilityField& kappa) {
    if (kappa.n() != grid.fine_n()) throw InvalidArgument("permeability field does not match the fine grid");
    const int r = grid.refine();
    const int nl = r + 1;                 // local nodes per side
    const int ni = (r - 1) * (r - 1);     // local interior nodes
    const Matrix4 kref = element_stiffness(1.0, grid.h());

    PartitionOfUnity pou;
    pou.chi.assign(grid.num_coarse_vertices(), Vector::Zero(grid.num_nodes()));

    // Local interior numbering: -1 on the element boundary.
    std::vector<int> interior(nl * nl, -1);
    for (int j = 1; j < r; ++j)
        for (int i = 1; i < r; ++i) interior[i + j * nl] = (i - 1) + (j - 1) * (r - 1);

    // Bilinear vertex data on the local lattice, corners ccw from lower left.
    Matrix bilinear(nl * nl, 4);
    for (int j = 0; j < nl; ++j)
        for (int i = 0; i < nl; ++i) {
            const double s = static_cast<double>(i) / r, t = static_cast<double>(j) / r;
            bilinear.row(i + j * nl) << (1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t;
        }

    for (int e = 0; e < grid.num_elements(); ++e) {
        const auto [ex, ey] = grid.element_coords(e);
        std::vector<Triplet> t;
        Matrix rhs = Matrix::Zero(ni, 4);
        for (int cj = 0; cj < r; ++cj)
            for (int ci = 0; ci < r; ++ci) {
                const int cell = grid.cell_index(ex * r + ci, ey * r + cj);
                const int local[4] = {ci + cj * nl, ci + 1 + cj * nl, ci + 1 + (cj + 1) * nl, ci + (cj + 1) * nl};
                for (int a = 0; a < 4; ++a) {
                    const int ia = interior[local[a]];
                    if (ia < 0) continue;
                    for (int b = 0; b < 4; ++b) {
                        const double kab = kappa[cell] * kref(a, b);
                        const int ib = interior[local[b]];
                        if (ib >= 0)
                            t.emplace_back(ia, ib, kab);
                        else
                            rhs.row(ia) -= kab * bilinear.row(local[b]);
                    }
                }
            }
        const SpdFactor factor(SparseSym::from_triplets(ni, t));
        const int verts[4] = {grid.coarse_vertex_index(ex, ey), grid.coarse_vertex_index(ex + 1, ey),
                              grid.coarse_vertex_index(ex + 1, ey + 1), grid.coarse_vertex_index(ex, ey + 1)};
        for (int k = 0; k < 4; ++k) {
            const Vector x = ni > 0 ? factor.solve(rhs.col(k)) : Vector();
            Vector& chi = pou.chi[verts[k]];
            for (int j = 0; j < nl; ++j)
                for (int i = 0; i < nl; ++i) {
                    const int node = grid.node_index(ex * r + i, ey * r + j);
                    const int li = i + j * nl;
                    chi[node] = interior[li] >= 0 ? x[interior[li]] : bilinear(li, k);
                }
        }
    }
    return pou;
}

WeightedField kappa_tilde(const GridHierarchy& grid, const PermeabilityField& kappa, const PartitionOfUnity& pou) {
    if (pou.count() != grid.num_coarse_vertices()) throw InvalidArgument("partition of unity does not match grid");
    const double h = grid.h();
    WeightedField kt;
    kt.values.assign(grid.num_cells(), 0.0);
    for (int c = 0; c < grid.num_cells(); ++c) {
        const auto nodes = grid.cell_nodes(c);
        const auto [ex, ey] = grid.element_coords(grid.element_of_cell(c));
        // Only the four vertex functions of the enclosing element are
        // nonzero on this cell.
        const int verts[4] = {grid.coarse_vertex_index(ex, ey), grid.coarse_vertex_index(ex + 1, ey),
                              grid.coarse_vertex_index(ex + 1, ey + 1), grid.coarse_vertex_index(ex, ey + 1)};
        double sum = 0.0;
        for (int v : verts) {
            const Vector& chi = pou.chi[v];
            const double c0 = chi[nodes[0]], c1 = chi[nodes[1]], c2 = chi[nodes[2]], c3 = chi[nodes[3]];
            const double gx = ((c1 - c0) + (c2 - c3)) / (2 * h);
            const double gy = ((c3 - c0) + (c2 - c1)) / (2 * h);
            sum += gx * gx + gy * gy;
        }
        kt.values[c] = kappa[c] * sum;
    }
    return kt;
}

// --- Loads ------------------------------------------------------------------

Vector load_vector_nodal(const GridHierarchy& grid, std::span<const double> node_values) {
    if (static_cast<int>(node_values.size()) != grid.num_nodes())
        throw InvalidArgument("load: expected one value per fine node");
    const Matrix4 m = element_mass(grid.h());
    Vector f = Vector::Zero(grid.num_dofs());
    for (int c = 0; c < grid.num_cells(); ++c) {
        const auto nodes = grid.cell_nodes(c);
        Eigen::Vector4d v(node_values[nodes[0]], node_values[nodes[1]], node_values[nodes[2]], node_values[nodes[3]]);
        const Eigen::Vector4d mv = m * v;
        for (int a = 0; a < 4; ++a) {
            const int d = grid.dof_of_node(nodes[a]);
            if (d >= 0) f[d] += mv[a];
        }
    }
    return f;
}

Vector load_vector(const GridHierarchy& grid, const SpaceTimeFunction& f, double t) {
    std::vector<double> values(grid.num_nodes());
    for (int n = 0; n < grid.num_nodes(); ++n) {
        const auto [x, y] = grid.node_position(n);
        values[n] = f(x, y, t);
    }
    return load_vector_nodal(grid, values);
}

Vector load_vector_cells(const GridHierarchy& grid, std::span<const double> cell_values) {
    if (static_cast<int>(cell_values.size()) != grid.num_cells())
        throw InvalidArgument("load: expected one value per fine cell");
    const double quarter = grid.h() * grid.h() / 4.0;
    Vector f = Vector::Zero(grid.num_dofs());
    for (int c = 0; c < grid.num_cells(); ++c) {
        if (cell_values[c] == 0.0) continue;
        for (int node : grid.cell_nodes(c)) {
            const int d = grid.dof_of_node(node);
            if (d >= 0) f[d] += cell_values[c] * quarter;
        }
    }
    return f;
}

Vector nodal_interpolant(const GridHierarchy& grid, const SpaceTimeFunction& f, double t) {
    Vector v(grid.num_dofs());
    for (int d = 0; d < grid.num_dofs(); ++d) {
        const auto [x, y] = grid.node_position(grid.node_of_dof(d));
        v[d] = f(x, y, t);
    }
    return v;
}

}  // namespace fracms
