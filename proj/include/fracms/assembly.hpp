#pragma once

// Q1 bilinear finite elements on the fine grid: element matrices, global
// mass / stiffness / weighted-mass assembly on interior DOFs, the MsFEM
// partition of unity and the weight kappa_tilde derived from it.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fracms/grid.hpp"
#include "fracms/linalg.hpp"
#include "fracms/raster.hpp"

namespace fracms {

/// Piecewise-constant positive coefficient, one value per fine cell.
class PermeabilityField {
public:
    PermeabilityField() = default;
    /// `n` cells per side; throws unless every value is finite and > 0.
    PermeabilityField(int n, std::vector<double> values);
    static PermeabilityField constant(int n, double value);
    static PermeabilityField from_raster(const Raster& r);

    int n() const noexcept { return n_; }
    int num_cells() const noexcept { return static_cast<int>(values_.size()); }
    double operator[](int cell) const noexcept { return values_[cell]; }
    std::span<const double> values() const noexcept { return values_; }
    double min() const;
    double max() const;
    double contrast() const { return max() / min(); }
    PermeabilityField scaled(double c) const;
    Raster to_raster() const;
    /// FNV-1a over the value bytes, used to tag cached bases.
    std::uint64_t checksum() const;

private:
    int n_ = 0;
    std::vector<double> values_;
};

/// kappa_tilde = kappa * sum_i |grad chi_i|^2, one value per fine cell.
struct WeightedField {
    std::vector<double> values;
};

/// MsFEM partition of unity. chi[v] holds the values of the function of
/// coarse vertex v on every fine node (boundary nodes included, since the
/// functions of boundary vertices do not vanish there).
struct PartitionOfUnity {
    std::vector<Vector> chi;
    int count() const noexcept { return static_cast<int>(chi.size()); }
};

using Matrix4 = Eigen::Matrix4d;

/// Exact Q1 mass matrix of an h x h cell, corner order ccw from lower left.
Matrix4 element_mass(double h);
/// Exact Q1 stiffness matrix for a constant coefficient.
Matrix4 element_stiffness(double kappa, double h);

enum class Weight { mass, stiffness, weighted_mass };

/// Global matrix on interior DOFs. `cell_weights` is the per-cell
/// coefficient (kappa for stiffness, kappa_tilde for weighted_mass); for
/// plain mass it must be empty.
SparseSym assemble(const GridHierarchy& grid, std::span<const double> cell_weights, Weight weight);
SparseSym assemble_mass(const GridHierarchy& grid);
SparseSym assemble_stiffness(const GridHierarchy& grid, const PermeabilityField& kappa);
SparseSym assemble_weighted_mass(const GridHierarchy& grid, const WeightedField& kt);

PartitionOfUnity msfem_partition(const GridHierarchy& grid, const PermeabilityField& kappa);
WeightedField kappa_tilde(const GridHierarchy& grid, const PermeabilityField& kappa,
                          const PartitionOfUnity& pou);

using SpaceTimeFunction = std::function<double(double x, double y, double t)>;

/// (f(., t), phi_i) with f interpolated bilinearly per cell, integrated exactly.
Vector load_vector(const GridHierarchy& grid, const SpaceTimeFunction& f, double t);
/// Same for nodal values given on every fine node.
Vector load_vector_nodal(const GridHierarchy& grid, std::span<const double> node_values);
/// Exact load of a piecewise-constant (per fine cell) function.
Vector load_vector_cells(const GridHierarchy& grid, std::span<const double> cell_values);

/// Values of f(., t) at the interior DOFs.
Vector nodal_interpolant(const GridHierarchy& grid, const SpaceTimeFunction& f, double t);

/// Fine-grid operators shared by every stage of an experiment.
struct FineOperators {
    SparseSym mass;
    SparseSym stiffness;
};

FineOperators assemble_fine(const GridHierarchy& grid, const PermeabilityField& kappa);

}  // namespace fracms
