#pragma once

// Multiscale coarse spaces. V_cem is spanned by constrained energy
// minimizers on oversampled patches, constrained by the s-moments of local
// spectral modes (the auxiliary space). V_2 is spanned by localized
// functions that are s-orthogonal to the auxiliary space and reproduce the
// L2 moments of the leading modes of the kernel of the projection Pi.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fracms/assembly.hpp"
#include "fracms/grid.hpp"
#include "fracms/linalg.hpp"

namespace fracms {

struct SpaceParams {
    int layers = 2;  // oversampling layers, same for every element
    int L = 3;       // auxiliary modes per element
    int J = 3;       // second-space modes per element
};

/// Local spectral modes of every coarse element, stored on the element's
/// interior DOFs together with their moment rows on the element closure.
struct LocalModes {
    std::vector<std::vector<int>> dofs;     // per element: interior DOFs
    std::vector<std::vector<int>> closure;  // per element: closure DOFs
    std::vector<Vector> eigenvalues;        // per element, ascending
    std::vector<Matrix> vectors;            // per element: dofs x count
    /// Per element: closure x count. Column j is B * mode_j restricted to
    /// the closure, where B is the pairing matrix of the family (S for the
    /// auxiliary modes, M for the second family), so that the pairing of
    /// any v with mode j equals moments.col(j).dot(v[closure]).
    std::vector<Matrix> moments;

    int num_elements() const noexcept { return static_cast<int>(vectors.size()); }
    int count(int e) const { return static_cast<int>(vectors.at(e).cols()); }
    int total() const;
    /// Mode j of element e as a vector over all n DOFs.
    Vector global(int e, int j, int n) const;
    /// Pairings (B v, mode) for all modes of element e.
    Vector pair(int e, const Vector& v) const;
};

/// Auxiliary space: modes of a(.,.) vs s_i(.,.) on V(K_i), s_i-orthonormal.
struct AuxSpace : LocalModes {};
/// Second auxiliary family: modes of a(.,.) vs (.,.) on V(K_i) ∩ ker(Pi),
/// L2-orthonormal.
struct AuxSpace2 : LocalModes {};

enum class SpaceTag { cem, v2 };

struct BasisColumn {
    int element = 0;
    int index = 0;
    SpaceTag tag = SpaceTag::cem;
};

/// Coefficient matrix of a coarse space in terms of fine DOFs.
struct ReducedBasis {
    SparseMatrix matrix;  // num_dofs x n
    std::vector<BasisColumn> columns;

    int size() const noexcept { return static_cast<int>(columns.size()); }
    int dofs() const noexcept { return static_cast<int>(matrix.rows()); }
    /// Fine-space vector R c.
    Vector lift(const Vector& c) const { return matrix * c; }
    Vector column(int k) const { return Vector(matrix.col(k)); }
    static ReducedBasis concat(const ReducedBasis& a, const ReducedBasis& b);
    static ReducedBasis identity(int n);
};

AuxSpace aux_spectral(const GridHierarchy& grid, const SparseSym& stiffness, const SparseSym& weighted_mass,
                      int L);

/// Element-wise s_i-orthogonal projection onto the auxiliary space.
Vector project_pi(const AuxSpace& aux, const Vector& v);

AuxSpace2 v2_aux_spectral(const GridHierarchy& grid, const SparseSym& stiffness, const SparseSym& mass,
                          const SparseSym& weighted_mass, const AuxSpace& aux1, int J);

/// Both bases share one pass over the distinct oversampling patches.
struct BasisPair {
    ReducedBasis cem;
    ReducedBasis v2;
};

ReducedBasis cem_basis(const GridHierarchy& grid, const SparseSym& stiffness, const AuxSpace& aux, int layers);
ReducedBasis v2_basis(const GridHierarchy& grid, const SparseSym& stiffness, const AuxSpace& aux1,
                      const AuxSpace2& aux2, int layers);
BasisPair build_bases(const GridHierarchy& grid, const SparseSym& stiffness, const AuxSpace& aux1,
                      const AuxSpace2* aux2, int layers);

/// Everything built from one grid, field and parameter set.
struct MultiscaleSpaces {
    SpaceParams params;
    PartitionOfUnity pou;
    WeightedField kappa_tilde;
    SparseSym weighted_mass;
    AuxSpace aux1;
    AuxSpace2 aux2;
    ReducedBasis cem;
    ReducedBasis v2;
};

MultiscaleSpaces build_spaces(const GridHierarchy& grid, const PermeabilityField& kappa, const FineOperators& ops,
                              const SpaceParams& params);

/// Basis cache: header (grid sizes, parameters, field checksum) followed by
/// the column metadata and dense columns of V_cem then V_2.
void write_basis_cache(const std::string& path, const GridHierarchy& grid, const PermeabilityField& kappa,
                       const SpaceParams& params, const ReducedBasis& cem, const ReducedBasis& v2);
/// Throws Error if the file was built for a different grid, field or
/// parameter set.
BasisPair read_basis_cache(const std::string& path, const GridHierarchy& grid, const PermeabilityField& kappa,
                           const SpaceParams& params);

}  // namespace fracms
