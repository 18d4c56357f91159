#include "fracms/spaces.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "fracms/error.hpp"

namespace fracms {

namespace {

std::string element_label(int e, int j) { return "(element " + std::to_string(e) + ", mode " + std::to_string(j) + ")"; }

/// Moment rows of the local modes: B * mode restricted to the closure DOFs.
Matrix closure_moments(const SparseSym& b, const std::vector<int>& dofs, const std::vector<int>& closure,
                       const Matrix& vectors) {
    Matrix out(static_cast<Eigen::Index>(closure.size()), vectors.cols());
    Vector g = Vector::Zero(b.n());
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        g.setZero();
        for (std::size_t k = 0; k < dofs.size(); ++k) g[dofs[k]] = vectors(static_cast<Eigen::Index>(k), j);
        const Vector bg = b * g;
        for (std::size_t k = 0; k < closure.size(); ++k) out(static_cast<Eigen::Index>(k), j) = bg[closure[k]];
    }
    return out;
}

void fix_sign(Matrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        if (v(imax, j) < 0) v.col(j) = -v.col(j);
    }
}

/// Appends one constraint row per mode of every element in `elements`,
/// expressed in patch-local column indices.
void append_rows(const LocalModes& modes, const std::vector<int>& elements, const std::vector<int>& local,
                 int& row, std::vector<Triplet>& t) {
    for (int m : elements) {
        const auto& closure = modes.closure[m];
        const Matrix& mom = modes.moments[m];
        for (Eigen::Index l = 0; l < mom.cols(); ++l, ++row)
            for (std::size_t k = 0; k < closure.size(); ++k) {
                const int c = local[closure[k]];
                const double v = mom(static_cast<Eigen::Index>(k), l);
                if (c >= 0 && v != 0.0) t.emplace_back(row, c, v);
            }
    }
}

/// (element, mode) of constraint row `row` for the listed elements.
std::string describe_row(const std::vector<const LocalModes*>& families, const std::vector<int>& elements, int row) {
    for (std::size_t f = 0; f < families.size(); ++f)
        for (int m : elements) {
            const int c = families[f]->count(m);
            if (row < c)
                return (f == 0 ? "auxiliary " : "second-family ") + element_label(m, row);
            row -= c;
        }
    return "unknown";
}

std::vector<int> column_offsets(const LocalModes& modes) {
    std::vector<int> off(modes.num_elements() + 1, 0);
    for (int e = 0; e < modes.num_elements(); ++e) off[e + 1] = off[e] + modes.count(e);
    return off;
}

BasisPair construct(const GridHierarchy& grid, const SparseSym& a, const AuxSpace& aux1, const AuxSpace2* aux2,
                    int layers, bool want_cem) {
    const int ne = grid.num_elements();
    if (aux1.num_elements() != ne) throw InvalidArgument("auxiliary space does not match the grid");
    if (aux2 && aux2->num_elements() != ne) throw InvalidArgument("second auxiliary space does not match the grid");
    if (a.n() != grid.num_dofs()) throw InvalidArgument("stiffness matrix does not match the grid");

    // Elements whose patches cover the same coarse elements share one
    // factorization.
    std::map<std::vector<int>, std::vector<int>> groups;
    std::vector<OversamplePatch> patches(ne);
    for (int e = 0; e < ne; ++e) {
        patches[e] = oversample(grid, e, layers);
        groups[patches[e].elements].push_back(e);
    }

    const std::vector<int> off1 = column_offsets(aux1);
    const std::vector<int> off2 = aux2 ? column_offsets(*aux2) : std::vector<int>(ne + 1, 0);
    std::vector<Triplet> t1, t2;
    std::vector<int> local(grid.num_dofs(), -1);

    for (const auto& [elements, members] : groups) {
        const std::vector<int>& dofs = patches[members.front()].local_dofs;
        for (std::size_t k = 0; k < dofs.size(); ++k) local[dofs[k]] = static_cast<int>(k);
        const int np = static_cast<int>(dofs.size());
        const SparseSym ap = a.principal_submatrix(dofs);

        auto scatter = [&](const Vector& x, int col, std::vector<Triplet>& t) {
            for (int k = 0; k < np; ++k)
                if (x[k] != 0.0) t.emplace_back(dofs[k], col, x[k]);
        };
        auto make_solver = [&](const std::vector<const LocalModes*>& families) {
            std::vector<Triplet> ct;
            int rows = 0;
            for (const LocalModes* f : families) append_rows(*f, elements, local, rows, ct);
            SparseRows c(rows, np);
            c.setFromTriplets(ct.begin(), ct.end());
            try {
                return std::make_unique<KktSolver>(ap, std::move(c));
            } catch (const RankDeficientError& err) {
                throw RankDeficientError("patch of element " + std::to_string(members.front()) +
                                             ": constraint from " + describe_row(families, elements, err.constraint()) +
                                             " is linearly dependent",
                                         err.constraint());
            }
        };

        if (want_cem) {
            const auto solver = make_solver({&aux1});
            for (int i : members)
                for (int j = 0; j < aux1.count(i); ++j) {
                    try {
                        // Right-hand side s(psi_j^(i), psi_l^(m)) for every constraint.
                        const Vector psi = aux1.global(i, j, grid.num_dofs());
                        Vector g(solver->constraints());
                        int row = 0;
                        for (int m : elements) {
                            const Vector p = aux1.pair(m, psi);
                            g.segment(row, p.size()) = p;
                            row += static_cast<int>(p.size());
                        }
                        scatter(solver->solve_constraints(g).x, off1[i] + j, t1);
                    } catch (const RankDeficientError&) {
                        throw;
                    } catch (const SolverError& err) {
                        throw SolverError("multiscale basis " + element_label(i, j) + ": " + err.what());
                    }
                }
        }
        if (aux2) {
            const auto solver = make_solver({&aux1, aux2});
            const int rows1 = [&] {
                int r = 0;
                for (int m : elements) r += aux1.count(m);
                return r;
            }();
            for (int i : members)
                for (int j = 0; j < aux2->count(i); ++j) {
                    try {
                        const Vector xi = aux2->global(i, j, grid.num_dofs());
                        Vector g = Vector::Zero(solver->constraints());
                        int row = rows1;
                        for (int m : elements) {
                            const Vector p = aux2->pair(m, xi);
                            g.segment(row, p.size()) = p;
                            row += static_cast<int>(p.size());
                        }
                        scatter(solver->solve_constraints(g).x, off2[i] + j, t2);
                    } catch (const RankDeficientError&) {
                        throw;
                    } catch (const SolverError& err) {
                        throw SolverError("second-space basis " + element_label(i, j) + ": " + err.what());
                    }
                }
        }
        for (int d : dofs) local[d] = -1;
    }

    BasisPair out;
    if (want_cem) {
        out.cem.matrix.resize(grid.num_dofs(), off1.back());
        out.cem.matrix.setFromTriplets(t1.begin(), t1.end());
        for (int e = 0; e < ne; ++e)
            for (int j = 0; j < aux1.count(e); ++j) out.cem.columns.push_back({e, j, SpaceTag::cem});
    }
    out.v2.matrix.resize(grid.num_dofs(), off2.back());
    if (aux2) {
        out.v2.matrix.setFromTriplets(t2.begin(), t2.end());
        for (int e = 0; e < ne; ++e)
            for (int j = 0; j < aux2->count(e); ++j) out.v2.columns.push_back({e, j, SpaceTag::v2});
    }
    return out;
}

}  // namespace

// --- LocalModes -------------------------------------------------------------

int LocalModes::total() const {
    int n = 0;
    for (const auto& v : vectors) n += static_cast<int>(v.cols());
    return n;
}

Vector LocalModes::global(int e, int j, int n) const {
    Vector v = Vector::Zero(n);
    const auto& d = dofs.at(e);
    for (std::size_t k = 0; k < d.size(); ++k) v[d[k]] = vectors[e](static_cast<Eigen::Index>(k), j);
    return v;
}

Vector LocalModes::pair(int e, const Vector& v) const {
    const auto& c = closure.at(e);
    Vector vc(static_cast<Eigen::Index>(c.size()));
    for (std::size_t k = 0; k < c.size(); ++k) vc[static_cast<Eigen::Index>(k)] = v[c[k]];
    return moments[e].transpose() * vc;
}

// --- ReducedBasis -----------------------------------------------------------

ReducedBasis ReducedBasis::concat(const ReducedBasis& a, const ReducedBasis& b) {
    if (a.dofs() != b.dofs() && a.size() > 0 && b.size() > 0)
        throw InvalidArgument("cannot concatenate bases over different fine spaces");
    const int rows = a.size() > 0 ? a.dofs() : b.dofs();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.matrix.nonZeros() + b.matrix.nonZeros()));
    for (int k = 0; k < a.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a.matrix, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < b.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(b.matrix, k); it; ++it)
            t.emplace_back(it.row(), a.size() + it.col(), it.value());
    ReducedBasis out;
    out.matrix.resize(rows, a.size() + b.size());
    out.matrix.setFromTriplets(t.begin(), t.end());
    out.columns = a.columns;
    out.columns.insert(out.columns.end(), b.columns.begin(), b.columns.end());
    return out;
}

ReducedBasis ReducedBasis::identity(int n) {
    ReducedBasis out;
    out.matrix.resize(n, n);
    out.matrix.setIdentity();
    out.columns.resize(n);
    for (int k = 0; k < n; ++k) out.columns[k] = {k, 0, SpaceTag::cem};
    return out;
}

// --- Auxiliary spaces -------------------------------------------------------

AuxSpace aux_spectral(const GridHierarchy& grid, const SparseSym& stiffness, const SparseSym& weighted_mass, int L) {
    if (L < 1) throw InvalidArgument("auxiliary mode count must be >= 1");
    AuxSpace aux;
    const int ne = grid.num_elements();
    aux.dofs.resize(ne);
    aux.closure.resize(ne);
    aux.eigenvalues.resize(ne);
    aux.vectors.resize(ne);
    aux.moments.resize(ne);
    for (int e = 0; e < ne; ++e) {
        aux.dofs[e] = grid.element_interior_dofs(e);
        aux.closure[e] = grid.element_closure_dofs(e);
        if (L > static_cast<int>(aux.dofs[e].size()))
            throw InvalidArgument("element " + std::to_string(e) + " has only " + std::to_string(aux.dofs[e].size()) +
                                  " interior DOFs, " + std::to_string(L) + " modes requested");
        const Matrix ae = stiffness.principal_submatrix(aux.dofs[e]).dense();
        const Matrix se = weighted_mass.principal_submatrix(aux.dofs[e]).dense();
        EigPairs ep;
        try {
            ep = gen_eig_smallest(ae, se, L);
        } catch (const SolverError& err) {
            throw SolverError("auxiliary eigenproblem of element " + std::to_string(e) +
                              " is degenerate (weighted mass not positive definite): " + err.what());
        }
        aux.eigenvalues[e] = ep.values;
        aux.vectors[e] = std::move(ep.vectors);
        aux.moments[e] = closure_moments(weighted_mass, aux.dofs[e], aux.closure[e], aux.vectors[e]);
    }
    return aux;
}

Vector project_pi(const AuxSpace& aux, const Vector& v) {
    Vector out = Vector::Zero(v.size());
    for (int e = 0; e < aux.num_elements(); ++e) {
        const Vector c = aux.pair(e, v);
        const Vector local = aux.vectors[e] * c;
        const auto& d = aux.dofs[e];
        for (std::size_t k = 0; k < d.size(); ++k) out[d[k]] += local[static_cast<Eigen::Index>(k)];
    }
    return out;
}

AuxSpace2 v2_aux_spectral(const GridHierarchy& grid, const SparseSym& stiffness, const SparseSym& mass,
                          const SparseSym& weighted_mass, const AuxSpace& aux1, int J) {
    if (J < 0) throw InvalidArgument("second-space mode count must be >= 0");
    const int ne = grid.num_elements();
    if (aux1.num_elements() != ne) throw InvalidArgument("auxiliary space does not match the grid");
    AuxSpace2 aux;
    aux.dofs.resize(ne);
    aux.closure.resize(ne);
    aux.eigenvalues.resize(ne);
    aux.vectors.resize(ne);
    aux.moments.resize(ne);
    for (int e = 0; e < ne; ++e) {
        aux.dofs[e] = aux1.dofs[e];
        aux.closure[e] = aux1.closure[e];
        const auto& d = aux.dofs[e];
        const Eigen::Index n = static_cast<Eigen::Index>(d.size());
        const Eigen::Index l = aux1.vectors[e].cols();
        if (J > n - l)
            throw InvalidArgument("element " + std::to_string(e) + ": " + std::to_string(J) +
                                  " modes requested from a constrained space of dimension " + std::to_string(n - l));
        // Null space of the s_i-moment rows through a full QR of their transpose.
        const Matrix se = weighted_mass.principal_submatrix(d).dense();
        const Matrix q = se * aux1.vectors[e];
        Eigen::HouseholderQR<Matrix> qr(q);
        const Matrix qfull = qr.householderQ() * Matrix::Identity(n, n);
        const Matrix z = qfull.rightCols(n - l);
        const Matrix ae = stiffness.principal_submatrix(d).dense();
        const Matrix me = mass.principal_submatrix(d).dense();
        const Matrix az = z.transpose() * ae * z;
        const Matrix mz = z.transpose() * me * z;
        const EigPairs ep = gen_eig_smallest(az, mz, J);
        aux.eigenvalues[e] = ep.values;
        aux.vectors[e] = z * ep.vectors;
        fix_sign(aux.vectors[e]);
        aux.moments[e] = closure_moments(mass, d, aux.closure[e], aux.vectors[e]);
    }
    return aux;
}

// --- Bases ------------------------------------------------------------------

ReducedBasis cem_basis(const GridHierarchy& grid, const SparseSym& stiffness, const AuxSpace& aux, int layers) {
    return construct(grid, stiffness, aux, nullptr, layers, true).cem;
}

ReducedBasis v2_basis(const GridHierarchy& grid, const SparseSym& stiffness, const AuxSpace& aux1,
                      const AuxSpace2& aux2, int layers) {
    return construct(grid, stiffness, aux1, &aux2, layers, false).v2;
}

BasisPair build_bases(const GridHierarchy& grid, const SparseSym& stiffness, const AuxSpace& aux1,
                      const AuxSpace2* aux2, int layers) {
    return construct(grid, stiffness, aux1, aux2, layers, true);
}

MultiscaleSpaces build_spaces(const GridHierarchy& grid, const PermeabilityField& kappa, const FineOperators& ops,
                              const SpaceParams& params) {
    if (params.layers < 0) throw InvalidArgument("oversampling layers must be >= 0");
    MultiscaleSpaces sp;
    sp.params = params;
    sp.pou = msfem_partition(grid, kappa);
    sp.kappa_tilde = kappa_tilde(grid, kappa, sp.pou);
    sp.weighted_mass = assemble_weighted_mass(grid, sp.kappa_tilde);
    sp.aux1 = aux_spectral(grid, ops.stiffness, sp.weighted_mass, params.L);
    const bool with_v2 = params.J > 0;
    if (with_v2) sp.aux2 = v2_aux_spectral(grid, ops.stiffness, ops.mass, sp.weighted_mass, sp.aux1, params.J);
    BasisPair b = build_bases(grid, ops.stiffness, sp.aux1, with_v2 ? &sp.aux2 : nullptr, params.layers);
    sp.cem = std::move(b.cem);
    sp.v2 = std::move(b.v2);
    if (!with_v2) sp.v2.matrix.resize(grid.num_dofs(), 0);
    return sp;
}

// --- Cache ------------------------------------------------------------------

namespace {

constexpr char kCacheMagic[8] = {'F', 'R', 'M', 'S', 'B', 'A', 'S', '1'};

struct CacheHeader {
    std::int32_t coarse_n, refine, layers, L, J;
    std::uint64_t checksum;
    std::int32_t n_cem, n_v2, dofs;
};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError("basis cache: truncated file", 0);
    return v;
}

void write_columns(std::ostream& out, const ReducedBasis& b) {
    for (const BasisColumn& c : b.columns) {
        put<std::int32_t>(out, c.element);
        put<std::int32_t>(out, c.index);
        put<std::int32_t>(out, c.tag == SpaceTag::cem ? 0 : 1);
    }
    for (int k = 0; k < b.size(); ++k) {
        const Vector col = b.column(k);
        out.write(reinterpret_cast<const char*>(col.data()), static_cast<std::streamsize>(col.size() * sizeof(double)));
    }
}

ReducedBasis read_columns(std::istream& in, int n, int dofs) {
    ReducedBasis b;
    b.columns.resize(n);
    for (auto& c : b.columns) {
        c.element = get<std::int32_t>(in);
        c.index = get<std::int32_t>(in);
        c.tag = get<std::int32_t>(in) == 0 ? SpaceTag::cem : SpaceTag::v2;
    }
    std::vector<Triplet> t;
    Vector col(dofs);
    for (int k = 0; k < n; ++k) {
        if (!in.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(dofs * sizeof(double))))
            throw ParseError("basis cache: truncated column data", 0);
        for (int i = 0; i < dofs; ++i)
            if (col[i] != 0.0) t.emplace_back(i, k, col[i]);
    }
    b.matrix.resize(dofs, n);
    b.matrix.setFromTriplets(t.begin(), t.end());
    return b;
}

}  // namespace

void write_basis_cache(const std::string& path, const GridHierarchy& grid, const PermeabilityField& kappa,
                       const SpaceParams& params, const ReducedBasis& cem, const ReducedBasis& v2) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write basis cache '" + path + "'");
    out.write(kCacheMagic, sizeof kCacheMagic);
    put<std::int32_t>(out, grid.coarse_n());
    put<std::int32_t>(out, grid.refine());
    put<std::int32_t>(out, params.layers);
    put<std::int32_t>(out, params.L);
    put<std::int32_t>(out, params.J);
    put<std::uint64_t>(out, kappa.checksum());
    put<std::int32_t>(out, cem.size());
    put<std::int32_t>(out, v2.size());
    put<std::int32_t>(out, grid.num_dofs());
    write_columns(out, cem);
    write_columns(out, v2);
    if (!out) throw Error("write failed for '" + path + "'");
}

BasisPair read_basis_cache(const std::string& path, const GridHierarchy& grid, const PermeabilityField& kappa,
                           const SpaceParams& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open basis cache '" + path + "'");
    char magic[sizeof kCacheMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCacheMagic, sizeof magic) != 0)
        throw ParseError("basis cache: bad magic", 0);
    CacheHeader h{};
    h.coarse_n = get<std::int32_t>(in);
    h.refine = get<std::int32_t>(in);
    h.layers = get<std::int32_t>(in);
    h.L = get<std::int32_t>(in);
    h.J = get<std::int32_t>(in);
    h.checksum = get<std::uint64_t>(in);
    h.n_cem = get<std::int32_t>(in);
    h.n_v2 = get<std::int32_t>(in);
    h.dofs = get<std::int32_t>(in);
    if (h.coarse_n != grid.coarse_n() || h.refine != grid.refine() || h.dofs != grid.num_dofs())
        throw Error("basis cache '" + path + "' was built for a different grid");
    if (h.layers != params.layers || h.L != params.L || h.J != params.J)
        throw Error("basis cache '" + path + "' was built with different space parameters");
    if (h.checksum != kappa.checksum()) throw Error("basis cache '" + path + "' was built for a different field");
    BasisPair out;
    out.cem = read_columns(in, h.n_cem, h.dofs);
    out.v2 = read_columns(in, h.n_v2, h.dofs);
    return out;
}

}  // namespace fracms
