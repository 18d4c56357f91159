#pragma once

// Stability analysis of the three schemes: largest generalized eigenvalues
// of (A, M) on a space, the L2 angle constant between the implicit and
// explicit blocks, the resulting maximal time steps, and an audit of the
// discrete energy estimate of the implicit scheme.

#include <iosfwd>
#include <string>
#include <vector>

#include "fracms/assembly.hpp"
#include "fracms/fractional.hpp"
#include "fracms/schemes.hpp"
#include "fracms/spaces.hpp"

namespace fracms {

/// Values of gamma within this distance of 1 count as degenerate.
inline constexpr double kGammaTol = 1e-10;
/// Dimension up to which lambda_max uses a dense eigensolver.
inline constexpr int kDenseEigLimit = 2000;

/// Largest lambda with A v = lambda M v (M SPD), relative accuracy 1e-8.
double lambda_max(const SparseSym& a, const SparseSym& m);
double lambda_max(const Matrix& a, const Matrix& m);
/// Lanczos iteration in the M inner product with full reorthogonalization,
/// the path taken by lambda_max above kDenseEigLimit.
double lambda_max_lanczos(const SparseSym& a, const SparseSym& m);

struct GammaEstimate {
    /// Cosine of the minimal L2 angle between the two blocks.
    double gamma = 0.0;
    /// min over u2 != 0, u1 of ||u1 + u2||^2 / ||u2||^2, computed directly
    /// from the Schur complement of the block mass matrix.
    double min_ratio = 1.0;
};

GammaEstimate estimate_gamma(const Matrix& m11, const Matrix& m12, const Matrix& m22);

/// Largest dt with alpha0 * lambda <= 1/2; +inf for lambda == 0.
double dt_max_explicit(double alpha, double lambda);
/// Largest dt with alpha0 * lambda <= 1 - gamma^2; +inf for lambda == 0.
double dt_max_partial(double alpha, double gamma, double lambda);

struct StabilityReport {
    double alpha = 0.0;
    double dt = 0.0;
    double lambda_max_full = 0.0;  // on V_cem + V_2
    double lambda_max_v2 = 0.0;    // on V_2
    double lambda_max_fine = -1.0; // on the fine space, < 0 when not computed
    double gamma = 0.0;
    double min_ratio = 1.0;
    /// Largest g with ||u1 + u2||^2 >= 2 (1 - g^2) ||u2||^2 for all pairs
    /// (0 when the ratio exceeds 2).
    double gamma_cond1 = 0.0;
    double dt_max_explicit = 0.0;
    double dt_max_partial = 0.0;
    double dt_max_fine_explicit = -1.0;

    /// False when the blocks are (numerically) not transversal.
    bool gamma_valid() const noexcept { return gamma < 1.0 - kGammaTol; }
    bool partial_stable_predicted() const noexcept { return dt <= dt_max_partial; }
    bool explicit_stable_predicted() const noexcept { return dt <= dt_max_explicit; }
};

/// Analysis of a two-block reduced system (n1 implicit, n2 explicit columns).
StabilityReport analyze(const ReducedSystem& sys, double alpha, double dt);

void write_report(std::ostream& out, const StabilityReport& r);
void write_report_file(const std::string& path, const StabilityReport& r);

struct EnergyAudit {
    double lhs = 0.0;          // ||u^N||_a^2
    double rhs = 0.0;          // ||u^0||_a^2 + alpha0 sum ||P f^{k+1}||^2
    double slack = 0.0;        // rhs - lhs at the final step
    double min_slack = 0.0;    // minimum over all intermediate N
    int min_slack_step = 0;
};

/// Audits ||u^n||_a^2 <= ||u^0||_a^2 + alpha0 sum_{k<n} ||P f^{k+1}||^2 along
/// a trajectory in the space of `sys`, where P is the L2 projection onto
/// that space (||P f||^2 = F^T M_r^{-1} F with F the reduced load).
EnergyAudit energy_audit(const Trajectory& traj, const ReducedSystem& sys, const FineLoad& load, const L1Kernel& kernel);

struct SweepRow {
    double contrast = 0.0;
    double lambda_full = 0.0;
    double lambda_v2 = 0.0;
    double gamma = 0.0;
    double dt_exp = 0.0;
    double dt_partial = 0.0;
};

/// Builds the spaces for kappa = 1 + (contrast - 1) * mask on each contrast
/// and analyzes them. `mask` holds 0/1 per fine cell.
std::vector<SweepRow> contrast_sweep(const GridHierarchy& grid, const std::vector<double>& mask,
                                     const std::vector<double>& contrasts, double alpha, const SpaceParams& params);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace fracms
