#pragma once

// Time stepping of the L1-discretized problem
//
//   (u^{k+1} - w^k, v) + alpha0 a(u^{k+1}, v) = alpha0 (f^{k+1}, v)
//
// on a space spanned by the columns of a ReducedBasis, in three variants:
// fully implicit, explicit (stiffness lagged) and partially explicit (only
// the stiffness acting on the second block of columns is lagged).

#include <functional>
#include <string>
#include <string_view>

#include "fracms/fractional.hpp"
#include "fracms/linalg.hpp"
#include "fracms/spaces.hpp"
#include "fracms/trajectory.hpp"

namespace fracms {

/// Galerkin projection of the fine operators onto a basis whose first n1
/// columns span the implicitly treated block and the last n2 the
/// explicitly treated block.
struct ReducedSystem {
    SparseSym mass;
    SparseSym stiffness;
    int n1 = 0;
    int n2 = 0;
    ReducedBasis basis;

    int n() const noexcept { return n1 + n2; }
    /// R^T f for a fine load vector.
    Vector project_load(const Vector& fine) const { return basis.matrix.transpose() * fine; }
    /// Coefficients of the L2 projection of a fine vector.
    Vector project_initial(const Vector& fine_u0, const SparseSym& fine_mass) const;
};

/// n1 defaults to the number of leading cem-tagged columns.
ReducedSystem reduce(const SparseSym& stiffness, const SparseSym& mass, const ReducedBasis& basis, int n1 = -1);

enum class Scheme { implicit, explicit_euler, partial };
std::string_view scheme_name(Scheme s);

/// Fine-space load vector (f(., t), phi_i) as a function of time.
struct FineLoad {
    std::function<Vector(double t)> at;
    bool time_independent = false;

    static FineLoad zero(int dofs);
};

/// Left-hand side of one scheme factored once for all steps.
class Stepper {
public:
    Stepper(const ReducedSystem& sys, const L1Kernel& kernel, Scheme scheme);

    Scheme scheme() const noexcept { return scheme_; }
    /// u^{k+1} from u^0..u^k and the reduced load at T_{k+1}.
    Vector step(const Trajectory& history, const Vector& load_next) const;

private:
    const ReducedSystem* sys_;
    const L1Kernel* kernel_;
    Scheme scheme_;
    SpdFactor spd_;
    Eigen::PartialPivLU<Matrix> lu_;
};

Vector step_implicit(const ReducedSystem& sys, const L1Kernel& kernel, const Trajectory& history, const Vector& load_next);
Vector step_explicit(const ReducedSystem& sys, const L1Kernel& kernel, const Trajectory& history, const Vector& load_next);
Vector step_partial(const ReducedSystem& sys, const L1Kernel& kernel, const Trajectory& history, const Vector& load_next);

/// Runs are aborted once ||u^k||_M exceeds this factor times (||u^0||_M + 1).
inline constexpr double kDivergenceFactor = 1e12;

struct RunResult {
    Trajectory trajectory;
    bool diverged = false;
    int diverged_step = -1;      // first step whose state tripped the guard
    std::string diagnostic;
    long long history_terms = 0;  // stored states read by the history sums
};

RunResult run_scheme(Scheme scheme, const ReducedSystem& sys, const L1Kernel& kernel, const Vector& u0,
                     const FineLoad& load, const std::string& tag = {});

/// Fine-grid implicit reference with step dt_fine; `samples` holds every
/// (dt / dt_fine)-th state so that it lines up with a run at step dt.
struct FineReference {
    Trajectory samples;
    int stride = 1;
    int fine_steps = 0;
    bool diverged = false;
};

FineReference fine_reference(const SparseSym& stiffness, const SparseSym& mass, double alpha, double dt, double dt_fine,
                             int coarse_steps, const FineLoad& load, const Vector& u0);

/// Integer ratio a / b, throwing if it is not integral to 1e-9 relative.
int integral_ratio(double a, double b, const std::string& what);

}  // namespace fracms
