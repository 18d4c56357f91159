#include "fracms/schemes.hpp"

#include <cmath>

#include "fracms/error.hpp"

namespace fracms {

namespace {

SparseSym symmetrized(const SparseMatrix& x) {
    SparseMatrix s = 0.5 * (x + SparseMatrix(x.transpose()));
    s.prune(0.0);
    return SparseSym(std::move(s));
}

constexpr int kDenseLuLimit = 4000;

}  // namespace

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::implicit: return "implicit";
        case Scheme::explicit_euler: return "explicit";
        case Scheme::partial: return "partial";
    }
    return "?";
}

FineLoad FineLoad::zero(int dofs) {
    return FineLoad{[dofs](double) { return Vector::Zero(dofs); }, true};
}

int integral_ratio(double a, double b, const std::string& what) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument(what + ": values must be positive");
    const double r = a / b;
    const double n = std::round(r);
    if (n < 1.0 || std::abs(r - n) > 1e-9 * n) throw InvalidArgument(what + ": ratio " + std::to_string(r) + " is not an integer");
    return static_cast<int>(n);
}

// --- Reduction --------------------------------------------------------------

ReducedSystem reduce(const SparseSym& stiffness, const SparseSym& mass, const ReducedBasis& basis, int n1) {
    if (basis.dofs() != stiffness.n() || basis.dofs() != mass.n())
        throw InvalidArgument("reduce: basis has " + std::to_string(basis.dofs()) + " rows, operators have " +
                              std::to_string(stiffness.n()));
    if (n1 < 0) {
        n1 = 0;
        while (n1 < basis.size() && basis.columns[n1].tag == SpaceTag::cem) ++n1;
    }
    if (n1 > basis.size()) throw InvalidArgument("reduce: block size exceeds basis size");
    ReducedSystem sys;
    sys.n1 = n1;
    sys.n2 = basis.size() - n1;
    sys.basis = basis;
    const SparseMatrix& r = basis.matrix;
    const SparseMatrix rt = r.transpose();
    sys.mass = symmetrized(rt * (mass.matrix() * r));
    sys.stiffness = symmetrized(rt * (stiffness.matrix() * r));
    try {
        SpdFactor check(sys.mass);
    } catch (const SolverError& e) {
        throw SolverError(std::string("reduce: basis is rank deficient (reduced mass not positive definite): ") + e.what());
    }
    return sys;
}

Vector ReducedSystem::project_initial(const Vector& fine_u0, const SparseSym& fine_mass) const {
    if (fine_u0.size() != basis.dofs()) throw InvalidArgument("initial datum has the wrong size");
    if (fine_u0.isZero(0.0)) return Vector::Zero(n());
    return spd_solve(mass, basis.matrix.transpose() * (fine_mass * fine_u0));
}

// --- Stepping ---------------------------------------------------------------

Stepper::Stepper(const ReducedSystem& sys, const L1Kernel& kernel, Scheme scheme)
    : sys_(&sys), kernel_(&kernel), scheme_(scheme) {
    const double a0 = kernel.alpha0();
    switch (scheme) {
        case Scheme::implicit:
            spd_ = SpdFactor(SparseSym(SparseMatrix(sys.mass.matrix() + a0 * sys.stiffness.matrix())));
            break;
        case Scheme::explicit_euler:
            spd_ = SpdFactor(sys.mass);
            break;
        case Scheme::partial: {
            if (sys.n() > kDenseLuLimit)
                throw InvalidArgument("partial scheme is limited to reduced dimension " + std::to_string(kDenseLuLimit));
            Matrix lhs = sys.mass.dense();
            lhs.leftCols(sys.n1) += a0 * sys.stiffness.dense().leftCols(sys.n1);
            lu_.compute(lhs);
            if (sys.n() > 0 && !(lu_.rcond() > 1e-15))
                throw SolverError("partial scheme: block system matrix is singular (rcond " + std::to_string(lu_.rcond()) + ")");
            break;
        }
    }
}

Vector Stepper::step(const Trajectory& history, const Vector& load_next) const {
    const ReducedSystem& sys = *sys_;
    if (history.dim() != sys.n() || load_next.size() != sys.n())
        throw InvalidArgument("step: dimension mismatch");
    const double a0 = kernel_->alpha0();
    const Vector w = history_rhs(*kernel_, history);
    Vector rhs = sys.mass * w + a0 * load_next;
    switch (scheme_) {
        case Scheme::implicit:
            return spd_.solve(rhs);
        case Scheme::explicit_euler:
            rhs -= a0 * (sys.stiffness * Vector(history.back()));
            return spd_.solve(rhs);
        case Scheme::partial: {
            Vector lagged = Vector::Zero(sys.n());
            lagged.tail(sys.n2) = history.back().tail(sys.n2);
            rhs -= a0 * (sys.stiffness * lagged);
            return lu_.solve(rhs);
        }
    }
    return {};
}

Vector step_implicit(const ReducedSystem& sys, const L1Kernel& kernel, const Trajectory& history, const Vector& load_next) {
    return Stepper(sys, kernel, Scheme::implicit).step(history, load_next);
}

Vector step_explicit(const ReducedSystem& sys, const L1Kernel& kernel, const Trajectory& history, const Vector& load_next) {
    return Stepper(sys, kernel, Scheme::explicit_euler).step(history, load_next);
}

Vector step_partial(const ReducedSystem& sys, const L1Kernel& kernel, const Trajectory& history, const Vector& load_next) {
    return Stepper(sys, kernel, Scheme::partial).step(history, load_next);
}

// --- Runs -------------------------------------------------------------------

RunResult run_scheme(Scheme scheme, const ReducedSystem& sys, const L1Kernel& kernel, const Vector& u0,
                     const FineLoad& load, const std::string& tag) {
    if (u0.size() != sys.n()) throw InvalidArgument("run_scheme: initial state has the wrong size");
    const Stepper stepper(sys, kernel, scheme);
    RunResult res;
    res.trajectory = Trajectory(tag.empty() ? std::string(scheme_name(scheme)) : tag, sys.n(), kernel.alpha(), kernel.dt());
    res.trajectory.reserve(kernel.steps() + 1);
    res.trajectory.push(u0);

    const double limit = kDivergenceFactor * (std::sqrt(sys.mass.quad(u0)) + 1.0);
    Vector fixed_load;
    if (load.time_independent) fixed_load = sys.project_load(load.at(0.0));

    for (int k = 0; k < kernel.steps(); ++k) {
        const double t_next = (k + 1) * kernel.dt();
        const Vector f = load.time_independent ? fixed_load : sys.project_load(load.at(t_next));
        const Vector u = stepper.step(res.trajectory, f);
        res.history_terms += k + 1;
        const double norm = std::sqrt(std::abs(sys.mass.quad(u)));
        if (!u.allFinite() || !std::isfinite(norm) || norm > limit) {
            res.diverged = true;
            res.diverged_step = k + 1;
            res.diagnostic = std::string(scheme_name(scheme)) + " scheme diverged at step " + std::to_string(k + 1) +
                             " (t = " + std::to_string(t_next) + "): ||u||_M = " + std::to_string(norm) +
                             " exceeds " + std::to_string(limit);
            break;
        }
        res.trajectory.push(u);
    }
    return res;
}

FineReference fine_reference(const SparseSym& stiffness, const SparseSym& mass, double alpha, double dt, double dt_fine,
                             int coarse_steps, const FineLoad& load, const Vector& u0) {
    FineReference ref;
    ref.stride = integral_ratio(dt, dt_fine, "fine_reference: dt / dt_fine");
    ref.fine_steps = coarse_steps * ref.stride;
    const ReducedSystem sys = reduce(stiffness, mass, ReducedBasis::identity(mass.n()));
    const L1Kernel kernel(alpha, dt_fine, ref.fine_steps);
    RunResult run = run_scheme(Scheme::implicit, sys, kernel, u0, load, "fine");
    ref.diverged = run.diverged;
    ref.samples = Trajectory("fine", sys.n(), alpha, dt);
    for (int k = 0; k < run.trajectory.size(); k += ref.stride) ref.samples.push(run.trajectory.state(k));
    return ref;
}

}  // namespace fracms
