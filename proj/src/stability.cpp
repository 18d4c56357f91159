#include "fracms/stability.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "fracms/error.hpp"
#include "fracms/raster.hpp"

namespace fracms {

double lambda_max_lanczos(const SparseSym& a, const SparseSym& m) {
    if (a.n() != m.n()) throw InvalidArgument("lambda_max: dimension mismatch");
    const int n = a.n();
    if (n == 0) return 0.0;
    const SpdFactor mf(m);
    const int max_iter = std::min(n, 400);
    Matrix q(n, max_iter + 1);   // M-orthonormal Lanczos vectors
    Matrix mq(n, max_iter + 1);  // M q
    std::vector<double> alpha, beta;

    Vector v = Vector::Ones(n);
    for (int i = 0; i < n; ++i) v[i] += 0.1 * std::sin(1.0 + i);  // deterministic start with all modes
    double nv = std::sqrt(m.quad(v));
    q.col(0) = v / nv;
    mq.col(0) = m * Vector(q.col(0));
    double prev = 0.0;
    for (int k = 0; k < max_iter; ++k) {
        // w = M^{-1} A q_k
        Vector w = mf.solve_many(a * Vector(q.col(k)));
        const double ak = mq.col(k).dot(w);
        alpha.push_back(ak);
        for (int pass = 0; pass < 2; ++pass) {
            const Vector c = mq.leftCols(k + 1).transpose() * w;
            w -= q.leftCols(k + 1) * c;
        }
        const double bk = std::sqrt(std::max(0.0, m.quad(w)));

        const int dim = k + 1;
        Matrix t = Matrix::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(t);
        const double theta = es.eigenvalues()[dim - 1];
        const double resid = std::abs(bk * es.eigenvectors()(dim - 1, dim - 1));
        if (dim == n || bk <= 1e-14 * std::abs(theta) || (resid <= 1e-10 * std::abs(theta) && std::abs(theta - prev) <= 1e-12 * std::abs(theta)))
            return theta;
        prev = theta;
        beta.push_back(bk);
        q.col(k + 1) = w / bk;
        mq.col(k + 1) = m * Vector(q.col(k + 1));
    }
    throw SolverError("lambda_max: Lanczos did not converge in " + std::to_string(max_iter) + " iterations");
}


double lambda_max(const Matrix& a, const Matrix& m) {
    if (a.rows() != a.cols() || m.rows() != a.rows() || m.cols() != a.rows())
        throw InvalidArgument("lambda_max: dimension mismatch");
    if (a.rows() == 0) return 0.0;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw SolverError("lambda_max: mass matrix is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), 0.5 * (m + m.transpose()),
                                                        Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw SolverError("lambda_max: dense eigensolver did not converge");
    return es.eigenvalues()[a.rows() - 1];
}

double lambda_max(const SparseSym& a, const SparseSym& m) {
    if (a.n() != m.n()) throw InvalidArgument("lambda_max: dimension mismatch");
    if (a.n() <= kDenseEigLimit) return lambda_max(a.dense(), m.dense());
    return lambda_max_lanczos(a, m);
}

GammaEstimate estimate_gamma(const Matrix& m11, const Matrix& m12, const Matrix& m22) {
    if (m12.rows() != m11.rows() || m12.cols() != m22.rows()) throw InvalidArgument("estimate_gamma: block sizes disagree");
    GammaEstimate g;
    if (m11.rows() == 0 || m22.rows() == 0) return g;
    Eigen::LLT<Matrix> l1(m11), l2(m22);
    if (l1.info() != Eigen::Success) throw SolverError("estimate_gamma: M11 is singular");
    if (l2.info() != Eigen::Success) throw SolverError("estimate_gamma: M22 is singular");

    // gamma = ||L1^{-1} M12 L2^{-T}||_2
    Matrix x = l1.matrixL().solve(m12);
    x = l2.matrixL().solve(x.transpose()).transpose();
    Eigen::JacobiSVD<Matrix> svd(x);
    g.gamma = svd.singularValues()[0];

    // min ratio = smallest eigenvalue of (M22 - M21 M11^{-1} M12, M22).
    const Matrix schur = m22 - m12.transpose() * l1.solve(m12);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (schur + schur.transpose()), m22,
                                                        Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw SolverError("estimate_gamma: eigensolver did not converge");
    g.min_ratio = es.eigenvalues()[0];
    return g;
}

double dt_max_explicit(double alpha, double lambda) {
    if (lambda < 0.0) throw InvalidArgument("dt_max_explicit: negative eigenvalue");
    if (lambda == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(1.0 / (2.0 * gamma_fn(2.0 - alpha) * lambda), 1.0 / alpha);
}

double dt_max_partial(double alpha, double gamma, double lambda) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("dt_max_partial: gamma must lie in [0, 1)");
    if (lambda < 0.0) throw InvalidArgument("dt_max_partial: negative eigenvalue");
    if (lambda == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow((1.0 - gamma * gamma) / (gamma_fn(2.0 - alpha) * lambda), 1.0 / alpha);
}

StabilityReport analyze(const ReducedSystem& sys, double alpha, double dt) {
    StabilityReport r;
    r.alpha = alpha;
    r.dt = dt;
    const Matrix m = sys.mass.dense();
    const Matrix a = sys.stiffness.dense();
    const int n1 = sys.n1, n2 = sys.n2;
    r.lambda_max_full = lambda_max(a, m);
    r.lambda_max_v2 = n2 > 0 ? lambda_max(Matrix(a.bottomRightCorner(n2, n2)), Matrix(m.bottomRightCorner(n2, n2))) : 0.0;
    const GammaEstimate g = estimate_gamma(m.topLeftCorner(n1, n1), m.topRightCorner(n1, n2), m.bottomRightCorner(n2, n2));
    r.gamma = g.gamma;
    r.min_ratio = g.min_ratio;
    r.gamma_cond1 = std::sqrt(std::max(0.0, 1.0 - g.min_ratio / 2.0));
    r.dt_max_explicit = dt_max_explicit(alpha, r.lambda_max_full);
    r.dt_max_partial = r.gamma_valid() ? dt_max_partial(alpha, r.gamma, r.lambda_max_v2) : 0.0;
    return r;
}

void write_report(std::ostream& out, const StabilityReport& r) {
    auto kv = [&out](const char* k, double v) { out << k << '=' << format_double(v) << '\n'; };
    kv("alpha", r.alpha);
    kv("dt", r.dt);
    kv("lambda_max_full", r.lambda_max_full);
    kv("lambda_max_v2", r.lambda_max_v2);
    if (r.lambda_max_fine >= 0.0) {
        kv("lambda_max_fine", r.lambda_max_fine);
        kv("dt_max_fine_explicit", r.dt_max_fine_explicit);
    }
    kv("gamma", r.gamma);
    kv("min_ratio", r.min_ratio);
    kv("gamma_cond1", r.gamma_cond1);
    kv("dt_max_explicit", r.dt_max_explicit);
    kv("dt_max_partial", r.dt_max_partial);
    out << "gamma_valid=" << (r.gamma_valid() ? "true" : "false") << '\n';
    out << "explicit_stable_predicted=" << (r.explicit_stable_predicted() ? "true" : "false") << '\n';
    out << "partial_stable_predicted=" << (r.partial_stable_predicted() ? "true" : "false") << '\n';
}

void write_report_file(const std::string& path, const StabilityReport& r) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    write_report(out, r);
}

EnergyAudit energy_audit(const Trajectory& traj, const ReducedSystem& sys, const FineLoad& load, const L1Kernel& kernel) {
    if (traj.empty()) throw InvalidArgument("energy_audit: empty trajectory");
    if (traj.dim() != sys.n()) throw InvalidArgument("energy_audit: trajectory does not match the system");
    const SpdFactor mf(sys.mass);
    EnergyAudit res;
    const double e0 = sys.stiffness.quad(Vector(traj.state(0)));
    double forcing = 0.0;
    double fixed = -1.0;
    res.min_slack = std::numeric_limits<double>::infinity();
    for (int n = 1; n < traj.size(); ++n) {
        double pf;
        if (load.time_independent && fixed >= 0.0) {
            pf = fixed;
        } else {
            const Vector f = sys.project_load(load.at(n * kernel.dt()));
            pf = f.isZero(0.0) ? 0.0 : f.dot(mf.solve(f));
            if (load.time_independent) fixed = pf;
        }
        forcing += pf;
        const double lhs = sys.stiffness.quad(Vector(traj.state(n)));
        const double rhs = e0 + kernel.alpha0() * forcing;
        const double slack = rhs - lhs;
        if (slack < res.min_slack) {
            res.min_slack = slack;
            res.min_slack_step = n;
        }
        res.lhs = lhs;
        res.rhs = rhs;
        res.slack = slack;
    }
    if (traj.size() == 1) {
        res.lhs = res.rhs = e0;
        res.slack = res.min_slack = 0.0;
    }
    return res;
}

std::vector<SweepRow> contrast_sweep(const GridHierarchy& grid, const std::vector<double>& mask,
                                     const std::vector<double>& contrasts, double alpha, const SpaceParams& params) {
    if (static_cast<int>(mask.size()) != grid.num_cells()) throw InvalidArgument("contrast_sweep: mask size mismatch");
    std::vector<SweepRow> rows;
    for (double c : contrasts) {
        if (!(c > 0.0)) throw InvalidArgument("contrast_sweep: contrasts must be positive");
        std::vector<double> v(mask.size());
        for (std::size_t i = 0; i < mask.size(); ++i) v[i] = mask[i] != 0.0 ? c : 1.0;
        const PermeabilityField kappa(grid.fine_n(), std::move(v));
        const FineOperators ops = assemble_fine(grid, kappa);
        const MultiscaleSpaces sp = build_spaces(grid, kappa, ops, params);
        const ReducedSystem sys = reduce(ops.stiffness, ops.mass, ReducedBasis::concat(sp.cem, sp.v2), sp.cem.size());
        const StabilityReport r = analyze(sys, alpha, 0.0);
        rows.push_back({c, r.lambda_max_full, r.lambda_max_v2, r.gamma, r.dt_max_explicit, r.dt_max_partial});
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "contrast,lambda_full,lambda_v2,gamma,dt_exp,dt_partial\n";
    for (const SweepRow& r : rows)
        out << format_double(r.contrast) << ',' << format_double(r.lambda_full) << ',' << format_double(r.lambda_v2) << ','
            << format_double(r.gamma) << ',' << format_double(r.dt_exp) << ',' << format_double(r.dt_partial) << '\n';
}

}  // namespace fracms
