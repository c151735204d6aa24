#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "patchbound/cholesky.hpp"
#include "patchbound/error.hpp"
#include "patchbound/sparse.hpp"

namespace patchbound {

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history; ///< ||f - M x_k||_2, starting with k = 0
    bool converged = false;
    std::optional<std::pair<double, double>> error_interval; ///< bounds on ||x - x_k||_A for the final iterate
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

/// Called after every iteration with the iteration number, iterate and residual.
using IterateObserver = std::function<void(int, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Guaranteed interval for the energy norm of the error from a residual r,
/// given sigma(P^{-1}A) in [c1, c2]: sqrt(r'P^{-1}r / c2) <= ||e||_A <= sqrt(r'P^{-1}r / c1).
inline std::pair<double, double> energy_error_interval(const Eigen::VectorXd& r, const CholeskyFactor& p, double c1,
                                                       double c2)
{
    if (!(c1 > 0.0))
        throw InvalidArgument("energy_error_interval: c1 must be positive");
    if (!(c1 <= c2))
        throw InvalidArgument("energy_error_interval: c1 must not exceed c2");
    const double rpr = std::max(0.0, r.dot(p.solve(r)));
    return {std::sqrt(rpr / c2), std::sqrt(rpr / c1)};
}

namespace detail {

template <class Precondition>
SolveResult conjugate_gradient(const SparseSym& a, const Eigen::VectorXd& f, double tol_reduction, int maxit,
                               Precondition&& precondition, const IterateObserver& observer)
{
    if (f.size() != a.order())
        throw InvalidArgument("cg: right-hand side has the wrong length");
    if (!f.allFinite())
        throw InvalidArgument("cg: right-hand side is not finite");

    SolveResult out;
    auto& rep = out.report;
    out.x = Eigen::VectorXd::Zero(a.order());
    Eigen::VectorXd r = f;
    const double r0 = r.norm();
    rep.residual_history.push_back(r0);
    if (r0 == 0.0) {
        rep.converged = true;
        return out;
    }
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd d = z;
    double rz = r.dot(z);
    for (int k = 1; k <= maxit; ++k) {
        const Eigen::VectorXd ad = a * d;
        const double alpha = rz / d.dot(ad);
        out.x += alpha * d;
        r -= alpha * ad;
        const double rn = r.norm();
        rep.residual_history.push_back(rn);
        rep.iterations = k;
        if (observer)
            observer(k, out.x, r);
        if (rn <= tol_reduction * r0) {
            rep.converged = true;
            break;
        }
        z = precondition(r);
        const double rz_next = r.dot(z);
        d = z + (rz_next / rz) * d;
        rz = rz_next;
    }
    return out;
}

} // namespace detail

/// Conjugate gradients from x0 = 0; stops once ||f - A x_k||_2 <= tol_reduction ||f||_2.
inline SolveResult cg(const SparseSym& a, const Eigen::VectorXd& f, double tol_reduction, int maxit,
                      const IterateObserver& observer = {})
{
    return detail::conjugate_gradient(
        a, f, tol_reduction, maxit, [](const Eigen::VectorXd& r) { return r; }, observer);
}

/// Preconditioned CG with P^{-1} applied through a Cholesky factor. The stopping
/// test uses the unpreconditioned residual, same as cg().
/// When spectral bounds [c1, c2] of P^{-1}A are supplied, the report carries the
/// energy-error interval of the final iterate.
inline SolveResult pcg(const SparseSym& a, const CholeskyFactor& p, const Eigen::VectorXd& f, double tol_reduction,
                       int maxit, const IterateObserver& observer = {},
                       std::optional<std::pair<double, double>> spectral_bounds = std::nullopt)
{
    if (p.order() != a.order())
        throw InvalidArgument("pcg: preconditioner order mismatch");
    SolveResult out = detail::conjugate_gradient(
        a, f, tol_reduction, maxit, [&p](const Eigen::VectorXd& r) { return p.solve(r); }, observer);
    if (spectral_bounds) {
        const Eigen::VectorXd r = f - a * out.x;
        out.report.error_interval = energy_error_interval(r, p, spectral_bounds->first, spectral_bounds->second);
    }
    return out;
}

namespace detail {

/// Full (unrestarted) GMRES with modified Gram-Schmidt Arnoldi and Givens rotations,
/// left preconditioned when `precondition` is not the identity. The stopping test
/// and the recorded history both use the true residual ||f - M x_k||_2.
template <class Precondition>
SolveResult gmres_impl(const SparseGen& m, const Eigen::VectorXd& f, double rel_tol, int maxit,
                       Precondition&& precondition)
{
    const Index n = m.order();
    if (f.size() != n)
        throw InvalidArgument("gmres: right-hand side has the wrong length");

    SolveResult out;
    auto& rep = out.report;
    out.x = Eigen::VectorXd::Zero(n);
    const double f_norm = f.norm();
    rep.residual_history.push_back(f_norm);
    if (f_norm == 0.0) {
        rep.converged = true;
        return out;
    }

    const Eigen::VectorXd z0 = precondition(f);
    const double beta = z0.norm();
    const int kmax = static_cast<int>(std::min<Index>(maxit, n));
    Eigen::MatrixXd v(n, kmax + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(kmax + 1, kmax);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(kmax), sn = Eigen::VectorXd::Zero(kmax);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(kmax + 1);
    v.col(0) = z0 / beta;
    g(0) = beta;

    for (int k = 0; k < kmax; ++k) {
        Eigen::VectorXd w = precondition(m * Eigen::VectorXd(v.col(k)));
        for (int i = 0; i <= k; ++i) {
            h(i, k) = w.dot(v.col(i));
            w -= h(i, k) * v.col(i);
        }
        h(k + 1, k) = w.norm();
        const bool breakdown = h(k + 1, k) <= 1e-14 * beta;
        if (!breakdown)
            v.col(k + 1) = w / h(k + 1, k);

        for (int i = 0; i < k; ++i) {
            const double t = cs(i) * h(i, k) + sn(i) * h(i + 1, k);
            h(i + 1, k) = -sn(i) * h(i, k) + cs(i) * h(i + 1, k);
            h(i, k) = t;
        }
        const double rho = std::hypot(h(k, k), h(k + 1, k));
        cs(k) = h(k, k) / rho;
        sn(k) = h(k + 1, k) / rho;
        h(k, k) = rho;
        h(k + 1, k) = 0.0;
        g(k + 1) = -sn(k) * g(k);
        g(k) = cs(k) * g(k);

        const Eigen::VectorXd y = h.topLeftCorner(k + 1, k + 1).triangularView<Eigen::Upper>().solve(g.head(k + 1));
        out.x = v.leftCols(k + 1) * y;
        const double rn = (f - m * out.x).norm();
        rep.residual_history.push_back(rn);
        rep.iterations = k + 1;
        if (rn <= rel_tol * f_norm || breakdown) {
            rep.converged = rn <= rel_tol * f_norm;
            break;
        }
    }
    return out;
}

} // namespace detail

inline SolveResult gmres(const SparseGen& m, const Eigen::VectorXd& f, double rel_tol, int maxit)
{
    return detail::gmres_impl(m, f, rel_tol, maxit, [](const Eigen::VectorXd& r) { return r; });
}

inline SolveResult pgmres(const SparseGen& m, const CholeskyFactor& p, const Eigen::VectorXd& f, double rel_tol,
                          int maxit)
{
    if (p.order() != m.order())
        throw InvalidArgument("pgmres: preconditioner order mismatch");
    return detail::gmres_impl(m, f, rel_tol, maxit, [&p](const Eigen::VectorXd& r) { return p.solve(r); });
}

/// One "iteration,residual" line per entry of the history.
inline void write_residual_csv(std::ostream& os, const SolveReport& rep)
{
    os << "iteration,residual\n";
    for (std::size_t k = 0; k < rep.residual_history.size(); ++k)
        os << k << ',' << rep.residual_history[k] << '\n';
}

} // namespace patchbound
