#pragma once

// Dense eigenvalue oracles for desk-scale problems. These check the patch bounds
// and are deliberately independent of the local eigen kernels.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "patchbound/error.hpp"
#include "patchbound/sparse.hpp"

namespace patchbound {

inline constexpr Index symmetric_oracle_cap = 1500;
inline constexpr Index general_oracle_cap = 1000;

struct Spectrum {
    std::vector<std::complex<double>> values; ///< sorted by (real, imag)

    std::vector<double> real_parts() const
    {
        std::vector<double> out;
        out.reserve(values.size());
        for (const auto& v : values)
            out.push_back(v.real());
        return out;
    }
    double max_abs_imag() const
    {
        double m = 0.0;
        for (const auto& v : values)
            m = std::max(m, std::abs(v.imag()));
        return m;
    }
    /// Ratio of extreme real parts (the condition number of a symmetric-definite pencil).
    double condition() const { return values.back().real() / values.front().real(); }
};

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> dense_cholesky(const SparseSym& p)
{
    Eigen::LLT<Eigen::MatrixXd> llt(p.dense());
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("spectrum oracle: preconditioner is not positive definite");
    return llt;
}

/// L^{-1} M L^{-T} for P = L L^T.
inline Eigen::MatrixXd congruence(const Eigen::MatrixXd& m, const Eigen::LLT<Eigen::MatrixXd>& llt)
{
    const auto l = llt.matrixL();
    const Eigen::MatrixXd tmp = l.solve(m);
    return l.solve(tmp.transpose()).transpose();
}

inline void sort_spectrum(Spectrum& s)
{
    std::sort(s.values.begin(), s.values.end(), [](const auto& x, const auto& y) {
        return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
    });
}

} // namespace detail

/// Eigenvalues of P^{-1}A for symmetric A and s.p.d. P, ascending and real.
inline Spectrum sym_def_spectrum(const SparseSym& a, const SparseSym& p)
{
    if (a.order() != p.order())
        throw InvalidArgument("sym_def_spectrum: order mismatch");
    if (a.order() > symmetric_oracle_cap)
        throw TooLarge("sym_def_spectrum: order " + std::to_string(a.order()) + " exceeds the oracle cap");
    const auto llt = detail::dense_cholesky(p);
    Eigen::MatrixXd s = detail::congruence(a.dense(), llt);
    s = (0.5 * (s + s.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("sym_def_spectrum: eigensolver did not converge");
    Spectrum out;
    out.values.reserve(static_cast<std::size_t>(a.order()));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        out.values.emplace_back(es.eigenvalues()(i), 0.0);
    return out;
}

/// Complex eigenvalues of P^{-1}M for a general real M and s.p.d. P, computed as
/// the spectrum of the similar matrix L^{-1} M L^{-T} by Hessenberg reduction and
/// shifted QR.
inline Spectrum gen_spectrum(const SparseGen& m, const SparseSym& p)
{
    if (m.order() != p.order())
        throw InvalidArgument("gen_spectrum: order mismatch");
    if (m.order() > general_oracle_cap)
        throw TooLarge("gen_spectrum: order " + std::to_string(m.order()) + " exceeds the oracle cap");
    const auto llt = detail::dense_cholesky(p);
    const Eigen::MatrixXd s = detail::congruence(m.dense(), llt);
    Eigen::EigenSolver<Eigen::MatrixXd> es(s, false);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("gen_spectrum: QR iteration did not converge");
    Spectrum out;
    out.values.assign(es.eigenvalues().begin(), es.eigenvalues().end());
    detail::sort_spectrum(out);
    return out;
}

/// Largest imaginary part of the eigenvalues of P^{-1}B for skew-symmetric B.
inline double skew_extreme(const SparseGen& b, const SparseSym& p)
{
    if (b.order() != p.order())
        throw InvalidArgument("skew_extreme: order mismatch");
    if (b.symmetry_defect(-1.0) > 1e-12)
        throw InvalidArgument("skew_extreme: matrix is not skew-symmetric");
    if (b.order() > symmetric_oracle_cap)
        throw TooLarge("skew_extreme: order " + std::to_string(b.order()) + " exceeds the oracle cap");
    const auto llt = detail::dense_cholesky(p);
    const Eigen::MatrixXd s = detail::congruence(b.dense(), llt);
    Eigen::MatrixXd gram = s.transpose() * s;
    gram = (0.5 * (gram + gram.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("skew_extreme: eigensolver did not converge");
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline SparseSym identity_matrix(Index n)
{
    std::vector<Index> ptr(static_cast<std::size_t>(n + 1)), cols(static_cast<std::size_t>(n));
    for (Index i = 0; i <= n; ++i)
        ptr[i] = i;
    for (Index i = 0; i < n; ++i)
        cols[i] = i;
    return SparseSym(n, std::move(ptr), std::move(cols), std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

} // namespace patchbound
