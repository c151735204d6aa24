#pragma once

// Small dense kernels for the per-patch generalized eigenproblems. Orders are
// tiny (at most 6 for the discretizations here), so everything is done with a
// cyclic Jacobi sweep on top of plain Eigen storage.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "patchbound/error.hpp"

namespace patchbound {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

/// Relative threshold below which an eigenvalue of a local block counts as zero.
inline constexpr double default_kernel_tol = 1e-10;

struct SymEig {
    DenseVector values; ///< ascending
    DenseMatrix vectors; ///< orthonormal columns, same order as values
};

namespace detail {

inline double frobenius(const DenseMatrix& m) { return m.norm(); }

inline void require_square(const DenseMatrix& m, const char* what)
{
    if (m.rows() != m.cols())
        throw InvalidArgument(std::string(what) + ": matrix must be square");
}

} // namespace detail

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
inline SymEig sym_eig(const DenseMatrix& m)
{
    detail::require_square(m, "sym_eig");
    const Eigen::Index n = m.rows();
    const double scale = detail::frobenius(m);
    if ((m - m.transpose()).norm() > 1e-12 * scale)
        throw InvalidArgument("sym_eig: matrix is not symmetric");

    DenseMatrix a = 0.5 * (m + m.transpose());
    DenseMatrix v = DenseMatrix::Identity(n, n);

    constexpr int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off == 0.0 || std::sqrt(off) <= std::numeric_limits<double>::epsilon() * scale)
            break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                // Rutishauser's formulation of the rotation that annihilates a(p,q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
    SymEig out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[k], order[k]);
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

/// Orthonormal split of R^n into Ker(P) and its orthogonal complement.
struct KernelSplit {
    DenseMatrix kernel_basis;
    DenseMatrix complement_basis;
    Eigen::Index rank = 0;
    double ktol = default_kernel_tol;
};

inline KernelSplit kernel_split(const DenseMatrix& p, double ktol = default_kernel_tol)
{
    const SymEig eig = sym_eig(p);
    const Eigen::Index n = p.rows();
    KernelSplit split;
    split.ktol = ktol;
    if (n == 0)
        return split;
    const double lmax = std::max(std::abs(eig.values(n - 1)), std::abs(eig.values(0)));
    if (eig.values(0) < -1e-12 * std::max(lmax, detail::frobenius(p)))
        throw InvalidArgument("kernel_split: matrix is indefinite (smallest eigenvalue " +
                              std::to_string(eig.values(0)) + ")");
    Eigen::Index nker = 0;
    while (nker < n && eig.values(nker) <= ktol * lmax)
        ++nker;
    split.kernel_basis = eig.vectors.leftCols(nker);
    split.complement_basis = eig.vectors.rightCols(n - nker);
    split.rank = n - nker;
    return split;
}

/// Extreme generalized eigenvalues on the complement of Ker(P_k), plus optionally
/// the largest imaginary part for a skew block.
struct PatchEigs {
    double lam_min = 0.0;
    double lam_max = 0.0;
    std::optional<double> lam_im_max;
};

namespace detail {

inline void require_kernel_inclusion(const DenseMatrix& m, const KernelSplit& split, const char* what)
{
    if (split.kernel_basis.cols() == 0)
        return;
    const double scale = frobenius(m);
    const DenseMatrix image = m * split.kernel_basis;
    for (Eigen::Index k = 0; k < image.cols(); ++k) {
        if (image.col(k).norm() > split.ktol * scale) {
            throw KernelMismatch(std::string(what) + ": Ker(P) is not contained in the kernel (residual " +
                                 std::to_string(image.col(k).norm()) + " vs scale " + std::to_string(scale) +
                                 ")");
        }
    }
}

/// L^{-1} Q^T M Q L^{-T} where Q^T P Q = L L^T.
inline DenseMatrix reduce_to_standard(const DenseMatrix& m, const DenseMatrix& p, const KernelSplit& split)
{
    const DenseMatrix& q = split.complement_basis;
    const DenseMatrix p_proj = q.transpose() * p * q;
    const DenseMatrix m_proj = q.transpose() * m * q;
    Eigen::LLT<DenseMatrix> llt(0.5 * (p_proj + p_proj.transpose()));
    if (llt.info() != Eigen::Success)
        throw NumericalDegeneracy("projected preconditioner block is not positive definite");
    const auto l = llt.matrixL();
    DenseMatrix tmp = l.solve(m_proj);
    return l.solve(tmp.transpose()).transpose();
}

} // namespace detail

inline PatchEigs gen_eig_restricted(const DenseMatrix& a, const DenseMatrix& p, const KernelSplit& split)
{
    detail::require_square(a, "gen_eig_restricted");
    if (a.rows() != p.rows() || p.cols() != a.cols())
        throw InvalidArgument("gen_eig_restricted: order mismatch");
    if (split.rank == 0)
        throw NumericalDegeneracy("gen_eig_restricted: preconditioner block is zero");
    detail::require_kernel_inclusion(a, split, "gen_eig_restricted");
    DenseMatrix reduced = detail::reduce_to_standard(a, p, split);
    reduced = (0.5 * (reduced + reduced.transpose())).eval();
    const SymEig eig = sym_eig(reduced);
    return {eig.values(0), eig.values(eig.values.size() - 1), std::nullopt};
}

/// Largest |imaginary part| of the generalized eigenvalues B u = i nu P u on the
/// complement of Ker(P).
inline double skew_gen_im_max(const DenseMatrix& b, const DenseMatrix& p, const KernelSplit& split)
{
    detail::require_square(b, "skew_gen_im_max");
    if (b.rows() != p.rows())
        throw InvalidArgument("skew_gen_im_max: order mismatch");
    const double scale = detail::frobenius(b);
    if ((b + b.transpose()).norm() > 1e-12 * scale)
        throw InvalidArgument("skew_gen_im_max: matrix is not skew-symmetric");
    if (scale == 0.0 || split.rank == 0)
        return 0.0;
    detail::require_kernel_inclusion(b, split, "skew_gen_im_max");
    const DenseMatrix reduced = detail::reduce_to_standard(b, p, split);
    DenseMatrix gram = reduced.transpose() * reduced; // = -reduced^2 for skew input
    gram = (0.5 * (gram + gram.transpose())).eval();
    const SymEig eig = sym_eig(gram);
    return std::sqrt(std::max(0.0, eig.values(eig.values.size() - 1)));
}

} // namespace patchbound
