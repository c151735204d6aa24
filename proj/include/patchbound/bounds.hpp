#pragma once

// Guaranteed spectral bounds of preconditioned operators from patch-local
// generalized eigenproblems.
//
// Symmetric case: every DOF j collects the extreme local eigenvalues of all
// contributions touching it; sorting those per-DOF minima and maxima bounds the
// j-th eigenvalue of P^{-1}A from both sides.
//
// Non-symmetric case (A symmetric, B skew): only the global extremes are valid,
// giving a rectangle [alpha_min, alpha_max] x i[-beta_max, beta_max].

#include <algorithm>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "patchbound/dense_eig.hpp"
#include "patchbound/error.hpp"
#include "patchbound/local_integrals.hpp"
#include "patchbound/mesh.hpp"
#include "patchbound/sparse.hpp"

namespace patchbound {

struct BoundsVectors {
    std::vector<double> gamma_min; ///< ascending
    std::vector<double> gamma_max; ///< ascending

    double ratio() const { return gamma_max.back() / gamma_min.front(); }
};

struct NonSymBounds {
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    double beta_max = 0.0;

    double ratio() const { return alpha_max / alpha_min; }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Labels a contribution index in error messages.
using ContributionLabel = std::function<std::string(std::size_t)>;

namespace detail {

inline std::string default_label(std::size_t k) { return "contribution " + std::to_string(k); }

inline void require_matching_dofs(const LocalContribution& x, const LocalContribution& y, std::size_t k)
{
    if (x.dofs != y.dofs)
        throw InvalidArgument("contribution " + std::to_string(k) + ": DOF sets of the paired blocks differ");
}

} // namespace detail

/// Result of the symmetric bound computation.
struct SymmetricBounds {
    SparseSym a;
    SparseSym p;
    BoundsVectors bounds;
    std::vector<double> dof_min; ///< unsorted per-DOF minima
    std::vector<double> dof_max; ///< unsorted per-DOF maxima
    std::vector<PatchEigs> local; ///< one entry per contribution, in input order

    /// The per-DOF intervals, one per DOF patch.
    std::vector<PatchEigs> dof_patches() const
    {
        std::vector<PatchEigs> out(dof_min.size());
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = {dof_min[j], dof_max[j], std::nullopt};
        return out;
    }
};

/// Assemble A = sum A_k, P = sum P_k and bound every eigenvalue of P^{-1} A.
/// Requires Ker(A_k) = Ker(P_k) for every k.
inline SymmetricBounds symmetric_bounds(std::span<const LocalContribution> a_parts,
                                        std::span<const LocalContribution> p_parts, Index n_dof,
                                        double ktol = default_kernel_tol, const ContributionLabel& label = {})
{
    if (a_parts.size() != p_parts.size())
        throw InvalidArgument("symmetric_bounds: A and P have different numbers of contributions");
    const auto name = [&](std::size_t k) { return label ? label(k) : detail::default_label(k); };

    SymmetricBounds out;
    out.dof_min.assign(static_cast<std::size_t>(n_dof), std::numeric_limits<double>::infinity());
    out.dof_max.assign(static_cast<std::size_t>(n_dof), 0.0);
    out.local.reserve(a_parts.size());

    for (std::size_t k = 0; k < a_parts.size(); ++k) {
        const auto& ak = a_parts[k];
        const auto& pk = p_parts[k];
        detail::require_matching_dofs(ak, pk, k);
        PatchEigs eig;
        try {
            const KernelSplit split = kernel_split(pk.block, ktol);
            eig = gen_eig_restricted(ak.block, pk.block, split);
            if (!(eig.lam_min > ktol * eig.lam_max))
                throw KernelMismatch("Ker(A_k) is larger than Ker(P_k) (lambda_min = " +
                                     std::to_string(eig.lam_min) + ")");
        } catch (const KernelMismatch& e) {
            throw KernelMismatch(name(k) + ": " + e.what());
        } catch (const NumericalDegeneracy& e) {
            throw NumericalDegeneracy(name(k) + ": " + e.what());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(name(k) + ": " + e.what());
        }
        for (Index j : ak.dofs) {
            out.dof_min[j] = std::min(out.dof_min[j], eig.lam_min);
            out.dof_max[j] = std::max(out.dof_max[j], eig.lam_max);
        }
        out.local.push_back(eig);
    }

    for (Index j = 0; j < n_dof; ++j)
        if (out.dof_max[j] == 0.0)
            throw NumericalDegeneracy("symmetric_bounds: DOF " + std::to_string(j) + " is touched by no contribution");

    out.a = assemble<SymmetricTag>(a_parts, n_dof);
    out.p = assemble<SymmetricTag>(p_parts, n_dof);
    out.bounds.gamma_min = out.dof_min;
    out.bounds.gamma_max = out.dof_max;
    std::sort(out.bounds.gamma_min.begin(), out.bounds.gamma_min.end());
    std::sort(out.bounds.gamma_max.begin(), out.bounds.gamma_max.end());
    return out;
}

struct NonSymmetricBounds {
    SparseSym a;
    SparseGen b;
    SparseSym p;
    NonSymBounds bounds;
    std::vector<double> alpha_min; ///< per DOF
    std::vector<double> alpha_max; ///< per DOF
    std::vector<double> beta_max;  ///< per DOF
};

/// Assemble A, B, P and the rectangle containing every eigenvalue of P^{-1}(A+B).
/// Requires Ker(P_k) to lie in both Ker(A_k) and Ker(B_k).
inline NonSymmetricBounds nonsymmetric_bounds(std::span<const LocalContribution> a_parts,
                                              std::span<const LocalContribution> b_parts,
                                              std::span<const LocalContribution> p_parts, Index n_dof,
                                              double ktol = default_kernel_tol, const ContributionLabel& label = {})
{
    if (a_parts.size() != p_parts.size() || b_parts.size() != p_parts.size())
        throw InvalidArgument("nonsymmetric_bounds: contribution counts differ");
    const auto name = [&](std::size_t k) { return label ? label(k) : detail::default_label(k); };

    NonSymmetricBounds out;
    const auto n = static_cast<std::size_t>(n_dof);
    out.alpha_min.assign(n, std::numeric_limits<double>::infinity());
    out.alpha_max.assign(n, -std::numeric_limits<double>::infinity());
    out.beta_max.assign(n, 0.0);
    out.bounds.alpha_min = std::numeric_limits<double>::infinity();
    out.bounds.alpha_max = -std::numeric_limits<double>::infinity();

    for (std::size_t k = 0; k < p_parts.size(); ++k) {
        detail::require_matching_dofs(a_parts[k], p_parts[k], k);
        detail::require_matching_dofs(b_parts[k], p_parts[k], k);
        PatchEigs eig;
        double beta = 0.0;
        try {
            const KernelSplit split = kernel_split(p_parts[k].block, ktol);
            eig = gen_eig_restricted(a_parts[k].block, p_parts[k].block, split);
            beta = skew_gen_im_max(b_parts[k].block, p_parts[k].block, split);
        } catch (const KernelMismatch& e) {
            throw KernelMismatch(name(k) + ": " + e.what());
        } catch (const NumericalDegeneracy& e) {
            throw NumericalDegeneracy(name(k) + ": " + e.what());
        }
        for (Index j : p_parts[k].dofs) {
            out.alpha_min[j] = std::min(out.alpha_min[j], eig.lam_min);
            out.alpha_max[j] = std::max(out.alpha_max[j], eig.lam_max);
            out.beta_max[j] = std::max(out.beta_max[j], beta);
        }
        out.bounds.alpha_min = std::min(out.bounds.alpha_min, eig.lam_min);
        out.bounds.alpha_max = std::max(out.bounds.alpha_max, eig.lam_max);
        out.bounds.beta_max = std::max(out.bounds.beta_max, beta);
    }

    out.a = assemble<SymmetricTag>(a_parts, n_dof);
    out.b = assemble<GeneralTag>(b_parts, n_dof);
    out.p = assemble<SymmetricTag>(p_parts, n_dof);
    return out;
}

/// DG (SIPG) contributions: one per interior edge, then one per boundary edge.
inline std::vector<LocalContribution> sipg_contributions(const TriMesh& mesh, const DofMap& dofs,
                                                         const CoefficientField& coeff, const SipgOptions& opts)
{
    std::vector<LocalContribution> out;
    out.reserve(mesh.interior_edges.size() + mesh.boundary_edges.size());
    for (const auto& e : mesh.interior_edges)
        out.push_back(sipg_edge_matrices(mesh, e, coeff, dofs, opts));
    for (const auto& e : mesh.boundary_edges)
        out.push_back(sipg_edge_matrices(mesh, e, coeff, dofs, opts));
    return out;
}

inline ContributionLabel edge_label(const TriMesh& mesh)
{
    const std::size_t ni = mesh.interior_edges.size();
    return [ni](std::size_t k) {
        return k < ni ? "interior edge " + std::to_string(k) : "boundary edge " + std::to_string(k - ni);
    };
}

inline ContributionLabel element_label(std::vector<Index> element_of)
{
    return [element_of = std::move(element_of)](std::size_t k) { return "element " + std::to_string(element_of[k]); };
}

/// Algorithm for the SIPG discretization: edge patches.
inline SymmetricBounds bounds_dg(const TriMesh& mesh, const CoefficientField& coeff, const CoefficientField& coeff_ref,
                                 const SipgOptions& opts, const SipgOptions& opts_ref,
                                 double ktol = default_kernel_tol)
{
    const DofMap dofs = dof_map(mesh, DofKind::dg);
    const auto a_parts = sipg_contributions(mesh, dofs, coeff, opts);
    const auto p_parts = sipg_contributions(mesh, dofs, coeff_ref, opts_ref);
    return symmetric_bounds(a_parts, p_parts, dofs.n_dof, ktol, edge_label(mesh));
}

inline SymmetricBounds bounds_dg(const TriMesh& mesh, const CoefficientField& coeff, const CoefficientField& coeff_ref,
                                 double c_sigma, double c_sigma_ref, double ktol = default_kernel_tol)
{
    return bounds_dg(mesh, coeff, coeff_ref, SipgOptions{c_sigma}, SipgOptions{c_sigma_ref}, ktol);
}

struct ElementContributions {
    std::vector<LocalContribution> sym;
    std::vector<LocalContribution> skew;
    std::vector<Index> element; ///< source element of each kept contribution
};

/// Element contributions of the conforming discretization; elements whose three
/// vertices all lie on the Dirichlet boundary contribute nothing and are skipped.
inline ElementContributions element_contributions(const TriMesh& mesh, const DofMap& dofs,
                                                  const CoefficientField& coeff, const ElementOptions& opts = {})
{
    ElementContributions out;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        auto blocks = element_matrices(mesh, t, coeff, dofs, opts);
        if (blocks.sym.dofs.empty())
            continue;
        out.sym.push_back(std::move(blocks.sym));
        out.skew.push_back(std::move(blocks.skew));
        out.element.push_back(t);
    }
    return out;
}

/// Same min/max/sort scheme as the DG variant, with element patches.
inline SymmetricBounds bounds_cg(const TriMesh& mesh, const CoefficientField& coeff,
                                 const CoefficientField& coeff_ref, double ktol = default_kernel_tol)
{
    const DofMap dofs = dof_map(mesh, DofKind::cg);
    const auto a_parts = element_contributions(mesh, dofs, coeff);
    const auto p_parts = element_contributions(mesh, dofs, coeff_ref);
    return symmetric_bounds(a_parts.sym, p_parts.sym, dofs.n_dof, ktol, element_label(a_parts.element));
}

/// Conforming discretization of the convection-diffusion-reaction problem split
/// into symmetric A, skew B, and the reference matrix P (no convection).
inline NonSymmetricBounds bounds_nonsym(const TriMesh& mesh, const CoefficientField& coeff,
                                        const CoefficientField& coeff_ref, const ElementOptions& opts = {},
                                        double ktol = default_kernel_tol)
{
    if (coeff_ref.has_convection())
        throw InvalidArgument("bounds_nonsym: reference data must have no convection");
    const DofMap dofs = dof_map(mesh, DofKind::cg);
    const auto parts = element_contributions(mesh, dofs, coeff, opts);
    const auto ref = element_contributions(mesh, dofs, coeff_ref);
    return nonsymmetric_bounds(parts.sym, parts.skew, ref.sym, dofs.n_dof, ktol, element_label(parts.element));
}

/// Merge closed intervals [lam_min, lam_max] into a sorted list of disjoint ones.
inline std::vector<Interval> interval_union(std::span<const PatchEigs> patches)
{
    std::vector<Interval> iv;
    iv.reserve(patches.size());
    for (const auto& p : patches)
        iv.push_back({p.lam_min, p.lam_max});
    std::sort(iv.begin(), iv.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> merged;
    for (const auto& i : iv) {
        if (!merged.empty() && i.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, i.hi);
        else
            merged.push_back(i);
    }
    return merged;
}

inline bool contains(std::span<const Interval> intervals, double x, double slack = 0.0)
{
    return std::any_of(intervals.begin(), intervals.end(),
                       [&](const Interval& i) { return x >= i.lo - slack && x <= i.hi + slack; });
}

/// Right-hand side for a constant source term f.
inline Eigen::VectorXd load_vector(const TriMesh& mesh, const DofMap& dofs, double f)
{
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.n_dof);
    for (Index t = 0; t < mesh.num_triangles(); ++t)
        for (const auto& [d, v] : element_load(mesh, t, f, dofs))
            rhs(d) += v;
    return rhs;
}

} // namespace patchbound
