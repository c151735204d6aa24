#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "patchbound/dense_eig.hpp"
#include "patchbound/error.hpp"
#include "patchbound/mesh.hpp"

namespace patchbound {

using Tensor2 = Eigen::Matrix2d;

/// Coefficients of -div(a grad u) + b.grad u + c u. Diffusion and reaction are
/// evaluated once per element at its centroid; convection uses the linear
/// interpolant of b from the vertex values.
struct CoefficientField {
    std::function<Tensor2(const Point&)> a = [](const Point&) { return Tensor2::Identity().eval(); };
    std::function<Eigen::Vector2d(const Point&)> b; ///< empty means no convection
    std::function<double(const Point&)> c = [](const Point&) { return 0.0; };

    bool has_convection() const { return static_cast<bool>(b); }
};

struct LocalContribution {
    enum class Kind { symmetric, skew };

    std::vector<Index> dofs;
    DenseMatrix block;
    Kind kind = Kind::symmetric;

    Index size() const { return static_cast<Index>(dofs.size()); }
};

/// Options for the element integrals.
struct ElementOptions {
    /// Drop the symmetrized convection term from the symmetric block. Valid when
    /// div b = 0, where it cancels after global assembly.
    bool drop_symmetric_convection = false;
    /// Reject diffusion tensors that are not s.p.d. Disabled only by tests that
    /// need a pure mass block.
    bool validate_diffusion = true;
};

namespace detail {

inline std::pair<double, double> tensor_extreme_eigs(const Tensor2& a)
{
    Eigen::SelfAdjointEigenSolver<Tensor2> es(a, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

inline Tensor2 checked_diffusion(const CoefficientField& coeff, const Point& x, bool validate = true)
{
    const Tensor2 a = coeff.a(x);
    if (!validate)
        return a;
    if (std::abs(a(0, 1) - a(1, 0)) > 1e-14 * a.norm())
        throw InvalidCoefficient("diffusion tensor is not symmetric");
    const auto [lmin, lmax] = tensor_extreme_eigs(a);
    if (!(lmin > 0.0))
        throw InvalidCoefficient("diffusion tensor is not positive definite at (" + std::to_string(x.x()) + ", " +
                                 std::to_string(x.y()) + ")");
    return a;
}

inline double checked_reaction(const CoefficientField& coeff, const Point& x)
{
    const double c = coeff.c(x);
    if (!(c >= 0.0))
        throw InvalidCoefficient("reaction coefficient is negative");
    return c;
}

/// Keep rows/columns whose DOF is present; maps local vertex slots to block rows.
inline LocalContribution filter_absent(const std::array<Index, 3>& dofs, const Eigen::Matrix3d& full,
                                       LocalContribution::Kind kind)
{
    LocalContribution out;
    out.kind = kind;
    std::array<int, 3> keep{};
    int n = 0;
    for (int k = 0; k < 3; ++k)
        if (dofs[k] != DofMap::absent)
            keep[n++] = k;
    out.dofs.resize(n);
    out.block.resize(n, n);
    for (int r = 0; r < n; ++r) {
        out.dofs[r] = dofs[keep[r]];
        for (int s = 0; s < n; ++s)
            out.block(r, s) = full(keep[r], keep[s]);
    }
    return out;
}

/// Stiffness + mass of one element on all three vertex slots (no filtering).
inline Eigen::Matrix3d stiffness_mass(const TriMesh& mesh, Index tri, const Tensor2& a, double c)
{
    const P1Gradients g = p1_gradients(mesh, tri);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = g.area * (a * g.grad[j]).dot(g.grad[i]) + c * g.area / 12.0 * (i == j ? 2.0 : 1.0);
    return m;
}

/// C(i,j) = int_T (b . grad phi_j) phi_i for the linear interpolant of b.
/// Reduces to (b . grad phi_j) |T| / 3 when b is constant on T.
inline Eigen::Matrix3d convection(const TriMesh& mesh, Index tri, const CoefficientField& coeff)
{
    const P1Gradients g = p1_gradients(mesh, tri);
    std::array<Eigen::Vector2d, 3> bv;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) {
        bv[k] = coeff.b(mesh.vertices[mesh.triangles[tri][k]]);
        if (!bv[k].allFinite())
            throw InvalidCoefficient("convection: non-finite velocity");
        sum += bv[k];
    }
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = (sum + bv[i]).dot(g.grad[j]) * g.area / 12.0;
    return m;
}

} // namespace detail

struct ElementBlocks {
    LocalContribution sym;
    LocalContribution skew;
};

/// Element contributions A_k (stiffness + mass + symmetrized convection) and
/// B_k (antisymmetrized convection), restricted to the present DOFs.
inline ElementBlocks element_matrices(const TriMesh& mesh, Index tri, const CoefficientField& coeff,
                                      const DofMap& dofmap, const ElementOptions& opts = {})
{
    const Point xc = mesh.centroid(tri);
    const Tensor2 a = detail::checked_diffusion(coeff, xc, opts.validate_diffusion);
    const double c = detail::checked_reaction(coeff, xc);

    Eigen::Matrix3d sym = detail::stiffness_mass(mesh, tri, a, c);
    Eigen::Matrix3d skew = Eigen::Matrix3d::Zero();
    if (coeff.has_convection()) {
        const Eigen::Matrix3d conv = detail::convection(mesh, tri, coeff);
        if (!opts.drop_symmetric_convection)
            sym += 0.5 * (conv + conv.transpose());
        skew = 0.5 * (conv - conv.transpose());
    }
    const auto& dofs = dofmap.triangle_dofs[tri];
    return {detail::filter_absent(dofs, sym, LocalContribution::Kind::symmetric),
            detail::filter_absent(dofs, skew, LocalContribution::Kind::skew)};
}

/// Penalty weight of an edge: 3 c_sigma/|e| (k(a_L) + k(a_R)) on interior edges and
/// 6 c_sigma/|e| k(a_L) on boundary edges, with k(a) = lambda_max(a)^2 / lambda_min(a).
inline double sipg_penalty(const EdgeRecord& edge, const Tensor2& a_left, const std::optional<Tensor2>& a_right,
                           double c_sigma)
{
    if (!(c_sigma > 1.0))
        throw InvalidArgument("sipg_penalty: c_sigma must be greater than one");
    const auto weight = [](const Tensor2& a) {
        const auto [lmin, lmax] = detail::tensor_extreme_eigs(a);
        if (!(lmin > 0.0))
            throw InvalidCoefficient("sipg_penalty: diffusion tensor is not positive definite");
        return lmax * lmax / lmin;
    };
    if (a_right)
        return 3.0 * c_sigma / edge.length * (weight(a_left) + weight(*a_right));
    return 6.0 * c_sigma / edge.length * weight(a_left);
}

/// Edge-term conventions of the SIPG form.
struct SipgOptions {
    double c_sigma = 2.0;
    /// Weight of the one-sided flux average on boundary edges. 1 is the one-sided
    /// trace; 0.5 treats boundary edges like interior ones.
    double boundary_flux_weight = 1.0;
};

/// SIPG contribution of one edge: a third of the adjacent element integrals,
/// minus the symmetric consistency terms, plus the penalty on jumps.
/// The block is 6x6 on interior edges (left element first) and 3x3 on the boundary.
inline LocalContribution sipg_edge_matrices(const TriMesh& mesh, const EdgeRecord& edge,
                                            const CoefficientField& coeff, const DofMap& dofmap,
                                            const SipgOptions& opts)
{
    if (dofmap.kind != DofKind::dg)
        throw InvalidArgument("sipg_edge_matrices: requires a DG DofMap");

    std::vector<Index> tris{edge.left_tri};
    if (edge.right_tri)
        tris.push_back(*edge.right_tri);
    const auto nt = static_cast<int>(tris.size());
    const int n = 3 * nt;

    std::vector<Tensor2> a(tris.size());
    std::vector<P1Gradients> grads(tris.size());
    DenseMatrix block = DenseMatrix::Zero(n, n);
    for (int s = 0; s < nt; ++s) {
        const Point xc = mesh.centroid(tris[s]);
        a[s] = detail::checked_diffusion(coeff, xc);
        grads[s] = p1_gradients(mesh, tris[s]);
        block.block<3, 3>(3 * s, 3 * s) =
            detail::stiffness_mass(mesh, tris[s], a[s], detail::checked_reaction(coeff, xc)) / 3.0;
    }

    const double sigma =
        sipg_penalty(edge, a[0], edge.right_tri ? std::optional<Tensor2>(a[1]) : std::nullopt, opts.c_sigma);

    // Per local basis function: jump sign, averaged normal flux, and which edge
    // endpoint it is attached to (or -1 if its vertex is off the edge).
    const double avg = edge.right_tri ? 0.5 : opts.boundary_flux_weight;
    std::vector<double> sign(n), flux(n);
    std::vector<int> endpoint(n, -1);
    for (int s = 0; s < nt; ++s) {
        const auto& tv = mesh.triangles[tris[s]];
        for (int k = 0; k < 3; ++k) {
            const int r = 3 * s + k;
            sign[r] = s == 0 ? 1.0 : -1.0;
            flux[r] = avg * (a[s] * grads[s].grad[k]).dot(edge.normal);
            if (tv[k] == edge.endpoints[0])
                endpoint[r] = 0;
            else if (tv[k] == edge.endpoints[1])
                endpoint[r] = 1;
        }
    }

    const double len = edge.length;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            // int_e {a grad phi_i}.[phi_j] = flux_i * sign_j * int_e phi_j
            const double trace_j = endpoint[j] >= 0 ? 0.5 * len : 0.0;
            const double trace_i = endpoint[i] >= 0 ? 0.5 * len : 0.0;
            double v = -(flux[i] * sign[j] * trace_j + flux[j] * sign[i] * trace_i);
            if (endpoint[i] >= 0 && endpoint[j] >= 0) {
                const double mass = len / 6.0 * (endpoint[i] == endpoint[j] ? 2.0 : 1.0);
                v += sigma * sign[i] * sign[j] * mass;
            }
            block(i, j) += v;
        }
    }

    LocalContribution out;
    out.kind = LocalContribution::Kind::symmetric;
    out.block = std::move(block);
    for (Index t : tris)
        for (Index d : dofmap.triangle_dofs[t])
            out.dofs.push_back(d);
    return out;
}

inline LocalContribution sipg_edge_matrices(const TriMesh& mesh, const EdgeRecord& edge,
                                            const CoefficientField& coeff, const DofMap& dofmap, double c_sigma)
{
    return sipg_edge_matrices(mesh, edge, coeff, dofmap, SipgOptions{c_sigma});
}

/// Load vector contribution of a constant source on one element: f |T| / 3 per vertex.
inline std::vector<std::pair<Index, double>> element_load(const TriMesh& mesh, Index tri, double f,
                                                         const DofMap& dofmap)
{
    const double share = f * p1_gradients(mesh, tri).area / 3.0;
    std::vector<std::pair<Index, double>> out;
    for (Index d : dofmap.triangle_dofs[tri])
        if (d != DofMap::absent)
            out.emplace_back(d, share);
    return out;
}

} // namespace patchbound
