#include <gtest/gtest.h>

#include "patchbound/bounds.hpp"
#include "patchbound/local_integrals.hpp"
#include "patchbound/problems.hpp"

using namespace patchbound;

namespace {

TriMesh unit_triangle()
{
    TriMesh m;
    m.vertices = {Point(0, 0), Point(1, 0), Point(0, 1)};
    m.triangles = {{0, 1, 2}};
    return m;
}

DofMap all_dofs(const TriMesh& m) { return dof_map(m, DofKind::dg); }

// Exact for polynomials of degree 2 on a triangle.
template <class F>
double edge_midpoint_rule(const TriMesh& m, Index t, F&& f)
{
    const auto& v = m.triangles[t];
    double s = 0.0;
    for (int k = 0; k < 3; ++k)
        s += f(0.5 * (m.vertices[v[k]] + m.vertices[v[(k + 1) % 3]]));
    return s * p1_gradients(m, t).area / 3.0;
}

double hat(const TriMesh& m, Index t, int k, const Point& x)
{
    const P1Gradients g = p1_gradients(m, t);
    return 1.0 + g.grad[k].dot(x - m.vertices[m.triangles[t][k]]);
}

} // namespace

TEST(ElementMatrices, StiffnessOnUnitTriangle)
{
    const TriMesh m = unit_triangle();
    const auto blocks = element_matrices(m, 0, problems::constant(Tensor2::Identity(), 0.0), all_dofs(m));
    Eigen::Matrix3d expect;
    expect << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    EXPECT_LT((blocks.sym.block - expect).norm(), 1e-15);
    EXPECT_EQ(blocks.skew.block.norm(), 0.0);
    EXPECT_EQ(blocks.sym.kind, LocalContribution::Kind::symmetric);
    EXPECT_EQ(blocks.skew.kind, LocalContribution::Kind::skew);
}

TEST(ElementMatrices, MassBlock)
{
    const TriMesh m = build_uniform(3, 2, Rect{0, 0, 1.5, 0.7});
    ElementOptions opts;
    opts.validate_diffusion = false;
    const auto coeff = problems::constant(Tensor2::Zero(), 1.0);
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const auto b = element_matrices(m, t, coeff, all_dofs(m), opts);
        const double area = m.signed_area(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_NEAR(b.sym.block(i, j), i == j ? area / 6.0 : area / 12.0, 1e-15);
    }
}

TEST(ElementMatrices, RejectsBadCoefficients)
{
    const TriMesh m = unit_triangle();
    EXPECT_THROW(element_matrices(m, 0, problems::constant(-Tensor2::Identity(), 0.0), all_dofs(m)),
                 InvalidCoefficient);
    EXPECT_THROW(element_matrices(m, 0, problems::constant(Tensor2::Identity(), -1.0), all_dofs(m)),
                 InvalidCoefficient);
}

TEST(ElementMatrices, ConvectionMatchesQuadrature)
{
    const TriMesh m = build_uniform(3, 3);
    const auto coeff = problems::convection_diffusion();
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const Eigen::Matrix3d c = detail::convection(m, t, coeff);
        const P1Gradients g = p1_gradients(m, t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double q =
                    edge_midpoint_rule(m, t, [&](const Point& x) { return coeff.b(x).dot(g.grad[j]) * hat(m, t, i, x); });
                EXPECT_NEAR(c(i, j), q, 1e-14);
            }
    }
}

TEST(ElementMatrices, ConstantVelocityGivesCentroidFormula)
{
    const TriMesh m = build_uniform(2, 2);
    CoefficientField coeff = problems::constant(Tensor2::Identity(), 0.0);
    const Eigen::Vector2d b(0.3, -1.7);
    coeff.b = [b](const Point&) { return b; };
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const P1Gradients g = p1_gradients(m, t);
        const Eigen::Matrix3d c = detail::convection(m, t, coeff);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_NEAR(c(i, j), b.dot(g.grad[j]) * g.area / 3.0, 1e-15);
        const auto blocks = element_matrices(m, t, coeff, all_dofs(m));
        EXPECT_LT((blocks.skew.block + blocks.skew.block.transpose()).norm(), 1e-14 * blocks.skew.block.norm());
    }
}

TEST(ElementMatrices, SymmetricConvectionCancelsForDivergenceFreeVelocity)
{
    const TriMesh m = build_uniform(8, 8);
    const DofMap dofs = dof_map(m, DofKind::cg);
    const auto coeff = problems::convection_diffusion();
    ElementOptions drop;
    drop.drop_symmetric_convection = true;
    const auto with = element_contributions(m, dofs, coeff);
    const auto without = element_contributions(m, dofs, coeff, drop);
    const Eigen::MatrixXd a1 = assemble(with.sym, dofs.n_dof).dense();
    const Eigen::MatrixXd a0 = assemble(without.sym, dofs.n_dof).dense();
    EXPECT_LE((a1 - a0).cwiseAbs().maxCoeff(), 1e-10 * a0.cwiseAbs().maxCoeff());
    // element-wise the symmetric part is not zero
    double local = 0.0;
    for (std::size_t k = 0; k < with.sym.size(); ++k)
        local = std::max(local, (with.sym[k].block - without.sym[k].block).norm());
    EXPECT_GT(local, 1e-3);
}

TEST(ElementMatrices, AbsentDofsAreDropped)
{
    const TriMesh m = build_uniform(3, 3);
    const DofMap dofs = dof_map(m, DofKind::cg);
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const auto b = element_matrices(m, t, problems::diffusion_reaction(), dofs);
        Index present = 0;
        for (Index d : dofs.triangle_dofs[t])
            present += d != DofMap::absent;
        EXPECT_EQ(b.sym.size(), present);
        EXPECT_EQ(b.sym.block.rows(), present);
        for (Index d : b.sym.dofs)
            EXPECT_NE(d, DofMap::absent);
    }
}

TEST(SipgPenalty, InteriorAndBoundary)
{
    EdgeRecord interior;
    interior.length = 0.1;
    interior.right_tri = 1;
    EXPECT_NEAR(sipg_penalty(interior, Tensor2::Identity(), Tensor2::Identity(), 2.0), 120.0, 1e-12);

    EdgeRecord boundary;
    boundary.length = 0.1;
    EXPECT_NEAR(sipg_penalty(boundary, problems::diag(3, 1), std::nullopt, 2.0), 1080.0, 1e-10);

    EXPECT_THROW(sipg_penalty(interior, Tensor2::Identity(), Tensor2::Identity(), 1.0), InvalidArgument);
    EXPECT_THROW(sipg_penalty(interior, Tensor2::Identity(), Tensor2::Identity(), 0.5), InvalidArgument);
}

TEST(SipgEdge, BlockShapesAndSymmetry)
{
    const TriMesh m = build_uniform(4, 4);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto coeff = problems::diffusion_reaction();
    for (const auto& e : m.interior_edges) {
        const auto lc = sipg_edge_matrices(m, e, coeff, dofs, 2.0);
        ASSERT_EQ(lc.size(), 6);
        EXPECT_LT((lc.block - lc.block.transpose()).norm(), 1e-14 * lc.block.norm());
        for (int k = 0; k < 3; ++k) {
            EXPECT_EQ(lc.dofs[k], dofs.triangle_dofs[e.left_tri][k]);
            EXPECT_EQ(lc.dofs[3 + k], dofs.triangle_dofs[*e.right_tri][k]);
        }
    }
    for (const auto& e : m.boundary_edges) {
        const auto lc = sipg_edge_matrices(m, e, coeff, dofs, 2.0);
        ASSERT_EQ(lc.size(), 3);
        EXPECT_LT((lc.block - lc.block.transpose()).norm(), 1e-14 * lc.block.norm());
    }
    EXPECT_THROW(sipg_edge_matrices(m, m.interior_edges[0], coeff, dof_map(m, DofKind::cg), 2.0), InvalidArgument);
}

TEST(SipgEdge, InteriorBlockKernelIsConstants)
{
    const TriMesh m = build_uniform(10, 10);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto coeff = problems::constant(Tensor2::Identity(), 0.0);
    for (const auto& e : m.interior_edges) {
        const auto lc = sipg_edge_matrices(m, e, coeff, dofs, 2.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lc.block);
        const auto& ev = es.eigenvalues();
        EXPECT_GT(ev(0), -1e-12 * ev(5));
        EXPECT_LT(ev(0), 1e-12 * ev(5));
        EXPECT_GT(ev(1), 1e-6 * ev(5));
        EXPECT_LT((lc.block * Eigen::VectorXd::Ones(6)).norm(), 1e-12 * ev(5));
    }
}

TEST(SipgEdge, BoundaryJumpIsLeftTrace)
{
    // A boundary edge block penalizes the trace itself: the all-ones vector is not
    // in its kernel, while a function vanishing on the edge only sees stiffness.
    const TriMesh m = build_uniform(3, 3);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto coeff = problems::constant(Tensor2::Identity(), 0.0);
    for (const auto& e : m.boundary_edges) {
        const auto lc = sipg_edge_matrices(m, e, coeff, dofs, 2.0);
        const Eigen::Vector3d ones = Eigen::Vector3d::Ones();
        const double sigma = sipg_penalty(e, Tensor2::Identity(), std::nullopt, 2.0);
        EXPECT_NEAR(ones.dot(lc.block * ones), sigma * e.length, 1e-9 * sigma);
    }
}

TEST(SipgEdge, BoundaryFluxWeightOnlyTouchesBoundaryEdges)
{
    const TriMesh m = build_uniform(3, 3);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto coeff = problems::diffusion_reaction();
    const SipgOptions one{2.0, 1.0}, half{2.0, 0.5};
    for (const auto& e : m.interior_edges)
        EXPECT_EQ(sipg_edge_matrices(m, e, coeff, dofs, one).block, sipg_edge_matrices(m, e, coeff, dofs, half).block);
    double diff = 0.0;
    for (const auto& e : m.boundary_edges)
        diff += (sipg_edge_matrices(m, e, coeff, dofs, one).block - sipg_edge_matrices(m, e, coeff, dofs, half).block)
                    .norm();
    EXPECT_GT(diff, 0.0);
}

TEST(SipgEdge, ReactionFreeReferenceHasConstantKernel)
{
    const TriMesh m = build_uniform(4, 4);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto ref = problems::constant(problems::diag(3, 1), 0.0);
    for (const auto& e : m.interior_edges) {
        const auto lc = sipg_edge_matrices(m, e, ref, dofs, 2.0);
        EXPECT_LE((lc.block * Eigen::VectorXd::Ones(6)).norm(), default_kernel_tol * lc.block.norm());
    }
}

TEST(SipgEdge, IdenticalDataAssembleIdentically)
{
    const TriMesh m = build_uniform(5, 5);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto a = sipg_contributions(m, dofs, problems::constant(Tensor2::Identity(), 1.0), SipgOptions{2.0});
    const auto p = sipg_contributions(m, dofs, problems::constant(Tensor2::Identity(), 1.0), SipgOptions{2.0});
    const auto ga = assemble(a, dofs.n_dof), gp = assemble(p, dofs.n_dof);
    ASSERT_EQ(ga.nnz(), gp.nnz());
    for (Index k = 0; k < ga.nnz(); ++k)
        EXPECT_EQ(ga.values()[k], gp.values()[k]);
}

TEST(SipgEdge, PiecewiseConstantEnergyIsMassPlusBoundaryPenalty)
{
    const TriMesh m = build_uniform(4, 4);
    const DofMap dofs = dof_map(m, DofKind::dg);
    const auto coeff = problems::diffusion_reaction();
    const SparseSym dg = assemble(sipg_contributions(m, dofs, coeff, SipgOptions{2.0}), dofs.n_dof);
    // a function that is constant on every element has no stiffness; its energy
    // is mass plus penalty on the jumps only
    Eigen::VectorXd u(dofs.n_dof);
    for (Index t = 0; t < m.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k)
            u(dofs.triangle_dofs[t][k]) = 1.0;
    double mass = 0.0, penalty = 0.0;
    for (Index t = 0; t < m.num_triangles(); ++t)
        mass += m.signed_area(t);
    for (const auto& e : m.boundary_edges)
        penalty += sipg_penalty(e, coeff.a(m.centroid(e.left_tri)), std::nullopt, 2.0) * e.length;
    EXPECT_NEAR(u.dot(dg * u), mass + penalty, 1e-9 * penalty);
}

TEST(ElementLoad, SumsToSourceTimesArea)
{
    const TriMesh m = build_uniform(5, 5);
    const auto f = load_vector(m, dof_map(m, DofKind::dg), 10.0);
    EXPECT_NEAR(f.sum(), 10.0, 1e-12);
}
