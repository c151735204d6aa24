#include <gtest/gtest.h>

#include <set>

#include "patchbound/mesh.hpp"

using namespace patchbound;

TEST(Mesh, SingleCell)
{
    const TriMesh m = build_uniform(1, 1);
    EXPECT_EQ(m.num_triangles(), 2);
    EXPECT_EQ(m.interior_edges.size(), 1u);
    EXPECT_EQ(m.boundary_edges.size(), 4u);
}

TEST(Mesh, EulerCounts)
{
    for (Index n : {1, 2, 5, 10, 17}) {
        for (auto d : {Diagonal::lower_left_upper_right, Diagonal::lower_right_upper_left}) {
            const TriMesh m = build_uniform(n, n, {}, d);
            EXPECT_EQ(m.num_triangles(), 2 * n * n);
            EXPECT_EQ(static_cast<Index>(m.boundary_edges.size()), 4 * n);
            EXPECT_EQ(static_cast<Index>(m.interior_edges.size()), 3 * n * n - 2 * n);
        }
    }
    const TriMesh m = build_uniform(10, 10);
    EXPECT_EQ(m.num_triangles(), 200);
    EXPECT_EQ(m.interior_edges.size(), 280u);
    EXPECT_EQ(m.boundary_edges.size(), 40u);
}

TEST(Mesh, RejectsBadInput)
{
    EXPECT_THROW(build_uniform(0, 3), InvalidArgument);
    EXPECT_THROW(build_uniform(3, 0), InvalidArgument);
    EXPECT_THROW(build_uniform(2, 2, Rect{0, 0, 0, 1}), InvalidArgument);
}

TEST(Mesh, PositiveAreasAndCoverage)
{
    const Rect r{-1.0, 0.5, 2.0, 1.5};
    const TriMesh m = build_uniform(7, 4, r);
    double total = 0.0;
    for (Index t = 0; t < m.num_triangles(); ++t) {
        EXPECT_GT(m.signed_area(t), 0.0);
        total += m.signed_area(t);
    }
    EXPECT_NEAR(total, r.area(), 1e-13);
}

TEST(Mesh, EdgeConformity)
{
    const TriMesh m = build_uniform(6, 6, {}, Diagonal::lower_right_upper_left);
    std::vector<int> uses(static_cast<std::size_t>(m.num_triangles()), 0);
    for (const auto& e : m.interior_edges) {
        ASSERT_TRUE(e.right_tri.has_value());
        EXPECT_FALSE(e.is_boundary());
        EXPECT_NE(e.left_tri, *e.right_tri);
        ++uses[e.left_tri];
        ++uses[*e.right_tri];
        // both triangles contain both endpoints
        for (Index t : {e.left_tri, *e.right_tri}) {
            const std::set<Index> tv(m.triangles[t].begin(), m.triangles[t].end());
            EXPECT_TRUE(tv.count(e.endpoints[0]) && tv.count(e.endpoints[1]));
        }
        EXPECT_NEAR(e.normal.norm(), 1.0, 1e-14);
    }
    for (const auto& e : m.boundary_edges) {
        EXPECT_TRUE(e.is_boundary());
        ++uses[e.left_tri];
    }
    for (int u : uses)
        EXPECT_EQ(u, 3);
}

TEST(Mesh, BoundaryNormalsPointOutward)
{
    for (auto d : {Diagonal::lower_left_upper_right, Diagonal::lower_right_upper_left}) {
        const TriMesh m = build_uniform(5, 3, Rect{0, 0, 2, 1}, d);
        const Point c = m.rect.center();
        for (const auto& e : m.boundary_edges) {
            EXPECT_GE(e.normal.dot(e.midpoint(m.vertices) - c), 0.0);
            EXPECT_NEAR(e.normal.norm(), 1.0, 1e-14);
        }
    }
}

TEST(Mesh, InteriorNormalsLeaveLeftTriangle)
{
    const TriMesh m = build_uniform(4, 4);
    for (const auto& e : m.interior_edges) {
        const Point out = e.midpoint(m.vertices) - m.centroid(e.left_tri);
        EXPECT_GT(e.normal.dot(out), 0.0);
    }
}

TEST(DofMap, Counts)
{
    const TriMesh m = build_uniform(10, 10);
    EXPECT_EQ(dof_map(m, DofKind::dg).n_dof, 600);
    EXPECT_EQ(dof_map(m, DofKind::cg).n_dof, 81);
    EXPECT_EQ(dof_map(build_uniform(1, 1), DofKind::cg).n_dof, 0);
    EXPECT_EQ(dof_map(build_uniform(4, 7), DofKind::cg).n_dof, 3 * 6);
}

TEST(DofMap, DgUniqueAndCgAbsentOnBoundary)
{
    const TriMesh m = build_uniform(5, 5);
    const DofMap dg = dof_map(m, DofKind::dg);
    std::set<Index> seen;
    for (const auto& td : dg.triangle_dofs)
        for (Index d : td)
            EXPECT_TRUE(seen.insert(d).second);
    EXPECT_EQ(static_cast<Index>(seen.size()), dg.n_dof);

    const DofMap cg = dof_map(m, DofKind::cg);
    for (Index t = 0; t < m.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k)
            EXPECT_EQ(cg.triangle_dofs[t][k] == DofMap::absent, m.on_boundary(m.triangles[t][k]));
}

TEST(P1Gradients, UnitRightTriangle)
{
    TriMesh m;
    m.vertices = {Point(0, 0), Point(1, 0), Point(0, 1)};
    m.triangles = {{0, 1, 2}};
    const P1Gradients g = p1_gradients(m, 0);
    EXPECT_DOUBLE_EQ(g.area, 0.5);
    EXPECT_EQ(g.grad[0], Eigen::Vector2d(-1, -1));
    EXPECT_EQ(g.grad[1], Eigen::Vector2d(1, 0));
    EXPECT_EQ(g.grad[2], Eigen::Vector2d(0, 1));
}

TEST(P1Gradients, PartitionOfUnity)
{
    const TriMesh m = build_uniform(3, 5, Rect{0, 0, 3, 1});
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const P1Gradients g = p1_gradients(m, t);
        EXPECT_LT((g.grad[0] + g.grad[1] + g.grad[2]).norm(), 1e-12);
        // grad phi_k is orthogonal to the opposite edge and has value 1 at its vertex
        for (int k = 0; k < 3; ++k) {
            const Point& pk = m.vertices[m.triangles[t][k]];
            const Point& pn = m.vertices[m.triangles[t][(k + 1) % 3]];
            EXPECT_NEAR(g.grad[k].dot(pk - pn), 1.0, 1e-12);
        }
    }
}
