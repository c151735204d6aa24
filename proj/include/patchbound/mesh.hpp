#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "patchbound/error.hpp"

namespace patchbound {

using Index = std::ptrdiff_t;
using Point = Eigen::Vector2d;

struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

/// Which diagonal splits each grid cell into two triangles.
enum class Diagonal {
    lower_left_upper_right, ///< "ll-ur", the default
    lower_right_upper_left  ///< "lr-ul"
};

struct EdgeRecord {
    std::array<Index, 2> endpoints{};
    Point normal = Point::Zero(); ///< unit; points from left_tri toward right_tri (outward on the boundary)
    Index left_tri = 0;
    std::optional<Index> right_tri; ///< empty on boundary edges
    double length = 0.0;

    bool is_boundary() const { return !right_tri.has_value(); }
    Point midpoint(const std::vector<Point>& vertices) const
    {
        return 0.5 * (vertices[endpoints[0]] + vertices[endpoints[1]]);
    }
};

/// Conforming triangulation of an axis-aligned rectangle. Immutable once built.
struct TriMesh {
    std::vector<Point> vertices;
    std::vector<std::array<Index, 3>> triangles; ///< counterclockwise
    std::vector<EdgeRecord> interior_edges;
    std::vector<EdgeRecord> boundary_edges;
    Index n1 = 0;
    Index n2 = 0;
    Rect rect;

    Index num_triangles() const { return static_cast<Index>(triangles.size()); }

    double signed_area(Index tri) const
    {
        const auto& t = triangles[tri];
        const Point e1 = vertices[t[1]] - vertices[t[0]];
        const Point e2 = vertices[t[2]] - vertices[t[0]];
        return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    }

    Point centroid(Index tri) const
    {
        const auto& t = triangles[tri];
        return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
    }

    bool on_boundary(Index vertex) const
    {
        const Point& p = vertices[vertex];
        const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); };
        return near(p.x(), rect.x0) || near(p.x(), rect.x1) || near(p.y(), rect.y0) || near(p.y(), rect.y1);
    }
};

namespace detail {

inline Point outward_normal(const Point& from, const Point& to)
{
    // Edge traversed counterclockwise around its triangle: outward normal is the
    // tangent rotated clockwise.
    const Point d = to - from;
    return Point(d.y(), -d.x()) / d.norm();
}

} // namespace detail

inline TriMesh build_uniform(Index n1, Index n2, const Rect& rect = {},
                             Diagonal diagonal = Diagonal::lower_left_upper_right)
{
    if (n1 < 1 || n2 < 1)
        throw InvalidArgument("build_uniform: subdivision counts must be positive");
    if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0))
        throw InvalidArgument("build_uniform: degenerate rectangle");

    TriMesh mesh;
    mesh.n1 = n1;
    mesh.n2 = n2;
    mesh.rect = rect;

    const double hx = (rect.x1 - rect.x0) / static_cast<double>(n1);
    const double hy = (rect.y1 - rect.y0) / static_cast<double>(n2);
    mesh.vertices.reserve(static_cast<std::size_t>((n1 + 1) * (n2 + 1)));
    for (Index j = 0; j <= n2; ++j)
        for (Index i = 0; i <= n1; ++i)
            mesh.vertices.emplace_back(i == n1 ? rect.x1 : rect.x0 + static_cast<double>(i) * hx,
                                       j == n2 ? rect.y1 : rect.y0 + static_cast<double>(j) * hy);

    const auto vid = [n1](Index i, Index j) { return j * (n1 + 1) + i; };
    mesh.triangles.reserve(static_cast<std::size_t>(2 * n1 * n2));
    for (Index j = 0; j < n2; ++j) {
        for (Index i = 0; i < n1; ++i) {
            const Index v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            if (diagonal == Diagonal::lower_left_upper_right) {
                mesh.triangles.push_back({v00, v10, v11});
                mesh.triangles.push_back({v00, v11, v01});
            } else {
                mesh.triangles.push_back({v00, v10, v01});
                mesh.triangles.push_back({v10, v11, v01});
            }
        }
    }

    for (Index t = 0; t < mesh.num_triangles(); ++t)
        if (!(mesh.signed_area(t) > 0.0))
            throw InvalidArgument("build_uniform: non-positive triangle area");

    // Triangles are visited in ascending order, so the first owner of an edge is
    // the smaller index and becomes its left side.
    struct Pending {
        Index from, to, left;
        std::optional<Index> right;
    };
    std::map<std::pair<Index, Index>, std::size_t> lookup;
    std::vector<Pending> pending;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            const Index a = tri[e], b = tri[(e + 1) % 3];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = lookup.try_emplace({key.first, key.second}, pending.size());
            if (inserted)
                pending.push_back({a, b, t, std::nullopt});
            else if (pending[it->second].right)
                throw InvalidArgument("build_uniform: edge shared by more than two triangles");
            else
                pending[it->second].right = t;
        }
    }

    for (const auto& p : pending) {
        EdgeRecord rec;
        rec.endpoints = {p.from, p.to};
        rec.left_tri = p.left;
        rec.right_tri = p.right;
        rec.normal = detail::outward_normal(mesh.vertices[p.from], mesh.vertices[p.to]);
        rec.length = (mesh.vertices[p.to] - mesh.vertices[p.from]).norm();
        (p.right ? mesh.interior_edges : mesh.boundary_edges).push_back(rec);
    }
    return mesh;
}

enum class DofKind { cg, dg };

/// Global numbering of the P1 nodal unknowns. CG boundary vertices are eliminated
/// (homogeneous Dirichlet data) and map to `absent`.
struct DofMap {
    static constexpr Index absent = -1;

    DofKind kind = DofKind::dg;
    Index n_dof = 0;
    std::vector<std::array<Index, 3>> triangle_dofs;
};

inline DofMap dof_map(const TriMesh& mesh, DofKind kind)
{
    DofMap map;
    map.kind = kind;
    map.triangle_dofs.resize(mesh.triangles.size());
    if (kind == DofKind::dg) {
        for (Index t = 0; t < mesh.num_triangles(); ++t)
            for (Index k = 0; k < 3; ++k)
                map.triangle_dofs[t][k] = 3 * t + k;
        map.n_dof = 3 * mesh.num_triangles();
        return map;
    }
    // Vertices are stored row by row (x fastest), which is already lexicographic in (y, x).
    std::vector<Index> vertex_dof(mesh.vertices.size(), DofMap::absent);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (!mesh.on_boundary(static_cast<Index>(v)))
            vertex_dof[v] = map.n_dof++;
    for (Index t = 0; t < mesh.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k)
            map.triangle_dofs[t][k] = vertex_dof[mesh.triangles[t][k]];
    return map;
}

struct P1Gradients {
    std::array<Eigen::Vector2d, 3> grad;
    double area = 0.0;
};

inline P1Gradients p1_gradients(const TriMesh& mesh, Index tri)
{
    const auto& t = mesh.triangles[tri];
    const Point& p0 = mesh.vertices[t[0]];
    const Point& p1 = mesh.vertices[t[1]];
    const Point& p2 = mesh.vertices[t[2]];
    const double twice_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
    P1Gradients out;
    out.area = 0.5 * twice_area;
    out.grad[0] = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / twice_area;
    out.grad[1] = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / twice_area;
    out.grad[2] = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / twice_area;
    return out;
}

/// Debug dump: one section per entity kind, all comma separated.
inline void write_mesh_csv(std::ostream& os, const TriMesh& mesh)
{
    os << "# vertices\nindex,x,y\n";
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        os << v << ',' << mesh.vertices[v].x() << ',' << mesh.vertices[v].y() << '\n';
    os << "# triangles\nindex,v0,v1,v2\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        os << t << ',' << mesh.triangles[t][0] << ',' << mesh.triangles[t][1] << ',' << mesh.triangles[t][2] << '\n';
    os << "# edges\nv0,v1,nx,ny,left,right,length\n";
    const auto dump = [&](const EdgeRecord& e) {
        os << e.endpoints[0] << ',' << e.endpoints[1] << ',' << e.normal.x() << ',' << e.normal.y() << ','
           << e.left_tri << ',' << (e.right_tri ? std::to_string(*e.right_tri) : std::string()) << ','
           << e.length << '\n';
    };
    for (const auto& e : mesh.interior_edges)
        dump(e);
    for (const auto& e : mesh.boundary_edges)
        dump(e);
}

} // namespace patchbound
