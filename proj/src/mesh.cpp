#include "fosls/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fosls {

double Mesh::signed_area(std::size_t t) const
{
    const Point a = vertex(t, 0);
    const Point b = vertex(t, 1);
    const Point c = vertex(t, 2);
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double Mesh::diameter(std::size_t t) const
{
    const Point a = vertex(t, 0);
    const Point b = vertex(t, 1);
    const Point c = vertex(t, 2);
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

double Mesh::max_diameter() const
{
    double h = 0.0;
    for (std::size_t t = 0; t < num_triangles(); ++t) {
        h = std::max(h, diameter(t));
    }
    return h;
}

double Mesh::edge_length(std::size_t e) const
{
    return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

Point Mesh::to_physical(std::size_t t, const Barycentric& lambda) const
{
    return lambda[0] * vertex(t, 0) + lambda[1] * vertex(t, 1) + lambda[2] * vertex(t, 2);
}

Barycentric Mesh::barycentric(std::size_t t, const Point& x) const
{
    const Point a = vertex(t, 0);
    const Point b = vertex(t, 1);
    const Point c = vertex(t, 2);
    const double twice_area = 2.0 * signed_area(t);
    // Sub-triangle areas opposite each vertex.
    const auto cross = [](const Point& p, const Point& q, const Point& r) {
        return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    };
    const double l1 = cross(a, x, c) / twice_area;
    const double l2 = cross(a, b, x) / twice_area;
    return {1.0 - l1 - l2, l1, l2};
}

Mesh build_mesh(std::vector<Point> vertices,
                std::vector<std::array<std::size_t, 3>> triangles,
                int level,
                std::vector<std::size_t> parent)
{
    Mesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    mesh.parent = std::move(parent);
    mesh.level = level;

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
    std::vector<int> incidence;
    mesh.triangle_edges.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t from = tri[(i + 1) % 3];
            const std::size_t to = tri[(i + 2) % 3];
            const auto key = std::minmax(from, to);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, mesh.edges.size());
            if (inserted) {
                mesh.edges.push_back({key.first, key.second});
                incidence.push_back(0);
            }
            ++incidence[it->second];
            mesh.triangle_edges[t][i] = EdgeRef{it->second, from < to ? 1 : -1};
        }
    }

    mesh.boundary_edge.assign(mesh.edges.size(), false);
    mesh.boundary_vertex.assign(mesh.vertices.size(), false);
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        if (incidence[e] == 1) {
            mesh.boundary_edge[e] = true;
            mesh.boundary_vertex[mesh.edges[e][0]] = true;
            mesh.boundary_vertex[mesh.edges[e][1]] = true;
        }
    }
    return mesh;
}

Mesh unit_square_initial_mesh()
{
    std::vector<Point> vertices{
        {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {0.5, 0.5}};
    std::vector<std::array<std::size_t, 3>> triangles{
        {4, 0, 1}, {4, 1, 2}, {4, 2, 3}, {4, 3, 0}};
    return build_mesh(std::move(vertices), std::move(triangles), 0);
}

Mesh refine_uniform(const Mesh& mesh, RefinementRule rule)
{
    const std::size_t nv = mesh.num_vertices();
    std::vector<Point> vertices = mesh.vertices;
    vertices.reserve(nv + mesh.num_edges());
    for (const auto& edge : mesh.edges) {
        vertices.push_back(0.5 * (mesh.vertices[edge[0]] + mesh.vertices[edge[1]]));
    }

    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<std::size_t> parent;
    triangles.reserve(4 * mesh.num_triangles());
    parent.reserve(4 * mesh.num_triangles());

    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const std::size_t n = tri[0];
        const std::size_t a = tri[1];
        const std::size_t b = tri[2];
        // Midpoint of the edge opposite local vertex i.
        const std::size_t m0 = nv + mesh.triangle_edges[t][0].index;
        const std::size_t m1 = nv + mesh.triangle_edges[t][1].index;
        const std::size_t m2 = nv + mesh.triangle_edges[t][2].index;

        std::array<std::array<std::size_t, 3>, 4> sons{};
        if (rule == RefinementRule::NewestVertexBisection) {
            // First bisection of (n, a, b) at m0 gives (m0, n, a) and (m0, b, n);
            // each son is bisected again at the edge opposite m0.
            sons = {{{m2, m0, n}, {m2, a, m0}, {m1, m0, b}, {m1, n, m0}}};
        } else {
            sons = {{{n, m2, m1}, {m2, a, m0}, {m1, m0, b}, {m0, m1, m2}}};
        }
        for (const auto& son : sons) {
            triangles.push_back(son);
            parent.push_back(t);
        }
    }
    return build_mesh(std::move(vertices), std::move(triangles), mesh.level + 1, std::move(parent));
}

Mesh unit_square_mesh(int level, RefinementRule rule)
{
    if (level < 0) {
        throw std::invalid_argument("unit_square_mesh: level must be non-negative");
    }
    Mesh mesh = unit_square_initial_mesh();
    for (int l = 0; l < level; ++l) {
        mesh = refine_uniform(mesh, rule);
    }
    return mesh;
}

PointLocation locate_point(const Mesh& mesh, const Point& x)
{
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const Barycentric lambda = mesh.barycentric(t, x);
        if (lambda[0] >= -kLocateTolerance && lambda[1] >= -kLocateTolerance &&
            lambda[2] >= -kLocateTolerance) {
            return {t, lambda};
        }
    }
    std::ostringstream msg;
    msg << "locate_point: (" << x.x() << ", " << x.y() << ") lies outside the mesh";
    throw std::out_of_range(msg.str());
}

std::string check_mesh(const Mesh& mesh)
{
    std::ostringstream msg;
    const std::size_t nt = mesh.num_triangles();
    if (mesh.triangle_edges.size() != nt) {
        return "triangle_edges size mismatch";
    }
    for (std::size_t t = 0; t < nt; ++t) {
        if (!(mesh.signed_area(t) > 0.0)) {
            msg << "triangle " << t << " is not counter-clockwise";
            return msg.str();
        }
    }

    // incident (triangle, sign) pairs per edge
    std::vector<std::vector<int>> signs(mesh.num_edges());
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        for (std::size_t i = 0; i < 3; ++i) {
            const EdgeRef ref = mesh.triangle_edges[t][i];
            const std::size_t from = tri[(i + 1) % 3];
            const std::size_t to = tri[(i + 2) % 3];
            const auto& edge = mesh.edges[ref.index];
            if (edge[0] != std::min(from, to) || edge[1] != std::max(from, to) ||
                edge[0] >= edge[1]) {
                msg << "triangle " << t << " local edge " << i << " does not match edge table";
                return msg.str();
            }
            if (ref.sign != (from < to ? 1 : -1)) {
                msg << "triangle " << t << " local edge " << i << " has a wrong orientation sign";
                return msg.str();
            }
            signs[ref.index].push_back(ref.sign);
        }
    }
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const std::size_t count = signs[e].size();
        if (count == 1 && !mesh.boundary_edge[e]) {
            msg << "edge " << e << " has one neighbour but is not flagged as boundary";
            return msg.str();
        }
        if (count == 2 && (mesh.boundary_edge[e] || signs[e][0] != -signs[e][1])) {
            msg << "interior edge " << e << " has inconsistent flags or signs";
            return msg.str();
        }
        if (count != 1 && count != 2) {
            msg << "edge " << e << " is shared by " << count << " triangles";
            return msg.str();
        }
    }
    const auto v = static_cast<long long>(mesh.num_vertices());
    const auto e = static_cast<long long>(mesh.num_edges());
    const auto t = static_cast<long long>(nt);
    if (v - e + t != 1) {
        msg << "Euler characteristic V - E + T = " << (v - e + t) << ", expected 1";
        return msg.str();
    }
    return {};
}

void write_mesh(const Mesh& mesh, std::ostream& out)
{
    const auto old_precision = out.precision(17);
    out << mesh.num_vertices() << '\n';
    for (const Point& p : mesh.vertices) {
        out << p.x() << ' ' << p.y() << '\n';
    }
    for (const auto& tri : mesh.triangles) {
        out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    }
    out.precision(old_precision);
}

}  // namespace fosls
