#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace fosls {

using Point = Eigen::Vector2d;
using Barycentric = std::array<double, 3>;

/// Global edge seen from one triangle. `sign` is +1 when the counter-clockwise
/// traversal of the triangle runs along the edge from its low to its high
/// vertex index, -1 otherwise.
struct EdgeRef {
    std::size_t index = 0;
    int sign = 1;
};

enum class RefinementRule {
    /// Two bisections per element, refinement edge opposite the newest vertex.
    NewestVertexBisection,
    /// Midpoint quadrisection ("red" refinement).
    Quadrisection,
};

/// Conforming triangulation of a polygonal domain.
///
/// Triangles are stored counter-clockwise with local vertex 0 as the newest
/// vertex. Local edge i is the edge opposite local vertex i. Edges are stored
/// as (low, high) vertex pairs, which also fixes their global orientation.
/// Meshes are treated as immutable values; refinement returns a new mesh.
struct Mesh {
    std::vector<Point> vertices;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<std::array<std::size_t, 2>> edges;
    std::vector<std::array<EdgeRef, 3>> triangle_edges;
    std::vector<bool> boundary_vertex;
    std::vector<bool> boundary_edge;
    /// Index of the father triangle on the previous level; empty at level 0.
    std::vector<std::size_t> parent;
    int level = 0;

    [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
    [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }
    [[nodiscard]] std::size_t num_edges() const { return edges.size(); }

    [[nodiscard]] Point vertex(std::size_t t, int local) const
    {
        return vertices[triangles[t][static_cast<std::size_t>(local)]];
    }

    /// Signed area; positive for counter-clockwise triangles.
    [[nodiscard]] double signed_area(std::size_t t) const;
    [[nodiscard]] double area(std::size_t t) const { return signed_area(t); }
    [[nodiscard]] double diameter(std::size_t t) const;
    [[nodiscard]] double max_diameter() const;
    [[nodiscard]] double edge_length(std::size_t e) const;

    [[nodiscard]] Point to_physical(std::size_t t, const Barycentric& lambda) const;
    [[nodiscard]] Barycentric barycentric(std::size_t t, const Point& x) const;
};

/// Builds edges, orientation signs and boundary flags from vertices and
/// counter-clockwise triangles. Edges are numbered in order of first
/// appearance while sweeping triangles and their local edges.
Mesh build_mesh(std::vector<Point> vertices,
                std::vector<std::array<std::size_t, 3>> triangles,
                int level = 0,
                std::vector<std::size_t> parent = {});

/// The unit square split into four triangles that share the center (0.5, 0.5).
/// Vertices: 0 (0,0), 1 (1,0), 2 (1,1), 3 (0,1), 4 (0.5,0.5); the center is
/// the newest vertex of every triangle.
Mesh unit_square_initial_mesh();

/// Uniform refinement: every triangle is replaced by four sons of half its
/// diameter. Parent vertices keep their indices and the midpoint of edge e
/// becomes vertex `num_vertices() + e`.
Mesh refine_uniform(const Mesh& mesh,
                    RefinementRule rule = RefinementRule::NewestVertexBisection);

/// The initial mesh refined `level` times.
Mesh unit_square_mesh(int level,
                      RefinementRule rule = RefinementRule::NewestVertexBisection);

struct PointLocation {
    std::size_t triangle = 0;
    Barycentric barycentric{};
};

inline constexpr double kLocateTolerance = 1e-12;

/// Finds a triangle containing `x` (first match in triangle order).
/// Throws std::out_of_range if `x` lies outside the mesh.
PointLocation locate_point(const Mesh& mesh, const Point& x);

/// Structural self-check; returns an empty string when every invariant holds,
/// otherwise a description of the first violation.
std::string check_mesh(const Mesh& mesh);

/// Plain-text dump: a vertex-count line, one `x y` line per vertex, then one
/// `i j k` line per triangle (0-based).
void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace fosls
