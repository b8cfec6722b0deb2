#include "fosls/spaces.hpp"

#include "fosls/quadrature.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fosls {

DofMap build_dof_map(const Mesh& mesh)
{
    DofMap dofs;
    dofs.u_dof_of_vertex.assign(mesh.num_vertices(), DofMap::kNoDof);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.boundary_vertex[v]) {
            dofs.u_dof_of_vertex[v] = static_cast<std::ptrdiff_t>(dofs.n_u++);
        }
    }
    dofs.n_sigma = mesh.num_edges();
    dofs.sigma_dof_of_edge.resize(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        dofs.sigma_dof_of_edge[e] = dofs.n_u + e;
    }
    return dofs;
}

LocalBasisEval eval_local_basis(const Mesh& mesh, std::size_t triangle, const Barycentric& lambda)
{
    const double area = mesh.signed_area(triangle);
    if (!(area > 0.0)) {
        std::ostringstream msg;
        msg << "eval_local_basis: triangle " << triangle << " is degenerate (area " << area << ")";
        throw std::domain_error(msg.str());
    }
    std::array<Point, 3> p{mesh.vertex(triangle, 0), mesh.vertex(triangle, 1), mesh.vertex(triangle, 2)};
    const Point x = lambda[0] * p[0] + lambda[1] * p[1] + lambda[2] * p[2];

    LocalBasisEval eval;
    for (std::size_t i = 0; i < 3; ++i) {
        const Point& a = p[(i + 1) % 3];
        const Point& b = p[(i + 2) % 3];
        const Vec2 edge = b - a;
        // grad lambda_i is the inward normal of e_i scaled by |e_i| / (2|T|)
        eval.p1_values[i] = lambda[i];
        eval.p1_gradients[i] = Vec2(-edge.y(), edge.x()) / (2.0 * area);

        const EdgeRef ref = mesh.triangle_edges[triangle][i];
        const double scale = ref.sign * edge.norm() / (2.0 * area);
        eval.rt0_values[i] = scale * (x - p[i]);
        eval.rt0_divergences[i] = 2.0 * scale;
    }
    return eval;
}

FieldValue eval_on_triangle(const SystemState& state,
                            const Mesh& mesh,
                            const DofMap& dofs,
                            std::size_t triangle,
                            const LocalBasisEval& basis)
{
    FieldValue value;
    const auto& tri = mesh.triangles[triangle];
    for (std::size_t i = 0; i < 3; ++i) {
        const std::ptrdiff_t dof = dofs.u_dof_of_vertex[tri[i]];
        if (dof != DofMap::kNoDof && state.u.size() > 0) {
            const double c = state.u[dof];
            value.u += c * basis.p1_values[i];
            value.grad_u += c * basis.p1_gradients[i];
        }
        if (state.sigma.size() > 0) {
            const double c = state.sigma[static_cast<Eigen::Index>(mesh.triangle_edges[triangle][i].index)];
            value.sigma += c * basis.rt0_values[i];
            value.div_sigma += c * basis.rt0_divergences[i];
        }
    }
    return value;
}

FieldValue eval_on_triangle(const SystemState& state,
                            const Mesh& mesh,
                            const DofMap& dofs,
                            std::size_t triangle,
                            const Barycentric& lambda)
{
    return eval_on_triangle(state, mesh, dofs, triangle, eval_local_basis(mesh, triangle, lambda));
}

FieldValue eval_discrete_function(const SystemState& state,
                                  const Mesh& mesh,
                                  const DofMap& dofs,
                                  const Point& x)
{
    const PointLocation loc = locate_point(mesh, x);
    return eval_on_triangle(state, mesh, dofs, loc.triangle, loc.barycentric);
}

double l2_norm(const std::function<double(const Point&)>& field, const Mesh& mesh)
{
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double v = field(mesh.to_physical(t, rule.points[q]));
            sum += rule.weights[q] * jac * v * v;
        }
    }
    return std::sqrt(sum);
}

double l2_norm_u(const Vector& u, const Mesh& mesh, const DofMap& dofs)
{
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            double v = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                const std::ptrdiff_t dof = dofs.u_dof_of_vertex[mesh.triangles[t][i]];
                if (dof != DofMap::kNoDof) {
                    v += u[dof] * rule.points[q][i];
                }
            }
            sum += rule.weights[q] * jac * v * v;
        }
    }
    return std::sqrt(sum);
}

SystemState split_state(const Vector& coeffs, const DofMap& dofs, double time)
{
    if (static_cast<std::size_t>(coeffs.size()) != dofs.total()) {
        throw std::invalid_argument("split_state: coefficient vector has the wrong length");
    }
    const auto n_u = static_cast<Eigen::Index>(dofs.n_u);
    const auto n_sigma = static_cast<Eigen::Index>(dofs.n_sigma);
    return SystemState{coeffs.head(n_u), coeffs.tail(n_sigma), time};
}

Vector join_state(const SystemState& state, const DofMap& dofs)
{
    Vector coeffs = Vector::Zero(static_cast<Eigen::Index>(dofs.total()));
    if (state.u.size() > 0) {
        coeffs.head(static_cast<Eigen::Index>(dofs.n_u)) = state.u;
    }
    if (state.sigma.size() > 0) {
        coeffs.tail(static_cast<Eigen::Index>(dofs.n_sigma)) = state.sigma;
    }
    return coeffs;
}

}  // namespace fosls
