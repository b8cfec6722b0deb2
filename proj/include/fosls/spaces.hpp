#pragma once

#include "fosls/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace fosls {

using Vector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

/// Global numbering of the lowest-order pair S_0^1 x RT^0.
///
/// u-DOFs live on interior vertices and occupy [0, n_u); boundary vertices
/// carry none (homogeneous Dirichlet data). Every edge carries one sigma-DOF,
/// numbered n_u + edge index.
struct DofMap {
    static constexpr std::ptrdiff_t kNoDof = -1;

    std::vector<std::ptrdiff_t> u_dof_of_vertex;
    std::vector<std::size_t> sigma_dof_of_edge;
    std::size_t n_u = 0;
    std::size_t n_sigma = 0;

    [[nodiscard]] std::size_t total() const { return n_u + n_sigma; }
};

DofMap build_dof_map(const Mesh& mesh);

/// Local shape functions of one triangle at one point.
///
/// The RT^0 function of local edge i (opposite vertex p_i) is
///   phi_i(x) = s_i |e_i| / (2|T|) (x - p_i),   div phi_i = s_i |e_i| / |T|,
/// so its normal component is s_i on e_i and zero on the other two edges.
struct LocalBasisEval {
    std::array<double, 3> p1_values{};
    std::array<Vec2, 3> p1_gradients{};
    std::array<Vec2, 3> rt0_values{};
    std::array<double, 3> rt0_divergences{};
};

/// Throws std::domain_error for degenerate (non-positive area) triangles.
LocalBasisEval eval_local_basis(const Mesh& mesh, std::size_t triangle, const Barycentric& lambda);

/// Coefficient vectors of (u_h, sigma_h) at one time level. `sigma` may be
/// empty when only the scalar part is tracked.
struct SystemState {
    Vector u;
    Vector sigma;
    double time = 0.0;
};

struct FieldValue {
    double u = 0.0;
    Vec2 grad_u = Vec2::Zero();
    Vec2 sigma = Vec2::Zero();
    double div_sigma = 0.0;
};

/// Evaluates the discrete fields inside a known triangle. An empty sigma vector
/// is treated as zero.
FieldValue eval_on_triangle(const SystemState& state,
                            const Mesh& mesh,
                            const DofMap& dofs,
                            std::size_t triangle,
                            const Barycentric& lambda);

FieldValue eval_on_triangle(const SystemState& state,
                            const Mesh& mesh,
                            const DofMap& dofs,
                            std::size_t triangle,
                            const LocalBasisEval& basis);

/// Point evaluation; throws std::out_of_range outside the domain.
FieldValue eval_discrete_function(const SystemState& state,
                                  const Mesh& mesh,
                                  const DofMap& dofs,
                                  const Point& x);

/// L2 norms by the error-integration quadrature rule.
double l2_norm(const std::function<double(const Point&)>& field, const Mesh& mesh);
double l2_norm_u(const Vector& u, const Mesh& mesh, const DofMap& dofs);

/// Splits a stacked (u, sigma) coefficient vector.
SystemState split_state(const Vector& coeffs, const DofMap& dofs, double time = 0.0);
Vector join_state(const SystemState& state, const DofMap& dofs);

}  // namespace fosls
