#include "fosls/projection.hpp"

#include "fosls/quadrature.hpp"

namespace fosls {

Vector nonsymmetric_form_load(const ExactFields& exact,
                              const Mesh& mesh,
                              const DofMap& dofs,
                              const Coefficients& coeffs,
                              double k,
                              Variant variant)
{
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    Vector load = Vector::Zero(static_cast<Eigen::Index>(dofs.total()));
    const Vec2 zero = Vec2::Zero();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        std::array<std::ptrdiff_t, 6> idx{};
        for (std::size_t i = 0; i < 3; ++i) {
            idx[i] = dofs.u_dof_of_vertex[mesh.triangles[t][i]];
            idx[3 + i] = static_cast<std::ptrdiff_t>(dofs.sigma_dof_of_edge[mesh.triangle_edges[t][i].index]);
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = mesh.to_physical(t, rule.points[q]);
            const PointCoefficients c = evaluate_coefficients(coeffs, x);
            const LocalBasisEval basis = eval_local_basis(mesh, t, rule.points[q]);
            const double w = rule.weights[q] * jac;

            const double u = exact.u(x);
            const Vec2 grad_u = exact.grad_u(x);
            const double lu = residual_operator(variant, c, u, grad_u, exact.div_sigma(x));
            const Vec2 gu = constitutive_residual(variant, c, u, grad_u, exact.sigma(x));

            for (std::size_t i = 0; i < 3; ++i) {
                if (idx[i] != DofMap::kNoDof) {
                    const double v = basis.p1_values[i];
                    const double lv = residual_operator(variant, c, v, basis.p1_gradients[i], 0.0);
                    const Vec2 gv = constitutive_residual(variant, c, v, basis.p1_gradients[i], zero);
                    load[idx[i]] += w * (lu * v + k * lu * lv + gu.dot(gv));
                }
                const double lt = residual_operator(variant, c, 0.0, zero, basis.rt0_divergences[i]);
                const Vec2 gt = constitutive_residual(variant, c, 0.0, zero, basis.rt0_values[i]);
                load[idx[3 + i]] += w * (k * lu * lt + gu.dot(gt));
            }
        }
    }
    return load;
}

ProjectionResult elliptic_project(const ExactFields& exact,
                                  const Mesh& mesh,
                                  const DofMap& dofs,
                                  const Coefficients& coeffs,
                                  double k,
                                  Variant variant,
                                  double tol)
{
    const SparseMatrix b = assemble_nonsymmetric_form(mesh, dofs, coeffs, k, variant);
    const Vector rhs = nonsymmetric_form_load(exact, mesh, dofs, coeffs, k, variant);
    const SolveReport report = solve_general(b, rhs, tol);
    return ProjectionResult{split_state(report.solution, dofs), k, report.relative_residual};
}

}  // namespace fosls
