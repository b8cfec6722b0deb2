#pragma once

#include "fosls/forms.hpp"
#include "fosls/solver.hpp"

namespace fosls {

/// Pointwise data of a pair (u, sigma) with its derivatives.
struct ExactFields {
    ScalarField u;
    VectorField grad_u;
    VectorField sigma;
    ScalarField div_sigma;
};

struct ProjectionResult {
    SystemState state;
    double k = 0.0;
    double relative_residual = 0.0;
};

/// Right-hand side b(u, v_i) for every basis function v_i of U_h, integrated
/// with the exact fields.
Vector nonsymmetric_form_load(const ExactFields& exact,
                              const Mesh& mesh,
                              const DofMap& dofs,
                              const Coefficients& coeffs,
                              double k,
                              Variant variant);

/// Elliptic projection E_h u in U_h, defined by b(E_h u, v_h) = b(u, v_h) for
/// all v_h, where b is the non-symmetric spatial form with time step k.
ProjectionResult elliptic_project(const ExactFields& exact,
                                  const Mesh& mesh,
                                  const DofMap& dofs,
                                  const Coefficients& coeffs,
                                  double k,
                                  Variant variant,
                                  double tol = kDefaultSolverTolerance);

}  // namespace fosls
