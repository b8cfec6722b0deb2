#pragma once

#include "fosls/evolution.hpp"
#include "fosls/forms.hpp"
#include "fosls/projection.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fosls {

using SpaceTimeVector = std::function<Vec2(double, const Point&)>;
using SpaceTimeMatrix = std::function<Mat2(double, const Point&)>;

/// Exact solution of a parabolic model problem together with the flux and
/// source term that make it a solution for the chosen first-order system.
struct ManufacturedProblem {
    std::string name;
    Variant variant = Variant::Primary;
    Coefficients coeffs;
    SpaceTimeField u;
    SpaceTimeField du_dt;
    SpaceTimeVector grad_u;
    SpaceTimeField laplace_u;
    SpaceTimeVector sigma;
    SpaceTimeField div_sigma;
    SpaceTimeField f;

    /// Spatial fields at time t.
    [[nodiscard]] ExactFields at(double t) const;
};

/// A smooth u(t, x) with analytic derivatives.
struct SmoothSolution {
    SpaceTimeField u;
    SpaceTimeField du_dt;
    SpaceTimeVector grad_u;
    SpaceTimeMatrix hessian_u;
};

/// Builds sigma, div sigma and f for constant coefficients A, beta, gamma.
ManufacturedProblem manufacture(std::string name,
                                Variant variant,
                                const Mat2& A,
                                const Vec2& beta,
                                double gamma,
                                const SmoothSolution& solution);

/// u = exp(-2 pi^2 t) sin(pi x) sin(pi y) on the unit square with A = I,
/// beta = (1, 1), gamma = 0.
ManufacturedProblem model_problem(Variant variant);

/// Pure diffusion (A = I, beta = 0, gamma = 0) with the polynomial solution
/// u = (1 + t) 16 x(1-x) y(1-y) and hence a non-zero source.
ManufacturedProblem pure_diffusion_problem();

/// L2 errors of the discrete fields against exact ones.
struct FieldErrors {
    double u = 0.0;
    double grad_u = 0.0;
    double sigma = 0.0;
    double div_sigma = 0.0;
};

FieldErrors compute_field_errors(const SystemState& state,
                                 const ExactFields& exact,
                                 const Mesh& mesh,
                                 const DofMap& dofs);

/// (||grad e_u||^2 + ||e_sigma||^2 + k ||div e_sigma||^2)^(1/2)
double natural_norm(const FieldErrors& errors, double k);

enum class Quantity { ErrU, ErrGradU, ErrSigma, ErrDivSigma, NaturalNorm };
inline constexpr std::array<Quantity, 5> kAllQuantities{
    Quantity::ErrU, Quantity::ErrGradU, Quantity::ErrSigma, Quantity::ErrDivSigma, Quantity::NaturalNorm};

const char* to_string(Quantity quantity);

struct ErrorReport {
    int level = 0;
    double h = 0.0;
    double k = 0.0;
    std::size_t dofs = 0;
    double err_u = 0.0;
    double err_grad_u = 0.0;
    double err_sigma = 0.0;
    double err_div_sigma = 0.0;
    double natural_norm = 0.0;

    [[nodiscard]] double value(Quantity quantity) const;
};

/// Errors at the final time T of a run on `mesh` with time step k. The
/// degrees of freedom count all of U_h (n_u + n_sigma).
ErrorReport compute_errors(const SystemState& final_state,
                           const ManufacturedProblem& problem,
                           const Mesh& mesh,
                           const DofMap& dofs,
                           double k,
                           double final_time);

/// slope_L = log2(err_{L-1} / err_L); empty where an error is zero.
std::vector<std::optional<double>> observed_rates(std::span<const double> errors);

struct RateRow {
    int level = 0;
    std::array<std::optional<double>, 5> slopes{};

    [[nodiscard]] std::optional<double> slope(Quantity quantity) const
    {
        return slopes[static_cast<std::size_t>(quantity)];
    }
};

/// One row per consecutive pair of reports (labelled with the finer level).
std::vector<RateRow> observed_rates(const std::vector<ErrorReport>& reports);

}  // namespace fosls
