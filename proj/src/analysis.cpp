#include "fosls/analysis.hpp"

#include "fosls/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace fosls {

ExactFields ManufacturedProblem::at(double t) const
{
    return ExactFields{
        [u = u, t](const Point& x) { return u(t, x); },
        [g = grad_u, t](const Point& x) { return g(t, x); },
        [s = sigma, t](const Point& x) { return s(t, x); },
        [d = div_sigma, t](const Point& x) { return d(t, x); },
    };
}

ManufacturedProblem manufacture(std::string name,
                                Variant variant,
                                const Mat2& A,
                                const Vec2& beta,
                                double gamma,
                                const SmoothSolution& solution)
{
    ManufacturedProblem p;
    p.name = std::move(name);
    p.variant = variant;
    p.coeffs = Coefficients::constant(A, beta, gamma);
    p.u = solution.u;
    p.du_dt = solution.du_dt;
    p.grad_u = solution.grad_u;
    p.laplace_u = [h = solution.hessian_u](double t, const Point& x) { return h(t, x).trace(); };

    // div(A grad u) for constant A
    const auto div_a_grad = [A, h = solution.hessian_u](double t, const Point& x) {
        return (A * h(t, x)).trace();
    };
    if (variant == Variant::Primary) {
        p.sigma = [A, g = solution.grad_u](double t, const Point& x) -> Vec2 { return A * g(t, x); };
        p.div_sigma = div_a_grad;
        p.f = [=, u = solution.u, ut = solution.du_dt, g = solution.grad_u](double t, const Point& x) {
            return ut(t, x) - div_a_grad(t, x) - beta.dot(g(t, x)) + gamma * u(t, x);
        };
    } else {
        p.sigma = [A, beta, u = solution.u, g = solution.grad_u](double t, const Point& x) -> Vec2 {
            return A * g(t, x) - beta * u(t, x);
        };
        p.div_sigma = [=, g = solution.grad_u](double t, const Point& x) {
            return div_a_grad(t, x) - beta.dot(g(t, x));
        };
        p.f = [=, u = solution.u, ut = solution.du_dt, g = solution.grad_u](double t, const Point& x) {
            return ut(t, x) - (div_a_grad(t, x) - beta.dot(g(t, x))) + gamma * u(t, x);
        };
    }
    return p;
}

ManufacturedProblem model_problem(Variant variant)
{
    using std::numbers::pi;
    const double decay = 2.0 * pi * pi;
    SmoothSolution s;
    s.u = [=](double t, const Point& x) {
        return std::exp(-decay * t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
    };
    s.du_dt = [=](double t, const Point& x) {
        return -decay * std::exp(-decay * t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
    };
    s.grad_u = [=](double t, const Point& x) -> Vec2 {
        const double e = std::exp(-decay * t);
        return {e * pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                e * pi * std::sin(pi * x.x()) * std::cos(pi * x.y())};
    };
    s.hessian_u = [=](double t, const Point& x) -> Mat2 {
        const double e = std::exp(-decay * t) * pi * pi;
        const double sx = std::sin(pi * x.x());
        const double sy = std::sin(pi * x.y());
        const double cx = std::cos(pi * x.x());
        const double cy = std::cos(pi * x.y());
        Mat2 h;
        h << -e * sx * sy, e * cx * cy, e * cx * cy, -e * sx * sy;
        return h;
    };
    const std::string name = variant == Variant::Primary ? "sine-primary" : "sine-alternative";
    return manufacture(name, variant, Mat2::Identity(), Vec2(1.0, 1.0), 0.0, s);
}

ManufacturedProblem pure_diffusion_problem()
{
    SmoothSolution s;
    s.u = [](double t, const Point& x) {
        return (1.0 + t) * 16.0 * x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y());
    };
    s.du_dt = [](double, const Point& x) {
        return 16.0 * x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y());
    };
    s.grad_u = [](double t, const Point& x) -> Vec2 {
        const double c = (1.0 + t) * 16.0;
        return {c * (1.0 - 2.0 * x.x()) * x.y() * (1.0 - x.y()),
                c * x.x() * (1.0 - x.x()) * (1.0 - 2.0 * x.y())};
    };
    s.hessian_u = [](double t, const Point& x) -> Mat2 {
        const double c = (1.0 + t) * 16.0;
        Mat2 h;
        const double xy = c * (1.0 - 2.0 * x.x()) * (1.0 - 2.0 * x.y());
        h << -2.0 * c * x.y() * (1.0 - x.y()), xy, xy, -2.0 * c * x.x() * (1.0 - x.x());
        return h;
    };
    return manufacture("pure-diffusion", Variant::Primary, Mat2::Identity(), Vec2::Zero(), 0.0, s);
}

FieldErrors compute_field_errors(const SystemState& state,
                                 const ExactFields& exact,
                                 const Mesh& mesh,
                                 const DofMap& dofs)
{
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    FieldErrors sq;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = mesh.to_physical(t, rule.points[q]);
            const FieldValue v = eval_on_triangle(state, mesh, dofs, t, rule.points[q]);
            const double w = rule.weights[q] * jac;
            sq.u += w * std::pow(exact.u(x) - v.u, 2);
            sq.grad_u += w * (exact.grad_u(x) - v.grad_u).squaredNorm();
            sq.sigma += w * (exact.sigma(x) - v.sigma).squaredNorm();
            sq.div_sigma += w * std::pow(exact.div_sigma(x) - v.div_sigma, 2);
        }
    }
    return FieldErrors{std::sqrt(sq.u), std::sqrt(sq.grad_u), std::sqrt(sq.sigma), std::sqrt(sq.div_sigma)};
}

double natural_norm(const FieldErrors& errors, double k)
{
    return std::sqrt(errors.grad_u * errors.grad_u + errors.sigma * errors.sigma +
                     k * errors.div_sigma * errors.div_sigma);
}

const char* to_string(Quantity quantity)
{
    switch (quantity) {
    case Quantity::ErrU:
        return "err_u";
    case Quantity::ErrGradU:
        return "err_grad_u";
    case Quantity::ErrSigma:
        return "err_sigma";
    case Quantity::ErrDivSigma:
        return "err_div_sigma";
    case Quantity::NaturalNorm:
        return "natural_norm";
    }
    return "?";
}

double ErrorReport::value(Quantity quantity) const
{
    switch (quantity) {
    case Quantity::ErrU:
        return err_u;
    case Quantity::ErrGradU:
        return err_grad_u;
    case Quantity::ErrSigma:
        return err_sigma;
    case Quantity::ErrDivSigma:
        return err_div_sigma;
    case Quantity::NaturalNorm:
        return natural_norm;
    }
    return 0.0;
}

ErrorReport compute_errors(const SystemState& final_state,
                           const ManufacturedProblem& problem,
                           const Mesh& mesh,
                           const DofMap& dofs,
                           double k,
                           double final_time)
{
    const FieldErrors e = compute_field_errors(final_state, problem.at(final_time), mesh, dofs);
    ErrorReport r;
    r.level = mesh.level;
    r.h = mesh.max_diameter();
    r.k = k;
    r.dofs = dofs.total();
    r.err_u = e.u;
    r.err_grad_u = e.grad_u;
    r.err_sigma = e.sigma;
    r.err_div_sigma = e.div_sigma;
    r.natural_norm = natural_norm(e, k);
    return r;
}

std::vector<std::optional<double>> observed_rates(std::span<const double> errors)
{
    std::vector<std::optional<double>> slopes;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        if (errors[i] > 0.0 && errors[i - 1] > 0.0) {
            slopes.emplace_back(std::log2(errors[i - 1] / errors[i]));
        } else {
            slopes.emplace_back(std::nullopt);
        }
    }
    return slopes;
}

std::vector<RateRow> observed_rates(const std::vector<ErrorReport>& reports)
{
    std::vector<RateRow> rows;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        RateRow row;
        row.level = reports[i].level;
        for (Quantity q : kAllQuantities) {
            const std::array<double, 2> pair{reports[i - 1].value(q), reports[i].value(q)};
            row.slopes[static_cast<std::size_t>(q)] = observed_rates(pair).front();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fosls
