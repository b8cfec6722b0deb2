#include "fosls/forms.hpp"

#include "fosls/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <vector>

namespace fosls {

namespace {

constexpr double kCoefficientTolerance = 1e-12;

// Values of the six local functions (three P1 hats, three RT0 fields) that
// enter a form at one quadrature point.
struct LocalShape {
    std::array<double, 6> value{};  // u-part
    std::array<double, 6> residual{};  // L applied to the function
    std::array<Vec2, 6> constitutive{};  // G applied to the function
};

LocalShape local_shape(Variant variant, const PointCoefficients& c, const LocalBasisEval& basis)
{
    LocalShape shape;
    const Vec2 zero = Vec2::Zero();
    for (std::size_t i = 0; i < 3; ++i) {
        shape.value[i] = basis.p1_values[i];
        shape.residual[i] = residual_operator(variant, c, basis.p1_values[i], basis.p1_gradients[i], 0.0);
        shape.constitutive[i] = constitutive_residual(variant, c, basis.p1_values[i], basis.p1_gradients[i], zero);

        shape.value[3 + i] = 0.0;
        shape.residual[3 + i] = residual_operator(variant, c, 0.0, zero, basis.rt0_divergences[i]);
        shape.constitutive[3 + i] = constitutive_residual(variant, c, 0.0, zero, basis.rt0_values[i]);
    }
    return shape;
}

// Global index of each local function, -1 for constrained hats.
std::array<std::ptrdiff_t, 6> local_dofs(const Mesh& mesh, const DofMap& dofs, std::size_t t)
{
    std::array<std::ptrdiff_t, 6> idx{};
    for (std::size_t i = 0; i < 3; ++i) {
        idx[i] = dofs.u_dof_of_vertex[mesh.triangles[t][i]];
        idx[3 + i] = static_cast<std::ptrdiff_t>(dofs.sigma_dof_of_edge[mesh.triangle_edges[t][i].index]);
    }
    return idx;
}

double term_integrand(FormTerm term, const LocalShape& s, std::size_t trial, std::size_t test)
{
    switch (term) {
    case FormTerm::Mass:
        return s.value[trial] * s.value[test];
    case FormTerm::Coupling:
        return s.value[trial] * s.residual[test];
    case FormTerm::Residual:
        return s.residual[trial] * s.value[test];
    case FormTerm::ResidualProduct:
        return s.residual[trial] * s.residual[test];
    case FormTerm::Constitutive:
        return s.constitutive[trial].dot(s.constitutive[test]);
    }
    return 0.0;
}

SparseMatrix from_triplets(std::size_t n, const std::vector<Eigen::Triplet<double>>& triplets)
{
    SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

double discrete_u(const Mesh& mesh, const DofMap& dofs, const Vector& w, std::size_t t, const Barycentric& lambda)
{
    double value = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::ptrdiff_t dof = dofs.u_dof_of_vertex[mesh.triangles[t][i]];
        if (dof != DofMap::kNoDof) {
            value += w[dof] * lambda[i];
        }
    }
    return value;
}

template <typename WAt>
double lsq_functional(const SystemState& state,
                      const Mesh& mesh,
                      const DofMap& dofs,
                      const Coefficients& coeffs,
                      double k,
                      const ScalarField& g,
                      WAt&& w_at,
                      Variant variant)
{
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    double residual_sq = 0.0;
    double constitutive_sq = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = mesh.to_physical(t, rule.points[q]);
            const PointCoefficients c = evaluate_coefficients(coeffs, x);
            const FieldValue v = eval_on_triangle(state, mesh, dofs, t, rule.points[q]);
            const double w = w_at(t, rule.points[q], x);
            const double r = (v.u - w) / k + residual_operator(variant, c, v.u, v.grad_u, v.div_sigma) - g(x);
            const Vec2 s = constitutive_residual(variant, c, v.u, v.grad_u, v.sigma);
            residual_sq += rule.weights[q] * jac * r * r;
            constitutive_sq += rule.weights[q] * jac * s.squaredNorm();
        }
    }
    return k * residual_sq + constitutive_sq;
}

}  // namespace

LoadAssembler::LoadAssembler(const Mesh& mesh, const DofMap& dofs, const Coefficients& coeffs, double k, Variant variant)
    : mesh_(&mesh), dofs_(&dofs), k_(k)
{
    if (!(k > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    nq_ = rule.size();
    const std::size_t n = mesh.num_triangles() * nq_;
    points_.resize(n);
    weights_.resize(n);
    lambdas_.resize(n);
    tests_.resize(n);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (std::size_t q = 0; q < nq_; ++q) {
            const std::size_t at = t * nq_ + q;
            const LocalBasisEval basis = eval_local_basis(mesh, t, rule.points[q]);
            const Point x = mesh.to_physical(t, rule.points[q]);
            const LocalShape shape = local_shape(variant, evaluate_coefficients(coeffs, x), basis);
            points_[at] = x;
            weights_[at] = rule.weights[q] * jac;
            lambdas_[at] = rule.points[q];
            for (std::size_t i = 0; i < 6; ++i) {
                tests_[at][i] = shape.value[i] + k * shape.residual[i];
            }
        }
    }
}

template <typename WAt>
Vector LoadAssembler::assemble_impl(const ScalarField& f, WAt&& w_at) const
{
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(dofs_->total()));
    for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
        const auto idx = local_dofs(*mesh_, *dofs_, t);
        for (std::size_t q = 0; q < nq_; ++q) {
            const std::size_t at = t * nq_ + q;
            const double data = f(points_[at]) + w_at(t, at) / k_;
            for (std::size_t i = 0; i < 6; ++i) {
                if (idx[i] != DofMap::kNoDof) {
                    rhs[idx[i]] += weights_[at] * data * tests_[at][i];
                }
            }
        }
    }
    return rhs;
}

Vector LoadAssembler::assemble(const ScalarField& f, const Vector& w) const
{
    if (static_cast<std::size_t>(w.size()) != dofs_->n_u) {
        throw std::invalid_argument("assemble_rhs: w must have one entry per u-DOF");
    }
    return assemble_impl(f, [&](std::size_t t, std::size_t at) {
        return discrete_u(*mesh_, *dofs_, w, t, lambdas_[at]);
    });
}

Vector LoadAssembler::assemble(const ScalarField& f, const ScalarField& w) const
{
    return assemble_impl(f, [&](std::size_t, std::size_t at) { return w(points_[at]); });
}

Coefficients Coefficients::constant(const Mat2& A, const Vec2& beta, double gamma)
{
    return Coefficients{
        [A](const Point&) { return A; },
        [beta](const Point&) { return beta; },
        [](const Point&) { return 0.0; },
        [gamma](const Point&) { return gamma; },
    };
}

Coefficients Coefficients::identity_diffusion(const Vec2& beta, double gamma)
{
    return constant(Mat2::Identity(), beta, gamma);
}

PointCoefficients evaluate_coefficients(const Coefficients& coeffs, const Point& x)
{
    PointCoefficients c;
    c.A = coeffs.A(x);
    c.beta = coeffs.beta(x);
    c.div_beta = coeffs.div_beta(x);
    c.gamma = coeffs.gamma(x);

    const auto fail = [&x](const std::string& what) {
        std::ostringstream msg;
        msg << what << " at (" << x.x() << ", " << x.y() << ")";
        throw CoefficientError(msg.str(), x);
    };
    if (!c.A.allFinite() || !c.beta.allFinite() || !std::isfinite(c.div_beta) || !std::isfinite(c.gamma)) {
        fail("non-finite coefficient");
    }
    if (std::abs(c.A(0, 1) - c.A(1, 0)) > kCoefficientTolerance * c.A.cwiseAbs().maxCoeff()) {
        fail("diffusion matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat2> eig;
    eig.computeDirect(c.A);
    const Vec2 lambda = eig.eigenvalues();
    if (!(lambda.minCoeff() > 0.0)) {
        fail("diffusion matrix is not positive definite");
    }
    if (0.5 * c.div_beta + c.gamma < -kCoefficientTolerance) {
        fail("(1/2) div beta + gamma is negative");
    }
    const Mat2& v = eig.eigenvectors();
    c.A_sqrt = v * lambda.cwiseSqrt().asDiagonal() * v.transpose();
    c.A_inv_sqrt = v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    return c;
}

const char* to_string(Variant variant)
{
    return variant == Variant::Primary ? "primary" : "alternative";
}

Variant parse_variant(const std::string& name)
{
    if (name == "primary") {
        return Variant::Primary;
    }
    if (name == "alternative" || name == "alt") {
        return Variant::Alternative;
    }
    throw std::invalid_argument("unknown variant '" + name + "' (expected primary or alternative)");
}

double residual_operator(Variant variant, const PointCoefficients& c, double u, const Vec2& grad_u, double div_sigma)
{
    if (variant == Variant::Primary) {
        return -div_sigma - c.beta.dot(grad_u) + c.gamma * u;
    }
    return -div_sigma + c.gamma * u;
}

Vec2 constitutive_residual(Variant variant, const PointCoefficients& c, double u, const Vec2& grad_u, const Vec2& sigma)
{
    if (variant == Variant::Primary) {
        return c.A_sqrt * grad_u - c.A_inv_sqrt * sigma;
    }
    return c.A_inv_sqrt * sigma - c.A_sqrt * grad_u + c.A_inv_sqrt * (c.beta * u);
}

SparseMatrix assemble_term(const Mesh& mesh,
                           const DofMap& dofs,
                           const Coefficients& coeffs,
                           Variant variant,
                           FormTerm term)
{
    const QuadratureRule& rule = triangle_rule(kAssemblyDegree);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.num_triangles() * 36);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        std::array<std::array<double, 6>, 6> local{};
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const LocalBasisEval basis = eval_local_basis(mesh, t, rule.points[q]);
            const PointCoefficients c = evaluate_coefficients(coeffs, mesh.to_physical(t, rule.points[q]));
            const LocalShape shape = local_shape(variant, c, basis);
            const double w = rule.weights[q] * jac;
            for (std::size_t i = 0; i < 6; ++i) {
                for (std::size_t j = 0; j < 6; ++j) {
                    local[i][j] += w * term_integrand(term, shape, j, i);
                }
            }
        }
        const auto idx = local_dofs(mesh, dofs, t);
        for (std::size_t i = 0; i < 6; ++i) {
            if (idx[i] == DofMap::kNoDof) {
                continue;
            }
            for (std::size_t j = 0; j < 6; ++j) {
                if (idx[j] != DofMap::kNoDof) {
                    triplets.emplace_back(idx[i], idx[j], local[i][j]);
                }
            }
        }
    }
    return from_triplets(dofs.total(), triplets);
}

SparseMatrix assemble_nonsymmetric_form(const Mesh& mesh,
                                        const DofMap& dofs,
                                        const Coefficients& coeffs,
                                        double k,
                                        Variant variant)
{
    if (!(k > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
    SparseMatrix b = assemble_term(mesh, dofs, coeffs, variant, FormTerm::Residual);
    b += k * assemble_term(mesh, dofs, coeffs, variant, FormTerm::ResidualProduct);
    b += assemble_term(mesh, dofs, coeffs, variant, FormTerm::Constitutive);
    return b;
}

SparseMatrix assemble_symmetric_form(const Mesh& mesh,
                                     const DofMap& dofs,
                                     const Coefficients& coeffs,
                                     double k,
                                     Variant variant)
{
    SparseMatrix a = assemble_nonsymmetric_form(mesh, dofs, coeffs, k, variant);
    a += assemble_term(mesh, dofs, coeffs, variant, FormTerm::Coupling);
    return a;
}

SparseMatrix assemble_total_form(const Mesh& mesh,
                                 const DofMap& dofs,
                                 const Coefficients& coeffs,
                                 double k,
                                 Variant variant)
{
    SparseMatrix total = assemble_symmetric_form(mesh, dofs, coeffs, k, variant);
    total += (1.0 / k) * assemble_term(mesh, dofs, coeffs, variant, FormTerm::Mass);
    return total;
}

Vector assemble_rhs(const Mesh& mesh,
                    const DofMap& dofs,
                    const Coefficients& coeffs,
                    double k,
                    const ScalarField& f,
                    const Vector& w,
                    Variant variant)
{
    return LoadAssembler(mesh, dofs, coeffs, k, variant).assemble(f, w);
}

Vector assemble_rhs(const Mesh& mesh,
                    const DofMap& dofs,
                    const Coefficients& coeffs,
                    double k,
                    const ScalarField& f,
                    const ScalarField& w,
                    Variant variant)
{
    return LoadAssembler(mesh, dofs, coeffs, k, variant).assemble(f, w);
}

double evaluate_lsq_functional(const SystemState& state,
                               const Mesh& mesh,
                               const DofMap& dofs,
                               const Coefficients& coeffs,
                               double k,
                               const ScalarField& g,
                               const Vector& w,
                               Variant variant)
{
    return lsq_functional(state, mesh, dofs, coeffs, k, g,
                          [&](std::size_t t, const Barycentric& lambda, const Point&) {
                              return discrete_u(mesh, dofs, w, t, lambda);
                          },
                          variant);
}

double evaluate_lsq_functional(const SystemState& state,
                               const Mesh& mesh,
                               const DofMap& dofs,
                               const Coefficients& coeffs,
                               double k,
                               const ScalarField& g,
                               const ScalarField& w,
                               Variant variant)
{
    return lsq_functional(state, mesh, dofs, coeffs, k, g,
                          [&](std::size_t, const Barycentric&, const Point& x) { return w(x); },
                          variant);
}

}  // namespace fosls
