#pragma once

#include "fosls/mesh.hpp"
#include "fosls/spaces.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fosls {

using Mat2 = Eigen::Matrix2d;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;
using MatrixField = std::function<Mat2(const Point&)>;

/// Diffusion A, convection beta and reaction gamma of
///   u' - div(A grad u) - beta . grad u + gamma u = f.
/// `div_beta` must be supplied analytically.
struct Coefficients {
    MatrixField A;
    VectorField beta;
    ScalarField div_beta;
    ScalarField gamma;

    static Coefficients constant(const Mat2& A, const Vec2& beta, double gamma);
    static Coefficients identity_diffusion(const Vec2& beta = Vec2::Zero(), double gamma = 0.0);
};

/// Coefficient values at one point, with the matrix square roots of A.
struct PointCoefficients {
    Mat2 A;
    Mat2 A_sqrt;
    Mat2 A_inv_sqrt;
    Vec2 beta;
    double div_beta = 0.0;
    double gamma = 0.0;
};

class CoefficientError : public std::runtime_error {
public:
    CoefficientError(const std::string& what, const Point& where)
        : std::runtime_error(what), point_(where)
    {
    }
    [[nodiscard]] const Point& point() const { return point_; }

private:
    Point point_;
};

/// Evaluates and validates the coefficients at x: A symmetric positive
/// definite and (1/2) div beta + gamma >= 0. Throws CoefficientError.
PointCoefficients evaluate_coefficients(const Coefficients& coeffs, const Point& x);

enum class Variant {
    /// sigma = A grad u, residual -div sigma - beta . grad u + gamma u
    Primary,
    /// sigma = A grad u - beta u, residual -div sigma + gamma u
    Alternative,
};

const char* to_string(Variant variant);
Variant parse_variant(const std::string& name);

/// Individual terms of the least-squares forms. With L the first-order
/// residual operator and G the constitutive residual of the chosen variant,
/// the matrix entry (i, j) of each term for trial function j and test i is
///   Mass:            <u_j, v_i>
///   Coupling:        <u_j, L v_i>
///   Residual:        <L u_j, v_i>
///   ResidualProduct: <L u_j, L v_i>
///   Constitutive:    <G u_j, G v_i>
enum class FormTerm { Mass, Coupling, Residual, ResidualProduct, Constitutive };

SparseMatrix assemble_term(const Mesh& mesh,
                           const DofMap& dofs,
                           const Coefficients& coeffs,
                           Variant variant,
                           FormTerm term);

/// (1/k) Mass + Coupling + Residual + k ResidualProduct + Constitutive.
SparseMatrix assemble_total_form(const Mesh& mesh,
                                 const DofMap& dofs,
                                 const Coefficients& coeffs,
                                 double k,
                                 Variant variant);

/// Coupling + Residual + k ResidualProduct + Constitutive (symmetric).
SparseMatrix assemble_symmetric_form(const Mesh& mesh,
                                     const DofMap& dofs,
                                     const Coefficients& coeffs,
                                     double k,
                                     Variant variant);

/// Residual + k ResidualProduct + Constitutive (non-symmetric for beta != 0).
SparseMatrix assemble_nonsymmetric_form(const Mesh& mesh,
                                        const DofMap& dofs,
                                        const Coefficients& coeffs,
                                        double k,
                                        Variant variant);

/// Load functional F(v) = < f + w/k, v + k L v > for a fixed time step.
/// The test-function values at the quadrature points are computed once, so
/// repeated assembly in a time loop only evaluates f and w. Holds references
/// to the mesh and DOF map.
class LoadAssembler {
public:
    LoadAssembler(const Mesh& mesh, const DofMap& dofs, const Coefficients& coeffs, double k, Variant variant);

    /// w given by u-coefficients (length n_u).
    [[nodiscard]] Vector assemble(const ScalarField& f, const Vector& w) const;
    [[nodiscard]] Vector assemble(const ScalarField& f, const ScalarField& w) const;

private:
    template <typename WAt>
    Vector assemble_impl(const ScalarField& f, WAt&& w_at) const;

    const Mesh* mesh_;
    const DofMap* dofs_;
    double k_;
    std::size_t nq_ = 0;
    std::vector<Point> points_;
    std::vector<double> weights_;
    std::vector<Barycentric> lambdas_;
    std::vector<std::array<double, 6>> tests_;
};

/// Load vector of F(v) = < f + w/k, v + k L v > for every basis function,
/// with w a discrete u-coefficient vector (length n_u).
Vector assemble_rhs(const Mesh& mesh,
                    const DofMap& dofs,
                    const Coefficients& coeffs,
                    double k,
                    const ScalarField& f,
                    const Vector& w,
                    Variant variant);

/// Same, with w given as a function.
Vector assemble_rhs(const Mesh& mesh,
                    const DofMap& dofs,
                    const Coefficients& coeffs,
                    double k,
                    const ScalarField& f,
                    const ScalarField& w,
                    Variant variant);

/// J(u; g, w) = k || (u - w)/k + L u - g ||^2 + || G u ||^2.
double evaluate_lsq_functional(const SystemState& state,
                               const Mesh& mesh,
                               const DofMap& dofs,
                               const Coefficients& coeffs,
                               double k,
                               const ScalarField& g,
                               const Vector& w,
                               Variant variant);

double evaluate_lsq_functional(const SystemState& state,
                               const Mesh& mesh,
                               const DofMap& dofs,
                               const Coefficients& coeffs,
                               double k,
                               const ScalarField& g,
                               const ScalarField& w,
                               Variant variant);

/// Residual operator L and constitutive residual G applied to point values.
double residual_operator(Variant variant, const PointCoefficients& c, double u, const Vec2& grad_u, double div_sigma);
Vec2 constitutive_residual(Variant variant, const PointCoefficients& c, double u, const Vec2& grad_u, const Vec2& sigma);

}  // namespace fosls
