#pragma once

#include "fosls/forms.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <string>

namespace fosls {

inline constexpr double kDefaultSolverTolerance = 1e-10;

enum class SolveMethod { Cholesky, LU };

struct SolveReport {
    Vector solution;
    /// ||b - M x|| / ||b|| (zero for b = 0)
    double relative_residual = 0.0;
    /// iterative-refinement sweeps after the direct solve
    int iterations = 0;
    SolveMethod method = SolveMethod::Cholesky;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual_(best_residual)
    {
    }
    [[nodiscard]] double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

/// Sparse direct factorization that can be applied to many right-hand sides.
/// Applies are const and may run concurrently.
class Factorization {
public:
    /// Cholesky (LL^T) of a symmetric positive definite matrix; throws
    /// SolverError if the matrix is not numerically SPD.
    static Factorization spd(const SparseMatrix& matrix);
    /// LU with partial pivoting; throws SolverError if singular.
    static Factorization general(const SparseMatrix& matrix);

    [[nodiscard]] Vector apply(const Vector& rhs) const;

    /// apply() followed by residual-driven iterative refinement; throws
    /// SolverError when `tol` cannot be met.
    [[nodiscard]] SolveReport solve(const Vector& rhs, double tol = kDefaultSolverTolerance) const;

    [[nodiscard]] SolveMethod method() const { return method_; }
    [[nodiscard]] Eigen::Index size() const { return matrix_->rows(); }

private:
    using ColMatrix = Eigen::SparseMatrix<double>;
    using Cholesky = Eigen::SimplicialLLT<ColMatrix>;
    using LU = Eigen::SparseLU<ColMatrix>;

    Factorization() = default;

    SolveMethod method_ = SolveMethod::Cholesky;
    std::shared_ptr<const ColMatrix> matrix_;
    std::shared_ptr<const Cholesky> cholesky_;
    std::shared_ptr<const LU> lu_;
};

inline Factorization factorize_reusable(const SparseMatrix& matrix, SolveMethod method = SolveMethod::Cholesky)
{
    return method == SolveMethod::Cholesky ? Factorization::spd(matrix) : Factorization::general(matrix);
}

SolveReport solve_spd(const SparseMatrix& matrix, const Vector& rhs, double tol = kDefaultSolverTolerance);
SolveReport solve_general(const SparseMatrix& matrix, const Vector& rhs, double tol = kDefaultSolverTolerance);

}  // namespace fosls
