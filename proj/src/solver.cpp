#include "fosls/solver.hpp"

#include <limits>
#include <sstream>

namespace fosls {

namespace {

constexpr int kMaxRefinementSweeps = 5;

void check_square(const SparseMatrix& matrix)
{
    if (matrix.rows() != matrix.cols()) {
        throw std::invalid_argument("linear solve: matrix is not square");
    }
}

}  // namespace

Factorization Factorization::spd(const SparseMatrix& matrix)
{
    check_square(matrix);
    Factorization f;
    f.method_ = SolveMethod::Cholesky;
    auto m = std::make_shared<ColMatrix>(matrix);
    m->makeCompressed();
    auto llt = std::make_shared<Cholesky>(*m);
    if (llt->info() != Eigen::Success) {
        throw SolverError("Cholesky factorization failed: matrix is not symmetric positive definite",
                          std::numeric_limits<double>::infinity());
    }
    f.matrix_ = std::move(m);
    f.cholesky_ = std::move(llt);
    return f;
}

Factorization Factorization::general(const SparseMatrix& matrix)
{
    check_square(matrix);
    Factorization f;
    f.method_ = SolveMethod::LU;
    auto m = std::make_shared<ColMatrix>(matrix);
    m->makeCompressed();
    auto lu = std::make_shared<LU>();
    lu->analyzePattern(*m);
    lu->factorize(*m);
    if (lu->info() != Eigen::Success) {
        throw SolverError("LU factorization failed: " + lu->lastErrorMessage(),
                          std::numeric_limits<double>::infinity());
    }
    f.matrix_ = std::move(m);
    f.lu_ = std::move(lu);
    return f;
}

Vector Factorization::apply(const Vector& rhs) const
{
    if (rhs.size() != matrix_->rows()) {
        throw std::invalid_argument("linear solve: right-hand side has the wrong length");
    }
    if (method_ == SolveMethod::Cholesky) {
        return cholesky_->solve(rhs);
    }
    return lu_->solve(rhs);
}

SolveReport Factorization::solve(const Vector& rhs, double tol) const
{
    SolveReport report;
    report.method = method_;
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        report.solution = Vector::Zero(rhs.size());
        return report;
    }
    report.solution = apply(rhs);
    Vector residual = rhs - (*matrix_) * report.solution;
    report.relative_residual = residual.norm() / rhs_norm;
    while (report.relative_residual > tol && report.iterations < kMaxRefinementSweeps) {
        report.solution += apply(residual);
        residual = rhs - (*matrix_) * report.solution;
        report.relative_residual = residual.norm() / rhs_norm;
        ++report.iterations;
    }
    if (!report.solution.allFinite() || !(report.relative_residual <= tol)) {
        std::ostringstream msg;
        msg << "linear solve did not reach relative residual " << tol << " (best "
            << report.relative_residual << ")";
        throw SolverError(msg.str(), report.relative_residual);
    }
    return report;
}

SolveReport solve_spd(const SparseMatrix& matrix, const Vector& rhs, double tol)
{
    return Factorization::spd(matrix).solve(rhs, tol);
}

SolveReport solve_general(const SparseMatrix& matrix, const Vector& rhs, double tol)
{
    return Factorization::general(matrix).solve(rhs, tol);
}

}  // namespace fosls
