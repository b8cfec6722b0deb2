#pragma once

#include "fosls/forms.hpp"
#include "fosls/solver.hpp"

#include <functional>
#include <vector>

namespace fosls {

/// f(t, x)
using SpaceTimeField = std::function<double(double, const Point&)>;

/// Partition 0 = t_0 < t_1 < ... < t_N = T given by its steps k_n.
class TimePartition {
public:
    /// N equal steps of size T / N.
    static TimePartition uniform(double final_time, int steps);
    /// Arbitrary positive steps.
    static TimePartition from_steps(std::vector<double> steps);

    [[nodiscard]] const std::vector<double>& steps() const { return steps_; }
    [[nodiscard]] std::size_t size() const { return steps_.size(); }
    [[nodiscard]] bool constant() const { return constant_; }
    [[nodiscard]] double final_time() const;
    /// t_n for n = 0..N
    [[nodiscard]] double time(std::size_t n) const;

private:
    std::vector<double> steps_;
    bool constant_ = false;
};

struct RunOptions {
    double solver_tol = kDefaultSolverTolerance;
    /// Factor the system matrix once when the partition has constant steps.
    bool reuse_factorization = true;
    /// Keep sigma-coefficients every `sigma_every` steps (0: final state only).
    std::size_t sigma_every = 0;
};

/// u-coefficients (length n_u) of the L2 projection of `u0` onto S_0^1.
Vector l2_project_initial(const ScalarField& u0, const Mesh& mesh, const DofMap& dofs,
                          double tol = kDefaultSolverTolerance);

/// Backward Euler least-squares time stepping: for n = 1..N solve
///   (1/k_n)<u, v> + a_n(u, v) = F_n(v; f(t_n), u_h^{n-1})   for all v in U_h.
/// Returns N + 1 states; state 0 carries `initial` and an empty sigma. All
/// states carry u; sigma is kept for the final state and every
/// `options.sigma_every`-th step. Solver failures are rethrown as SolverError
/// naming the step.
std::vector<SystemState> backward_euler_run(const SpaceTimeField& f,
                                            const TimePartition& partition,
                                            const Mesh& mesh,
                                            const DofMap& dofs,
                                            const Coefficients& coeffs,
                                            Variant variant,
                                            const Vector& initial,
                                            const RunOptions& options = {});

/// Standard Galerkin backward Euler for u' - Laplace u = f on S_0^1:
///   (1/k)<u^n, v> + <grad u^n, grad v> = (1/k)<u^{n-1}, v> + <f^n, v>.
/// Assembled independently of the least-squares forms. Returns N + 1 vectors.
std::vector<Vector> galerkin_be_reference(const SpaceTimeField& f,
                                          const TimePartition& partition,
                                          const Mesh& mesh,
                                          const DofMap& dofs,
                                          const Vector& initial,
                                          double tol = kDefaultSolverTolerance);

/// Per-step check of ||u_h^n|| <= sum_{j<=n} k_j ||f^j|| + ||u_h^0||.
struct StabilityRecord {
    std::vector<double> lhs;  // ||u_h^n||, n = 0..N
    std::vector<double> rhs;  // bound, n = 0..N
    /// max over n of lhs / rhs (0 when every bound is zero)
    [[nodiscard]] double worst_ratio() const;
    /// lhs <= rhs (1 + slack) at every step
    [[nodiscard]] bool holds(double slack = 1e-10) const;
};

StabilityRecord stability_bound(const std::vector<SystemState>& states,
                                const SpaceTimeField& f,
                                const TimePartition& partition,
                                const Mesh& mesh,
                                const DofMap& dofs);

/// P1 mass and stiffness matrices on the interior vertices (n_u x n_u).
SparseMatrix p1_mass_matrix(const Mesh& mesh, const DofMap& dofs);
SparseMatrix p1_stiffness_matrix(const Mesh& mesh, const DofMap& dofs);

}  // namespace fosls
