#include "fosls/evolution.hpp"

#include "fosls/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace fosls {

namespace {

// Load vector <g, phi_i> over interior hats.
Vector p1_load(const ScalarField& g, const Mesh& mesh, const DofMap& dofs)
{
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    Vector load = Vector::Zero(static_cast<Eigen::Index>(dofs.n_u));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double gq = g(mesh.to_physical(t, rule.points[q])) * rule.weights[q] * jac;
            for (std::size_t i = 0; i < 3; ++i) {
                const std::ptrdiff_t dof = dofs.u_dof_of_vertex[mesh.triangles[t][i]];
                if (dof != DofMap::kNoDof) {
                    load[dof] += gq * rule.points[q][i];
                }
            }
        }
    }
    return load;
}

template <typename ElementMatrix>
SparseMatrix p1_matrix(const Mesh& mesh, const DofMap& dofs, ElementMatrix&& element)
{
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(9 * mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (std::size_t i = 0; i < 3; ++i) {
            const std::ptrdiff_t row = dofs.u_dof_of_vertex[tri[i]];
            if (row == DofMap::kNoDof) {
                continue;
            }
            for (std::size_t j = 0; j < 3; ++j) {
                const std::ptrdiff_t col = dofs.u_dof_of_vertex[tri[j]];
                if (col != DofMap::kNoDof) {
                    triplets.emplace_back(row, col, element(t, i, j));
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(dofs.n_u);
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

std::string step_message(std::size_t n, const std::string& what)
{
    std::ostringstream msg;
    msg << "time step " << n << ": " << what;
    return msg.str();
}

}  // namespace

TimePartition TimePartition::uniform(double final_time, int steps)
{
    if (!(final_time > 0.0) || steps < 1) {
        throw std::invalid_argument("TimePartition::uniform: need T > 0 and at least one step");
    }
    TimePartition p;
    p.steps_.assign(static_cast<std::size_t>(steps), final_time / steps);
    p.constant_ = true;
    return p;
}

TimePartition TimePartition::from_steps(std::vector<double> steps)
{
    if (steps.empty()) {
        throw std::invalid_argument("TimePartition: no steps");
    }
    for (double k : steps) {
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw std::invalid_argument("TimePartition: steps must be positive");
        }
    }
    TimePartition p;
    p.constant_ = std::all_of(steps.begin(), steps.end(), [&](double k) { return k == steps.front(); });
    p.steps_ = std::move(steps);
    return p;
}

double TimePartition::final_time() const
{
    return std::accumulate(steps_.begin(), steps_.end(), 0.0);
}

double TimePartition::time(std::size_t n) const
{
    if (constant_) {
        return static_cast<double>(n) * steps_.front();
    }
    return std::accumulate(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
}

SparseMatrix p1_mass_matrix(const Mesh& mesh, const DofMap& dofs)
{
    return p1_matrix(mesh, dofs, [&](std::size_t t, std::size_t i, std::size_t j) {
        return mesh.area(t) / 12.0 * (i == j ? 2.0 : 1.0);
    });
}

SparseMatrix p1_stiffness_matrix(const Mesh& mesh, const DofMap& dofs)
{
    return p1_matrix(mesh, dofs, [&](std::size_t t, std::size_t i, std::size_t j) {
        const auto edge = [&](std::size_t l) {
            const Point d = mesh.vertex(t, static_cast<int>((l + 2) % 3)) - mesh.vertex(t, static_cast<int>((l + 1) % 3));
            return d;
        };
        // grad lambda_l = rot(e_l) / (2|T|), so the product is e_i . e_j / (4|T|)
        return edge(i).dot(edge(j)) / (4.0 * mesh.area(t));
    });
}

Vector l2_project_initial(const ScalarField& u0, const Mesh& mesh, const DofMap& dofs, double tol)
{
    if (dofs.n_u == 0) {
        return Vector{};
    }
    return solve_spd(p1_mass_matrix(mesh, dofs), p1_load(u0, mesh, dofs), tol).solution;
}

std::vector<SystemState> backward_euler_run(const SpaceTimeField& f,
                                            const TimePartition& partition,
                                            const Mesh& mesh,
                                            const DofMap& dofs,
                                            const Coefficients& coeffs,
                                            Variant variant,
                                            const Vector& initial,
                                            const RunOptions& options)
{
    if (static_cast<std::size_t>(initial.size()) != dofs.n_u) {
        throw std::invalid_argument("backward_euler_run: initial data must have one entry per u-DOF");
    }
    const std::size_t steps = partition.size();
    std::vector<SystemState> states;
    states.reserve(steps + 1);
    states.push_back(SystemState{initial, Vector{}, 0.0});

    const bool reuse = options.reuse_factorization && partition.constant();
    std::optional<Factorization> shared;
    std::optional<LoadAssembler> shared_load;
    if (reuse) {
        const double k = partition.steps().front();
        try {
            shared.emplace(Factorization::spd(assemble_total_form(mesh, dofs, coeffs, k, variant)));
        } catch (const SolverError& e) {
            throw SolverError(step_message(1, e.what()), e.best_residual());
        }
        shared_load.emplace(mesh, dofs, coeffs, k, variant);
    }

    double t = 0.0;
    for (std::size_t n = 1; n <= steps; ++n) {
        const double k = partition.steps()[n - 1];
        t = partition.constant() ? static_cast<double>(n) * k : t + k;
        const ScalarField fn = [&f, t](const Point& x) { return f(t, x); };
        const Vector& previous = states.back().u;

        SolveReport report;
        try {
            if (reuse) {
                report = shared->solve(shared_load->assemble(fn, previous), options.solver_tol);
            } else {
                const Factorization step = Factorization::spd(assemble_total_form(mesh, dofs, coeffs, k, variant));
                const LoadAssembler load(mesh, dofs, coeffs, k, variant);
                report = step.solve(load.assemble(fn, previous), options.solver_tol);
            }
        } catch (const SolverError& e) {
            throw SolverError(step_message(n, e.what()), e.best_residual());
        }

        SystemState state = split_state(report.solution, dofs, t);
        const bool keep_sigma = n == steps || (options.sigma_every > 0 && n % options.sigma_every == 0);
        if (!keep_sigma) {
            state.sigma.resize(0);
        }
        states.push_back(std::move(state));
    }
    return states;
}

std::vector<Vector> galerkin_be_reference(const SpaceTimeField& f,
                                          const TimePartition& partition,
                                          const Mesh& mesh,
                                          const DofMap& dofs,
                                          const Vector& initial,
                                          double tol)
{
    if (static_cast<std::size_t>(initial.size()) != dofs.n_u) {
        throw std::invalid_argument("galerkin_be_reference: initial data must have one entry per u-DOF");
    }
    const SparseMatrix mass = p1_mass_matrix(mesh, dofs);
    const SparseMatrix stiffness = p1_stiffness_matrix(mesh, dofs);

    std::vector<Vector> trajectory{initial};
    double t = 0.0;
    for (std::size_t n = 1; n <= partition.size(); ++n) {
        const double k = partition.steps()[n - 1];
        t = partition.constant() ? static_cast<double>(n) * k : t + k;
        const SparseMatrix system = (1.0 / k) * mass + stiffness;
        const Vector rhs = (1.0 / k) * (mass * trajectory.back()) +
                           p1_load([&f, t](const Point& x) { return f(t, x); }, mesh, dofs);
        try {
            trajectory.push_back(solve_spd(system, rhs, tol).solution);
        } catch (const SolverError& e) {
            throw SolverError(step_message(n, e.what()), e.best_residual());
        }
    }
    return trajectory;
}

double StabilityRecord::worst_ratio() const
{
    double worst = 0.0;
    for (std::size_t n = 0; n < lhs.size(); ++n) {
        if (rhs[n] > 0.0) {
            worst = std::max(worst, lhs[n] / rhs[n]);
        } else if (lhs[n] > 0.0) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return worst;
}

bool StabilityRecord::holds(double slack) const
{
    for (std::size_t n = 0; n < lhs.size(); ++n) {
        if (lhs[n] > rhs[n] * (1.0 + slack)) {
            return false;
        }
    }
    return true;
}

StabilityRecord stability_bound(const std::vector<SystemState>& states,
                                const SpaceTimeField& f,
                                const TimePartition& partition,
                                const Mesh& mesh,
                                const DofMap& dofs)
{
    if (states.size() != partition.size() + 1) {
        throw std::invalid_argument("stability_bound: expected one state per time level");
    }
    StabilityRecord record;
    double bound = l2_norm_u(states.front().u, mesh, dofs);
    record.lhs.push_back(bound);
    record.rhs.push_back(bound);
    for (std::size_t n = 1; n < states.size(); ++n) {
        const double t = states[n].time;
        bound += partition.steps()[n - 1] * l2_norm([&f, t](const Point& x) { return f(t, x); }, mesh);
        record.lhs.push_back(l2_norm_u(states[n].u, mesh, dofs));
        record.rhs.push_back(bound);
    }
    return record;
}

}  // namespace fosls
