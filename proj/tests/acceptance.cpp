// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include "fosls/driver.hpp"
#include "fosls/quadrature.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

using namespace fosls;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

bool in_band(const std::optional<double>& v, double lo, double hi)
{
    return v && *v >= lo && *v <= hi;
}

std::string show(const std::optional<double>& v)
{
    if (!v) {
        return "undefined";
    }
    std::ostringstream s;
    s.precision(4);
    s << std::fixed << *v;
    return s.str();
}

struct Run {
    ExperimentResult result;
    double seconds = 0.0;

    [[nodiscard]] std::optional<double> final_rate(Quantity q) const { return result.rates.back().slope(q); }
};

Run run(Variant variant, Coupling coupling)
{
    ExperimentConfig config;
    config.variant = variant;
    config.coupling = coupling;
    config.max_level = default_max_level(coupling);
    const auto start = std::chrono::steady_clock::now();
    Run r{run_experiment(config), 0.0};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void check_fine_coupling(const Run& r, const std::string& label, Outcome& out)
{
    const auto u = r.final_rate(Quantity::ErrU);
    const auto g = r.final_rate(Quantity::ErrGradU);
    const auto s = r.final_rate(Quantity::ErrSigma);
    out.require(in_band(u, 1.7, 2.3), label + " err_u rate in [1.7, 2.3]");
    out.require(in_band(g, 0.8, 1.2), label + " err_grad_u rate in [0.8, 1.2]");
    out.require(in_band(s, 0.8, 1.2), label + " err_sigma rate in [0.8, 1.2]");
    out.require(r.seconds <= 300.0, label + " runtime <= 300 s");
    out.detail << label << " k~h^2 L=5: u " << show(u) << ", grad u " << show(g) << ", sigma " << show(s) << " ("
               << std::lround(r.seconds) << " s); ";
}

void check_coarse_coupling(const Run& r, const std::string& label, Outcome& out)
{
    out.detail << label << " k~h L=6:";
    for (Quantity q : kAllQuantities) {
        const auto rate = r.final_rate(q);
        out.require(in_band(rate, 0.8, 1.2), label + " " + to_string(q) + " rate in [0.8, 1.2]");
        out.detail << ' ' << to_string(q) << ' ' << show(rate);
    }
    out.require(r.seconds <= 180.0, label + " runtime <= 180 s");
    out.detail << " (" << std::lround(r.seconds) << " s); ";
}

void check_stability(const std::vector<const Run*>& runs, Outcome& out)
{
    double worst = 0.0;
    std::size_t steps = 0;
    for (const Run* r : runs) {
        for (const StabilityRecord& rec : r->result.stability) {
            for (std::size_t n = 0; n < rec.lhs.size(); ++n) {
                out.require(rec.lhs[n] <= rec.rhs[n] * (1.0 + 1e-10), "bound at one step");
                worst = std::max(worst, rec.lhs[n] / rec.rhs[n]);
                ++steps;
            }
        }
    }
    out.detail << steps << " time levels checked, worst ||u_h^n|| / bound = " << worst;
}

void check_decoupling(Outcome& out)
{
    const ManufacturedProblem problem = pure_diffusion_problem();
    const Mesh mesh = unit_square_mesh(3);
    const DofMap dofs = build_dof_map(mesh);
    const TimePartition partition = TimePartition::uniform(0.1, 16);
    const Vector u0 = l2_project_initial([&](const Point& x) { return problem.u(0.0, x); }, mesh, dofs);
    const auto fosls = backward_euler_run(problem.f, partition, mesh, dofs, problem.coeffs, Variant::Primary, u0);
    const auto galerkin = galerkin_be_reference(problem.f, partition, mesh, dofs, u0);
    double worst = 0.0;
    for (std::size_t n = 0; n < galerkin.size(); ++n) {
        const double rel = (fosls[n].u - galerkin[n]).cwiseAbs().maxCoeff() / galerkin[n].cwiseAbs().maxCoeff();
        worst = std::max(worst, rel);
    }
    out.require(fosls.size() == 17 && worst <= 1e-8, "relative difference <= 1e-8");
    out.detail << "level 3, 16 steps, max relative coefficient difference " << worst;
}

void check_projection(Outcome& out)
{
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const ManufacturedProblem problem = model_problem(variant);
        const ExactFields exact = problem.at(0.1);
        for (double k : {1e-1, 1e-3, 1e-5}) {
            std::vector<double> natural;
            std::vector<double> l2;
            for (int level = 2; level <= 5; ++level) {
                const Mesh mesh = unit_square_mesh(level);
                const DofMap dofs = build_dof_map(mesh);
                const ProjectionResult p = elliptic_project(exact, mesh, dofs, problem.coeffs, k, variant);
                const FieldErrors e = compute_field_errors(p.state, exact, mesh, dofs);
                natural.push_back(natural_norm(e, k));
                l2.push_back(e.u);
            }
            const auto rn = observed_rates(natural).back();
            const auto rl = observed_rates(l2).back();
            std::ostringstream label;
            label << to_string(variant) << " k=" << k;
            out.require(in_band(rn, 0.8, 1.2), label.str() + " natural-norm rate");
            out.require(in_band(rl, 1.7, 2.3), label.str() + " L2 rate");
            out.detail << label.str() << ": " << show(rn) << "/" << show(rl) << "; ";
        }
    }
}

void check_structure(Outcome& out)
{
    // symmetry and definiteness
    const Mesh mesh = unit_square_mesh(3);
    const DofMap dofs = build_dof_map(mesh);
    double worst_asym = 0.0;
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const Coefficients coeffs = model_problem(variant).coeffs;
        for (double k : {0.1, 1e-3, 1e-6}) {
            const SparseMatrix a = assemble_total_form(mesh, dofs, coeffs, k, variant);
            const Eigen::MatrixXd d(a);
            const double asym = (d - d.transpose()).cwiseAbs().maxCoeff() / d.cwiseAbs().maxCoeff();
            worst_asym = std::max(worst_asym, asym);
            out.require(asym <= 1e-12, "symmetry");
            bool factorized = true;
            try {
                (void)Factorization::spd(a);
            } catch (const SolverError&) {
                factorized = false;
            }
            out.require(factorized, "Cholesky factorization");
        }
    }
    out.detail << "max relative asymmetry " << worst_asym << "; ";

    // minimizer property against 20 random competitors
    const Mesh m2 = unit_square_mesh(2);
    const DofMap d2 = build_dof_map(m2);
    std::mt19937 rng(2024);
    std::normal_distribution<double> normal;
    int beaten = 0;
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const ManufacturedProblem p = model_problem(variant);
        const double k = 0.025;
        const ScalarField g = [&](const Point& x) { return p.f(k, x); };
        const Vector w = l2_project_initial([&](const Point& x) { return p.u(0.0, x); }, m2, d2);
        const Vector x = solve_spd(assemble_total_form(m2, d2, p.coeffs, k, variant),
                                   assemble_rhs(m2, d2, p.coeffs, k, g, w, variant))
                             .solution;
        const double jx = evaluate_lsq_functional(split_state(x, d2), m2, d2, p.coeffs, k, g, w, variant);
        for (int trial = 0; trial < 20; ++trial) {
            Vector y(x.size());
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                y[i] = x[i] + 0.05 * normal(rng);
            }
            const double jy = evaluate_lsq_functional(split_state(y, d2), m2, d2, p.coeffs, k, g, w, variant);
            beaten += jy < jx ? 1 : 0;
        }
    }
    out.require(beaten == 0, "no competitor has a smaller functional");
    out.detail << "competitors below minimum: " << beaten << "; ";

    // conformity and mesh invariants
    for (int level = 0; level <= 4; ++level) {
        const Mesh m = unit_square_mesh(level);
        const DofMap d = build_dof_map(m);
        const auto v = static_cast<long>(m.num_vertices());
        const auto e = static_cast<long>(m.num_edges());
        const auto t = static_cast<long>(m.num_triangles());
        out.require(t == 4L * (1L << (2 * level)), "T_L = 4 * 4^L");
        out.require(v - e + t == 1, "Euler relation");
        out.require(check_mesh(m).empty(), "mesh consistency");
        Vector coeffs(static_cast<Eigen::Index>(d.total()));
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
            coeffs[i] = normal(rng);
        }
        out.require(check_conformity(m, d, split_state(coeffs, d)).empty(), "H1/H(div) conformity");
    }
    out.detail << "mesh and conformity checks at levels 0-4";
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

void check_quadrature(Outcome& out)
{
    for (int degree : {4, 6}) {
        const QuadratureRule& rule = triangle_rule(degree);
        double worst = 0.0;
        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    sum += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
                }
                worst = std::max(worst, std::abs(sum - factorial(a) * factorial(b) / factorial(a + b + 2)));
            }
        }
        out.require(worst <= 1e-13, "degree " + std::to_string(degree));
        out.detail << "degree " << degree << " max error " << worst << "; ";
    }
}

bool report(int id, const std::string& title, const Outcome& out)
{
    std::cout << "CRITERION " << id << ": " << (out.pass ? "PASS" : "FAIL") << " - " << title << " | "
              << out.detail.str() << std::endl;
    return out.pass;
}

}  // namespace

int main()
{
    bool all = true;
    try {
        const Run p_h2 = run(Variant::Primary, Coupling::H2);
        const Run p_h = run(Variant::Primary, Coupling::H);
        const Run a_h2 = run(Variant::Alternative, Coupling::H2);
        const Run a_h = run(Variant::Alternative, Coupling::H);

        Outcome c1;
        check_fine_coupling(p_h2, "primary", c1);
        all &= report(1, "primary system, k~h^2 rates", c1);

        Outcome c2;
        check_coarse_coupling(p_h, "primary", c2);
        all &= report(2, "primary system, k~h rates", c2);

        Outcome c3;
        check_fine_coupling(a_h2, "alternative", c3);
        check_coarse_coupling(a_h, "alternative", c3);
        all &= report(3, "alternative system, both couplings", c3);

        Outcome c4;
        check_stability({&p_h2, &p_h, &a_h2, &a_h}, c4);
        all &= report(4, "stability bound at every step of every run", c4);

        Outcome c5;
        check_decoupling(c5);
        all &= report(5, "decoupling against standard Galerkin backward Euler", c5);

        Outcome c6;
        check_projection(c6);
        all &= report(6, "elliptic projection rates, k-robust", c6);

        Outcome c7;
        check_structure(c7);
        all &= report(7, "structural properties", c7);

        Outcome c8;
        check_quadrature(c8);
        all &= report(8, "quadrature exactness", c8);

        // err_div_sigma with k~h^2 is expected to track err_sigma; recorded, not graded.
        std::cout << "OBSERVATION: err_div_sigma rate with k~h^2 (band [0.7, 1.3]): primary "
                  << show(p_h2.final_rate(Quantity::ErrDivSigma)) << " "
                  << (in_band(p_h2.final_rate(Quantity::ErrDivSigma), 0.7, 1.3) ? "inside" : "outside")
                  << ", alternative " << show(a_h2.final_rate(Quantity::ErrDivSigma)) << " "
                  << (in_band(a_h2.final_rate(Quantity::ErrDivSigma), 0.7, 1.3) ? "inside" : "outside")
                  << std::endl;
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << std::endl;
        return 1;
    }
    return all ? 0 : 1;
}
