#include "fosls/driver.hpp"

#include "fosls/quadrature.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <sstream>

namespace fosls {

const char* to_string(Coupling coupling)
{
    return coupling == Coupling::H ? "h" : "h2";
}

Coupling parse_coupling(const std::string& name)
{
    if (name == "h") {
        return Coupling::H;
    }
    if (name == "h2") {
        return Coupling::H2;
    }
    throw std::invalid_argument("unknown coupling '" + name + "' (expected h or h2)");
}

int default_max_level(Coupling coupling)
{
    return coupling == Coupling::H ? 6 : 5;
}

double ExperimentConfig::step(int level) const
{
    return std::ldexp(k0, coupling == Coupling::H ? -level : -2 * level);
}

int ExperimentConfig::num_steps(int level) const
{
    const double ratio = final_time / step(level);
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio || rounded > 1e8) {
        std::ostringstream msg;
        msg << "final time " << final_time << " is not a positive integer multiple of k_" << level << " = "
            << step(level);
        throw std::invalid_argument(msg.str());
    }
    return static_cast<int>(rounded);
}

void ExperimentConfig::validate() const
{
    if (max_level < 0) {
        throw std::invalid_argument("max_level must be non-negative");
    }
    if (!(final_time > 0.0) || !std::isfinite(final_time)) {
        throw std::invalid_argument("final time must be positive");
    }
    if (!(k0 > 0.0) || !std::isfinite(k0)) {
        throw std::invalid_argument("k0 must be positive");
    }
    if (!(solver_tol > 0.0)) {
        throw std::invalid_argument("solver tolerance must be positive");
    }
    for (int level = 0; level <= max_level; ++level) {
        (void)num_steps(level);
    }
}

ExperimentError::ExperimentError(int level, const std::string& what)
    : std::runtime_error("level " + std::to_string(level) + ": " + what), level_(level)
{
}

bool ExperimentResult::stable(double slack) const
{
    return std::all_of(stability.begin(), stability.end(), [&](const StabilityRecord& r) { return r.holds(slack); });
}

LevelResult run_level(const ExperimentConfig& config, int level)
{
    try {
        const ManufacturedProblem problem = model_problem(config.variant);
        const Mesh mesh = unit_square_mesh(level, config.refinement);
        const DofMap dofs = build_dof_map(mesh);
        const TimePartition partition = TimePartition::uniform(config.final_time, config.num_steps(level));
        const Vector initial =
            l2_project_initial([&](const Point& x) { return problem.u(0.0, x); }, mesh, dofs, config.solver_tol);

        RunOptions options;
        options.solver_tol = config.solver_tol;
        const std::vector<SystemState> states = backward_euler_run(
            problem.f, partition, mesh, dofs, problem.coeffs, config.variant, initial, options);

        LevelResult result;
        result.report =
            compute_errors(states.back(), problem, mesh, dofs, config.step(level), partition.final_time());
        result.report.level = level;
        result.stability = stability_bound(states, problem.f, partition, mesh, dofs);
        return result;
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError(level, e.what());
    }
}

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    std::array<char, 64> buffer{};
    const auto [end, ec] =
        std::to_chars(buffer.data(), buffer.data() + buffer.size(), value, std::chars_format::general, 17);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_number: conversion failed");
    }
    return std::string(buffer.data(), end);
}

void write_csv(std::ostream& out, const std::vector<ErrorReport>& reports)
{
    out << kCsvHeader << '\n';
    for (const ErrorReport& r : reports) {
        out << r.level << ',' << format_number(r.h) << ',' << format_number(r.k) << ',' << r.dofs;
        for (Quantity q : kAllQuantities) {
            out << ',' << format_number(r.value(q));
        }
        out << '\n';
    }
}

void write_rates(std::ostream& out, const std::vector<RateRow>& rates)
{
    out << "level";
    for (Quantity q : kAllQuantities) {
        out << ',' << to_string(q);
    }
    out << '\n';
    for (const RateRow& row : rates) {
        out << row.level;
        for (Quantity q : kAllQuantities) {
            const auto slope = row.slope(q);
            out << ',' << (slope ? format_number(*slope) : std::string("nan"));
        }
        out << '\n';
    }
}

void write_plot_data(std::ostream& out, const std::vector<ErrorReport>& reports, Quantity quantity)
{
    for (const ErrorReport& r : reports) {
        out << r.dofs << ' ' << format_number(r.value(quantity)) << '\n';
    }
}

namespace {

std::string strip_csv_extension(const std::string& path)
{
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
        return path.substr(0, path.size() - ext.size());
    }
    return path;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer)
{
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    writer(file);
    if (!file) {
        throw std::runtime_error("error while writing '" + path + "'");
    }
}

}  // namespace

std::string rates_path(const std::string& csv_path)
{
    return strip_csv_extension(csv_path) + "_rates.csv";
}

std::string plot_data_path(const std::string& csv_path, Quantity quantity)
{
    return strip_csv_extension(csv_path) + "_" + to_string(quantity) + ".dat";
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();
    std::vector<LevelResult> levels;
    if (config.parallel_levels) {
        std::vector<std::future<LevelResult>> pending;
        for (int level = 0; level <= config.max_level; ++level) {
            pending.push_back(std::async(std::launch::async, [&config, level] { return run_level(config, level); }));
        }
        // Collect everything first so no task outlives a thrown exception.
        std::vector<std::exception_ptr> failures;
        for (auto& task : pending) {
            try {
                levels.push_back(task.get());
            } catch (...) {
                failures.push_back(std::current_exception());
            }
        }
        if (!failures.empty()) {
            std::rethrow_exception(failures.front());
        }
    } else {
        for (int level = 0; level <= config.max_level; ++level) {
            levels.push_back(run_level(config, level));
        }
    }

    ExperimentResult result;
    for (LevelResult& level : levels) {
        result.reports.push_back(level.report);
        result.stability.push_back(std::move(level.stability));
    }
    result.rates = observed_rates(result.reports);

    if (!config.output_path.empty()) {
        write_file(config.output_path, [&](std::ostream& out) { write_csv(out, result.reports); });
        write_file(rates_path(config.output_path), [&](std::ostream& out) { write_rates(out, result.rates); });
        if (config.plot_data) {
            for (Quantity q : kAllQuantities) {
                write_file(plot_data_path(config.output_path, q),
                           [&](std::ostream& out) { write_plot_data(out, result.reports, q); });
            }
        }
    }
    return result;
}

std::string check_conformity(const Mesh& mesh, const DofMap& dofs, const SystemState& state, double tol)
{
    std::vector<std::vector<std::size_t>> neighbours(mesh.num_edges());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        for (const EdgeRef& ref : mesh.triangle_edges[t]) {
            neighbours[ref.index].push_back(t);
        }
    }
    const double offset = std::sqrt(3.0) / 6.0;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Point a = mesh.vertices[mesh.edges[e][0]];
        const Point b = mesh.vertices[mesh.edges[e][1]];
        const Vec2 tangent = b - a;
        const Vec2 normal = Vec2(tangent.y(), -tangent.x()).normalized();
        for (double s : {0.5 - offset, 0.5 + offset}) {
            const Point x = a + s * tangent;
            std::vector<FieldValue> values;
            for (std::size_t t : neighbours[e]) {
                values.push_back(eval_on_triangle(state, mesh, dofs, t, mesh.barycentric(t, x)));
            }
            std::ostringstream msg;
            if (mesh.boundary_edge[e]) {
                if (std::abs(values.front().u) > tol) {
                    msg << "u does not vanish on boundary edge " << e;
                    return msg.str();
                }
                continue;
            }
            if (values.size() != 2) {
                msg << "interior edge " << e << " has " << values.size() << " neighbours";
                return msg.str();
            }
            const double u_scale = 1.0 + std::max(std::abs(values[0].u), std::abs(values[1].u));
            if (std::abs(values[0].u - values[1].u) > tol * u_scale) {
                msg << "P1 trace jumps across edge " << e;
                return msg.str();
            }
            const double n0 = values[0].sigma.dot(normal);
            const double n1 = values[1].sigma.dot(normal);
            if (std::abs(n0 - n1) > tol * (1.0 + std::max(std::abs(n0), std::abs(n1)))) {
                msg << "RT0 normal trace jumps across edge " << e << " (" << n0 << " vs " << n1 << ")";
                return msg.str();
            }
        }
    }
    return {};
}

bool VerificationReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

CheckResult check_quadrature()
{
    double worst = 0.0;
    for (int degree = 1; degree <= 10; ++degree) {
        const QuadratureRule& rule = triangle_rule(degree);
        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    sum += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
                }
                const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                worst = std::max(worst, std::abs(sum - exact));
            }
        }
    }
    return {"quadrature exactness (degrees 1-10)", worst <= 1e-13, "max error " + format_number(worst)};
}

CheckResult check_mesh_invariants(int max_level, RefinementRule rule)
{
    std::ostringstream detail;
    bool ok = true;
    for (int level = 0; level <= max_level; ++level) {
        const Mesh mesh = unit_square_mesh(level, rule);
        const auto v = static_cast<long>(mesh.num_vertices());
        const auto e = static_cast<long>(mesh.num_edges());
        const auto t = static_cast<long>(mesh.num_triangles());
        const long expected = 4L << (2 * level);
        const std::string problems = check_mesh(mesh);
        const double h = mesh.max_diameter();
        const bool level_ok = t == expected && v - e + t == 1 && problems.empty() &&
                              std::abs(h - std::ldexp(1.0, -level)) <= 1e-12;
        detail << "L" << level << ": V=" << v << " E=" << e << " T=" << t << (level_ok ? "" : " FAILED " + problems)
               << "; ";
        ok = ok && level_ok;
    }
    return {"mesh counts, Euler relation and diameters", ok, detail.str()};
}

SystemState random_state(const DofMap& dofs, std::mt19937& rng)
{
    std::normal_distribution<double> normal;
    Vector coeffs(static_cast<Eigen::Index>(dofs.total()));
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        coeffs[i] = normal(rng);
    }
    return split_state(coeffs, dofs);
}

CheckResult check_conformity_levels(int max_level, RefinementRule rule)
{
    std::mt19937 rng(20240611);
    for (int level = 0; level <= max_level; ++level) {
        const Mesh mesh = unit_square_mesh(level, rule);
        const DofMap dofs = build_dof_map(mesh);
        const std::string problem = check_conformity(mesh, dofs, random_state(dofs, rng));
        if (!problem.empty()) {
            return {"H1/H(div) conformity", false, "level " + std::to_string(level) + ": " + problem};
        }
    }
    return {"H1/H(div) conformity", true, "levels 0-" + std::to_string(max_level)};
}

CheckResult check_sign_mutation(RefinementRule rule)
{
    Mesh mesh = unit_square_mesh(1, rule);
    const DofMap dofs = build_dof_map(mesh);
    // Flip the orientation of an interior edge in one of its triangles only.
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        for (EdgeRef& ref : mesh.triangle_edges[t]) {
            if (!mesh.boundary_edge[ref.index]) {
                ref.sign = -ref.sign;
                std::mt19937 rng(7);
                const std::string problem = check_conformity(mesh, dofs, random_state(dofs, rng));
                return {"conformity check detects a flipped RT0 sign", !problem.empty(),
                        problem.empty() ? "mutation not detected" : problem};
            }
        }
    }
    return {"conformity check detects a flipped RT0 sign", false, "no interior edge"};
}

CheckResult check_form_structure(int level, RefinementRule rule)
{
    const Mesh mesh = unit_square_mesh(level, rule);
    const DofMap dofs = build_dof_map(mesh);
    std::ostringstream detail;
    bool ok = true;
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const Coefficients coeffs = model_problem(variant).coeffs;
        for (double k : {0.1, 1e-3, 1e-6}) {
            const SparseMatrix a = assemble_total_form(mesh, dofs, coeffs, k, variant);
            const SparseMatrix at = a.transpose();
            const double scale = Eigen::MatrixXd(a).cwiseAbs().maxCoeff();
            const double asym = Eigen::MatrixXd(a - at).cwiseAbs().maxCoeff() / scale;
            bool spd = true;
            try {
                (void)Factorization::spd(a);
            } catch (const SolverError&) {
                spd = false;
            }
            const bool pass = asym <= 1e-12 && spd;
            ok = ok && pass;
            detail << to_string(variant) << " k=" << k << ": asym " << format_number(asym)
                   << (spd ? " spd" : " NOT spd") << "; ";
        }
    }
    return {"total form symmetric and positive definite", ok, detail.str()};
}

CheckResult check_minimizer(int level, RefinementRule rule)
{
    const Mesh mesh = unit_square_mesh(level, rule);
    const DofMap dofs = build_dof_map(mesh);
    std::mt19937 rng(99);
    std::normal_distribution<double> normal;
    bool ok = true;
    std::ostringstream detail;
    for (Variant variant : {Variant::Primary, Variant::Alternative}) {
        const ManufacturedProblem problem = model_problem(variant);
        const double k = 0.01;
        const ScalarField g = [&](const Point& x) { return problem.f(k, x); };
        const Vector w = l2_project_initial([&](const Point& x) { return problem.u(0.0, x); }, mesh, dofs);
        const SparseMatrix a = assemble_total_form(mesh, dofs, problem.coeffs, k, variant);
        const Vector rhs = assemble_rhs(mesh, dofs, problem.coeffs, k, g, w, variant);
        const Vector x = solve_spd(a, rhs).solution;
        const double j_min =
            evaluate_lsq_functional(split_state(x, dofs), mesh, dofs, problem.coeffs, k, g, w, variant);
        double smallest_gap = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 20; ++trial) {
            Vector y = x;
            const double scale = std::pow(10.0, -3.0 + 3.0 * trial / 19.0);
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                y[i] += scale * normal(rng);
            }
            const double j =
                evaluate_lsq_functional(split_state(y, dofs), mesh, dofs, problem.coeffs, k, g, w, variant);
            smallest_gap = std::min(smallest_gap, j - j_min);
            ok = ok && j >= j_min * (1.0 - 1e-12);
        }
        detail << to_string(variant) << ": J=" << format_number(j_min) << " smallest gap "
               << format_number(smallest_gap) << "; ";
    }
    return {"discrete solution minimizes the functional (20 competitors)", ok, detail.str()};
}

CheckResult check_decoupling(int level, int steps, RefinementRule rule)
{
    const ManufacturedProblem problem = pure_diffusion_problem();
    const Mesh mesh = unit_square_mesh(level, rule);
    const DofMap dofs = build_dof_map(mesh);
    const TimePartition partition = TimePartition::uniform(0.1, steps);
    const Vector initial = l2_project_initial([&](const Point& x) { return problem.u(0.0, x); }, mesh, dofs);
    const auto fosls = backward_euler_run(problem.f, partition, mesh, dofs, problem.coeffs, Variant::Primary, initial);
    const auto galerkin = galerkin_be_reference(problem.f, partition, mesh, dofs, initial);
    double worst = 0.0;
    for (std::size_t n = 0; n < galerkin.size(); ++n) {
        const double scale = galerkin[n].cwiseAbs().maxCoeff();
        worst = std::max(worst, (fosls[n].u - galerkin[n]).cwiseAbs().maxCoeff() / scale);
    }
    return {"decoupling: u matches standard Galerkin backward Euler", worst <= 1e-8,
            "level " + std::to_string(level) + ", " + std::to_string(steps) + " steps, max relative difference " +
                format_number(worst)};
}

CheckResult check_projection_rates(Variant variant, double k, RefinementRule rule)
{
    const ManufacturedProblem problem = model_problem(variant);
    const ExactFields exact = problem.at(0.1);
    std::vector<double> natural;
    std::vector<double> l2;
    for (int level = 2; level <= 5; ++level) {
        const Mesh mesh = unit_square_mesh(level, rule);
        const DofMap dofs = build_dof_map(mesh);
        const ProjectionResult p = elliptic_project(exact, mesh, dofs, problem.coeffs, k, variant);
        const FieldErrors e = compute_field_errors(p.state, exact, mesh, dofs);
        natural.push_back(natural_norm(e, k));
        l2.push_back(e.u);
    }
    const auto rate_natural = observed_rates(natural).back();
    const auto rate_l2 = observed_rates(l2).back();
    const bool ok = rate_natural && rate_l2 && *rate_natural >= 0.8 && *rate_natural <= 1.2 && *rate_l2 >= 1.7 &&
                    *rate_l2 <= 2.3;
    std::ostringstream name;
    name << "elliptic projection rates (" << to_string(variant) << ", k=" << k << ")";
    std::ostringstream detail;
    detail << "natural-norm rate " << (rate_natural ? format_number(*rate_natural) : "nan") << ", L2 rate "
           << (rate_l2 ? format_number(*rate_l2) : "nan");
    return {name.str(), ok, detail.str()};
}

CheckResult check_stability(const ExperimentConfig& config)
{
    ExperimentConfig small = config;
    small.coupling = Coupling::H;
    small.max_level = std::min(config.max_level, 3);
    small.output_path.clear();
    small.plot_data = false;
    const ExperimentResult result = run_experiment(small);
    double worst = 0.0;
    for (const StabilityRecord& r : result.stability) {
        worst = std::max(worst, r.worst_ratio());
    }
    return {"stability bound at every step", result.stable(),
            "levels 0-" + std::to_string(small.max_level) + ", worst ratio " + format_number(worst)};
}

template <typename Check>
void record(VerificationReport& report, const std::string& name, Check&& check)
{
    try {
        report.checks.push_back(check());
    } catch (const std::exception& e) {
        report.checks.push_back({name, false, std::string("exception: ") + e.what()});
    }
}

}  // namespace

VerificationReport run_verification_suite(const ExperimentConfig& config)
{
    const RefinementRule rule = config.refinement;
    VerificationReport report;
    record(report, "quadrature", [] { return check_quadrature(); });
    record(report, "mesh", [&] { return check_mesh_invariants(4, rule); });
    record(report, "conformity", [&] { return check_conformity_levels(4, rule); });
    record(report, "sign mutation", [&] { return check_sign_mutation(rule); });
    record(report, "form structure", [&] { return check_form_structure(2, rule); });
    record(report, "minimizer", [&] { return check_minimizer(2, rule); });
    record(report, "decoupling", [&] { return check_decoupling(3, 16, rule); });
    for (double k : {1e-1, 1e-3, 1e-5}) {
        record(report, "projection", [&] { return check_projection_rates(config.variant, k, rule); });
    }
    record(report, "stability", [&] { return check_stability(config); });
    return report;
}

namespace {

void print_summary(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result)
{
    out << "variant " << to_string(config.variant) << ", coupling k~" << to_string(config.coupling) << ", T "
        << config.final_time << ", k0 " << config.k0 << '\n';
    write_csv(out, result.reports);
    out << "observed rates\n";
    write_rates(out, result.rates);
    double worst = 0.0;
    for (const StabilityRecord& r : result.stability) {
        worst = std::max(worst, r.worst_ratio());
    }
    out << "stability bound " << (result.stable() ? "holds" : "VIOLATED") << " (worst ratio "
        << format_number(worst) << ")\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Least-squares backward Euler for parabolic problems on the unit square"};
    app.set_config("--config", "", "Configuration file with key=value lines; flags override it");

    std::string variant = "primary";
    std::string coupling = "h2";
    int max_level = -1;
    ExperimentConfig config;
    std::string refinement = "nvb";
    app.add_option("--variant", variant, "First-order system: primary or alternative")
        ->check(CLI::IsMember({"primary", "alternative", "alt"}));
    app.add_option("--coupling", coupling, "Time step schedule: h (k = k0 2^-L) or h2 (k = k0 4^-L)")
        ->check(CLI::IsMember({"h", "h2"}));
    app.add_option("--max-level", max_level, "Finest refinement level (default 6 for h, 5 for h2)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--final-time", config.final_time, "Final time T")->check(CLI::PositiveNumber);
    app.add_option("--k0", config.k0, "Time step at level 0")->check(CLI::PositiveNumber);
    app.add_option("--tol", config.solver_tol, "Relative residual tolerance of the linear solver")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", config.output_path, "CSV output path");
    app.add_flag("--plot-data", config.plot_data, "Also write two-column 'dofs error' files");
    app.add_flag("--parallel", config.parallel_levels, "Run levels concurrently");
    app.add_option("--refinement", refinement, "Uniform refinement rule: nvb or quad")
        ->check(CLI::IsMember({"nvb", "quad"}));

    CLI::App* verify = app.add_subcommand("verify", "Run the property checks");
    CLI::App* mesh_cmd = app.add_subcommand("mesh", "Write a uniformly refined mesh");
    int mesh_level = 0;
    std::string mesh_out;
    mesh_cmd->add_option("--level", mesh_level, "Refinement level")->check(CLI::NonNegativeNumber);
    mesh_cmd->add_option("-o,--output", mesh_out, "Output file (default: standard output)");
    app.require_subcommand(0, 1);
    verify->fallthrough();
    mesh_cmd->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        config.variant = parse_variant(variant);
        config.coupling = parse_coupling(coupling);
        config.max_level = max_level >= 0 ? max_level : default_max_level(config.coupling);
        config.refinement =
            refinement == "quad" ? RefinementRule::Quadrisection : RefinementRule::NewestVertexBisection;

        if (*mesh_cmd) {
            const Mesh mesh = unit_square_mesh(mesh_level, config.refinement);
            if (mesh_out.empty()) {
                write_mesh(mesh, out);
            } else {
                write_file(mesh_out, [&](std::ostream& file) { write_mesh(mesh, file); });
            }
            return 0;
        }

        if (*verify) {
            const VerificationReport report = run_verification_suite(config);
            for (const CheckResult& check : report.checks) {
                out << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
            }
            return report.passed() ? 0 : 1;
        }

        const ExperimentResult result = run_experiment(config);
        print_summary(out, config, result);
        return result.stable() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace fosls
