#pragma once

#include "fosls/analysis.hpp"
#include "fosls/evolution.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fosls {

/// Time step schedule: k_L = k0 2^-L (k ~ h) or k0 4^-L (k ~ h^2).
enum class Coupling { H, H2 };

const char* to_string(Coupling coupling);
Coupling parse_coupling(const std::string& name);
int default_max_level(Coupling coupling);

struct ExperimentConfig {
    Variant variant = Variant::Primary;
    Coupling coupling = Coupling::H2;
    int max_level = 5;
    double final_time = 0.1;
    double k0 = 0.1;
    double solver_tol = kDefaultSolverTolerance;
    RefinementRule refinement = RefinementRule::NewestVertexBisection;
    /// CSV destination; empty means no files are written.
    std::string output_path;
    bool plot_data = false;
    bool parallel_levels = false;

    /// Throws std::invalid_argument on a bad configuration, including a final
    /// time that is not an integer multiple of some k_L.
    void validate() const;
    [[nodiscard]] double step(int level) const;
    [[nodiscard]] int num_steps(int level) const;
};

/// A failure inside one level of an experiment.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(int level, const std::string& what);
    [[nodiscard]] int level() const { return level_; }

private:
    int level_;
};

struct LevelResult {
    ErrorReport report;
    StabilityRecord stability;
};

struct ExperimentResult {
    std::vector<ErrorReport> reports;
    std::vector<StabilityRecord> stability;
    std::vector<RateRow> rates;

    /// Stability bound satisfied at every step of every level.
    [[nodiscard]] bool stable(double slack = 1e-10) const;
};

/// One level: mesh, k_L, L2-projected initial data, backward Euler to T,
/// errors at T and the stability record.
LevelResult run_level(const ExperimentConfig& config, int level);

/// Levels 0..max_level. Writes the CSV, a rates summary and optional plot
/// data when `output_path` is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader =
    "level,h,k,dofs,err_u,err_grad_u,err_sigma,err_div_sigma,natural_norm";

/// Shortest round-trip-safe form with 17 significant digits.
std::string format_number(double value);

void write_csv(std::ostream& out, const std::vector<ErrorReport>& reports);
void write_rates(std::ostream& out, const std::vector<RateRow>& rates);
void write_plot_data(std::ostream& out, const std::vector<ErrorReport>& reports, Quantity quantity);

/// Paths derived from the CSV path `out.csv`: `out_rates.csv` and
/// `out_<quantity>.dat`.
std::string rates_path(const std::string& csv_path);
std::string plot_data_path(const std::string& csv_path, Quantity quantity);

/// Checks that P1 traces and RT0 normal traces agree from both sides of
/// every interior edge for the given discrete state. Returns an empty
/// string on success.
std::string check_conformity(const Mesh& mesh, const DofMap& dofs, const SystemState& state, double tol = 1e-10);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    [[nodiscard]] bool passed() const;
};

/// Property checks at desk scale: quadrature exactness, mesh invariants,
/// conformity, form symmetry and definiteness, the minimizer property,
/// decoupling against standard Galerkin, projection rates and the stability
/// bound on a short experiment.
VerificationReport run_verification_suite(const ExperimentConfig& config);

/// Command-line entry point; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fosls
