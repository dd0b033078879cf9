#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "randtr/problems.hpp"
#include "randtr/theory.hpp"
#include "randtr/trust_region.hpp"

namespace randtr {

struct ProblemSpec {
  std::string name;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
};

/// Initial point rule shared by every variant of an experiment.
struct InitSpec {
  /// saddle | near_saddle | zero | random | random_gd | random_sphere | random_sphere_gd
  std::string rule = "near_saddle";
  double radius = 1e-3;
  double scale = 1.0;
  double gd_step = 0.1;
  std::size_t gd_iters = 500;
};

struct VariantSpec {
  std::string label;
  TrustRegionConfig config;
};

struct ExperimentSpec {
  std::string name = "experiment";
  ProblemSpec problem;
  InitSpec init;
  std::vector<VariantSpec> variants;
  std::filesystem::path out_dir;
  std::size_t repetitions = 1;
  /// Solver seed of repetition i is seed + i.
  std::uint64_t seed = 0;
  /// Tolerances used by diagnose_bounds.
  double diag_epsilon = 1e-8;
  double diag_crit_epsilon = 0.1;
  double diag_confidence = 0.1;
};

/// Parses the `key = value` / `[variant LABEL]` format documented in
/// docs/config.md. Throws ArgumentError with a line number on bad input.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);

ProblemInstance build_problem(const ProblemSpec& spec);
DenseVector initial_point(const InitSpec& init, ProblemInstance& problem);

struct RunOutcome {
  std::string run_id;
  std::string variant;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  TrustRegionConfig config;
  std::optional<RunReport> report;
  std::string error;
  std::filesystem::path csv_path;
};

/// Builds the problem and x0 once, runs every variant for every repetition,
/// and writes <variant>_rep<i>.csv plus summary.json into out_dir (when set).
/// Oracle faults and numerical failures are recorded per run; other errors propagate.
std::vector<RunOutcome> run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "run_id,variant,k,f,grad_norm,rho,theta,accepted,stop_reason,delta,xi_norm,inner_iters,"
    "hvp_cum,f_cum,grad_cum,wall_ms";

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

void emit_csv(const RunReport& report, const std::string& run_id, const std::string& variant,
              const std::filesystem::path& path);

struct CsvRow {
  std::string run_id;
  std::string variant;
  std::size_t k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  bool accepted = false;
  std::string stop_reason;
  double delta = 0.0;
  double xi_norm = 0.0;
  std::size_t inner_iters = 0;
  std::uint64_t hvp_cum = 0;
  std::uint64_t f_cum = 0;
  std::uint64_t grad_cum = 0;
  double wall_ms = 0.0;
};

std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// JSON text of one summary file (one object per run).
std::string summary_json(const ExperimentSpec& spec, const std::vector<RunOutcome>& runs);

struct BoundCheck {
  std::string run_id;
  std::string name;
  std::optional<double> observed;
  std::optional<double> predicted;
  bool pass = false;
  /// Only gating checks decide the overall verdict; the rest are reports.
  bool gating = false;
  std::string note;
};

struct DiagnosticsReport {
  std::vector<BoundCheck> checks;
  std::vector<std::string> omissions;
  bool all_gating_pass() const;
};

/// Recomputes the theory bounds for the spec's problem and compares them to
/// the runs in a summary produced by run_experiment.
DiagnosticsReport diagnose_bounds(const ExperimentSpec& spec, const std::string& summary_text);

std::string diagnostics_json(const DiagnosticsReport& report);

}  // namespace randtr
