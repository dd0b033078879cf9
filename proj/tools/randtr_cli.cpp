// randtr: run experiments, check bounds, play the resisting oracle, selftest.
//
// Exit codes: 0 ok, 1 bad arguments, 2 invariant violation, 3 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "randtr/adversary.hpp"
#include "randtr/harness.hpp"
#include "randtr/props.hpp"

namespace {

enum Exit { kOk = 0, kArgs = 1, kInvariant = 2, kIo = 3 };

std::string default_out_dir() {
  const char* env = std::getenv("RANDTR_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "randtr_out";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw randtr::IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& spec_path, const std::string& out, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> reps) {
  randtr::ExperimentSpec spec = randtr::load_spec(spec_path);
  spec.out_dir = out.empty() ? std::filesystem::path(default_out_dir()) / spec.name
                             : std::filesystem::path(out);
  if (seed) spec.seed = *seed;
  if (reps) spec.repetitions = *reps;
  const auto runs = randtr::run_experiment(spec);
  std::size_t failed = 0;
  for (const auto& r : runs) {
    if (!r.report) {
      ++failed;
      std::cout << r.run_id << "  FAILED: " << r.error << '\n';
      continue;
    }
    const auto& rep = *r.report;
    std::cout << r.run_id << "  outer=" << rep.records.size() << "  f=" << rep.final_f
              << "  |g|=" << rep.final_grad_norm << "  hvp=" << rep.totals.n_hvp << "  "
              << randtr::to_string(rep.terminated_by) << '\n';
  }
  std::cout << "wrote " << (spec.out_dir / "summary.json").string() << '\n';
  return failed == 0 ? kOk : kInvariant;
}

int cmd_diagnose(const std::string& spec_path, const std::string& summary_path) {
  const randtr::ExperimentSpec spec = randtr::load_spec(spec_path);
  const randtr::DiagnosticsReport rep = randtr::diagnose_bounds(spec, slurp(summary_path));
  std::cout << randtr::diagnostics_json(rep) << '\n';
  return rep.all_gating_pass() ? kOk : kInvariant;
}

int cmd_adversary(std::size_t queries, std::size_t dim, std::size_t seeds) {
  const auto solver = randtr::make_tr_query_solver(dim, randtr::DenseVector::unit(dim, 0));
  randtr::AdversaryOptions opt;
  opt.escape_seeds = seeds;
  const randtr::AdversaryReport rep = randtr::run_adversary_experiment(solver, queries, dim, opt);
  nlohmann::json j{{"queries", rep.log.size()},
                   {"budget", rep.K},
                   {"dim", rep.d},
                   {"budget_exhausted", rep.truncated},
                   {"span_rank", rep.span_rank},
                   {"min_queried_f", rep.min_queried_f},
                   {"replay_error", rep.replay_error},
                   {"revealed_min_value", rep.revealed_min_value},
                   {"minimizer_norm", rep.minimizer_norm},
                   {"escape_seeds", rep.escapes.size()},
                   {"escaped", rep.escaped_count()}};
  std::cout << j.dump(1) << '\n';
  return rep.min_queried_f >= 0.0 ? kOk : kInvariant;
}

int cmd_selftest(std::size_t max_dim, std::uint64_t seed) {
  bool ok = true;
  for (const auto& s : randtr::props::run_property_suites(max_dim, seed)) {
    std::cout << (s.ok ? "PASS  " : "FAIL  ") << s.name << "  " << s.detail << '\n';
    ok = ok && s.ok;
  }
  return ok ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized trust-region experiments"};
  app.require_subcommand(1);

  std::string spec_path, out, summary_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  auto* run = app.add_subcommand("run", "Run every variant of an experiment spec");
  run->add_option("spec", spec_path, "Experiment spec file")->required();
  run->add_option("--out", out, "Output directory (default $RANDTR_OUT_DIR/<name>)");
  run->add_option("--seed", seed, "Base solver seed");
  run->add_option("--reps", reps, "Repetitions per variant");

  auto* diag = app.add_subcommand("diagnose", "Compare a summary against the theory bounds");
  diag->add_option("spec", spec_path, "Experiment spec file")->required();
  diag->add_option("summary", summary_path, "summary.json written by run")->required();

  std::size_t queries = 25, dim = 51, escape_seeds = 100;
  auto* adv = app.add_subcommand("adversary", "Resisting-oracle lower-bound experiment");
  adv->add_option("--queries", queries, "Query budget K")->check(CLI::PositiveNumber);
  adv->add_option("--dim", dim, "Dimension (>= 2K + 1)")->check(CLI::PositiveNumber);
  adv->add_option("--escape-seeds", escape_seeds, "Randomized runs on the revealed function");

  std::size_t max_dim = 20;
  std::uint64_t st_seed = 7;
  auto* self = app.add_subcommand("selftest", "Run the property suites at small dimension");
  self->add_option("--max-dim", max_dim, "Largest instance dimension")->check(CLI::Range(3, 200));
  self->add_option("--seed", st_seed, "Instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kArgs;
  }

  try {
    if (*run) return cmd_run(spec_path, out, seed, reps);
    if (*diag) return cmd_diagnose(spec_path, summary_path);
    if (*adv) return cmd_adversary(queries, dim, escape_seeds);
    if (*self) return cmd_selftest(max_dim, st_seed);
  } catch (const randtr::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const randtr::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kArgs;
  } catch (const randtr::DimensionError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kArgs;
  } catch (const randtr::Error& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  }
  return kArgs;
}
