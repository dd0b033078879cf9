#include "randtr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace randtr {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw ArgumentError("spec line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(line, "not a number: '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& v, std::size_t line) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(line, "not an unsigned integer: '" + v + "'");
  return out;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

struct Setting {
  std::string key;
  std::string value;
  std::size_t line;
};

// Returns false if `key` is not a solver setting.
bool apply_solver_key(TrustRegionConfig& c, const Setting& s, bool& delta_bar_set) {
  const std::string& v = s.value;
  const std::size_t ln = s.line;
  if (s.key == "solver") {
    const std::string u = upper(v);
    if (u == "TCG_BG") c.solver = SolverKind::TCG_BG;
    else if (u == "TCG_CLASSIC") c.solver = SolverKind::TCG_CLASSIC;
    else bad(ln, "solver must be TCG_BG or TCG_CLASSIC");
  } else if (s.key == "xi_rule") {
    const std::string u = upper(v);
    if (u == "THEORY") c.xi_rule = XiRule::THEORY;
    else if (u == "PRACTICAL") c.xi_rule = XiRule::PRACTICAL;
    else bad(ln, "xi_rule must be THEORY or PRACTICAL");
  } else if (s.key == "hessian_shift" || s.key == "shift") {
    c.hessian_shift = v == "sqrt_eps" ? std::sqrt(std::numeric_limits<double>::epsilon())
                                      : parse_double(v, ln);
  } else if (s.key == "sigma") {
    c.sigma = parse_double(v, ln);
  } else if (s.key == "rho_prime") {
    c.rho_prime = parse_double(v, ln);
  } else if (s.key == "rho_double_prime") {
    c.rho_double_prime = parse_double(v, ln);
  } else if (s.key == "delta0") {
    c.delta0 = parse_double(v, ln);
  } else if (s.key == "delta_bar") {
    c.delta_bar = parse_double(v, ln);
    delta_bar_set = true;
  } else if (s.key == "omega1") {
    c.omega1 = parse_double(v, ln);
  } else if (s.key == "omega2") {
    c.omega2 = parse_double(v, ln);
  } else if (s.key == "max_outer") {
    c.max_outer = parse_uint(v, ln);
  } else if (s.key == "max_inner") {
    c.max_inner = parse_uint(v, ln);
  } else if (s.key == "grad_tol") {
    c.grad_tol = parse_double(v, ln);
  } else {
    return false;
  }
  return true;
}

const std::vector<std::string>& problem_keys() {
  static const std::vector<std::string> keys = {"d",       "n",    "m",      "r",
                                                "lambda",  "beta", "density", "penalty",
                                                "eigenvalues"};
  return keys;
}

std::string param(const ProblemSpec& p, const std::string& key, const std::string& fallback = {}) {
  const auto it = p.params.find(key);
  if (it != p.params.end()) return it->second;
  if (fallback.empty()) throw ArgumentError("problem '" + p.name + "' needs parameter '" + key + "'");
  return fallback;
}

std::size_t param_size(const ProblemSpec& p, const std::string& key, const std::string& fb = {}) {
  return static_cast<std::size_t>(parse_uint(param(p, key, fb), 0));
}

double param_double(const ProblemSpec& p, const std::string& key, const std::string& fb = {}) {
  return parse_double(param(p, key, fb), 0);
}

json series_of(const RunReport& r) {
  json f = json::array(), g = json::array(), delta = json::array(), inner = json::array(),
       r0 = json::array(), acc = json::array(), stop = json::array(), xi = json::array(),
       hvp = json::array();
  for (const IterationRecord& rec : r.records) {
    f.push_back(rec.f_value);
    g.push_back(rec.grad_norm);
    delta.push_back(rec.delta_before);
    inner.push_back(rec.inner_iters);
    r0.push_back(rec.r0_norm);
    acc.push_back(rec.accepted ? 1 : 0);
    stop.push_back(std::string(to_string(rec.stop_reason)));
    xi.push_back(rec.xi_norm);
    hvp.push_back(rec.hvp_cum);
  }
  return json{{"f", f},          {"grad_norm", g},      {"delta", delta},
              {"inner_iters", inner}, {"r0_norm", r0},   {"accepted", acc},
              {"stop_reason", stop},  {"xi_norm", xi},   {"hvp_cum", hvp}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// ------------------------------------------------------------------ parsing

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  std::vector<Setting> base;
  std::vector<std::pair<std::string, std::vector<Setting>>> sections;
  std::optional<std::uint64_t> problem_seed;

  std::istringstream in(text);
  std::string raw;
  std::size_t ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad(ln, "unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner.rfind("variant", 0) != 0) bad(ln, "only [variant LABEL] sections are allowed");
      const std::string label = trim(inner.substr(7));
      if (label.empty()) bad(ln, "variant needs a label");
      if (label.find_first_of(",/\\ ") != std::string::npos) bad(ln, "label must not contain , / \\ or spaces");
      for (const auto& s : sections) {
        if (s.first == label) bad(ln, "duplicate variant '" + label + "'");
      }
      sections.push_back({label, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad(ln, "expected key = value");
    Setting s{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), ln};
    if (s.key.empty() || s.value.empty()) bad(ln, "empty key or value");

    if (!sections.empty()) {
      TrustRegionConfig probe;
      bool unused = false;
      if (!apply_solver_key(probe, s, unused)) bad(ln, "unknown variant key '" + s.key + "'");
      sections.back().second.push_back(s);
      continue;
    }
    const std::string& k = s.key;
    const std::string& v = s.value;
    if (k == "name") spec.name = v;
    else if (k == "problem") spec.problem.name = v;
    else if (k == "problem_seed") problem_seed = parse_uint(v, ln);
    else if (k == "seed") spec.seed = parse_uint(v, ln);
    else if (k == "reps" || k == "repetitions") spec.repetitions = parse_uint(v, ln);
    else if (k == "out") spec.out_dir = v;
    else if (k == "x0") spec.init.rule = v;
    else if (k == "x0_radius") spec.init.radius = parse_double(v, ln);
    else if (k == "x0_scale") spec.init.scale = parse_double(v, ln);
    else if (k == "gd_step") spec.init.gd_step = parse_double(v, ln);
    else if (k == "gd_iters") spec.init.gd_iters = parse_uint(v, ln);
    else if (k == "diag_epsilon") spec.diag_epsilon = parse_double(v, ln);
    else if (k == "diag_crit_epsilon") spec.diag_crit_epsilon = parse_double(v, ln);
    else if (k == "diag_confidence") spec.diag_confidence = parse_double(v, ln);
    else if (std::find(problem_keys().begin(), problem_keys().end(), k) != problem_keys().end()) {
      spec.problem.params[k] = v;
    } else {
      TrustRegionConfig probe;
      bool unused = false;
      if (!apply_solver_key(probe, s, unused)) bad(ln, "unknown key '" + k + "'");
      base.push_back(s);
    }
  }

  if (spec.problem.name.empty()) throw ArgumentError("spec: missing 'problem'");
  if (sections.empty()) throw ArgumentError("spec: no variants");
  if (spec.repetitions < 1) throw ArgumentError("spec: reps must be >= 1");
  spec.problem.seed = problem_seed.value_or(spec.seed);

  for (const auto& [label, settings] : sections) {
    VariantSpec vs{label, {}};
    bool delta_bar_set = false;
    for (const Setting& s : base) apply_solver_key(vs.config, s, delta_bar_set);
    for (const Setting& s : settings) apply_solver_key(vs.config, s, delta_bar_set);
    if (!delta_bar_set) vs.config.delta_bar = 10.0 * vs.config.delta0;
    try {
      vs.config.validate();
    } catch (const ArgumentError& e) {
      throw ArgumentError("variant '" + label + "': " + e.what());
    }
    spec.variants.push_back(std::move(vs));
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read spec file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

// ---------------------------------------------------------------- building

ProblemInstance build_problem(const ProblemSpec& p) {
  const std::string& n = p.name;
  if (n == "sine_saddle") return make_sine_saddle(param_size(p, "d"), p.seed);
  if (n == "worst_case_cosine") return make_worst_case_cosine(param_size(p, "d"));
  if (n == "rank_one_factorization") {
    std::vector<double> eig;
    std::stringstream ss(param(p, "eigenvalues"));
    std::string item;
    while (std::getline(ss, item, ',')) eig.push_back(parse_double(trim(item), 0));
    return make_rank_one_factorization(eig, p.seed);
  }
  if (n == "rect_matrix_approx") {
    return make_rect_matrix_approx(param_size(p, "m"), param_size(p, "n"), param_size(p, "r"),
                                   param_double(p, "lambda", "0"),
                                   param_double(p, "density", "0.01"), p.seed);
  }
  if (n == "psd_matrix_approx") {
    return make_psd_matrix_approx(param_size(p, "n"), param_size(p, "r"),
                                  param_double(p, "density", "0.01"), p.seed);
  }
  if (n == "nonlinear_synchronization") {
    return make_nonlinear_synchronization(param_size(p, "d"), param_size(p, "n"),
                                          param_double(p, "beta"), p.seed,
                                          param_double(p, "penalty", "10"));
  }
  throw ArgumentError("unknown problem '" + n + "'");
}

DenseVector initial_point(const InitSpec& init, ProblemInstance& problem) {
  const std::size_t d = problem.oracle.dim();
  const std::string& r = init.rule;
  if (r == "zero") return DenseVector(d);
  if (r == "random") return random_point(d, init.scale, problem.seed);
  if (r == "random_gd") {
    ObjectiveOracle warm = problem.oracle;
    return gradient_descent(warm, random_point(d, init.scale, problem.seed), init.gd_step,
                            init.gd_iters);
  }
  if (r == "random_sphere" || r == "random_sphere_gd") {
    // Particle problems: each block of length params["d"] normalized.
    const auto it = problem.params.find("d");
    if (problem.name != "nonlinear_synchronization" || it == problem.params.end()) {
      throw ArgumentError("x0 = " + r + " needs a particle problem");
    }
    const std::size_t block = std::stoul(it->second);
    DenseVector x = random_point(d, 1.0, problem.seed);
    for (std::size_t i = 0; i < d; i += block) {
      double s = 0.0;
      for (std::size_t c = i; c < i + block; ++c) s += x[c] * x[c];
      for (std::size_t c = i; c < i + block; ++c) x[c] /= std::sqrt(s);
    }
    if (r == "random_sphere") return x;
    ObjectiveOracle warm = problem.oracle;
    return gradient_descent(warm, std::move(x), init.gd_step, init.gd_iters);
  }
  if (r == "saddle" || r == "near_saddle") {
    if (!problem.known_saddle) throw ArgumentError("problem has no known saddle for x0 = " + r);
    if (r == "saddle") return *problem.known_saddle;
    return near_point(*problem.known_saddle, init.radius, problem.seed);
  }
  throw ArgumentError("unknown x0 rule '" + r + "'");
}

// ------------------------------------------------------------------ output

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("format_double failed");
  return std::string(buf, ptr);
}

void emit_csv(const RunReport& report, const std::string& run_id, const std::string& variant,
              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << kCsvHeader << '\n';
  for (const IterationRecord& r : report.records) {
    out << run_id << ',' << variant << ',' << r.k << ',' << format_double(r.f_value) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.rho) << ','
        << format_double(r.theta) << ',' << (r.accepted ? 1 : 0) << ','
        << to_string(r.stop_reason) << ',' << format_double(r.delta_before) << ','
        << format_double(r.xi_norm) << ',' << r.inner_iters << ',' << r.hvp_cum << ','
        << r.f_cum << ',' << r.grad_cum << ',' << format_double(r.wall_ms) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("bad CSV header in " + path.string());
  std::vector<CsvRow> rows;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 16) throw IoError("bad CSV row " + std::to_string(ln) + " in " + path.string());
    CsvRow r;
    r.run_id = f[0];
    r.variant = f[1];
    r.k = parse_uint(f[2], ln);
    r.f = parse_double(f[3], ln);
    r.grad_norm = parse_double(f[4], ln);
    r.rho = parse_double(f[5], ln);
    r.theta = parse_double(f[6], ln);
    r.accepted = f[7] == "1";
    r.stop_reason = f[8];
    r.delta = parse_double(f[9], ln);
    r.xi_norm = parse_double(f[10], ln);
    r.inner_iters = parse_uint(f[11], ln);
    r.hvp_cum = parse_uint(f[12], ln);
    r.f_cum = parse_uint(f[13], ln);
    r.grad_cum = parse_uint(f[14], ln);
    r.wall_ms = parse_double(f[15], ln);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_json(const ExperimentSpec& spec, const std::vector<RunOutcome>& runs) {
  json root;
  root["experiment"] = spec.name;
  root["problem"] = {{"name", spec.problem.name}, {"params", spec.problem.params},
                     {"seed", spec.problem.seed}};
  json arr = json::array();
  for (const RunOutcome& o : runs) {
    const TrustRegionConfig& c = o.config;
    json j{{"run_id", o.run_id},
           {"variant", o.variant},
           {"repetition", o.repetition},
           {"seed", o.seed},
           {"solver", std::string(to_string(c.solver))},
           {"xi_rule", std::string(to_string(c.xi_rule))},
           {"sigma", c.sigma},
           {"hessian_shift", c.hessian_shift},
           {"delta0", c.delta0},
           {"delta_bar", c.delta_bar},
           {"omega1", c.omega1},
           {"omega2", c.omega2},
           {"rho_prime", c.rho_prime},
           {"grad_tol", c.grad_tol}};
    if (!o.report) {
      j["error"] = o.error;
    } else {
      const RunReport& r = *o.report;
      char digest[17];
      std::snprintf(digest, sizeof digest, "%016llx",
                    static_cast<unsigned long long>(r.final_point_digest));
      j["dim"] = r.x_final.size();
      j["f0"] = r.records.empty() ? json(r.final_f) : json(r.records.front().f_value);
      j["terminated_by"] = std::string(to_string(r.terminated_by));
      j["outer_iterations"] = r.records.size();
      j["final_f"] = r.final_f;
      j["final_grad_norm"] = r.final_grad_norm;
      j["n_f"] = r.totals.n_f;
      j["n_grad"] = r.totals.n_grad;
      j["n_hvp"] = r.totals.n_hvp;
      j["wall_time_ms"] = r.wall_time_ms;
      j["final_point_digest"] = digest;
      j["csv"] = o.csv_path.string();
      j["series"] = series_of(r);
    }
    arr.push_back(std::move(j));
  }
  root["runs"] = std::move(arr);
  return root.dump(1);
}

std::vector<RunOutcome> run_experiment(const ExperimentSpec& spec) {
  if (spec.variants.empty()) throw ArgumentError("no variants");
  if (spec.repetitions < 1) throw ArgumentError("repetitions must be >= 1");

  ProblemInstance problem = build_problem(spec.problem);
  const DenseVector x0 = initial_point(spec.init, problem);

  if (!spec.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw IoError("cannot create " + spec.out_dir.string() + ": " + ec.message());
  }

  std::vector<RunOutcome> runs;
  for (const VariantSpec& v : spec.variants) {
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      RunOutcome o;
      o.variant = v.label;
      o.repetition = rep;
      o.seed = spec.seed + rep;
      o.run_id = v.label + "-r" + std::to_string(rep);
      o.config = v.config;
      o.config.seed = o.seed;
      ObjectiveOracle oracle = problem.oracle;
      oracle.reset_counters();
      try {
        o.report = tr_run(oracle, x0, o.config);
      } catch (const OracleFault& e) {
        o.error = e.what();
      } catch (const NumericalError& e) {
        // Overflow inside the solver, typically after huge oracle outputs.
        o.error = std::string("numerical failure: ") + e.what();
      }
      if (o.report && !spec.out_dir.empty()) {
        o.csv_path = spec.out_dir / (v.label + "_rep" + std::to_string(rep) + ".csv");
        emit_csv(*o.report, o.run_id, o.variant, o.csv_path);
      }
      runs.push_back(std::move(o));
    }
  }

  if (!spec.out_dir.empty()) {
    const auto path = spec.out_dir / "summary.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << summary_json(spec, runs) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
  }
  return runs;
}

// ------------------------------------------------------------- diagnostics

bool DiagnosticsReport::all_gating_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const BoundCheck& c) { return !c.gating || c.pass; });
}

DiagnosticsReport diagnose_bounds(const ExperimentSpec& spec, const std::string& summary_text) {
  json root;
  try {
    root = json::parse(summary_text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("summary is not valid JSON: ") + e.what());
  }
  if (!root.contains("runs") || !root["runs"].is_array()) throw ArgumentError("summary has no runs");

  const ProblemInstance problem = build_problem(spec.problem);
  const ProblemConstants& pc = problem.constants;
  DiagnosticsReport rep;

  for (const json& run : root["runs"]) {
    const std::string id = run.value("run_id", std::string("?"));
    if (run.contains("error")) {
      rep.omissions.push_back(id + ": run failed (" + run["error"].get<std::string>() + ")");
      continue;
    }
    const std::string label = run.value("variant", std::string());
    const auto vit = std::find_if(spec.variants.begin(), spec.variants.end(),
                                  [&](const VariantSpec& v) { return v.label == label; });
    if (vit == spec.variants.end()) {
      rep.omissions.push_back(id + ": variant '" + label + "' not in spec");
      continue;
    }
    const TrustRegionConfig& cfg = vit->config;
    const double f0 = run.at("f0").get<double>();
    const std::size_t dim = run.at("dim").get<std::size_t>();
    const json& s = run.at("series");
    const std::vector<double> gn = s.at("grad_norm").get<std::vector<double>>();
    const std::vector<double> delta = s.at("delta").get<std::vector<double>>();
    const std::vector<double> r0 = s.at("r0_norm").get<std::vector<double>>();
    const std::vector<std::size_t> inner = s.at("inner_iters").get<std::vector<std::size_t>>();
    const std::size_t outer = run.at("outer_iterations").get<std::size_t>();
    const double final_g = run.at("final_grad_norm").get<double>();

    // K_M is monotone in epsilon regardless of constants.
    {
      const double R = pc.L_G ? 1.0 / *pc.L_G : 1.0;
      const double a = local_phase_bound(R, spec.diag_epsilon);
      const double b = local_phase_bound(R, 10.0 * spec.diag_epsilon);
      rep.checks.push_back({id, "K_M_monotone_in_epsilon", a, b, a >= b, true,
                            "K_M(eps) >= K_M(10 eps)"});
    }

    std::optional<TheoryBounds> tb;
    try {
      tb = compute_theory_bounds(pc, cfg, f0, spec.diag_confidence, spec.diag_epsilon, dim);
    } catch (const MissingConstant& e) {
      rep.omissions.push_back(id + ": " + e.what());
    } catch (const ArgumentError& e) {
      rep.omissions.push_back(id + ": " + e.what());
    }

    if (tb) {
      const double predicted = tb->K_GN + tb->K_M_eps;
      rep.checks.push_back({id, "outer_iterations_vs_KGN_plus_KM", static_cast<double>(outer),
                            std::isfinite(predicted) ? std::optional<double>(predicted) : std::nullopt,
                            static_cast<double>(outer) <= predicted, false,
                            cfg.sigma == 0.0        ? "deterministic variant: the bound is infinite"
                            : tb->sigma_small_enough ? "sigma satisfies the global noise condition"
                                                     : "sigma exceeds the global noise condition"});

      const double crit = eps_criticality_bound(*pc.L_G, f0, *pc.f_low, cfg.rho_prime, cfg.delta0,
                                                spec.diag_crit_epsilon);
      std::optional<double> first;
      for (std::size_t k = 0; k < gn.size() && !first; ++k) {
        if (gn[k] <= spec.diag_crit_epsilon) first = static_cast<double>(k);
      }
      if (!first && final_g <= spec.diag_crit_epsilon) first = static_cast<double>(gn.size());
      rep.checks.push_back({id, "eps_criticality", first, crit, first && *first <= crit, false,
                            "first k with ||g_k|| <= " + format_double(spec.diag_crit_epsilon)});
    }

    if (pc.L_G && cfg.solver == SolverKind::TCG_BG) {
      const double L = *pc.L_G + cfg.hessian_shift;
      std::size_t violations = 0;
      double sum_bound = 0.0;
      double sum_obs = 0.0;
      for (std::size_t k = 0; k < inner.size(); ++k) {
        sum_obs += static_cast<double>(inner[k]);
        if (gn[k] == 0.0) {
          sum_bound += static_cast<double>(dim);
          continue;
        }
        const double thr = std::min(cfg.omega1 * gn[k], cfg.omega2 * gn[k] * gn[k]);
        const double bound = 1.0 + 2.0 * L * delta[k] * r0[k] / (thr * thr);
        sum_bound += std::min(bound, static_cast<double>(dim));
        if (static_cast<double>(inner[k]) > bound) ++violations;
      }
      rep.checks.push_back({id, "inner_iterations_large_gradient_cap",
                            static_cast<double>(violations), 0.0, violations == 0, false,
                            "iterations whose T exceeds 1 + 2 L_G Delta ||g + H xi|| / min(w1|g|, w2|g|^2)^2"});
      rep.checks.push_back({id, "inner_iterations_total", sum_obs, sum_bound, sum_obs <= sum_bound,
                            false, "sum of T_k vs sum of per-iteration caps"});
    } else if (!pc.L_G) {
      rep.omissions.push_back(id + ": inner-iteration cap needs L_G");
    }
  }
  return rep;
}

std::string diagnostics_json(const DiagnosticsReport& report) {
  json checks = json::array();
  for (const BoundCheck& c : report.checks) {
    checks.push_back({{"run_id", c.run_id},
                      {"name", c.name},
                      {"observed", c.observed ? finite_or_null(*c.observed) : json(nullptr)},
                      {"predicted", c.predicted ? finite_or_null(*c.predicted) : json(nullptr)},
                      {"pass", c.pass},
                      {"gating", c.gating},
                      {"note", c.note}});
  }
  return json{{"checks", checks},
              {"omissions", report.omissions},
              {"all_gating_pass", report.all_gating_pass()}}
      .dump(1);
}

}  // namespace randtr
