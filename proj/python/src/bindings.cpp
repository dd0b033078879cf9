// Python bindings: problems, oracles, the trust-region solver, the inner
// solver, theory calculators, the adversary experiment and the harness.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "randtr/adversary.hpp"
#include "randtr/harness.hpp"
#include "randtr/problems.hpp"
#include "randtr/theory.hpp"
#include "randtr/trust_region.hpp"

namespace py = pybind11;
using namespace randtr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseVector to_vec(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
  return DenseVector(std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const DenseVector& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Oracle backed by Python callables taking and returning numpy arrays.
ObjectiveOracle python_oracle(std::size_t dim, py::function value, py::function grad,
                              py::function hvp) {
  return ObjectiveOracle(
      dim, [value](const DenseVector& x) { return value(to_array(x)).cast<double>(); },
      [grad](const DenseVector& x) { return to_vec(grad(to_array(x)).cast<Array>()); },
      [hvp](const DenseVector& x, const DenseVector& u) {
        return to_vec(hvp(to_array(x), to_array(u)).cast<Array>());
      });
}

// Model with a dense symmetric H given row-major.
QuadraticModel dense_model(const py::array_t<double, py::array::c_style | py::array::forcecast>& h,
                           const Array& g) {
  if (h.ndim() != 2 || h.shape(0) != h.shape(1) || h.shape(0) != g.size()) {
    throw DimensionError("H must be d x d with d = len(g)");
  }
  const std::size_t d = static_cast<std::size_t>(g.size());
  auto mat = std::make_shared<std::vector<double>>(h.data(), h.data() + d * d);
  return QuadraticModel{to_vec(g), [mat, d](const DenseVector& u) {
                          DenseVector y(d);
                          for (std::size_t i = 0; i < d; ++i) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < d; ++j) s += (*mat)[i * d + j] * u[j];
                            y[i] = s;
                          }
                          return y;
                        }};
}

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["k"] = r.k;
  d["f"] = r.f_value;
  d["grad_norm"] = r.grad_norm;
  d["delta"] = r.delta_before;
  d["delta_after"] = r.delta_after;
  d["rho"] = r.rho;
  d["theta"] = r.theta;
  d["accepted"] = r.accepted;
  d["stop_reason"] = std::string(to_string(r.stop_reason));
  d["inner_iters"] = r.inner_iters;
  d["xi_norm"] = r.xi_norm;
  d["model_decrease"] = r.model_decrease;
  d["step_norm"] = r.step_norm;
  d["hvp_cum"] = r.hvp_cum;
  d["f_cum"] = r.f_cum;
  d["grad_cum"] = r.grad_cum;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Randomized trust-region method with tCG-bg inner solver";

  auto base = py::register_exception<Error>(m, "RandtrError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  auto fault = py::register_exception<OracleFault>(m, "OracleFault", base.ptr());
  py::register_exception<RunFault>(m, "RunFault", fault.ptr());
  py::register_exception<InvariantViolation>(m, "InvariantViolation", base.ptr());
  py::register_exception<MissingConstant>(m, "MissingConstant", base.ptr());
  py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::enum_<SolverKind>(m, "SolverKind")
      .value("TCG_BG", SolverKind::TCG_BG)
      .value("TCG_CLASSIC", SolverKind::TCG_CLASSIC);
  py::enum_<XiRule>(m, "XiRule").value("THEORY", XiRule::THEORY).value("PRACTICAL", XiRule::PRACTICAL);

  py::class_<TrustRegionConfig>(m, "TrustRegionConfig")
      .def(py::init<>())
      .def_readwrite("rho_prime", &TrustRegionConfig::rho_prime)
      .def_readwrite("rho_double_prime", &TrustRegionConfig::rho_double_prime)
      .def_readwrite("delta_bar", &TrustRegionConfig::delta_bar)
      .def_readwrite("delta0", &TrustRegionConfig::delta0)
      .def_readwrite("sigma", &TrustRegionConfig::sigma)
      .def_readwrite("omega1", &TrustRegionConfig::omega1)
      .def_readwrite("omega2", &TrustRegionConfig::omega2)
      .def_readwrite("xi_rule", &TrustRegionConfig::xi_rule)
      .def_readwrite("hessian_shift", &TrustRegionConfig::hessian_shift)
      .def_readwrite("max_outer", &TrustRegionConfig::max_outer)
      .def_readwrite("max_inner", &TrustRegionConfig::max_inner)
      .def_readwrite("grad_tol", &TrustRegionConfig::grad_tol)
      .def_readwrite("seed", &TrustRegionConfig::seed)
      .def_readwrite("solver", &TrustRegionConfig::solver)
      .def("validate", &TrustRegionConfig::validate);

  py::class_<ObjectiveOracle>(m, "Oracle")
      .def(py::init(&python_oracle), py::arg("dim"), py::arg("value"), py::arg("grad"),
           py::arg("hvp"))
      .def_property_readonly("dim", &ObjectiveOracle::dim)
      .def("value", [](ObjectiveOracle& o, const Array& x) { return o.value(to_vec(x)); })
      .def("gradient",
           [](ObjectiveOracle& o, const Array& x) { return to_array(o.gradient(to_vec(x))); })
      .def("hvp",
           [](ObjectiveOracle& o, const Array& x, const Array& u) {
             return to_array(o.hvp(to_vec(x), to_vec(u)));
           })
      .def_property_readonly("counters",
                             [](const ObjectiveOracle& o) {
                               const auto& c = o.counters();
                               return py::dict(py::arg("n_f") = c.n_f, py::arg("n_grad") = c.n_grad,
                                               py::arg("n_hvp") = c.n_hvp);
                             })
      .def("reset_counters", &ObjectiveOracle::reset_counters)
      .def(
          "validate",
          [](ObjectiveOracle& o, const Array& x, std::size_t probes, double step, std::uint64_t seed) {
            const auto r = validate_oracle(o, to_vec(x), probes, step, seed);
            return py::make_tuple(r.max_grad_rel_err, r.max_hvp_rel_err);
          },
          py::arg("x"), py::arg("n_probes") = 5, py::arg("step") = 1e-5, py::arg("seed") = 0);

  py::class_<ProblemConstants>(m, "ProblemConstants")
      .def(py::init<>())
      .def_readwrite("f_low", &ProblemConstants::f_low)
      .def_readwrite("L_G", &ProblemConstants::L_G)
      .def_readwrite("L_H", &ProblemConstants::L_H)
      .def_readwrite("mu", &ProblemConstants::mu)
      .def_readwrite("gamma_s", &ProblemConstants::gamma_s)
      .def_readwrite("R_s", &ProblemConstants::R_s);

  py::class_<ProblemInstance>(m, "Problem")
      .def_readonly("name", &ProblemInstance::name)
      .def_readonly("params", &ProblemInstance::params)
      .def_readonly("constants", &ProblemInstance::constants)
      .def_readonly("known_minimum_value", &ProblemInstance::known_minimum_value)
      .def_property_readonly("oracle",
                             [](ProblemInstance& p) -> ObjectiveOracle& { return p.oracle; },
                             py::return_value_policy::reference_internal)
      .def_property_readonly("dim", [](const ProblemInstance& p) { return p.oracle.dim(); })
      .def_property_readonly("known_saddle", [](const ProblemInstance& p) -> py::object {
        if (!p.known_saddle) return py::none();
        return to_array(*p.known_saddle);
      });

  m.def("sine_saddle", &make_sine_saddle, py::arg("d"), py::arg("seed") = 0);
  m.def("rank_one_factorization", &make_rank_one_factorization, py::arg("eigenvalues"),
        py::arg("seed") = 0);
  m.def("rect_matrix_approx", &make_rect_matrix_approx, py::arg("m"), py::arg("n"), py::arg("r"),
        py::arg("lam"), py::arg("density"), py::arg("seed") = 0);
  m.def("psd_matrix_approx", &make_psd_matrix_approx, py::arg("n"), py::arg("r"),
        py::arg("density"), py::arg("seed") = 0);
  m.def("worst_case_cosine", &make_worst_case_cosine, py::arg("d"));
  m.def("nonlinear_synchronization", &make_nonlinear_synchronization, py::arg("d"), py::arg("n"),
        py::arg("beta"), py::arg("seed") = 0, py::arg("penalty") = 10.0);

  m.def(
      "tr_run",
      [](ObjectiveOracle& oracle, const Array& x0, const TrustRegionConfig& cfg) {
        const RunReport r = tr_run(oracle, to_vec(x0), cfg);
        py::list recs;
        for (const auto& rec : r.records) recs.append(record_dict(rec));
        py::dict out;
        out["x"] = to_array(r.x_final);
        out["f"] = r.final_f;
        out["grad_norm"] = r.final_grad_norm;
        out["terminated_by"] = std::string(to_string(r.terminated_by));
        out["n_f"] = r.totals.n_f;
        out["n_grad"] = r.totals.n_grad;
        out["n_hvp"] = r.totals.n_hvp;
        out["digest"] = r.final_point_digest;
        out["records"] = recs;
        return out;
      },
      py::arg("oracle"), py::arg("x0"), py::arg("config") = TrustRegionConfig{});

  auto sub_dict = [](const SubproblemResult& s) {
    py::dict out;
    out["step"] = to_array(s.step);
    out["stop_reason"] = std::string(to_string(s.stop_reason));
    out["iterations"] = s.iterations;
    out["hvp_count"] = s.hvp_count;
    out["truncated"] = s.truncated;
    out["model_decrease"] = s.model_decrease;
    out["model_start"] = s.model_start;
    return out;
  };
  m.def(
      "tcg_bg",
      [sub_dict](const Array& h, const Array& g, double delta, std::optional<Array> xi,
                 double omega1, double omega2) {
        const QuadraticModel model = dense_model(h, g);
        SubproblemOptions opt;
        opt.omega1 = omega1;
        opt.omega2 = omega2;
        const DenseVector x = xi ? to_vec(*xi) : DenseVector(model.dim());
        return sub_dict(tcg_bg(model, delta, x, opt));
      },
      py::arg("H"), py::arg("g"), py::arg("delta"), py::arg("xi") = py::none(),
      py::arg("omega1") = 0.1, py::arg("omega2") = 1.0);
  m.def(
      "tcg_classic",
      [sub_dict](const Array& h, const Array& g, double delta, double omega1, double omega2) {
        SubproblemOptions opt;
        opt.omega1 = omega1;
        opt.omega2 = omega2;
        return sub_dict(tcg_classic(dense_model(h, g), delta, opt));
      },
      py::arg("H"), py::arg("g"), py::arg("delta"), py::arg("omega1") = 0.1,
      py::arg("omega2") = 1.0);

  m.def("mu_for_factorization", &mu_for_factorization, py::arg("eigenvalues"));
  m.def(
      "theory_bounds",
      [](const ProblemConstants& c, const TrustRegionConfig& cfg, double f0, double confidence,
         double epsilon, std::size_t dim) {
        const TheoryBounds b = compute_theory_bounds(c, cfg, f0, confidence, epsilon, dim);
        py::dict out;
        out["delta_crit"] = b.delta_crit;
        out["R_bar"] = b.R_bar;
        out["G_bar"] = b.G_bar;
        out["F_lg"] = b.F_lg;
        out["sigma_bar"] = b.sigma_bar;
        out["K_esc"] = b.K_esc;
        out["K_GN"] = b.K_GN;
        out["K_M_eps"] = b.K_M_eps;
        out["eps_crit_bound"] = b.eps_crit_bound;
        out["sigma_small_enough"] = b.sigma_small_enough;
        return out;
      },
      py::arg("constants"), py::arg("config"), py::arg("f0"), py::arg("delta_confidence"),
      py::arg("epsilon"), py::arg("dim"));

  m.def(
      "adversary",
      [](std::size_t queries, std::size_t dim, std::size_t escape_seeds) {
        const auto solver = make_tr_query_solver(dim, DenseVector::unit(dim, 0));
        AdversaryOptions opt;
        opt.escape_seeds = escape_seeds;
        const AdversaryReport r = run_adversary_experiment(solver, queries, dim, opt);
        py::dict out;
        out["queries"] = r.log.size();
        out["budget_exhausted"] = r.truncated;
        out["min_queried_f"] = r.min_queried_f;
        out["replay_error"] = r.replay_error;
        out["revealed_min_value"] = r.revealed_min_value;
        out["span_rank"] = r.span_rank;
        out["escaped"] = r.escaped_count();
        return out;
      },
      py::arg("queries") = 25, py::arg("dim") = 51, py::arg("escape_seeds") = 100);

  m.def(
      "run_spec",
      [](const std::string& text, const std::string& out_dir) {
        ExperimentSpec spec = parse_spec(text);
        spec.out_dir = out_dir;
        run_experiment(spec);
        return (spec.out_dir / "summary.json").string();
      },
      py::arg("spec_text"), py::arg("out_dir"),
      "Runs an experiment spec and returns the path of summary.json.");
  m.def(
      "diagnose",
      [](const std::string& spec_text, const std::string& summary_text) {
        return diagnostics_json(diagnose_bounds(parse_spec(spec_text), summary_text));
      },
      py::arg("spec_text"), py::arg("summary_text"));
}
