#include "snlevy/branching_sim.hpp"
#include "snlevy/errors.hpp"
#include "snlevy/fluctuation.hpp"
#include "snlevy/levy_model.hpp"
#include "snlevy/scale_fn.hpp"
#include "snlevy/tail_estimator.hpp"
#include "snlevy/verify.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace snlevy;

namespace {

template <class T, class F>
py::array_t<T> column(const std::vector<ReplicateOutcome>& v, F get) {
  py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
  auto m = a.template mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<py::ssize_t>(i)) = get(v[i]);
  return a;
}

py::dict fit_dict(const TailFitReport& r) {
  py::dict d;
  d["exponent"] = r.exponent;
  d["ci"] = py::make_tuple(r.ci_lo, r.ci_hi);
  d["prefactor"] = r.prefactor;
  d["flatness_ratio"] = r.flatness_ratio;
  d["fit_range"] = py::make_tuple(r.fit_lo, r.fit_hi);
  d["points_used"] = r.points_used;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Branching spectrally negative Levy processes";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<RegimeError>(m, "RegimeError", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

  py::class_<JumpComponent>(m, "JumpComponent")
      .def(py::init<double, double>(), py::arg("intensity"), py::arg("rate"))
      .def_readonly("intensity", &JumpComponent::intensity)
      .def_readonly("rate", &JumpComponent::rate);

  py::class_<LevyModel>(m, "LevyModel")
      .def(py::init([](double drift, double sigma_sq, const std::vector<std::pair<double, double>>& jumps) {
             std::vector<JumpComponent> j;
             for (const auto& [rho, eta] : jumps) j.push_back({rho, eta});
             return LevyModel(drift, sigma_sq, std::move(j));
           }),
           py::arg("drift"), py::arg("sigma_sq"), py::arg("jumps") = std::vector<std::pair<double, double>>{})
      .def_property_readonly("drift", &LevyModel::drift)
      .def_property_readonly("sigma_sq", &LevyModel::gaussian_sq)
      .def_property_readonly("jumps", &LevyModel::jumps)
      .def("compensated_drift", &LevyModel::compensated_drift)
      .def("__repr__", [](const LevyModel& lm) {
        return "LevyModel(drift=" + std::to_string(lm.drift()) + ", sigma_sq=" + std::to_string(lm.gaussian_sq()) +
               ", jumps=" + std::to_string(lm.jumps().size()) + ")";
      });

  m.def("psi", &psi, py::arg("model"), py::arg("lam"), py::arg("order") = 0);
  m.def("phi_roots", [](const LevyModel& lm, double q) {
    const auto r = phi_roots(lm, q);
    return py::make_tuple(r.minus, r.plus);
  }, py::arg("model"), py::arg("q"), "(Phi_-(q), Phi_+(q))");
  m.def("critical_point", [](const LevyModel& lm) {
    const auto c = critical_point(lm);
    return py::make_tuple(c.lambda_star, c.q_star);
  }, py::arg("model"), "(lambda_star, q_star)");
  m.def("esscher_tilt", &esscher_tilt, py::arg("model"), py::arg("c"));
  m.def("classify_regime", [](const LevyModel& lm, double beta) {
    const auto r = classify_regime(lm, beta);
    py::dict d;
    d["regime"] = std::string(to_string(r.regime));
    d["lambda_star"] = r.lambda_star;
    d["q_star"] = r.q_star;
    d["phi_minus"] = r.phi_minus;
    d["phi_plus"] = r.phi_plus;
    d["gamma"] = r.gamma_index ? py::object(py::int_(*r.gamma_index)) : py::object(py::none());
    d["exponent"] = r.tail_exponent();
    return d;
  }, py::arg("model"), py::arg("beta"));

  m.def("w_q", &w_q, py::arg("model"), py::arg("q"), py::arg("x"));
  m.def("z_q", &z_q, py::arg("model"), py::arg("q"), py::arg("x"));
  m.def("tilted_w", &tilted_w, py::arg("model"), py::arg("c"), py::arg("x"));
  m.def("w_numeric", [](const LevyModel& lm, double q, double x) { return w_numeric(lm, q, x); },
        py::arg("model"), py::arg("q"), py::arg("x"));

  m.def("mean_progeny", &mean_progeny, py::arg("model"), py::arg("beta"), py::arg("a"),
        py::arg("barrier") = py::none());
  m.def("second_moment_barrier", &second_moment_barrier, py::arg("model"), py::arg("beta"), py::arg("a"),
        py::arg("x"));
  m.def("exit_functionals", [](const LevyModel& lm, double beta, double a, double x) {
    const auto e = exit_functionals(lm, beta, a, x);
    return py::make_tuple(e.up, e.down);
  }, py::arg("model"), py::arg("beta"), py::arg("a"), py::arg("x"), "(up, down)");
  m.def("resolvent_density", &resolvent_density, py::arg("model"), py::arg("q"), py::arg("a"), py::arg("x"),
        py::arg("y"));
  m.def("chi", [](const LevyModel& lm, double beta) { return asym_constants(lm, beta).chi; },
        py::arg("model"), py::arg("beta"));

  m.def("simulate",
        [](const LevyModel& lm, double beta, std::int64_t replicates, std::uint64_t seed, double start,
           std::optional<double> barrier, double dt, std::int64_t cap, unsigned workers) {
          SimConfig c;
          c.beta = beta;
          c.start = start;
          c.barrier = barrier;
          c.dt = dt;
          c.cap_particles = cap;
          c.replicates = replicates;
          c.master_seed = seed;
          c.workers = workers;
          Dataset ds = [&] {
            py::gil_scoped_release release;
            return simulate_batch(lm, c);
          }();
          const auto& o = ds.outcomes;
          py::dict d;
          d["z0"] = column<std::int64_t>(o, [](const auto& r) { return r.z0; });
          d["max_pos"] = column<double>(o, [](const auto& r) { return r.max_pos; });
          d["total_particles"] = column<std::int64_t>(o, [](const auto& r) { return r.total_particles; });
          d["censored"] = column<bool>(o, [](const auto& r) { return r.censored; });
          d["wall_seconds"] = ds.stats.wall_seconds;
          return d;
        },
        py::arg("model"), py::arg("beta"), py::arg("replicates"), py::arg("seed") = 0, py::arg("start") = 1.0,
        py::arg("barrier") = py::none(), py::arg("dt") = 0.01, py::arg("cap_particles") = 1'000'000,
        py::arg("workers") = 0);

  m.def("survival_curve", [](const std::vector<std::int64_t>& samples, const std::vector<std::int64_t>& grid) {
    const auto c = survival_curve(samples, grid);
    py::dict d;
    d["n"] = c.grid;
    d["surv"] = c.surv;
    d["ci_lo"] = c.ci_lo;
    d["ci_hi"] = c.ci_hi;
    d["count"] = c.count;
    return d;
  }, py::arg("samples"), py::arg("grid"));
  m.def("log_grid", &log_grid, py::arg("lo"), py::arg("hi"), py::arg("points"));
  m.def("tail_slope", [](const std::vector<std::int64_t>& samples, double lo, double hi, int points) {
    const auto g = log_grid(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi), points);
    return fit_dict(tail_slope(survival_curve(samples, g), {lo, hi}));
  }, py::arg("samples"), py::arg("lo"), py::arg("hi"), py::arg("points") = 12);
  m.def("critical_scaling", [](const std::vector<std::int64_t>& samples, double lo, double hi, int points) {
    const auto g = log_grid(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi), points);
    return fit_dict(critical_scaling(survival_curve(samples, g), {lo, hi}));
  }, py::arg("samples"), py::arg("lo"), py::arg("hi"), py::arg("points") = 15);
  m.def("hill_estimator", [](const std::vector<std::int64_t>& samples, std::int64_t k) {
    const auto h = hill_estimator(samples, k);
    return py::make_tuple(h.alpha, h.std_error);
  }, py::arg("samples"), py::arg("k"), "(alpha, std_error)");
  m.def("synthetic_pareto", &synthetic_pareto, py::arg("alpha"), py::arg("count"), py::arg("seed"));
  m.def("synthetic_critical", &synthetic_critical, py::arg("count"), py::arg("seed"));

  m.def("verify", [](const LevyModel& lm, const std::string& level, std::uint64_t seed, unsigned workers) {
    verify::Options opt;
    if (level == "quick")
      opt.level = verify::Level::Quick;
    else if (level == "full")
      opt.level = verify::Level::Full;
    else
      throw ArgumentError("level must be 'quick' or 'full'");
    opt.seed = seed;
    opt.workers = workers;
    std::vector<verify::CheckResult> rs;
    {
      py::gil_scoped_release release;
      rs = verify::run_verification(lm, opt);
    }
    py::list out;
    for (const auto& r : rs) {
      py::dict d;
      d["id"] = r.id;
      d["name"] = r.name;
      d["passed"] = r.passed;
      d["skipped"] = r.skipped;
      d["measured"] = r.measured;
      d["predicted"] = r.predicted;
      d["tolerance"] = r.tolerance;
      d["detail"] = r.detail;
      d["seconds"] = r.seconds;
      out.append(d);
    }
    return out;
  }, py::arg("model"), py::arg("level") = "quick", py::arg("seed") = 20240611, py::arg("workers") = 0);
}
