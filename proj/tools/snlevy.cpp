// snlevy command line: inspect, scale, fluct, simulate, estimate, verify.
#include "snlevy/branching_sim.hpp"
#include "snlevy/errors.hpp"
#include "snlevy/fluctuation.hpp"
#include "snlevy/io.hpp"
#include "snlevy/levy_model.hpp"
#include "snlevy/scale_fn.hpp"
#include "snlevy/tail_estimator.hpp"
#include "snlevy/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace snlevy;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kRegime = 3, kResource = 4 };

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::int64_t as_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15)
    throw ArgumentError(std::string(what) + " must be a non-negative integer");
  return static_cast<std::int64_t>(v);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text_file(out, text);
}

json manifest(const std::string& command, const std::vector<std::string>& argv,
              const std::string& model_path, std::uint64_t seed, const std::string& out_dir) {
  json m;
  m["tool"] = "snlevy";
  m["version"] = SNLEVY_VERSION;
  m["command"] = command;
  m["argv"] = argv;
  m["model"] = model_path;
  m["master_seed"] = seed;
  m["output_dir"] = out_dir;
  m["started_at"] = utc_now();
  return m;
}

std::string prediction(const RegimeReport& r) {
  switch (r.regime) {
    case Regime::Subcritical: {
      std::ostringstream os;
      os << std::setprecision(6) << "P_a(Z_0 >= n) is of order W^(-beta)(a) n^-" << r.tail_exponent()
         << "; P_a(M >= x) ~ c W^(-beta)(a) exp(-" << r.phi_plus << " x)";
      return os.str();
    }
    case Regime::Critical: {
      std::ostringstream os;
      os << std::setprecision(6)
         << "P_a(Z_0 >= n) is of order W^(-q*)(a) 1/(n ln^2 n); P_a(M >= x) ~ c W^(-q*)(a) exp(-"
         << r.lambda_star << " x)/x";
      return os.str();
    }
    case Regime::NoAlmostSureExtinction:
      return "beta > q*: the population survives with positive probability";
    case Regime::DriftNonNegative:
      return "psi'(0+) >= 0: the population survives with positive probability";
  }
  return "";
}

int cmd_inspect(const std::string& model_path, double beta) {
  const auto model = load_model(model_path);
  const auto r = classify_regime(model, beta);
  auto j = regime_to_json(r);
  j["model"] = model_to_json(model);
  j["prediction"] = prediction(r);
  std::cout << j.dump(2) << '\n';
  if (r.regime == Regime::NoAlmostSureExtinction || r.regime == Regime::DriftNonNegative)
    std::cerr << "warning: " << prediction(r) << '\n';
  return kOk;
}

int cmd_scale(const std::string& model_path, double q, double x_min, double x_max, int points,
              std::optional<double> tilt, const std::string& out) {
  const auto model = load_model(model_path);
  if (points < 2 || !(x_max > x_min) || x_min < 0.0)
    throw ArgumentError("scale: need 0 <= x-min < x-max and points >= 2");
  const ScaleFunction sf(model, q);
  const double c = tilt.value_or(sf.roots().largest());
  if (c < 0.0) throw ArgumentError("scale: tilt must be >= 0");
  std::ostringstream os;
  os << kScaleHeader << '\n';
  for (int k = 0; k < points; ++k) {
    const double x = x_min + (x_max - x_min) * k / (points - 1);
    os << format_double(x) << ',' << format_double(sf.w(x)) << ',' << format_double(sf.z(x)) << ','
       << format_double(sf.w_scaled(x, c)) << '\n';
  }
  emit(os.str(), out);
  return kOk;
}

int cmd_fluct(const std::string& model_path, double beta, double a, double x) {
  const auto model = load_model(model_path);
  const ProgenyMoments pm(model, beta);
  if (!(a > 0.0) || !(x > a)) throw ArgumentError("fluct: need 0 < a < x");
  json j;
  j["beta"] = beta;
  j["a"] = a;
  j["x"] = x;
  j["mean"] = pm.mean(a);
  j["mean_barrier"] = pm.down(a, x);
  j["second_moment_barrier"] = pm.second_moment(a, x);
  j["exit_up"] = pm.up(a, x);
  j["exit_down"] = pm.down(a, x);
  j["chi"] = asym_constants(model, beta).chi;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

struct SimArgs {
  double beta = 0.0;
  double start = 1.0;
  std::optional<double> barrier;
  double replicates = 100000;
  std::uint64_t seed = 1;
  double cap = 1e6;
  double dt = 0.01;
  unsigned workers = 0;
  std::string out;
};

int cmd_simulate(const std::string& model_path, const SimArgs& s, const std::vector<std::string>& argv) {
  const auto model = load_model(model_path);
  SimConfig cfg;
  cfg.beta = s.beta;
  cfg.start = s.start;
  cfg.barrier = s.barrier;
  cfg.replicates = as_count(s.replicates, "--replicates");
  cfg.cap_particles = as_count(s.cap, "--cap");
  cfg.dt = s.dt;
  cfg.master_seed = s.seed;
  cfg.workers = s.workers;
  cfg.validate();
  require_extinction(model, cfg.beta);

  const fs::path dir(s.out);
  auto man = manifest("simulate", argv, model_path, cfg.master_seed, dir.string());
  man["config"] = config_to_json(cfg);
  write_text_file(dir / "manifest.json", man.dump(2) + "\n");
  try {
    const auto ds = simulate_batch(model, cfg);
    std::ostringstream csv;
    write_dataset_csv(csv, ds);
    write_text_file(dir / "dataset.csv", csv.str());
    auto summary = summary_json(ds);
    summary["version"] = SNLEVY_VERSION;
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << '\n';
  } catch (const PartialDatasetError& e) {
    json p;
    p["error"] = e.what();
    p["completed"] = e.completed();
    p["master_seed"] = cfg.master_seed;
    write_text_file(dir / "partial.json", p.dump(2) + "\n");
    std::cerr << "error: " << e.what() << " (" << e.completed() << " replicates completed)\n";
    return kResource;
  }
  return kOk;
}

struct EstimateArgs {
  std::string in;
  double n_min = 20, n_max = 500;
  int points = 12;
  double x_min = 3, x_max = 8;
  int hill_k = 0;
  std::string curve_out;
};

int cmd_estimate(const EstimateArgs& e) {
  const fs::path dir(e.in);
  std::ifstream sin(dir / "summary.json");
  if (!sin) throw SchemaError("estimate: cannot open " + (dir / "summary.json").string());
  json summary;
  try {
    summary = json::parse(sin);
  } catch (const json::parse_error& err) {
    throw SchemaError(std::string("summary.json: ") + err.what());
  }
  if (!summary.contains("model") || !summary.contains("config"))
    throw SchemaError("summary.json: missing model or config");
  const auto model = model_from_json(summary["model"]);
  const auto& cj = summary["config"];
  Dataset ds{model, {}, {}, {}};
  try {
    ds.config.beta = cj.at("beta").get<double>();
    ds.config.start = cj.at("start").get<double>();
    if (!cj.at("barrier").is_null()) ds.config.barrier = cj.at("barrier").get<double>();
    ds.config.cap_particles = cj.at("cap_particles").get<std::int64_t>();
    ds.config.master_seed = cj.at("master_seed").get<std::uint64_t>();
  } catch (const json::exception& err) {
    throw SchemaError(std::string("summary.json config: ") + err.what());
  }
  std::ifstream cin(dir / "dataset.csv");
  if (!cin) throw SchemaError("estimate: cannot open " + (dir / "dataset.csv").string());
  ds.outcomes = read_dataset_csv(cin);
  ds.config.replicates = static_cast<std::int64_t>(ds.outcomes.size());

  const auto regime = classify_regime(model, ds.config.beta);
  const bool critical = regime.regime == Regime::Critical;
  const auto grid = log_grid(static_cast<std::int64_t>(e.n_min), static_cast<std::int64_t>(e.n_max), e.points);
  const auto curve = survival_curve(ds, grid);
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  write_text_file(e.curve_out.empty() ? dir / "curve.csv" : fs::path(e.curve_out), csv.str());

  json j;
  j["mode"] = critical ? "critical" : "subcritical";
  j["regime"] = regime_to_json(regime);
  j["master_seed"] = ds.config.master_seed;
  j["replicates"] = ds.config.replicates;
  const FitRange range{e.n_min, e.n_max};
  auto fit = critical ? critical_scaling(curve, range) : tail_slope(curve, range);
  j["tail"] = fit_to_json(fit);
  std::vector<double> xs;
  for (int k = 0; k <= 10; ++k) xs.push_back(e.x_min + (e.x_max - e.x_min) * k / 10.0);
  try {
    j["max"] = fit_to_json(max_decay(ds, xs, critical ? MaxMode::Critical : MaxMode::Subcritical));
  } catch (const FitError& err) {
    j["max"] = {{"error", err.what()}};
  }
  std::vector<std::int64_t> z;
  for (const auto& o : ds.outcomes) z.push_back(o.z0);
  const std::int64_t k = e.hill_k > 0 ? e.hill_k : std::max<std::int64_t>(1, static_cast<std::int64_t>(z.size()) / 1000);
  try {
    const auto h = hill_estimator(z, k);
    j["hill"] = {{"alpha", h.alpha}, {"std_error", h.std_error}, {"k", h.k}};
  } catch (const std::exception& err) {
    j["hill"] = {{"error", err.what()}};
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const std::string& model_path, const std::string& level, std::uint64_t seed,
               unsigned workers, const std::string& out, const std::vector<std::string>& argv) {
  const auto model = load_model(model_path);
  verify::Options opt;
  opt.level = level == "full" ? verify::Level::Full : verify::Level::Quick;
  opt.seed = seed;
  opt.workers = workers;
  if (!out.empty()) {
    auto man = manifest("verify", argv, model_path, seed, out);
    man["level"] = level;
    man["criteria_version"] = std::string(verify::kCriteriaVersion);
    write_text_file(fs::path(out) / "manifest.json", man.dump(2) + "\n");
  }
  const auto results = verify::run_verification(model, opt);
  bool ok = true;
  json report;
  report["criteria_version"] = std::string(verify::kCriteriaVersion);
  report["level"] = level;
  report["master_seed"] = seed;
  report["results"] = json::array();
  for (const auto& r : results) {
    std::cout << verify::format_line(r) << '\n';
    ok = ok && (r.skipped || r.passed);
    report["results"].push_back({{"id", r.id},
                                 {"name", r.name},
                                 {"status", r.skipped ? "skip" : (r.passed ? "pass" : "fail")},
                                 {"measured", r.measured},
                                 {"predicted", r.predicted},
                                 {"tolerance", r.tolerance},
                                 {"seconds", r.seconds},
                                 {"detail", r.detail}});
  }
  report["passed"] = ok;
  if (!out.empty()) write_text_file(fs::path(out) / "report.json", report.dump(2) + "\n");
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching spectrally negative Levy processes: scale functions, simulation, tail fits"};
  app.set_version_flag("--version", std::string(SNLEVY_VERSION));
  app.require_subcommand(1);
  const std::vector<std::string> args(argv, argv + argc);

  std::string model_path;
  double beta = 0.0;

  auto* inspect = app.add_subcommand("inspect", "Regime classification and predicted tail");
  inspect->add_option("--model", model_path, "Model JSON file")->required();
  inspect->add_option("--beta", beta, "Branching rate")->required();

  double q = 0.0, x_min = 0.0, x_max = 10.0;
  int points = 101;
  std::optional<double> tilt;
  std::string out;
  auto* scale = app.add_subcommand("scale", "Table of W^(q), Z^(q) and the tilted W");
  scale->add_option("--model", model_path)->required();
  scale->add_option("--q", q, "Killing rate (may be negative, >= -q*)")->required();
  scale->add_option("--x-min", x_min);
  scale->add_option("--x-max", x_max);
  scale->add_option("--points", points);
  scale->add_option("--tilt", tilt, "Tilt c for exp(-c x) W^(q)(x); default Phi_+(q)");
  scale->add_option("--out", out, "CSV path (default stdout)");

  double a = 1.0, x = 3.0;
  auto* fluct = app.add_subcommand("fluct", "Analytic progeny moments and exit transforms");
  fluct->add_option("--model", model_path)->required();
  fluct->add_option("--beta", beta)->required();
  fluct->add_option("--a", a, "Starting point");
  fluct->add_option("--x", x, "Upper barrier");

  SimArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo campaign");
  simulate->add_option("--model", model_path)->required();
  simulate->add_option("--beta", sim.beta)->required();
  simulate->add_option("--start", sim.start);
  simulate->add_option("--barrier", sim.barrier);
  simulate->add_option("--replicates", sim.replicates);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--cap", sim.cap);
  simulate->add_option("--dt", sim.dt);
  simulate->add_option("--workers", sim.workers, "Threads (default SNLEVY_THREADS or all cores)");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Survival curve and tail fits of a dataset");
  estimate->add_option("--in", est.in, "Directory written by simulate")->required();
  estimate->add_option("--n-min", est.n_min);
  estimate->add_option("--n-max", est.n_max);
  estimate->add_option("--points", est.points);
  estimate->add_option("--x-min", est.x_min);
  estimate->add_option("--x-max", est.x_max);
  estimate->add_option("--hill-k", est.hill_k);
  estimate->add_option("--curve", est.curve_out, "Curve CSV path (default <in>/curve.csv)");

  std::string level = "quick";
  std::uint64_t seed = 20240611;
  unsigned workers = 0;
  auto* ver = app.add_subcommand("verify", "Acceptance suite");
  ver->add_option("--model", model_path)->required();
  ver->add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));
  ver->add_option("--seed", seed);
  ver->add_option("--workers", workers);
  ver->add_option("--out", out, "Directory for manifest.json and report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*inspect) return cmd_inspect(model_path, beta);
    if (*scale) return cmd_scale(model_path, q, x_min, x_max, points, tilt, out);
    if (*fluct) return cmd_fluct(model_path, beta, a, x);
    if (*simulate) return cmd_simulate(model_path, sim, args);
    if (*estimate) return cmd_estimate(est);
    if (*ver) return cmd_verify(model_path, level, seed, workers, out, args);
  } catch (const RegimeError& e) {
    std::cerr << "regime error: " << e.what() << '\n';
    return kRegime;
  } catch (const PartialDatasetError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource error: out of memory\n";
    return kResource;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
