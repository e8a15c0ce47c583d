#include "snlevy/io.hpp"

#include "snlevy/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace snlevy {

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("model: missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string("model: '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(std::string("model: '") + key + "' must be finite");
  return d;
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw SchemaError(std::string(where) + ": unknown key '" + k + "'");
  }
}

template <class T>
T parse_field(std::string_view s, int line, const char* name) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw SchemaError("dataset line " + std::to_string(line) + ": bad " + name + " '" +
                      std::string(s) + "'");
  return v;
}

}  // namespace

LevyModel model_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("model: top level must be an object");
  only_keys(j, {"drift", "sigma_sq", "jumps", "name"}, "model");
  const double drift = number(j, "drift");
  const double s2 = number(j, "sigma_sq");
  std::vector<JumpComponent> jumps;
  if (j.contains("jumps")) {
    if (!j["jumps"].is_array()) throw SchemaError("model: 'jumps' must be an array");
    for (const auto& c : j["jumps"]) {
      if (!c.is_object()) throw SchemaError("model: each jump must be an object");
      only_keys(c, {"intensity", "rate"}, "jump");
      jumps.push_back({number(c, "intensity"), number(c, "rate")});
    }
  }
  try {
    return LevyModel(drift, s2, std::move(jumps));
  } catch (const ArgumentError& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
}

json model_to_json(const LevyModel& model) {
  json j;
  j["drift"] = model.drift();
  j["sigma_sq"] = model.gaussian_sq();
  j["jumps"] = json::array();
  for (const auto& c : model.jumps()) j["jumps"].push_back({{"intensity", c.intensity}, {"rate", c.rate}});
  return j;
}

LevyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& os, const Dataset& dataset) {
  os << kDatasetHeader << '\n';
  std::int64_t i = 0;
  for (const auto& o : dataset.outcomes) {
    os << i++ << ',' << o.z0 << ',' << format_double(o.max_pos) << ',' << o.total_particles << ','
       << (o.censored ? 1 : 0) << '\n';
  }
}

std::vector<ReplicateOutcome> read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kDatasetHeader)
    throw SchemaError(std::string("dataset: header must be '") + kDatasetHeader + "'");
  std::vector<ReplicateOutcome> out;
  int n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view f[5];
    for (int k = 0; k < 5; ++k) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (k == 4))
        throw SchemaError("dataset line " + std::to_string(n) + ": expected 5 fields");
      f[k] = rest.substr(0, comma);
      if (k < 4) rest.remove_prefix(comma + 1);
    }
    const auto rep = parse_field<std::int64_t>(f[0], n, "replicate");
    if (rep != static_cast<std::int64_t>(out.size()))
      throw SchemaError("dataset line " + std::to_string(n) + ": replicates out of order");
    ReplicateOutcome o;
    o.z0 = parse_field<std::int64_t>(f[1], n, "z0");
    o.max_pos = parse_field<double>(f[2], n, "max_pos");
    o.total_particles = parse_field<std::int64_t>(f[3], n, "total_particles");
    const auto c = parse_field<int>(f[4], n, "censored");
    if (c != 0 && c != 1) throw SchemaError("dataset line " + std::to_string(n) + ": censored must be 0 or 1");
    o.censored = c == 1;
    if (!o.censored) o.exited_up = (o.total_particles + 1) / 2 - o.z0;
    out.push_back(o);
  }
  return out;
}

void write_curve_csv(std::ostream& os, const SurvivalCurve& curve) {
  os << kCurveHeader << '\n';
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    os << curve.grid[i] << ',' << format_double(curve.surv[i]) << ','
       << format_double(curve.ci_lo[i]) << ',' << format_double(curve.ci_hi[i]) << ','
       << curve.count[i] << '\n';
  }
}

json config_to_json(const SimConfig& config) {
  json j;
  j["beta"] = config.beta;
  j["start"] = config.start;
  j["barrier"] = config.barrier ? json(*config.barrier) : json(nullptr);
  j["dt"] = config.dt;
  j["cap_particles"] = config.cap_particles;
  j["replicates"] = config.replicates;
  j["master_seed"] = config.master_seed;
  return j;
}

json summary_json(const Dataset& dataset) {
  const auto s = summarize(dataset);
  json j;
  j["replicates"] = s.replicates;
  j["quantity"] = dataset.config.barrier ? "Z_0<x" : "Z_0";
  j["mean_z0"] = s.mean_z0;
  j["var_z0"] = s.var_z0;
  j["se_z0"] = s.se_z0;
  j["censored"] = s.censored;
  j["censored_fraction"] = s.censored_fraction;
  j["wall_seconds"] = dataset.stats.wall_seconds;
  j["workers"] = dataset.stats.workers;
  j["master_seed"] = dataset.config.master_seed;
  j["config"] = config_to_json(dataset.config);
  j["model"] = model_to_json(dataset.model);
  return j;
}

json fit_to_json(const TailFitReport& r) {
  json j;
  j["exponent"] = r.exponent;
  j["ci"] = {r.ci_lo, r.ci_hi};
  j["prefactor"] = r.prefactor;
  j["flatness_ratio"] = r.flatness_ratio;
  j["fit_range"] = {r.fit_lo, r.fit_hi};
  j["points_used"] = r.points_used;
  return j;
}

json regime_to_json(const RegimeReport& r) {
  json j;
  j["beta"] = r.beta;
  j["regime"] = std::string(to_string(r.regime));
  j["lambda_star"] = r.lambda_star;
  j["q_star"] = r.q_star;
  j["phi_minus"] = r.phi_minus;
  j["phi_plus"] = r.phi_plus;
  j["gamma"] = r.gamma_index ? json(*r.gamma_index) : json(nullptr);
  j["exponent"] = r.tail_exponent();
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace snlevy
