#pragma once

#include "snlevy/branching_sim.hpp"
#include "snlevy/levy_model.hpp"
#include "snlevy/tail_estimator.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace snlevy {

using json = nlohmann::ordered_json;

/// {"drift": d, "sigma_sq": s2, "jumps": [{"intensity": rho, "rate": eta}, ...]}
/// Unknown keys are rejected. Throws SchemaError.
LevyModel model_from_json(const json& j);
json model_to_json(const LevyModel& model);
LevyModel load_model(const std::filesystem::path& path);

/// 17 significant digits.
std::string format_double(double v);

inline constexpr const char* kDatasetHeader = "replicate,z0,max_pos,total_particles,censored";
inline constexpr const char* kCurveHeader = "n,surv,ci_lo,ci_hi,count";
inline constexpr const char* kScaleHeader = "x,w_q,z_q,w_tilted";

void write_dataset_csv(std::ostream& os, const Dataset& dataset);
/// Parses a dataset CSV; exited_up is rebuilt from total_particles when the
/// replicate is uncensored. Throws SchemaError.
std::vector<ReplicateOutcome> read_dataset_csv(std::istream& is);

void write_curve_csv(std::ostream& os, const SurvivalCurve& curve);

json config_to_json(const SimConfig& config);
json summary_json(const Dataset& dataset);
json fit_to_json(const TailFitReport& report);
json regime_to_json(const RegimeReport& report);

/// Writes text to path through a temporary file and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace snlevy
