// JSON representation of study configs, phantoms and reports.
#pragma once

#include <filesystem>
#include <json.hpp>

#include "tpsim/calibrate.hpp"
#include "tpsim/study.hpp"

namespace tpsim {

using json = nlohmann::ordered_json;

json config_to_json(const StudyConfig& config);
/// Missing keys keep their defaults; unknown keys and type mismatches throw
/// ConfigError carrying the key path (e.g. "motion.axial_gain").
StudyConfig config_from_json(const json& j);
/// config_to_json without the execution-only keys (study.threads,
/// output.dir), so outputs do not depend on where or how a run executed.
json config_echo_json(const StudyConfig& config);
StudyConfig load_config(const std::filesystem::path& path);

json phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const json& j, const std::string& path = "phantom");
json phantom_to_json(const ProstatePhantom& phantom);
ProstatePhantom phantom_from_json(const json& j);

json report_to_json(const StudyReport& report);
StudyReport report_from_json(const json& j);

json record_to_json(const InsertionRecord& rec);

/// Reads the "grid" and "targets" of a config's "calibration" section; the
/// remaining keys describe a previous fit and are ignored.
void read_calibration_inputs(const json& j, CalibrationGrid& grid, CalibrationTargets& targets);
json calibration_to_json(const CalibrationResult& result, const CalibrationGrid& grid,
                         const CalibrationTargets& targets);

}  // namespace tpsim
