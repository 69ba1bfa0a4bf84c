#include "tpsim/calibrate.hpp"

#include "tpsim/errors.hpp"

namespace tpsim {

std::array<double, 7> CalibrationTargets::values() const {
  return {error, axial_motion, apex_depth_correction, base_depth_correction, motion_x, motion_y, motion_z};
}

std::array<const char*, 7> CalibrationTargets::names() {
  return {"error",    "axial_motion", "apex_depth_correction", "base_depth_correction",
          "motion_x", "motion_y",     "motion_z"};
}

std::size_t CalibrationGrid::size() const {
  return axial_base_offset.size() * axial_gain.size() * rotation_gain.size() * noise_sd_motion.size() *
         sigma0.size();
}

void CalibrationGrid::validate() const {
  const std::pair<const char*, const std::vector<double>*> axes[] = {
      {"axial_base_offset", &axial_base_offset}, {"axial_gain", &axial_gain},
      {"rotation_gain", &rotation_gain},         {"noise_sd_motion", &noise_sd_motion},
      {"sigma0", &sigma0}};
  for (const auto& [name, values] : axes) {
    if (values->empty()) throw ConfigError(std::string("calibration.grid.") + name, "needs at least one value");
  }
  if (replicates < 1) throw ConfigError("calibration.grid.replicates", "must be >= 1");
}

std::array<double, 7> calibration_medians(const LoopSummary& s) {
  const auto& t2 = s.axes("overall");
  return {s.error.median,
          s.depth_correction.median,
          s.stratum("apex").depth_correction.value_or(stats::Summary{}).median,
          s.stratum("base").depth_correction.value_or(stats::Summary{}).median,
          t2.x ? t2.x->median : 0.0,
          t2.y ? t2.y->median : 0.0,
          t2.z ? t2.z->median : 0.0};
}

double calibration_objective(const std::array<double, 7>& medians, const CalibrationTargets& targets) {
  const auto t = targets.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double rel = (medians[i] - t[i]) / t[i];
    sum += rel * rel;
  }
  return sum;
}

CalibrationResult calibrate(const StudyConfig& base, const CalibrationGrid& grid, const CalibrationTargets& targets,
                            const CalibrationProgress& progress) {
  grid.validate();
  base.validate();

  StudyConfig probe = base;
  probe.mode = Mode::ClosedLoop;
  probe.n_seed_replicates = grid.replicates;

  CalibrationResult result;
  result.evaluated.reserve(grid.size());
  const std::size_t total = grid.size();
  for (double off : grid.axial_base_offset) {
    for (double gain : grid.axial_gain) {
      for (double rot : grid.rotation_gain) {
        for (double jitter : grid.noise_sd_motion) {
          for (double s0 : grid.sigma0) {
            probe.motion.axial_base_offset = off;
            probe.motion.axial_gain = gain;
            probe.motion.rotation_gain = rot;
            probe.motion.noise_sd_motion = jitter;
            probe.noise.sigma0 = s0;
            const StudyResult run = run_study(probe);
            CalibrationPoint pt{off, gain, rot, jitter, s0, calibration_medians(*run.report.closed_loop), 0.0};
            pt.objective = calibration_objective(pt.medians, targets);
            result.evaluated.push_back(pt);
            if (progress) progress(result.evaluated.size(), total);
          }
        }
      }
    }
  }

  result.best = result.evaluated.front();
  for (const auto& pt : result.evaluated) {
    if (pt.objective < result.best.objective) result.best = pt;
  }
  result.fitted = base;
  result.fitted.motion.axial_base_offset = result.best.axial_base_offset;
  result.fitted.motion.axial_gain = result.best.axial_gain;
  result.fitted.motion.rotation_gain = result.best.rotation_gain;
  result.fitted.motion.noise_sd_motion = result.best.noise_sd_motion;
  result.fitted.noise.sigma0 = result.best.sigma0;
  return result;
}

}  // namespace tpsim
