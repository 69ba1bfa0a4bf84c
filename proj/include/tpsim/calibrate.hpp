// Grid-search fit of the motion and imaging-noise parameters to target
// summary medians.
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tpsim/study.hpp"

namespace tpsim {

/// The seven medians the fit aims at, in this order: overall error, axial
/// motion (summed depth correction), apex and base depth correction, and the
/// overall |motion| medians along x, y, z.
struct CalibrationTargets {
  double error = 2.73;
  double axial_motion = 5.46;
  double apex_depth_correction = 4.0;
  double base_depth_correction = 6.5;
  double motion_x = 1.26;
  double motion_y = 1.09;
  double motion_z = 1.53;

  std::array<double, 7> values() const;
  static std::array<const char*, 7> names();
};

struct CalibrationGrid {
  std::vector<double> axial_base_offset{2.0, 2.5, 3.0};
  std::vector<double> axial_gain{0.05, 0.08, 0.11};
  std::vector<double> rotation_gain{0.02, 0.03, 0.04};
  std::vector<double> noise_sd_motion{0.6, 0.9};
  std::vector<double> sigma0{0.3, 0.4, 0.5};
  int replicates = 2;  // per grid point, closed loop only

  std::size_t size() const;
  /// Throws ConfigError on an empty axis or non-positive replicate count.
  void validate() const;
};

struct CalibrationPoint {
  double axial_base_offset = 0.0;
  double axial_gain = 0.0;
  double rotation_gain = 0.0;
  double noise_sd_motion = 0.0;
  double sigma0 = 0.0;
  std::array<double, 7> medians{};
  double objective = 0.0;
};

struct CalibrationResult {
  StudyConfig fitted;
  CalibrationPoint best;
  std::vector<CalibrationPoint> evaluated;  // grid order
};

/// The seven medians of a closed-loop summary, in CalibrationTargets order.
std::array<double, 7> calibration_medians(const LoopSummary& summary);

/// Sum of squared relative deviations.
double calibration_objective(const std::array<double, 7>& medians, const CalibrationTargets& targets);

using CalibrationProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Evaluates every grid point with the base config's seed and returns the
/// minimizer; ties keep the earliest grid point. The fitted config keeps the
/// base config's replicate count and mode.
CalibrationResult calibrate(const StudyConfig& base, const CalibrationGrid& grid,
                            const CalibrationTargets& targets = {},
                            const CalibrationProgress& progress = {});

}  // namespace tpsim
