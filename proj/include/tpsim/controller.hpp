// Closed-loop insertion: plan, insert, observe, register, correct depth until
// the proposed move is below the depth resolution, then deposit a bead.
#pragma once

#include <vector>

#include "tpsim/kinematics.hpp"
#include "tpsim/phantom.hpp"
#include "tpsim/planning.hpp"
#include "tpsim/sensing.hpp"

namespace tpsim {

struct ConvergenceParams {
  double depth_epsilon = 2.0;  // mm
  int max_corrections = 10;

  void validate() const;
  bool operator==(const ConvergenceParams&) const = default;
};

struct Correction {
  double delta_depth = 0.0;  // mm; the first entry holds the initial planned depth
  Point3 tracked_target;
};

struct InsertionRecord {
  int phantom_id = 0;
  int target_id = 0;
  int replicate = 0;
  Trajectory trajectory;
  std::vector<Correction> corrections;
  int n_corrections = 0;  // corrections.size() - 1
  Point3 bead_rest_position;
  double distance_error = 0.0;
  double axial_motion = 0.0;  // sum of applied depth corrections
  /// Tracked target motion with the gland's axial push removed (the push is
  /// measured at the ligament pivot). Open loop uses the true gland pose.
  Vec3 motion;
  double induced_axial = 0.0;  // true target displacement along the needle at deposit
  double lateral_miss = 0.0;   // true distance from the moved target to the needle line
  ZoneLabels zone;
  bool disengaged = false;
  bool max_corrections_exceeded = false;
  JointState final_joints;
};

/// Everything one insertion needs. `stream` must be unique per insertion;
/// closed- and open-loop runs given the same stream see identical noise.
struct InsertionContext {
  const ProstatePhantom* phantom = nullptr;
  RobotGeometry geom;
  PubicArchModel arch;
  EntryRegion region;
  PlannerGrid grid;
  NoiseModel noise;
  ConvergenceParams conv;
  int completed_insertions = 0;  // needles already placed in this phantom
  RngStream stream;
};

/// Throws NoFeasiblePath when the planner finds no collision-free line.
InsertionRecord run_insertion(const InsertionContext& ctx, int target_id);
/// Same procedure without tracking or depth correction.
InsertionRecord open_loop_insertion(const InsertionContext& ctx, int target_id);

}  // namespace tpsim
