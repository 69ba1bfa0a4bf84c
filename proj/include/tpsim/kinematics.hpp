// Kinematics of the 7-DOF needle manipulator: front and back x-y positioning
// stages define the needle line, a z-translation moves both stages, and two
// needle motors drive insertion depth and rotation.
#pragma once

#include <string>

#include "tpsim/errors.hpp"
#include "tpsim/geometry.hpp"
#include "tpsim/phantom.hpp"

namespace tpsim {

struct RobotGeometry {
  double stage_separation = 100.0;  // mm between the two stage planes
  double stage_travel = 40.0;       // +/- mm on each stage axis
  double z_travel = 120.0;          // mm, z_offset in [0, z_travel]
  double max_angulation = 15.0;     // degrees from +z
  double insertion_speed = 5.0;     // mm/s
  double rotation_speed = 8.0;      // rev/s
  double home_front_z = -200.0;     // front stage plane at z_offset = 0
  double standoff = 20.0;           // front needle guide to entry point, along z

  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const RobotGeometry&) const = default;
};

struct JointState {
  double front_x = 0.0;
  double front_y = 0.0;
  double back_x = 0.0;
  double back_y = 0.0;
  double z_offset = 0.0;
  double insertion_depth = 0.0;
  double rotation_angle = 0.0;  // degrees, cumulative
  bool disengaged = false;      // set by the mechanical release

  bool operator==(const JointState&) const = default;
};

struct Trajectory {
  Point3 entry;
  UnitVec3 dir;
  double planned_depth = 0.0;
  Approach approach = Approach::Horizontal;

  Point3 point_at(double depth) const { return entry + dir.vec() * depth; }
};

/// No joint configuration within travel reproduces the requested line.
class OutOfReach : public Error {
 public:
  OutOfReach(std::string joint, const std::string& detail)
      : Error("out of reach: " + joint + " " + detail), joint_(std::move(joint)) {}
  const std::string& joint() const { return joint_; }

 private:
  std::string joint_;
};

struct NeedlePose {
  Point3 entry;
  UnitVec3 dir;
  Point3 tip;
};

/// Pre-insertion pose (insertion_depth 0) placing the needle on traj's line.
/// Throws OutOfReach naming the first violated limit.
JointState inverse_kinematics(const RobotGeometry& geom, const Trajectory& traj);
NeedlePose forward_kinematics(const RobotGeometry& geom, const JointState& js);
bool within_limits(const RobotGeometry& geom, const JointState& js);

/// Seconds to move the needle by |depth_change| at the insertion speed.
double insertion_duration(const RobotGeometry& geom, double depth_change);
/// Moves the needle by depth_change; a rotating needle spins at rotation_speed meanwhile.
JointState advance_needle(const RobotGeometry& geom, const JointState& js, double depth_change, bool rotating);

/// Mechanical release: clamps insertion_depth at an obstruction closer than
/// the current depth and flags the state as disengaged.
JointState safety_stop(const JointState& js, double obstruction_depth);

}  // namespace tpsim
