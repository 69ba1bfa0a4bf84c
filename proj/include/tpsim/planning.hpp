// Pubic-arch interference checks and angled re-planning.
#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "tpsim/errors.hpp"
#include "tpsim/kinematics.hpp"

namespace tpsim {

/// 18-gauge needle.
inline constexpr double kNeedleRadius = 0.635;

struct Capsule {
  Segment axis;
  double radius = 1.0;

  bool operator==(const Capsule& o) const {
    return axis.a == o.axis.a && axis.b == o.axis.b && radius == o.radius;
  }
};

struct PubicArchModel {
  std::vector<Capsule> capsules;
  bool enabled = true;

  /// Inverted V of two r = 8 mm capsules in front of the anterior gland.
  static PubicArchModel default_arch();
  void validate() const;
  bool operator==(const PubicArchModel&) const = default;
};

struct ClearanceReport {
  /// Minimum over capsules of (axis distance - capsule radius - needle radius).
  /// +inf when the arch is disabled or empty. Negative means collision.
  double clearance = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> blocking;  // capsule index when colliding

  bool unbounded() const { return std::isinf(clearance); }
  bool collides() const { return clearance < 0.0; }
};

/// Checks the shaft from entry to the planned tip.
ClearanceReport collision_check(const PubicArchModel& arch, const Trajectory& traj,
                                double needle_radius = kNeedleRadius);

/// Depth at which the shaft first touches the arch, if it does before planned_depth.
std::optional<double> first_contact_depth(const PubicArchModel& arch, const Trajectory& traj,
                                          double needle_radius = kNeedleRadius);

/// Axis-aligned rectangle in the perineal plane z = plane_z.
struct EntryRegion {
  double plane_z = -70.0;
  double x_min = -40.0, x_max = 40.0;
  double y_min = -40.0, y_max = 40.0;

  bool contains(const Point3& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool operator==(const EntryRegion&) const = default;
};

struct PlannerGrid {
  double angulation_step = 1.0;  // degrees
  double azimuth_step = 5.0;     // degrees
  double needle_radius = kNeedleRadius;

  bool operator==(const PlannerGrid&) const = default;
};

class NoFeasiblePath : public Error {
 public:
  NoFeasiblePath(double best_clearance, const std::string& detail)
      : Error("no feasible path: " + detail), best_clearance_(best_clearance) {}
  double best_clearance() const { return best_clearance_; }

 private:
  double best_clearance_;
};

/// One candidate of the re-planning search.
struct Candidate {
  double angulation = 0.0;  // degrees
  double azimuth = 0.0;     // degrees
  Trajectory traj;
};

/// Every candidate line through target_world on the search grid whose entry
/// lies in the region and which the robot can reach, angulation ascending.
std::vector<Candidate> candidate_trajectories(const Point3& target_world, const EntryRegion& region,
                                              const RobotGeometry& geom, const PlannerGrid& grid = {});

/// Minimum-angulation collision-free line through target_world, ties broken
/// by larger clearance. Labeled Angled above 1 degree. Throws NoFeasiblePath.
Trajectory replan_angled(const PubicArchModel& arch, const Point3& target_world, const EntryRegion& region,
                         const RobotGeometry& geom, const PlannerGrid& grid = {});

}  // namespace tpsim
