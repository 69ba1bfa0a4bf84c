#include "tpsim/planning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tpsim {

PubicArchModel PubicArchModel::default_arch() {
  PubicArchModel arch;
  const Point3 apex{0.0, 22.0, -42.0};
  arch.capsules = {Capsule{Segment{Point3{-34.0, 4.0, -42.0}, apex}, 8.0},
                   Capsule{Segment{apex, Point3{34.0, 4.0, -42.0}}, 8.0}};
  return arch;
}

void PubicArchModel::validate() const {
  for (std::size_t i = 0; i < capsules.size(); ++i) {
    if (!(capsules[i].radius > 0.0)) {
      throw ConfigError("arch.capsules[" + std::to_string(i) + "].radius", "must be positive");
    }
  }
}

namespace {

Segment shaft(const Trajectory& traj) { return Segment{traj.entry, traj.point_at(traj.planned_depth)}; }

}  // namespace

ClearanceReport collision_check(const PubicArchModel& arch, const Trajectory& traj, double needle_radius) {
  ClearanceReport report;
  if (!arch.enabled) return report;
  const Segment needle = shaft(traj);
  for (std::size_t i = 0; i < arch.capsules.size(); ++i) {
    const Capsule& c = arch.capsules[i];
    const double clearance = segment_segment_closest(needle, c.axis).distance - c.radius - needle_radius;
    if (clearance < report.clearance) {
      report.clearance = clearance;
      report.blocking = i;
    }
  }
  if (!report.collides()) report.blocking.reset();
  return report;
}

std::optional<double> first_contact_depth(const PubicArchModel& arch, const Trajectory& traj, double needle_radius) {
  if (!arch.enabled) return std::nullopt;
  const Segment needle = shaft(traj);
  std::optional<double> first;
  for (const Capsule& c : arch.capsules) {
    const double reach = c.radius + needle_radius;
    const ClosestPoints cp = segment_segment_closest(needle, c.axis);
    if (cp.distance > reach) continue;
    // Distance to the capsule axis is convex along the shaft, so the contact
    // depth is the unique crossing on [0, s*].
    auto dist = [&](double s) { return point_segment_distance(needle.at(s), c.axis); };
    double lo = 0.0, hi = cp.s;
    if (dist(lo) <= reach) {
      hi = 0.0;
    } else {
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dist(mid) <= reach ? hi : lo) = mid;
      }
    }
    const double depth = hi * traj.planned_depth;
    if (!first || depth < *first) first = depth;
  }
  return first;
}

std::vector<Candidate> candidate_trajectories(const Point3& target_world, const EntryRegion& region,
                                              const RobotGeometry& geom, const PlannerGrid& grid) {
  std::vector<Candidate> out;
  const double depth_z = target_world.z - region.plane_z;
  if (depth_z <= 0.0) return out;
  const int n_ang = static_cast<int>(std::floor(geom.max_angulation / grid.angulation_step + 1e-9));
  const int n_az = std::max(1, static_cast<int>(std::lround(360.0 / grid.azimuth_step)));
  for (int ia = 0; ia <= n_ang; ++ia) {
    const double alpha = ia * grid.angulation_step;
    const int n = ia == 0 ? 1 : n_az;
    for (int iz = 0; iz < n; ++iz) {
      const double phi = iz * grid.azimuth_step;
      const double sa = std::sin(deg_to_rad(alpha));
      const Vec3 d{sa * std::cos(deg_to_rad(phi)), sa * std::sin(deg_to_rad(phi)), std::cos(deg_to_rad(alpha))};
      const UnitVec3 dir = UnitVec3::normalize(d);
      const double depth = depth_z / dir.z();
      Trajectory traj{target_world - dir.vec() * depth, dir, depth,
                      alpha > 1.0 ? Approach::Angled : Approach::Horizontal};
      traj.entry.z = region.plane_z;
      if (!region.contains(traj.entry)) continue;
      try {
        (void)inverse_kinematics(geom, traj);
      } catch (const OutOfReach&) {
        continue;
      }
      out.push_back(Candidate{alpha, phi, traj});
    }
  }
  return out;
}

Trajectory replan_angled(const PubicArchModel& arch, const Point3& target_world, const EntryRegion& region,
                         const RobotGeometry& geom, const PlannerGrid& grid) {
  const auto candidates = candidate_trajectories(target_world, region, geom, grid);
  if (candidates.empty()) {
    throw NoFeasiblePath(-std::numeric_limits<double>::infinity(), "target unreachable within robot limits");
  }
  const Candidate* best = nullptr;
  double best_clearance = -std::numeric_limits<double>::infinity();
  double overall_best = -std::numeric_limits<double>::infinity();
  for (const Candidate& c : candidates) {
    if (best && c.angulation > best->angulation) break;  // candidates are angulation-ascending
    const double clearance = collision_check(arch, c.traj, grid.needle_radius).clearance;
    overall_best = std::max(overall_best, clearance);
    if (clearance >= 0.0 && (!best || clearance > best_clearance)) {
      best = &c;
      best_clearance = clearance;
    }
  }
  if (!best) {
    throw NoFeasiblePath(overall_best, "every candidate collides with the arch (best clearance " +
                                           std::to_string(overall_best) + " mm)");
  }
  return best->traj;
}

}  // namespace tpsim
