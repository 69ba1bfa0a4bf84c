#include "tpsim/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace tpsim {

void RobotGeometry::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("robot.") + key, "must be positive");
  };
  positive(stage_separation, "stage_separation");
  positive(stage_travel, "stage_travel");
  positive(z_travel, "z_travel");
  positive(max_angulation, "max_angulation");
  positive(insertion_speed, "insertion_speed");
  positive(rotation_speed, "rotation_speed");
  positive(standoff, "standoff");
  if (max_angulation >= 90.0) throw ConfigError("robot.max_angulation", "must be below 90 degrees");
  const double reachable = rad_to_deg(std::atan(2.0 * stage_travel / stage_separation));
  if (max_angulation > reachable) {
    throw ConfigError("robot.max_angulation",
                      "exceeds atan(2*stage_travel/stage_separation) = " + std::to_string(reachable) + " deg");
  }
}

JointState inverse_kinematics(const RobotGeometry& geom, const Trajectory& traj) {
  const double angle = angle_between_deg(traj.dir, UnitVec3::plus_z());
  if (angle > geom.max_angulation) {
    throw OutOfReach("angulation", std::to_string(angle) + " deg > " + std::to_string(geom.max_angulation));
  }
  JointState js;
  js.z_offset = traj.entry.z - geom.standoff - geom.home_front_z;
  if (js.z_offset < 0.0 || js.z_offset > geom.z_travel) {
    throw OutOfReach("z_offset", std::to_string(js.z_offset) + " mm outside [0, " + std::to_string(geom.z_travel) + "]");
  }
  const Vec3 d = traj.dir.vec();
  const Point3 front = traj.entry - d * (geom.standoff / d.z);
  const Point3 back = traj.entry - d * ((geom.standoff + geom.stage_separation) / d.z);
  js.front_x = front.x;
  js.front_y = front.y;
  js.back_x = back.x;
  js.back_y = back.y;

  const std::pair<const char*, double> axes[] = {
      {"front_x", js.front_x}, {"front_y", js.front_y}, {"back_x", js.back_x}, {"back_y", js.back_y}};
  for (const auto& [name, v] : axes) {
    if (std::abs(v) > geom.stage_travel) {
      throw OutOfReach(name, std::to_string(v) + " mm beyond +/-" + std::to_string(geom.stage_travel));
    }
  }
  return js;
}

NeedlePose forward_kinematics(const RobotGeometry& geom, const JointState& js) {
  const double zf = geom.home_front_z + js.z_offset;
  const Point3 front{js.front_x, js.front_y, zf};
  const Point3 back{js.back_x, js.back_y, zf - geom.stage_separation};
  const UnitVec3 dir = UnitVec3::normalize(front - back);
  const Point3 entry = front + dir.vec() * (geom.standoff / dir.z());
  return {entry, dir, entry + dir.vec() * js.insertion_depth};
}

bool within_limits(const RobotGeometry& geom, const JointState& js) {
  const double t = geom.stage_travel;
  return std::abs(js.front_x) <= t && std::abs(js.front_y) <= t && std::abs(js.back_x) <= t &&
         std::abs(js.back_y) <= t && js.z_offset >= 0.0 && js.z_offset <= geom.z_travel &&
         js.insertion_depth >= 0.0;
}

double insertion_duration(const RobotGeometry& geom, double depth_change) {
  return std::abs(depth_change) / geom.insertion_speed;
}

JointState advance_needle(const RobotGeometry& geom, const JointState& js, double depth_change, bool rotating) {
  JointState out = js;
  out.insertion_depth = std::max(0.0, js.insertion_depth + depth_change);
  if (rotating) out.rotation_angle += geom.rotation_speed * insertion_duration(geom, depth_change) * 360.0;
  return out;
}

JointState safety_stop(const JointState& js, double obstruction_depth) {
  if (obstruction_depth >= js.insertion_depth) return js;
  JointState out = js;
  out.insertion_depth = std::max(0.0, obstruction_depth);
  out.disengaged = true;
  return out;
}

}  // namespace tpsim
