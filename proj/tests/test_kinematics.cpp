#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tpsim/kinematics.hpp"

using namespace tpsim;

namespace {

double line_gap(const NeedlePose& pose, const Trajectory& traj) {
  return axis_decompose(pose.entry, pose.dir, traj.entry).lateral;
}

}  // namespace

TEST_SUITE("kinematics") {
  TEST_CASE("axis-aligned trajectory centers both stages") {
    const RobotGeometry g;
    const Trajectory t{{0, 0, -70}, UnitVec3::plus_z(), 60, Approach::Horizontal};
    const JointState js = inverse_kinematics(g, t);
    CHECK(js.front_x == 0.0);
    CHECK(js.front_y == 0.0);
    CHECK(js.back_x == 0.0);
    CHECK(js.back_y == 0.0);
    CHECK(js.insertion_depth == 0.0);
    CHECK(js.z_offset == doctest::Approx(-70 - g.standoff - g.home_front_z));
  }

  TEST_CASE("10 degree tilt in x-z offsets the stages by separation * tan") {
    const RobotGeometry g;
    const UnitVec3 dir = UnitVec3::normalize({std::sin(deg_to_rad(10.0)), 0, std::cos(deg_to_rad(10.0))});
    const Trajectory t{{5, 0, -70}, dir, 60, Approach::Angled};
    const JointState js = inverse_kinematics(g, t);
    // The back stage sits farther from the patient, so the needle line
    // crosses it further toward -x.
    CHECK(js.front_x - js.back_x == doctest::Approx(g.stage_separation * std::tan(deg_to_rad(10.0))));
    const NeedlePose pose = forward_kinematics(g, js);
    CHECK(distance(pose.entry, t.entry) < 1e-9);
    CHECK(angle_between_deg(pose.dir, dir) < 1e-9);
  }

  TEST_CASE("over-angulated trajectory is out of reach") {
    const RobotGeometry g;
    const UnitVec3 dir = UnitVec3::normalize({std::sin(deg_to_rad(30.0)), 0, std::cos(deg_to_rad(30.0))});
    try {
      inverse_kinematics(g, {{0, 0, -70}, dir, 60, Approach::Angled});
      FAIL("expected OutOfReach");
    } catch (const OutOfReach& e) {
      CHECK(e.joint() == "angulation");
    }
    CHECK_THROWS_AS(inverse_kinematics(g, {{0, 0, 0}, UnitVec3::plus_z(), 10, Approach::Horizontal}), OutOfReach);
    CHECK_THROWS_AS(inverse_kinematics(g, {{45, 0, -70}, UnitVec3::plus_z(), 10, Approach::Horizontal}), OutOfReach);
  }

  TEST_CASE("forward kinematics") {
    const RobotGeometry g;
    JointState js;
    CHECK(forward_kinematics(g, js).dir == UnitVec3::plus_z());
    js.insertion_depth = 50;
    const NeedlePose p = forward_kinematics(g, js);
    CHECK(p.tip.z == doctest::Approx(p.entry.z + 50));
  }

  TEST_CASE("IK/FK round trip and brute-force reachability agree") {
    const RobotGeometry g;
    RngStream rng(31);
    int feasible = 0, disagreements = 0;
    for (int trial = 0; trial < 3000; ++trial) {
      const Trajectory t = testing::random_trajectory(rng, 20.0);
      bool ok = true;
      JointState js;
      try {
        js = inverse_kinematics(g, t);
      } catch (const OutOfReach&) {
        ok = false;
      }
      if (ok != testing::probe_reachable(g, t)) ++disagreements;
      if (!ok) continue;
      ++feasible;
      CHECK(within_limits(g, js));
      const NeedlePose pose = forward_kinematics(g, js);
      CHECK(line_gap(pose, t) < 1e-9);
      CHECK(angle_between_deg(pose.dir, t.dir) < 1e-9);
      CHECK(angle_between_deg(pose.dir, UnitVec3::plus_z()) <=
            rad_to_deg(std::atan(2 * g.stage_travel / g.stage_separation)) + 1e-12);
    }
    CHECK(disagreements == 0);
    CHECK(feasible > 300);
  }

  TEST_CASE("random within-limit joints round trip through IK") {
    const RobotGeometry g;
    RngStream rng(32);
    for (int trial = 0; trial < 500; ++trial) {
      JointState js;
      js.front_x = rng.uniform(-40, 40);
      js.front_y = rng.uniform(-40, 40);
      js.back_x = rng.uniform(-40, 40);
      js.back_y = rng.uniform(-40, 40);
      js.z_offset = rng.uniform(0, g.z_travel);
      const NeedlePose pose = forward_kinematics(g, js);
      if (angle_between_deg(pose.dir, UnitVec3::plus_z()) > g.max_angulation) continue;
      const JointState back = inverse_kinematics(g, {pose.entry, pose.dir, 10, Approach::Horizontal});
      CHECK(std::abs(back.front_x - js.front_x) < 1e-9);
      CHECK(std::abs(back.back_y - js.back_y) < 1e-9);
      CHECK(std::abs(back.z_offset - js.z_offset) < 1e-9);
    }
  }

  TEST_CASE("insertion timing and needle rotation") {
    const RobotGeometry g;
    CHECK(insertion_duration(g, 25) == doctest::Approx(5.0));
    CHECK(insertion_duration(g, -25) == doctest::Approx(5.0));
    CHECK(insertion_duration(g, 0) == 0.0);
    const JointState js = advance_needle(g, JointState{}, 25, true);
    CHECK(js.rotation_angle == doctest::Approx(8.0 * 5.0 * 360.0));
    CHECK(js.insertion_depth == 25.0);
    CHECK(advance_needle(g, js, 5, false).rotation_angle == js.rotation_angle);
  }

  TEST_CASE("safety stop") {
    JointState js;
    js.insertion_depth = 60;
    const JointState stopped = safety_stop(js, 35);
    CHECK(stopped.insertion_depth == 35);
    CHECK(stopped.disengaged);
    const JointState clear = safety_stop(js, 80);
    CHECK(clear == js);
    CHECK_FALSE(clear.disengaged);
    const JointState at_zero = safety_stop(js, 0);
    CHECK(at_zero.insertion_depth == 0);
    CHECK(at_zero.disengaged);
  }

  TEST_CASE("geometry validation names the field") {
    RobotGeometry g;
    g.stage_travel = -1;
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("robot.stage_travel"), ConfigError);
    RobotGeometry wide;
    wide.max_angulation = 60;
    CHECK_THROWS_WITH_AS(wide.validate(), doctest::Contains("robot.max_angulation"), ConfigError);
  }
}
