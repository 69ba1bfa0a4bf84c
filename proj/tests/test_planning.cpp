#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tpsim/planning.hpp"

using namespace tpsim;

namespace {

// A short capsule sitting on the horizontal line 40 mm in front of the
// target; every line through the target below ~9.4 degrees touches it.
PubicArchModel blocker(const Point3& target, double radius) {
  PubicArchModel arch;
  const Point3 c{target.x, target.y, target.z - 40.0};
  arch.capsules = {Capsule{Segment{c, c}, radius}};
  return arch;
}

}  // namespace

TEST_SUITE("planning") {
  TEST_CASE("disabled or empty arch is unbounded") {
    PubicArchModel arch = PubicArchModel::default_arch();
    arch.enabled = false;
    const Trajectory t{{0, 0, -70}, UnitVec3::plus_z(), 70, Approach::Horizontal};
    CHECK(collision_check(arch, t).unbounded());
    CHECK(collision_check(PubicArchModel{}, t).unbounded());
    CHECK_FALSE(first_contact_depth(arch, t).has_value());
  }

  TEST_CASE("needle through a capsule center collides") {
    PubicArchModel arch;
    arch.capsules = {Capsule{Segment{{-10, 0, -40}, {10, 0, -40}}, 3.0}};
    const Trajectory t{{0, 0, -70}, UnitVec3::plus_z(), 70, Approach::Horizontal};
    const auto r = collision_check(arch, t);
    CHECK(r.collides());
    CHECK(r.clearance == doctest::Approx(-3.0 - kNeedleRadius));
    CHECK(r.blocking == std::size_t{0});
    CHECK(first_contact_depth(arch, t).value() == doctest::Approx(30.0 - 3.0 - kNeedleRadius).epsilon(1e-9));
  }

  TEST_CASE("clearance matches a dense-sampling oracle") {
    RngStream rng(41);
    for (int trial = 0; trial < 40; ++trial) {
      PubicArchModel arch;
      for (int k = 0; k < 3; ++k) {
        arch.capsules.push_back(
            Capsule{Segment{testing::random_point(rng, 30), testing::random_point(rng, 30)}, rng.uniform(1, 8)});
      }
      const Trajectory t{testing::random_point(rng, 30), testing::random_direction(rng), rng.uniform(10, 60),
                         Approach::Horizontal};
      double oracle = std::numeric_limits<double>::infinity();
      for (const auto& c : arch.capsules) {
        const Segment shaft{t.entry, t.point_at(t.planned_depth)};
        oracle = std::min(oracle, testing::sampled_segment_distance(shaft, c.axis) - c.radius - kNeedleRadius);
      }
      CHECK(std::abs(collision_check(arch, t).clearance - oracle) < 1e-6);
    }
  }

  TEST_CASE("unobstructed target gets the straight horizontal line") {
    const Point3 target{3, -2, 5};
    const Trajectory t = replan_angled(PubicArchModel{}, target, EntryRegion{}, RobotGeometry{});
    CHECK(t.approach == Approach::Horizontal);
    CHECK(t.dir == UnitVec3::plus_z());
    CHECK(distance(t.point_at(t.planned_depth), target) < 1e-9);
  }

  TEST_CASE("blocked horizontal path is re-planned at about 10 degrees") {
    const Point3 target{0, 10, 0};
    const PubicArchModel arch = blocker(target, 6.5 - kNeedleRadius);
    const Trajectory t = replan_angled(arch, target, EntryRegion{}, RobotGeometry{});
    CHECK(t.approach == Approach::Angled);
    CHECK(angle_between_deg(t.dir, UnitVec3::plus_z()) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(distance(t.point_at(t.planned_depth), target) < 1e-9);
    CHECK_FALSE(collision_check(arch, t).collides());
  }

  TEST_CASE("arch covering the whole cone is infeasible") {
    PubicArchModel arch;
    arch.capsules = {Capsule{Segment{{-200, 0, -45}, {200, 0, -45}}, 100.0}};
    try {
      replan_angled(arch, {0, 0, 0}, EntryRegion{}, RobotGeometry{});
      FAIL("expected NoFeasiblePath");
    } catch (const NoFeasiblePath& e) {
      CHECK(e.best_clearance() < 0.0);
    }
  }

  TEST_CASE("re-planning is minimal, bounded and through the target") {
    const RobotGeometry geom;
    const EntryRegion region;
    const PubicArchModel arch = PubicArchModel::default_arch();
    RngStream rng(42);
    int angled = 0;
    for (int trial = 0; trial < 60; ++trial) {
      // Anterior half of the default gland.
      Point3 target;
      do {
        target = {rng.uniform(-25, 25), rng.uniform(0, 20), rng.uniform(-22, 22)};
      } while (std::pow(target.x / 25, 2) + std::pow(target.y / 20, 2) + std::pow(target.z / 22, 2) > 1.0);
      const Trajectory t = replan_angled(arch, target, region, geom);
      const double alpha = angle_between_deg(t.dir, UnitVec3::plus_z());
      CHECK(alpha <= geom.max_angulation + 1e-9);
      CHECK(distance(t.point_at(t.planned_depth), target) < 1e-9);
      CHECK(t.approach == (alpha > 1.0 ? Approach::Angled : Approach::Horizontal));
      if (t.approach == Approach::Angled) ++angled;
      for (const Candidate& c : candidate_trajectories(target, region, geom)) {
        if (c.angulation < alpha - 1e-9) CHECK(collision_check(arch, c.traj).collides());
      }
      // Enlarging the capsules never lowers the angulation.
      PubicArchModel fat = arch;
      for (auto& c : fat.capsules) c.radius += 1.0;
      try {
        const Trajectory tf = replan_angled(fat, target, region, geom);
        CHECK(angle_between_deg(tf.dir, UnitVec3::plus_z()) >= alpha - 1e-9);
      } catch (const NoFeasiblePath&) {
      }
    }
    CHECK(angled > 0);
  }

  TEST_CASE("default arch blocks a minority of the default targets") {
    const Point3 anterior_superior{0, 15, 0};
    const Point3 posterior{0, -12, 0};
    const PubicArchModel arch = PubicArchModel::default_arch();
    auto straight = [](const Point3& p) {
      return Trajectory{{p.x, p.y, -70}, UnitVec3::plus_z(), p.z + 70, Approach::Horizontal};
    };
    CHECK(collision_check(arch, straight(anterior_superior)).collides());
    CHECK_FALSE(collision_check(arch, straight(posterior)).collides());
  }
}
