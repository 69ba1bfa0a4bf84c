#include "tpsim/controller.hpp"

#include <cmath>

namespace tpsim {

void ConvergenceParams::validate() const {
  if (!(depth_epsilon > 0.0)) throw ConfigError("convergence.depth_epsilon", "must be positive");
  if (max_corrections < 1) throw ConfigError("convergence.max_corrections", "must be >= 1");
}

namespace {

enum StreamTag : std::uint64_t { kReference = 1, kMotion = 2, kVerify = 3 };

Vec3 residual_motion(const RigidTransform& t, const Point3& target, const Point3& pivot, const UnitVec3& dir) {
  const double push = dot(apply(t, pivot) - pivot, dir);
  return apply(t, target) - target - dir.vec() * push;
}

// Fewer than three beads cannot fix a rotation; their mean shift stands in.
RigidTransform estimate_pose(const std::vector<Fiducial>& reference, const std::vector<Fiducial>& observed) {
  if (reference.size() >= 3) return rigid_register(reference, observed).transform;
  Vec3 shift{0, 0, 0};
  int n = 0;
  for (const auto& r : reference) {
    for (const auto& o : observed) {
      if (o.id != r.id) continue;
      shift += o.position - r.position;
      ++n;
    }
  }
  if (n == 0) throw DegenerateConfiguration("no common fiducials to track");
  return RigidTransform::translate(shift / n);
}

InsertionRecord insert(const InsertionContext& ctx, int target_id, bool closed_loop) {
  const ProstatePhantom& ph = *ctx.phantom;
  const Target& target = ph.target(target_id);
  const int k = ctx.completed_insertions;

  InsertionRecord rec;
  rec.target_id = target_id;
  rec.zone = target.zone;

  RngStream ref_rng = ctx.stream.split(kReference);
  const RngStream motion_rng = ctx.stream.split(kMotion);
  RngStream verify_rng = ctx.stream.split(kVerify);

  // Reference volume at rest; the robot aims at the target as segmented there.
  const Observation reference = observe(ph, RigidTransform::identity(), ctx.noise, k, 0, ref_rng);
  Point3 aim = target.position_rest;
  for (const auto& f : reference.fiducials) {
    if (f.id == target_id) aim = f.position;
  }

  // A straight attempt that hits the arch trips the mechanical release; the
  // needle is withdrawn and the line re-planned.
  const double straight_depth = aim.z - ctx.region.plane_z;
  if (straight_depth > 0.0) {
    Trajectory straight{Point3{aim.x, aim.y, ctx.region.plane_z}, UnitVec3::plus_z(), straight_depth,
                        Approach::Horizontal};
    if (const auto contact = first_contact_depth(ctx.arch, straight, ctx.grid.needle_radius)) {
      try {
        JointState js = inverse_kinematics(ctx.geom, straight);
        js.insertion_depth = straight_depth;
        rec.disengaged = safety_stop(js, *contact).disengaged;
      } catch (const OutOfReach&) {
      }
    }
  }

  rec.trajectory = replan_angled(ctx.arch, aim, ctx.region, ctx.geom, ctx.grid);
  rec.zone.approach = rec.trajectory.approach;
  const Trajectory& traj = rec.trajectory;

  JointState js = inverse_kinematics(ctx.geom, traj);
  js = advance_needle(ctx.geom, js, traj.planned_depth, true);
  rec.corrections.push_back({traj.planned_depth, aim});

  NeedleState needle{traj.entry, traj.dir, js.insertion_depth, true};
  RigidTransform pose = prostate_transform(ph, needle, motion_rng);
  RigidTransform tracked_pose = pose;

  if (closed_loop) {
    for (int volume = 1;; ++volume) {
      const Observation obs = observe(ph, pose, ctx.noise, k, volume, verify_rng);
      tracked_pose = estimate_pose(reference.fiducials, obs.fiducials);
      const Point3 tracked = track_target(tracked_pose, aim);
      const double delta = axis_decompose(traj.entry, traj.dir, tracked).depth - js.insertion_depth;
      if (std::abs(delta) < ctx.conv.depth_epsilon) break;
      if (rec.n_corrections >= ctx.conv.max_corrections) {
        rec.max_corrections_exceeded = true;
        break;
      }
      js = advance_needle(ctx.geom, js, delta, true);
      rec.corrections.push_back({delta, tracked});
      ++rec.n_corrections;
      rec.axial_motion += delta;
      needle.tip_depth = js.insertion_depth;
      pose = prostate_transform(ph, needle, motion_rng);
    }
  }
  rec.final_joints = js;

  // Deposit at the tip, optionally deflected toward patient left, and freeze
  // the bead in the material frame.
  Point3 tip = traj.point_at(js.insertion_depth);
  if (ph.left_bias > 0.0 && target.zone.lateral == LateralZone::Left) {
    const Vec3 left{1.0, 0.0, 0.0};
    const Vec3 perp = left - traj.dir.vec() * dot(left, traj.dir);
    tip += perp * (ph.left_bias / norm(perp));
  }
  rec.bead_rest_position = world_to_material(ph, pose, tip);
  rec.distance_error = distance(rec.bead_rest_position, target.position_rest);

  const Point3 moved = material_to_world(ph, pose, target.position_rest);
  rec.induced_axial = dot(moved - target.position_rest, traj.dir);
  rec.lateral_miss = axis_decompose(traj.entry, traj.dir, moved).lateral;
  rec.motion = closed_loop ? residual_motion(tracked_pose, aim, ph.pivot, traj.dir)
                           : residual_motion(pose, target.position_rest, ph.pivot, traj.dir);
  return rec;
}

}  // namespace

InsertionRecord run_insertion(const InsertionContext& ctx, int target_id) { return insert(ctx, target_id, true); }

InsertionRecord open_loop_insertion(const InsertionContext& ctx, int target_id) {
  return insert(ctx, target_id, false);
}

}  // namespace tpsim
