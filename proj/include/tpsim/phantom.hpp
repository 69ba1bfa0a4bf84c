// Synthetic deformable prostate phantom and its needle-driven motion model.
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tpsim/errors.hpp"
#include "tpsim/geometry.hpp"
#include "tpsim/rng.hpp"

namespace tpsim {

enum class DepthZone { Apex, Base };
enum class LateralZone { Left, Center, Right };
enum class ApZone { Anterior, Posterior };
enum class Approach { Horizontal, Angled };

std::string_view to_string(DepthZone z);
std::string_view to_string(LateralZone z);
std::string_view to_string(ApZone z);
std::string_view to_string(Approach a);
DepthZone parse_depth_zone(std::string_view s);
LateralZone parse_lateral_zone(std::string_view s);
ApZone parse_ap_zone(std::string_view s);
Approach parse_approach(std::string_view s);

struct ZoneLabels {
  DepthZone depth = DepthZone::Apex;
  LateralZone lateral = LateralZone::Center;
  ApZone ap = ApZone::Anterior;
  Approach approach = Approach::Horizontal;  // set by the planner

  bool operator==(const ZoneLabels&) const = default;
};

struct Target {
  int id = 0;
  Point3 position_rest;
  ZoneLabels zone;
};

struct MotionParams {
  double axial_gain = 0.0;         // mm of gland push per mm of penetration
  double axial_base_offset = 0.0;  // mm of push once the tip reaches the gland
  double rotation_gain = 0.0;      // degrees per (mm line offset x mm penetration)
  double noise_sd_motion = 0.0;    // mm, per-insertion isotropic jitter on translation
  std::uint64_t rng_seed = 0;      // salt mixed into motion noise streams

  bool operator==(const MotionParams&) const = default;
};

/// Per-dimension target counts. A dimension left empty is unconstrained and
/// labels follow from sampled positions.
struct ZoneQuotas {
  std::optional<int> apex, base;
  std::optional<int> left, center, right;
  std::optional<int> anterior, posterior;

  bool operator==(const ZoneQuotas&) const = default;
};

struct PhantomSpec {
  Vec3 semiaxes{25.0, 20.0, 22.0};  // ~46 cm^3 ellipsoid
  int n_targets = 10;
  ZoneQuotas quotas;
  double min_spacing = 4.0;  // mm between target beads
  double margin = 2.0;       // mm, targets kept this far inside the capsule (along each semiaxis)
  Point3 pivot{0.0, 5.0, -5.0};     // anterior-apical ligament anchor, relative to centroid
  MotionParams motion;
  double left_bias = 0.9;
  bool left_bias_enabled = false;
  double perineum_peak_force_n = 1.8;  // documentation only; force is not simulated

  bool operator==(const PhantomSpec&) const = default;
};

class PhantomGenerationError : public Error {
 public:
  using Error::Error;
};

struct ProstatePhantom {
  Vec3 semiaxes;
  Point3 centroid_rest;
  std::vector<Target> targets;
  Point3 pivot;  // world frame
  MotionParams motion;
  double left_bias = 0.0;  // 0 when disabled
  double perineum_peak_force_n = 1.8;

  bool contains(const Point3& p) const;
  ZoneLabels classify(const Point3& p) const;
  const Target& target(int id) const;
  /// Depth along the line at which it first enters the rest-pose gland, or
  /// nullopt when the line misses it.
  std::optional<double> gland_entry_depth(const Point3& entry, const UnitVec3& dir) const;
  /// Rest-frame depth used by the imaging noise model: distance past the apex plane.
  double imaging_depth(const Point3& p_rest) const;
};

/// Deterministic for a given (spec, seed). Throws PhantomGenerationError when
/// the quotas or spacing cannot be satisfied, naming the failing constraint.
ProstatePhantom generate_phantom(const PhantomSpec& spec, std::uint64_t seed);

struct NeedleState {
  Point3 entry;
  UnitVec3 dir;
  double tip_depth = 0.0;
  bool rotating = true;
};

/// Pose of the gland with the needle at `needle.tip_depth`: axial push along the
/// needle plus a rotation about the ligament pivot that grows with the needle
/// line's offset from the centroid and with penetration. `rng` is taken by
/// value; the controller passes the same stream at every depth so the jitter
/// is a per-insertion constant.
RigidTransform prostate_transform(const ProstatePhantom& phantom, const NeedleState& needle,
                                  RngStream rng);

inline Point3 material_to_world(const ProstatePhantom&, const RigidTransform& t, const Point3& p_rest) {
  return apply(t, p_rest);
}

inline Point3 world_to_material(const ProstatePhantom&, const RigidTransform& t, const Point3& p_world) {
  return apply(inverse(t), p_world);
}

}  // namespace tpsim
