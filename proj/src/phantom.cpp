#include "tpsim/phantom.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace tpsim {

std::string_view to_string(DepthZone z) { return z == DepthZone::Apex ? "apex" : "base"; }

std::string_view to_string(LateralZone z) {
  switch (z) {
    case LateralZone::Left: return "left";
    case LateralZone::Center: return "center";
    case LateralZone::Right: return "right";
  }
  return "center";
}

std::string_view to_string(ApZone z) { return z == ApZone::Anterior ? "anterior" : "posterior"; }
std::string_view to_string(Approach a) { return a == Approach::Horizontal ? "horizontal" : "angled"; }

DepthZone parse_depth_zone(std::string_view s) {
  if (s == "apex") return DepthZone::Apex;
  if (s == "base") return DepthZone::Base;
  throw Error("unknown depth zone '" + std::string(s) + "'");
}

LateralZone parse_lateral_zone(std::string_view s) {
  if (s == "left") return LateralZone::Left;
  if (s == "center") return LateralZone::Center;
  if (s == "right") return LateralZone::Right;
  throw Error("unknown lateral zone '" + std::string(s) + "'");
}

ApZone parse_ap_zone(std::string_view s) {
  if (s == "anterior") return ApZone::Anterior;
  if (s == "posterior") return ApZone::Posterior;
  throw Error("unknown AP zone '" + std::string(s) + "'");
}

Approach parse_approach(std::string_view s) {
  if (s == "horizontal") return Approach::Horizontal;
  if (s == "angled") return Approach::Angled;
  throw Error("unknown approach '" + std::string(s) + "'");
}

bool ProstatePhantom::contains(const Point3& p) const {
  const Vec3 d = p - centroid_rest;
  const double q = (d.x / semiaxes.x) * (d.x / semiaxes.x) + (d.y / semiaxes.y) * (d.y / semiaxes.y) +
                   (d.z / semiaxes.z) * (d.z / semiaxes.z);
  return q <= 1.0;
}

ZoneLabels ProstatePhantom::classify(const Point3& p) const {
  const Vec3 d = p - centroid_rest;
  ZoneLabels z;
  z.depth = d.z < 0.0 ? DepthZone::Apex : DepthZone::Base;
  const double third = semiaxes.x / 3.0;
  z.lateral = d.x > third ? LateralZone::Left : (d.x < -third ? LateralZone::Right : LateralZone::Center);
  z.ap = d.y >= 0.0 ? ApZone::Anterior : ApZone::Posterior;
  return z;
}

const Target& ProstatePhantom::target(int id) const {
  for (const auto& t : targets) {
    if (t.id == id) return t;
  }
  throw Error("no target with id " + std::to_string(id));
}

std::optional<double> ProstatePhantom::gland_entry_depth(const Point3& entry, const UnitVec3& dir) const {
  // Scale to the unit sphere and solve the quadratic.
  const Vec3 o = entry - centroid_rest;
  const Vec3 os{o.x / semiaxes.x, o.y / semiaxes.y, o.z / semiaxes.z};
  const Vec3 ds{dir.x() / semiaxes.x, dir.y() / semiaxes.y, dir.z() / semiaxes.z};
  const double a = dot(ds, ds);
  const double b = 2.0 * dot(os, ds);
  const double c = dot(os, os) - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  const double t1 = (-b + sq) / (2.0 * a);
  if (t1 < 0.0) return std::nullopt;
  return std::max(0.0, t0);
}

double ProstatePhantom::imaging_depth(const Point3& p_rest) const {
  return std::max(0.0, p_rest.z - (centroid_rest.z - semiaxes.z));
}

namespace {

// A label constraint per dimension; -1 means free.
struct Cell {
  int depth = -1;
  int lateral = -1;
  int ap = -1;
};

template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<int> quota_labels(const std::string& key, int n, std::initializer_list<std::optional<int>> counts) {
  bool any = false;
  bool all = true;
  for (const auto& c : counts) {
    any = any || c.has_value();
    all = all && c.has_value();
  }
  if (!any) return std::vector<int>(static_cast<std::size_t>(n), -1);
  if (!all) throw PhantomGenerationError("quotas." + key + ": either all or none of the counts must be set");
  std::vector<int> labels;
  int label = 0;
  for (const auto& c : counts) {
    if (*c < 0) throw PhantomGenerationError("quotas." + key + ": negative count");
    labels.insert(labels.end(), static_cast<std::size_t>(*c), label++);
  }
  if (static_cast<int>(labels.size()) != n) {
    throw PhantomGenerationError("quotas." + key + ": counts sum to " + std::to_string(labels.size()) +
                                 " but phantom has " + std::to_string(n) + " targets");
  }
  return labels;
}

bool matches(const Cell& cell, const ZoneLabels& z) {
  if (cell.depth >= 0 && cell.depth != static_cast<int>(z.depth)) return false;
  if (cell.lateral >= 0 && cell.lateral != static_cast<int>(z.lateral)) return false;
  if (cell.ap >= 0 && cell.ap != static_cast<int>(z.ap)) return false;
  return true;
}

}  // namespace

ProstatePhantom generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  if (spec.n_targets < 1 || spec.n_targets > 64) {
    throw PhantomGenerationError("n_targets: must be in [1, 64], got " + std::to_string(spec.n_targets));
  }
  if (!(spec.semiaxes.x > 0 && spec.semiaxes.y > 0 && spec.semiaxes.z > 0)) {
    throw PhantomGenerationError("semiaxes: all must be positive");
  }
  const Vec3 inner{spec.semiaxes.x - spec.margin, spec.semiaxes.y - spec.margin, spec.semiaxes.z - spec.margin};
  if (!(inner.x > 0 && inner.y > 0 && inner.z > 0)) {
    throw PhantomGenerationError("margin: leaves no interior for targets");
  }

  ProstatePhantom ph;
  ph.semiaxes = spec.semiaxes;
  ph.centroid_rest = {0.0, 0.0, 0.0};
  ph.pivot = ph.centroid_rest + spec.pivot;
  ph.motion = spec.motion;
  ph.left_bias = spec.left_bias_enabled ? spec.left_bias : 0.0;
  ph.perineum_peak_force_n = spec.perineum_peak_force_n;

  const auto& q = spec.quotas;
  RngStream rng = RngStream(seed).split(0x7068616e746f6dULL);
  auto depth = quota_labels("depth", spec.n_targets, {q.apex, q.base});
  // Lateral label order follows the LateralZone enum: left, center, right.
  auto lateral = quota_labels("lateral", spec.n_targets, {q.left, q.center, q.right});
  auto ap = quota_labels("ap", spec.n_targets, {q.anterior, q.posterior});
  shuffle(depth, rng);
  shuffle(lateral, rng);
  shuffle(ap, rng);

  constexpr int kMaxAttempts = 20000;
  for (int i = 0; i < spec.n_targets; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const Cell cell{depth[iu], lateral[iu], ap[iu]};
    bool placed = false;
    bool any_in_cell = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      // Uniform in the inner ellipsoid by rejection from its bounding box.
      const Vec3 u{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      if (dot(u, u) > 1.0) continue;
      const Point3 p = ph.centroid_rest + Vec3{u.x * inner.x, u.y * inner.y, u.z * inner.z};
      const ZoneLabels z = ph.classify(p);
      if (!matches(cell, z)) continue;
      any_in_cell = true;
      const bool spaced = std::all_of(ph.targets.begin(), ph.targets.end(), [&](const Target& t) {
        return distance(t.position_rest, p) >= spec.min_spacing;
      });
      if (!spaced) continue;
      ph.targets.push_back(Target{i, p, z});
      placed = true;
    }
    if (!placed) {
      throw PhantomGenerationError(any_in_cell ? "min_spacing: cannot place target " + std::to_string(i) + " at " +
                                                     std::to_string(spec.min_spacing) + " mm spacing"
                                               : "quotas: zone cell for target " + std::to_string(i) +
                                                     " is empty inside the margin");
    }
  }
  return ph;
}

RigidTransform prostate_transform(const ProstatePhantom& phantom, const NeedleState& needle, RngStream rng) {
  const auto entry_depth = phantom.gland_entry_depth(needle.entry, needle.dir);
  if (!entry_depth || needle.tip_depth < *entry_depth) return RigidTransform::identity();

  const MotionParams& m = phantom.motion;
  const double penetration = needle.tip_depth - *entry_depth;
  const Vec3 dir = needle.dir.vec();

  // Offset of the needle line from the centroid, perpendicular to the needle.
  const Vec3 rel = phantom.centroid_rest - needle.entry;
  const Vec3 offset = (needle.entry + dir * dot(rel, dir)) - phantom.centroid_rest;
  const double offset_mag = norm(offset);

  RigidTransform rot = RigidTransform::identity();
  const double angle = m.rotation_gain * offset_mag * penetration;
  if (offset_mag > 1e-12 && angle != 0.0) {
    // Positive rotation about offset x dir carries the needle side of the gland deeper.
    rot = RigidTransform::rotate_about(phantom.pivot, UnitVec3::normalize(cross(offset, dir)), angle);
  }

  Vec3 push = dir * (m.axial_base_offset + m.axial_gain * penetration);
  if (m.noise_sd_motion > 0.0) {
    RngStream noise = rng.split(m.rng_seed);
    const double nx = noise.normal(), ny = noise.normal(), nz = noise.normal();
    push += Vec3{nx, ny, nz} * m.noise_sd_motion;
  }
  return compose(RigidTransform::translate(push), rot);
}

}  // namespace tpsim
