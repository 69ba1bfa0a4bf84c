// Exact 3D primitives and rigid transforms.
//
// Frame convention used throughout the simulator: +z is the needle insertion
// direction (cranial), +x is patient left, +y is anterior, and the origin sits
// at the prostate centroid in its rest pose. Lengths are millimeters; angles in
// public signatures are degrees.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace tpsim {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Point3 operator-() const { return {-x, -y, -z}; }
  constexpr Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Point3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Point3& operator+=(const Point3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Point3&) const = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

// Displacements share the representation of points.
using Vec3 = Point3;

constexpr Point3 operator*(double s, const Point3& p) { return p * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

/// Direction with Euclidean norm 1 (within 1e-9). Constructible only by
/// normalizing, so a live UnitVec3 always satisfies its invariant.
class UnitVec3 {
 public:
  constexpr UnitVec3() = default;  // +z

  /// Throws std::invalid_argument on a zero or non-finite vector.
  static UnitVec3 normalize(const Vec3& v);
  static constexpr UnitVec3 plus_z() { return UnitVec3{}; }

  constexpr double x() const { return v_.x; }
  constexpr double y() const { return v_.y; }
  constexpr double z() const { return v_.z; }
  constexpr const Vec3& vec() const { return v_; }
  constexpr operator const Vec3&() const { return v_; }
  constexpr bool operator==(const UnitVec3&) const = default;

 private:
  explicit constexpr UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_{0.0, 0.0, 1.0};
};

/// Angle between two directions in degrees.
double angle_between_deg(const UnitVec3& a, const UnitVec3& b);

struct Mat3 {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static constexpr Mat3 identity() { return Mat3{}; }
  constexpr double operator()(int r, int c) const { return m[r][c]; }
  constexpr double& operator()(int r, int c) { return m[r][c]; }

  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  double determinant() const;
};

/// Rotation of `angle_deg` about `axis` (right-handed).
Mat3 rotation_about(const UnitVec3& axis, double angle_deg);

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t) { return {Mat3::identity(), t}; }
  /// Rotation about the line through `pivot` with direction `axis`.
  static RigidTransform rotate_about(const Point3& pivot, const UnitVec3& axis, double angle_deg);

  /// Rotation matrix orthonormal with det +1 within `tol`.
  bool valid(double tol = 1e-9) const;
  /// Rotation angle of the matrix part, degrees in [0, 180].
  double rotation_angle_deg() const;
};

Point3 apply(const RigidTransform& t, const Point3& p);
/// apply(compose(a, b), p) == apply(a, apply(b, p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);
/// Projects the rotation back onto SO(3). Used after long composition chains.
RigidTransform reorthonormalize(const RigidTransform& t);

/// Composes a chain left to right, re-orthonormalizing every 100 factors.
template <typename Range>
RigidTransform compose_chain(const Range& transforms) {
  RigidTransform acc = RigidTransform::identity();
  int count = 0;
  for (const auto& t : transforms) {
    acc = compose(acc, t);
    if (++count % 100 == 0) acc = reorthonormalize(acc);
  }
  return acc;
}

/// Largest pointwise deviation of two transforms' matrices and translations.
double max_abs_difference(const RigidTransform& a, const RigidTransform& b);

struct AxisDecomposition {
  double depth = 0.0;    // signed distance along dir to the closest point
  double lateral = 0.0;  // distance from target to the needle line
};

/// Splits `target - entry` into a component along `dir` and its orthogonal
/// remainder. entry + depth*dir is the closest point on the line to target.
AxisDecomposition axis_decompose(const Point3& entry, const UnitVec3& dir, const Point3& target);

struct Segment {
  Point3 a;
  Point3 b;

  Point3 at(double s) const { return a + (b - a) * s; }
  double length() const { return distance(a, b); }
};

struct ClosestPoints {
  double s = 0.0;  // parameter on the first segment, in [0, 1]
  double t = 0.0;  // parameter on the second segment, in [0, 1]
  double distance = 0.0;
};

/// Closest points between two segments; either may be degenerate.
ClosestPoints segment_segment_closest(const Segment& s1, const Segment& s2);
double point_segment_distance(const Point3& p, const Segment& s);

/// max(0, min distance(s, axis) - radius). Zero means s touches the capsule.
double segment_capsule_distance(const Segment& s, const Segment& axis, double radius);

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace tpsim
