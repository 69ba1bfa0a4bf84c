#include "tpsim/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace tpsim {

UnitVec3 UnitVec3::normalize(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("UnitVec3::normalize: zero or non-finite vector");
  }
  return UnitVec3{v / n};
}

double angle_between_deg(const UnitVec3& a, const UnitVec3& b) {
  // atan2 of |a x b| and a.b stays accurate near 0 and 180 degrees.
  return rad_to_deg(std::atan2(norm(cross(a, b)), dot(a, b)));
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
    }
  }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
  }
  return r;
}

double Mat3::determinant() const {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 rotation_about(const UnitVec3& axis, double angle_deg) {
  // Rodrigues.
  const double th = deg_to_rad(angle_deg);
  const double c = std::cos(th);
  const double s = std::sin(th);
  const double t = 1.0 - c;
  const double x = axis.x(), y = axis.y(), z = axis.z();
  Mat3 r;
  r.m = {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
          {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
          {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
  return r;
}

RigidTransform RigidTransform::rotate_about(const Point3& pivot, const UnitVec3& axis,
                                            double angle_deg) {
  const Mat3 r = rotation_about(axis, angle_deg);
  return {r, pivot - r * pivot};
}

bool RigidTransform::valid(double tol) const {
  const Mat3 rtr = rotation.transposed() * rotation;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  }
  return std::abs(rotation.determinant() - 1.0) <= tol && translation.finite();
}

double RigidTransform::rotation_angle_deg() const {
  const double tr = rotation(0, 0) + rotation(1, 1) + rotation(2, 2);
  const Vec3 skew{rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                  rotation(1, 0) - rotation(0, 1)};
  return rad_to_deg(std::atan2(0.5 * norm(skew), 0.5 * (tr - 1.0)));
}

Point3 apply(const RigidTransform& t, const Point3& p) { return t.rotation * p + t.translation; }

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform inverse(const RigidTransform& t) {
  const Mat3 rt = t.rotation.transposed();
  return {rt, -(rt * t.translation)};
}

RigidTransform reorthonormalize(const RigidTransform& t) {
  // Gram-Schmidt on the columns; drift after a few hundred products is ~1e-14
  // so a single pass is enough.
  Vec3 c0{t.rotation(0, 0), t.rotation(1, 0), t.rotation(2, 0)};
  Vec3 c1{t.rotation(0, 1), t.rotation(1, 1), t.rotation(2, 1)};
  c0 = c0 / norm(c0);
  c1 = c1 - c0 * dot(c0, c1);
  c1 = c1 / norm(c1);
  const Vec3 c2 = cross(c0, c1);
  RigidTransform r = t;
  r.rotation.m = {{{c0.x, c1.x, c2.x}, {c0.y, c1.y, c2.y}, {c0.z, c1.z, c2.z}}};
  return r;
}

double max_abs_difference(const RigidTransform& a, const RigidTransform& b) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      worst = std::max(worst, std::abs(a.rotation(i, j) - b.rotation(i, j)));
    }
  }
  const Vec3 dt = a.translation - b.translation;
  return std::max({worst, std::abs(dt.x), std::abs(dt.y), std::abs(dt.z)});
}

AxisDecomposition axis_decompose(const Point3& entry, const UnitVec3& dir, const Point3& target) {
  const Vec3 rel = target - entry;
  const double depth = dot(rel, dir);
  return {depth, norm(rel - dir.vec() * depth)};
}

ClosestPoints segment_segment_closest(const Segment& s1, const Segment& s2) {
  constexpr double kEps = 1e-15;
  const Vec3 d1 = s1.b - s1.a;
  const Vec3 d2 = s2.b - s2.a;
  const Vec3 r = s1.a - s2.a;
  const double a = dot(d1, d1);
  const double e = dot(d2, d2);
  const double f = dot(d2, r);
  double s = 0.0;
  double t = 0.0;

  if (a <= kEps && e <= kEps) {
    // both degenerate
  } else if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      // Parallel segments: any s works, pick 0 and let the clamps fix t.
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return {s, t, distance(s1.at(s), s2.at(t))};
}

double point_segment_distance(const Point3& p, const Segment& s) {
  return segment_segment_closest(Segment{p, p}, s).distance;
}

double segment_capsule_distance(const Segment& s, const Segment& axis, double radius) {
  return std::max(0.0, segment_segment_closest(s, axis).distance - radius);
}

}  // namespace tpsim
