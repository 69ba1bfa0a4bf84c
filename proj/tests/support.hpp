// Shared generators and independent reference computations for the tests.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "tpsim/geometry.hpp"
#include "tpsim/kinematics.hpp"
#include "tpsim/rng.hpp"

namespace tpsim::testing {

inline Point3 random_point(RngStream& rng, double half_extent) {
  return {rng.uniform(-half_extent, half_extent), rng.uniform(-half_extent, half_extent),
          rng.uniform(-half_extent, half_extent)};
}

inline UnitVec3 random_direction(RngStream& rng) {
  for (;;) {
    const Vec3 v = random_point(rng, 1.0);
    const double n = norm(v);
    if (n > 0.1 && n <= 1.0) return UnitVec3::normalize(v);
  }
}

inline RigidTransform random_transform(RngStream& rng, double max_angle_deg, double max_translation) {
  const UnitVec3 axis = random_direction(rng);
  const double angle = rng.uniform(-max_angle_deg, max_angle_deg);
  Vec3 t;
  do {
    t = random_point(rng, max_translation);
  } while (norm(t) > max_translation);
  return {rotation_about(axis, angle), t};
}

/// Minimum distance between two segments: dense parameter sampling, then
/// nested ternary search around the best sample. Distance is jointly convex
/// in the two parameters, so the refinement converges to the true minimum.
inline double sampled_segment_distance(const Segment& s1, const Segment& s2, int samples = 200) {
  auto d = [&](double s, double t) { return distance(s1.at(s), s2.at(t)); };
  double best = d(0, 0), bs = 0, bt = 0;
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; j <= samples; ++j) {
      const double s = double(i) / samples, t = double(j) / samples;
      if (const double v = d(s, t); v < best) {
        best = v;
        bs = s;
        bt = t;
      }
    }
  }
  const double step = 1.0 / samples;
  const double t_lo = std::max(0.0, bt - step), t_hi = std::min(1.0, bt + step);
  auto inner = [&](double s) {
    double lo = t_lo, hi = t_hi;
    for (int k = 0; k < 100; ++k) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (d(s, m1) < d(s, m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    return d(s, 0.5 * (lo + hi));
  };
  double lo = std::max(0.0, bs - step), hi = std::min(1.0, bs + step);
  for (int k = 0; k < 100; ++k) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (inner(m1) < inner(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min(best, inner(0.5 * (lo + hi)));
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Two-sided exact Mann-Whitney p by enumerating every assignment of the
/// pooled ranks to group a (bitmask over N <= 20 items).
inline double enumerated_mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const int n = static_cast<int>(pooled.size());
  const int m = static_cast<int>(a.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return pooled[static_cast<std::size_t>(x)] < pooled[static_cast<std::size_t>(y)]; });
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r + 1;
  auto u_of = [&](unsigned mask) {
    int sum = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) sum += rank[static_cast<std::size_t>(i)];
    }
    return sum - m * (m + 1) / 2;
  };
  const unsigned observed_mask = (1u << m) - 1u;
  const int u_obs = u_of(observed_mask);
  const double mean = m * (n - m) / 2.0;
  const double dev = std::abs(u_obs - mean);
  long long extreme = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != m) continue;
    ++total;
    if (std::abs(u_of(mask) - mean) >= dev - 1e-12) ++extreme;
  }
  return std::min(1.0, double(extreme) / double(total));
}

/// Chi-squared upper tail by composite Simpson integration of the density.
inline double integrated_chi_squared_tail(double x, int dof) {
  const double k = dof / 2.0;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  // Integrate the head [0, x] and subtract; t = u^2 removes the integrable
  // singularity at 0 when dof = 1, leaving 2 u^(dof-1) exp(-u^2/2) / norm.
  auto g = [&](double u) { return 2.0 * std::pow(u, dof - 1) * std::exp(log_norm - u * u / 2); };
  const double ux = std::sqrt(x);
  const int steps = 200000;
  const double h = ux / steps;
  double sum = g(0) + g(ux);
  for (int i = 1; i < steps; ++i) sum += g(i * h) * (i % 2 ? 4.0 : 2.0);
  return 1.0 - sum * h / 3.0;
}

/// Brute-force reachability: the needle line must cross each stage plane
/// inside some 0.5 mm cell of that stage's travel square, the shared z stage
/// must be within travel, and the angulation within its limit.
inline bool probe_reachable(const RobotGeometry& g, const Trajectory& t, double cell = 0.5) {
  if (rad_to_deg(std::acos(std::clamp(t.dir.z(), -1.0, 1.0))) > g.max_angulation) return false;
  const double front_z = t.entry.z - g.standoff;
  const double z_offset = front_z - g.home_front_z;
  if (z_offset < 0.0 || z_offset > g.z_travel) return false;
  const int n = static_cast<int>(std::lround(2.0 * g.stage_travel / cell));
  auto in_some_cell = [&](double plane_z) {
    const double s = (plane_z - t.entry.z) / t.dir.z();
    const double x = t.entry.x + s * t.dir.x(), y = t.entry.y + s * t.dir.y();
    for (int i = 0; i < n; ++i) {
      const double x0 = -g.stage_travel + i * cell;
      if (x < x0 || x > x0 + cell) continue;
      for (int j = 0; j < n; ++j) {
        const double y0 = -g.stage_travel + j * cell;
        if (y >= y0 && y <= y0 + cell) return true;
      }
    }
    return false;
  };
  return in_some_cell(front_z) && in_some_cell(front_z - g.stage_separation);
}

/// Random trajectory around the reachable workspace, a good share of which
/// is out of reach.
inline Trajectory random_trajectory(RngStream& rng, double max_tilt_deg) {
  const double alpha = deg_to_rad(rng.uniform(0.0, max_tilt_deg));
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const UnitVec3 dir = UnitVec3::normalize(
      {std::sin(alpha) * std::cos(phi), std::sin(alpha) * std::sin(phi), std::cos(alpha)});
  const Point3 entry{rng.uniform(-45, 45), rng.uniform(-45, 45), rng.uniform(-200, -40)};
  return Trajectory{entry, dir, rng.uniform(0, 120), Approach::Horizontal};
}

}  // namespace tpsim::testing
