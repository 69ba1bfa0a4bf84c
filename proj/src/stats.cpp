#include "tpsim/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

namespace tpsim::stats {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptySample("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary median_iqr(std::span<const double> values) {
  if (values.empty()) throw EmptySample("median_iqr of an empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return {quantile_sorted(s, 0.5), quantile_sorted(s, 0.25), quantile_sorted(s, 0.75)};
}

std::vector<double> midranks(std::span<const double> pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return pooled[i] < pooled[j]; });
  std::vector<double> ranks(pooled.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Sum over tie groups of t^3 - t.
double tie_term(std::span<const double> pooled) {
  std::vector<double> s(pooled.begin(), pooled.end());
  std::sort(s.begin(), s.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    const auto t = static_cast<double>(j - i);
    acc += t * t * t - t;
    i = j;
  }
  return acc;
}

}  // namespace

std::vector<double> mann_whitney_null_counts(int m, int n) {
  // f(m, n, u) = f(m-1, n, u-n) + f(m, n-1, u): the largest pooled value
  // belongs either to the first group (adding n to U) or to the second.
  std::vector<std::vector<std::vector<double>>> f(
      static_cast<std::size_t>(m + 1), std::vector<std::vector<double>>(static_cast<std::size_t>(n + 1)));
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      auto& cur = f[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      cur.assign(static_cast<std::size_t>(i * j + 1), 0.0);
      if (i == 0 || j == 0) {
        cur[0] = 1.0;
        continue;
      }
      const auto& take_a = f[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
      const auto& take_b = f[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
      for (std::size_t u = 0; u < cur.size(); ++u) {
        if (u >= static_cast<std::size_t>(j) && u - static_cast<std::size_t>(j) < take_a.size()) {
          cur[u] += take_a[u - static_cast<std::size_t>(j)];
        }
        if (u < take_b.size()) cur[u] += take_b[u];
      }
    }
  }
  return f[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)];
}

MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("mann_whitney_u: each group needs at least 2 values");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double n = na + nb;

  MannWhitney out;
  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
    out.u = na * nb / 2.0;
    out.degenerate = true;
    return out;
  }

  const auto ranks = midranks(pooled);
  const double ra = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  out.u = ra - na * (na + 1.0) / 2.0;

  const double mean = na * nb / 2.0;
  const double ties = tie_term(pooled);
  const double var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  out.z = (out.u - mean) / std::sqrt(var);

  if (a.size() + b.size() <= 16 && ties == 0.0) {
    const auto counts = mann_whitney_null_counts(static_cast<int>(a.size()), static_cast<int>(b.size()));
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    // U is an integer without ties.
    const auto u = static_cast<std::size_t>(std::llround(out.u));
    const double lower = std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(u + 1), 0.0);
    const double upper = std::accumulate(counts.begin() + static_cast<std::ptrdiff_t>(u), counts.end(), 0.0);
    out.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    out.exact = true;
  } else {
    const double zc = std::max(0.0, std::abs(out.u - mean) - 0.5) / std::sqrt(var);
    out.p = std::min(1.0, std::erfc(zc / std::sqrt(2.0)));
  }
  return out;
}

KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error("kruskal_wallis: needs at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error("kruskal_wallis: each group needs at least 2 values");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  KruskalWallis out;
  out.dof = static_cast<int>(groups.size()) - 1;
  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
    out.degenerate = true;
    return out;
  }
  const auto ranks = midranks(pooled);
  const auto n = static_cast<double>(pooled.size());
  double sum = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
    sum += r * r / static_cast<double>(g.size());
    offset += g.size();
  }
  const double h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
  out.h = h / (1.0 - tie_term(pooled) / (n * n * n - n));
  out.p = chi_squared_tail(out.h, out.dof);
  return out;
}

double chi_squared_tail(double x, int dof) {
  if (dof < 1) throw Error("chi_squared_tail: dof must be >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace tpsim::stats
