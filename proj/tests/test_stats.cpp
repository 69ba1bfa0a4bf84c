#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "tpsim/stats.hpp"

using namespace tpsim;
using namespace tpsim::stats;

namespace {

std::vector<double> draw(RngStream& rng, int n, double shift = 0.0) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(rng.normal() + shift);
  return v;
}

// Sorted-index oracle for type-7 quantiles.
double oracle_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("median and quartiles") {
    const std::vector<double> four{1, 2, 3, 4};
    CHECK(median_iqr(four).median == 2.5);
    CHECK(median_iqr(four).q1 == 1.75);
    CHECK(median_iqr(four).q3 == 3.25);
    const std::vector<double> one{5};
    const Summary s = median_iqr(one);
    CHECK(s.median == 5);
    CHECK(s.q1 == 5);
    CHECK(s.q3 == 5);
    CHECK_THROWS_AS(median_iqr(std::vector<double>{}), EmptySample);

    RngStream rng(51);
    const auto v = draw(rng, 90);
    const Summary m = median_iqr(v);
    CHECK(m.median == oracle_quantile(v, 0.5));
    CHECK(m.q1 == oracle_quantile(v, 0.25));
    CHECK(m.q3 == oracle_quantile(v, 0.75));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(m.median == 0.5 * (sorted[44] + sorted[45]));
  }

  TEST_CASE("midranks average ties and conserve the rank sum") {
    const std::vector<double> v{10, 20, 20, 5, 20, 7};
    const auto r = midranks(v);
    CHECK(r == std::vector<double>{3, 5, 5, 1, 5, 2});
    RngStream rng(52);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x;
      for (int i = 0; i < 30; ++i) x.push_back(std::floor(rng.uniform(0, 8)));
      const auto rr = midranks(x);
      CHECK(std::accumulate(rr.begin(), rr.end(), 0.0) == 30.0 * 31.0 / 2.0);
    }
  }

  TEST_CASE("Mann-Whitney textbook case") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const MannWhitney r = mann_whitney_u(a, b);
    CHECK(r.u == 0);
    CHECK(r.exact);
    CHECK(r.p == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(mann_whitney_u(b, a).u == 9);
    CHECK(mann_whitney_u(a, a).p == 1.0);
    const std::vector<double> same{2, 2, 2};
    CHECK(mann_whitney_u(same, same).degenerate);
    CHECK(mann_whitney_u(same, same).p == 1.0);
    CHECK_THROWS_AS(mann_whitney_u(std::vector<double>{1}, b), Error);
  }

  TEST_CASE("null counts sum to the binomial coefficient and are symmetric") {
    for (int m = 1; m <= 8; ++m) {
      for (int n = 1; n <= 8; ++n) {
        const auto c = mann_whitney_null_counts(m, n);
        CHECK(std::accumulate(c.begin(), c.end(), 0.0) == testing::binomial(m + n, m));
        for (std::size_t u = 0; u < c.size(); ++u) CHECK(c[u] == c[c.size() - 1 - u]);
      }
    }
  }

  TEST_CASE("exact p equals full enumeration") {
    RngStream rng(53);
    int cases = 0;
    for (int na = 2; na <= 10; ++na) {
      for (int nb = 2; na + nb <= 12; ++nb) {
        for (int k = 0; k < 5; ++k) {
          const auto a = draw(rng, na, rng.uniform(-1, 1)), b = draw(rng, nb);
          const MannWhitney r = mann_whitney_u(a, b);
          REQUIRE(r.exact);
          CHECK(r.p == testing::enumerated_mann_whitney_p(a, b));
          ++cases;
        }
      }
    }
    CHECK(cases >= 200);
  }

  TEST_CASE("exact and approximate p converge as samples grow") {
    RngStream rng(54);
    auto worst_gap = [&](int n) {
      double worst = 0;
      for (int trial = 0; trial < 400; ++trial) {
        const auto a = draw(rng, n, 0.3 * (trial % 7)), b = draw(rng, n);
        const MannWhitney exact = mann_whitney_u(a, b);
        REQUIRE(exact.exact);
        // Normal approximation with continuity correction, computed from U directly.
        const double mean = n * n / 2.0, sd = std::sqrt(n * n * (2 * n + 1) / 12.0);
        const double z = std::max(0.0, std::abs(exact.u - mean) - 0.5) / sd;
        worst = std::max(worst, std::abs(exact.p - std::min(1.0, std::erfc(z / std::sqrt(2.0)))));
      }
      return worst;
    };
    const double small = worst_gap(3), large = worst_gap(8);
    CHECK(large < small / 2);
  }

  TEST_CASE("tied large samples use the tie-corrected normal approximation") {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
      a.push_back(i % 4);
      b.push_back(i % 5 + 1);
    }
    const MannWhitney r = mann_whitney_u(a, b);
    CHECK_FALSE(r.exact);
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    const double ra = std::accumulate(ranks.begin(), ranks.begin() + 20, 0.0);
    CHECK(r.u == ra - 210.0);
    // Tie correction by counting each tie group directly.
    double tie = 0;
    for (double v = 0; v <= 5; ++v) {
      const double t = static_cast<double>(std::count(pooled.begin(), pooled.end(), v));
      tie += t * t * t - t;
    }
    const double var = 400.0 / 12.0 * (41.0 - tie / (40.0 * 39.0));
    CHECK(r.z == doctest::Approx((r.u - 200.0) / std::sqrt(var)).epsilon(1e-12));
    const double zc = (std::abs(r.u - 200.0) - 0.5) / std::sqrt(var);
    CHECK(r.p == doctest::Approx(std::erfc(zc / std::sqrt(2.0))).epsilon(1e-12));
  }

  TEST_CASE("Kruskal-Wallis") {
    const std::vector<double> g{3, 1, 2};
    const KruskalWallis same = kruskal_wallis({g, g, g});
    CHECK(same.h == doctest::Approx(0.0));
    CHECK(same.p == doctest::Approx(1.0));
    CHECK(same.dof == 2);
    CHECK(kruskal_wallis({{1, 1}, {1, 1}}).degenerate);
    CHECK_THROWS_AS(kruskal_wallis({g}), Error);

    RngStream rng(55);
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = draw(rng, 5 + trial % 20, rng.uniform(-1, 1)), b = draw(rng, 4 + trial % 13);
      const double z = mann_whitney_u(a, b).z;
      CHECK(std::abs(kruskal_wallis({a, b}).h - z * z) < 1e-9);
    }
  }

  TEST_CASE("Kruskal-Wallis H from its definition with ties") {
    const std::vector<std::vector<double>> groups{{1, 2, 2, 3, 5}, {2, 4, 4, 6}, {5, 6, 7, 7, 8, 9}};
    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    const auto r = midranks(pooled);
    const double n = static_cast<double>(pooled.size());
    double h = 0;
    std::size_t off = 0;
    for (const auto& g : groups) {
      const double sum = std::accumulate(r.begin() + static_cast<std::ptrdiff_t>(off),
                                         r.begin() + static_cast<std::ptrdiff_t>(off + g.size()), 0.0);
      h += sum * sum / static_cast<double>(g.size());
      off += g.size();
    }
    h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1);
    // Ties: 2 x3, 4 x2, 5 x2, 6 x2, 7 x2.
    const double tie = (27 - 3) + 4 * (8 - 2);
    h /= 1 - tie / (n * n * n - n);
    const KruskalWallis kw = kruskal_wallis(groups);
    CHECK(kw.h == doctest::Approx(h).epsilon(1e-12));
    CHECK(kw.p == doctest::Approx(testing::integrated_chi_squared_tail(h, 2)).epsilon(1e-6));
  }

  TEST_CASE("shifting every value changes nothing") {
    RngStream rng(56);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> a, b, c;
      for (int i = 0; i < 9; ++i) a.push_back(std::floor(rng.uniform(0, 64)) / 8);
      for (int i = 0; i < 7; ++i) b.push_back(std::floor(rng.uniform(0, 64)) / 8);
      for (int i = 0; i < 8; ++i) c.push_back(std::floor(rng.uniform(0, 64)) / 8);
      auto shift = [](std::vector<double> v) {
        for (auto& x : v) x += 3.0;
        return v;
      };
      const auto m0 = mann_whitney_u(a, b), m1 = mann_whitney_u(shift(a), shift(b));
      CHECK(m0.u == m1.u);
      CHECK(m0.p == m1.p);
      const auto k0 = kruskal_wallis({a, b, c}), k1 = kruskal_wallis({shift(a), shift(b), shift(c)});
      CHECK(k0.h == k1.h);
      CHECK(k0.p == k1.p);
    }
  }

  TEST_CASE("larger separation never raises the p-value") {
    RngStream rng(57);
    for (int family = 0; family < 20; ++family) {
      const auto a0 = draw(rng, 8), b = draw(rng, 7);
      double last = 2.0;
      int checked = 0;
      for (double s = 0; s <= 4.0; s += 0.05) {
        auto a = a0;
        for (auto& x : a) x += s;
        const MannWhitney r = mann_whitney_u(a, b);
        // Once a sits above b the two-sided p is twice the one-sided p.
        if (r.u < 8 * 7 / 2.0) continue;
        CHECK(r.p <= last);
        last = r.p;
        ++checked;
      }
      CHECK(checked > 10);
    }
  }

  TEST_CASE("chi-squared tail") {
    CHECK(chi_squared_tail(0.0, 3) == 1.0);
    CHECK(chi_squared_tail(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(chi_squared_tail(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3 / 0.05));
    for (int dof = 1; dof <= 20; ++dof) {
      for (double x : {0.5, 1.0, 3.0, 7.5, 15.0, 30.0}) {
        CHECK(std::abs(chi_squared_tail(x, dof) - testing::integrated_chi_squared_tail(x, dof)) < 1e-9);
      }
      // dof-2 closed form.
      if (dof == 2) CHECK(chi_squared_tail(5.0, 2) == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
    }
  }
}
