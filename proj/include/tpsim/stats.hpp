// Nonparametric statistics for stratified accuracy tables.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "tpsim/errors.hpp"

namespace tpsim::stats {

struct Sample {
  std::vector<double> values;
  std::string label;
};

struct Summary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;

  bool operator==(const Summary&) const = default;
};

/// Linear-interpolation quantile (type 7) of sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);
/// Median with type-7 quartiles. Throws EmptySample.
Summary median_iqr(std::span<const double> values);

/// Midranks of the pooled values, 1-based, in input order.
std::vector<double> midranks(std::span<const double> pooled);

struct MannWhitney {
  double u = 0.0;    // U of the first group: R_a - n_a(n_a+1)/2
  double p = 1.0;    // two-sided
  double z = 0.0;    // normal score without continuity correction (tie-corrected)
  bool exact = false;
  bool degenerate = false;  // every value identical
};

/// Exact null distribution via the counting recurrence when n_a + n_b <= 16
/// and there are no ties; otherwise normal approximation with tie and
/// continuity corrections. Throws Error when a group has fewer than 2 values.
MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Number of ways to reach each U in [0, m*n] for group sizes m, n.
std::vector<double> mann_whitney_null_counts(int m, int n);

struct KruskalWallis {
  double h = 0.0;
  double p = 1.0;
  int dof = 0;
  bool degenerate = false;
};

KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Upper tail of the chi-squared distribution.
double chi_squared_tail(double x, int dof);

}  // namespace tpsim::stats
