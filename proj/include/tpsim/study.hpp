// Experiment harness: study configuration, the seeded multi-phantom run, and
// the stratified summary tables.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpsim/controller.hpp"
#include "tpsim/stats.hpp"

namespace tpsim {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { ClosedLoop, OpenLoop, Both };
enum class ReportFormat { Csv, Json };

std::string_view to_string(Mode m);
std::string_view to_string(ReportFormat f);

struct StudyConfig {
  int n_phantoms = 9;
  int targets_per_phantom = 10;
  /// Totals over all phantoms; split across phantoms by cumulative rounding.
  ZoneQuotas quotas{50, 40, 32, 28, 30, 52, 38};
  std::uint64_t seed = 2012;
  int n_seed_replicates = 20;
  PhantomSpec phantom;  // its `motion` and `n_targets` are overwritten from the fields below
  RobotGeometry robot;
  PubicArchModel arch = PubicArchModel::default_arch();
  EntryRegion entry_region;
  PlannerGrid planner;
  MotionParams motion{0.08, 2.5, 0.03, 0.9, 0};
  NoiseModel noise;
  ConvergenceParams convergence;
  Mode mode = Mode::Both;
  std::string out_dir = "out";
  ReportFormat format = ReportFormat::Json;
  int threads = 0;  // 0 = hardware concurrency; results do not depend on it

  /// Throws ConfigError with the offending key path.
  void validate() const;
  /// Generation spec for one phantom.
  PhantomSpec phantom_spec(int phantom_index) const;
  int total_targets() const { return n_phantoms * targets_per_phantom; }
};

/// One row of the per-insertion CSV.
struct RecordRow {
  int phantom_id = 0;
  int target_id = 0;
  int replicate = 0;
  DepthZone zone_depth = DepthZone::Apex;
  LateralZone zone_lateral = LateralZone::Center;
  ApZone zone_ap = ApZone::Anterior;
  Approach approach = Approach::Horizontal;
  int n_corrections = 0;
  double depth_correction_mm = 0.0;
  double error_mm = 0.0;
  double motion_x_mm = 0.0;
  double motion_y_mm = 0.0;
  double motion_z_mm = 0.0;
  bool disengaged = false;

  bool operator==(const RecordRow&) const = default;
};

RecordRow to_row(const InsertionRecord& rec);

struct StratumRow {
  std::string name;
  int count = 0;
  std::optional<stats::Summary> error;
  std::optional<stats::Summary> depth_correction;

  bool operator==(const StratumRow&) const = default;
};

struct StratumTest {
  std::string name;  // e.g. "apex_vs_base"
  std::string test;  // "mann_whitney" or "kruskal_wallis"
  std::optional<double> p_error;
  std::optional<double> p_depth_correction;

  bool operator==(const StratumTest&) const = default;
};

struct AxisRow {
  std::string name;
  int count = 0;
  std::optional<stats::Summary> x, y, z;  // of |motion| per axis

  bool operator==(const AxisRow&) const = default;
};

struct ReplicateRow {
  int replicate = 0;
  int count = 0;
  double median_error = 0.0;
  double median_depth_correction = 0.0;

  bool operator==(const ReplicateRow&) const = default;
};

struct LoopSummary {
  int n_records = 0;
  stats::Summary error;
  stats::Summary depth_correction;
  double fraction_zero_corrections = 0.0;
  double fraction_one_correction = 0.0;
  double fraction_two_plus = 0.0;
  int n_disengaged = 0;
  std::vector<StratumRow> table1;
  std::vector<StratumTest> tests;
  std::vector<AxisRow> table2;
  std::vector<ReplicateRow> per_replicate;

  const StratumRow& stratum(const std::string& name) const;
  const StratumTest& test(const std::string& name) const;
  const AxisRow& axes(const std::string& name) const;
  bool operator==(const LoopSummary&) const = default;
};

/// Pooled stratum table (table1) and per-axis motion table (table2). Throws EmptySample on no rows.
LoopSummary summarize(const std::vector<RecordRow>& rows);

struct StudyReport {
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::string config_echo;  // canonical JSON text of the config
  double perineum_peak_force_n = 1.8;
  std::vector<std::string> notes;
  std::optional<LoopSummary> closed_loop;
  std::optional<LoopSummary> open_loop;

  bool operator==(const StudyReport&) const = default;
};

struct StudyResult {
  StudyReport report;
  std::vector<InsertionRecord> closed_records;  // ordered by (replicate, phantom, target)
  std::vector<InsertionRecord> open_records;
  std::vector<RecordRow> closed_rows;
  std::vector<RecordRow> open_rows;
};

StudyResult run_study(const StudyConfig& config);

/// Builds the report from CSV-level rows; `run_study` uses this too so that
/// recomputing from written files reproduces the summary exactly.
StudyReport build_report(const StudyConfig& config, const std::vector<RecordRow>& closed,
                         const std::vector<RecordRow>& open);

}  // namespace tpsim
