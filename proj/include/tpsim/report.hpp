// Per-insertion CSV and summary files.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tpsim/study.hpp"

namespace tpsim {

/// Column order of the per-insertion CSV.
inline constexpr const char* kCsvHeader =
    "phantom_id,target_id,replicate,zone_depth,zone_lateral,zone_ap,approach,n_corrections,"
    "depth_correction_mm,error_mm,motion_x_mm,motion_y_mm,motion_z_mm,disengaged";

inline constexpr const char* kClosedCsv = "closed_loop.csv";
inline constexpr const char* kOpenCsv = "open_loop.csv";
inline constexpr const char* kConfigEcho = "config.json";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::vector<RecordRow>& rows);
std::vector<RecordRow> read_csv(std::istream& in, const std::string& source = "csv");

/// Stratum and per-axis tables as CSV text.
std::string summary_csv(const StudyReport& report);

std::string summary_text(const StudyReport& report, ReportFormat format);
std::filesystem::path summary_path(const std::filesystem::path& dir, ReportFormat format);
void write_summary(const StudyReport& report, const std::filesystem::path& dir, ReportFormat format);

/// Writes <dir>/closed_loop.csv and/or open_loop.csv plus summary.json or
/// summary.csv. Throws Error with the failing path.
void write_report(const StudyResult& result, const std::filesystem::path& dir, ReportFormat format);

/// Re-reads the CSVs in `dir` and rebuilds the summary.
StudyReport recompute_report(const StudyConfig& config, const std::filesystem::path& dir);

}  // namespace tpsim
