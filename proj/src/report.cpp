#include "tpsim/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tpsim/config.hpp"

namespace tpsim {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<RecordRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.phantom_id << ',' << r.target_id << ',' << r.replicate << ',' << to_string(r.zone_depth) << ','
        << to_string(r.zone_lateral) << ',' << to_string(r.zone_ap) << ',' << to_string(r.approach) << ','
        << r.n_corrections << ',' << format_double(r.depth_correction_mm) << ',' << format_double(r.error_mm) << ','
        << format_double(r.motion_x_mm) << ',' << format_double(r.motion_y_mm) << ','
        << format_double(r.motion_z_mm) << ',' << (r.disengaged ? 1 : 0) << '\n';
  }
}

namespace {

template <typename T>
T parse_number(const std::string& field, const std::string& where) {
  T v{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw Error(where + ": cannot parse '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<RecordRow> read_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(source + ": missing or unexpected CSV header");
  std::vector<RecordRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    const std::string where = source + ":" + std::to_string(line_no);
    if (f.size() != 14) throw Error(where + ": expected 14 columns, got " + std::to_string(f.size()));
    try {
      RecordRow r;
      r.phantom_id = parse_number<int>(f[0], where);
      r.target_id = parse_number<int>(f[1], where);
      r.replicate = parse_number<int>(f[2], where);
      r.zone_depth = parse_depth_zone(f[3]);
      r.zone_lateral = parse_lateral_zone(f[4]);
      r.zone_ap = parse_ap_zone(f[5]);
      r.approach = parse_approach(f[6]);
      r.n_corrections = parse_number<int>(f[7], where);
      r.depth_correction_mm = parse_number<double>(f[8], where);
      r.error_mm = parse_number<double>(f[9], where);
      r.motion_x_mm = parse_number<double>(f[10], where);
      r.motion_y_mm = parse_number<double>(f[11], where);
      r.motion_z_mm = parse_number<double>(f[12], where);
      r.disengaged = parse_number<int>(f[13], where) != 0;
      rows.push_back(r);
    } catch (const Error& e) {
      const std::string msg = e.what();
      throw Error(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
    }
  }
  return rows;
}

namespace {

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void summary_cells(std::ostream& out, const std::optional<stats::Summary>& s) {
  if (s) {
    out << format_double(s->median) << ',' << format_double(s->q1) << ',' << format_double(s->q3);
  } else {
    out << ",,";
  }
}

void loop_csv(std::ostream& out, const std::string& mode, const LoopSummary& s) {
  out << "table1," << mode << ",overall," << s.n_records << ',';
  summary_cells(out, s.error);
  out << ',';
  summary_cells(out, s.depth_correction);
  out << ",,\n";
  auto p_for = [&](const std::string& stratum) -> const StratumTest* {
    if (stratum == "apex") return &s.test("apex_vs_base");
    if (stratum == "center") return &s.test("center_left_right");
    if (stratum == "anterior") return &s.test("anterior_vs_posterior");
    if (stratum == "horizontal") return &s.test("horizontal_vs_angled");
    return nullptr;
  };
  for (const auto& r : s.table1) {
    out << "table1," << mode << ',' << r.name << ',' << r.count << ',';
    summary_cells(out, r.error);
    out << ',';
    summary_cells(out, r.depth_correction);
    const StratumTest* t = p_for(r.name);
    out << ',' << (t ? opt_text(t->p_error) : "") << ',' << (t ? opt_text(t->p_depth_correction) : "") << '\n';
  }
  for (const auto& r : s.table2) {
    out << "table2," << mode << ',' << r.name << ',' << r.count << ',';
    summary_cells(out, r.x);
    out << ',';
    summary_cells(out, r.y);
    out << ',';
    summary_cells(out, r.z);
    out << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

std::string summary_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "# tpsim " << report.version << " seed " << report.seed << '\n';
  for (const auto& n : report.notes) out << "# " << n << '\n';
  out << "table,mode,stratum,count,a_median,a_q1,a_q3,b_median,b_q1,b_q3,c_median,c_q1,c_q3\n";
  out << "# table1: a = error_mm, b = depth_correction_mm, c = (p_error, p_depth_correction) on the first row of "
         "each comparison\n";
  out << "# table2: a, b, c = |motion| along x, y, z in mm\n";
  if (report.closed_loop) loop_csv(out, "closed", *report.closed_loop);
  if (report.open_loop) loop_csv(out, "open", *report.open_loop);
  return out.str();
}

void write_report(const StudyResult& result, const std::filesystem::path& dir, ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  auto csv_text = [](const std::vector<RecordRow>& rows) {
    std::ostringstream s;
    write_csv(s, rows);
    return s.str();
  };
  if (result.report.closed_loop) write_file(dir / kClosedCsv, csv_text(result.closed_rows));
  if (result.report.open_loop) write_file(dir / kOpenCsv, csv_text(result.open_rows));
  write_summary(result.report, dir, format);
}

std::string summary_text(const StudyReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? report_to_json(report).dump(2) + "\n" : summary_csv(report);
}

std::filesystem::path summary_path(const std::filesystem::path& dir, ReportFormat format) {
  return dir / (format == ReportFormat::Json ? "summary.json" : "summary.csv");
}

void write_summary(const StudyReport& report, const std::filesystem::path& dir, ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  write_file(summary_path(dir, format), summary_text(report, format));
}

StudyReport recompute_report(const StudyConfig& config, const std::filesystem::path& dir) {
  auto load = [&](const char* name) {
    const auto path = dir / name;
    std::vector<RecordRow> rows;
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      if (!in) throw Error("cannot open " + path.string());
      rows = read_csv(in, path.string());
    }
    return rows;
  };
  const auto closed = load(kClosedCsv);
  const auto open = load(kOpenCsv);
  if (closed.empty() && open.empty()) throw Error("no per-insertion CSV found in " + dir.string());
  return build_report(config, closed, open);
}

}  // namespace tpsim
