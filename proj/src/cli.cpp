#include "tpsim/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "tpsim/calibrate.hpp"
#include "tpsim/config.hpp"
#include "tpsim/report.hpp"

namespace tpsim {

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string out;
  std::string format;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c, bool with_mode_and_seed) {
  cmd->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  if (with_mode_and_seed) {
    cmd->add_option("--seed", c.seed, "master seed override");
    cmd->add_option("--mode", c.mode, "closed, open or both")->check(CLI::IsMember({"closed", "open", "both"}));
  }
  cmd->add_option("--format", c.format, "summary format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

StudyConfig resolve_config(const Common& c) {
  StudyConfig cfg = c.config_path.empty() ? StudyConfig{} : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.mode == "closed") cfg.mode = Mode::ClosedLoop;
  if (c.mode == "open") cfg.mode = Mode::OpenLoop;
  if (c.mode == "both") cfg.mode = Mode::Both;
  if (c.format == "csv") cfg.format = ReportFormat::Csv;
  if (c.format == "json") cfg.format = ReportFormat::Json;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.out.empty()) cfg.out_dir = c.out;
  cfg.validate();
  return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

void print_headline(std::ostream& out, const char* mode, const LoopSummary& s) {
  out << mode << ": n=" << s.n_records << " median error " << format_double(s.error.median)
      << " mm, median depth correction " << format_double(s.depth_correction.median) << " mm\n";
}

int simulate(const Common& c, bool emit_default, std::ostream& out) {
  if (emit_default) {
    out << config_to_json(StudyConfig{}).dump(2) << '\n';
    return kExitOk;
  }
  const StudyConfig cfg = resolve_config(c);
  const StudyResult result = run_study(cfg);
  write_report(result, cfg.out_dir, cfg.format);
  write_text(std::filesystem::path(cfg.out_dir) / kConfigEcho, config_echo_json(cfg).dump(2) + "\n");
  if (result.report.closed_loop) print_headline(out, "closed", *result.report.closed_loop);
  if (result.report.open_loop) print_headline(out, "open", *result.report.open_loop);
  out << "wrote " << cfg.out_dir << '\n';
  return kExitOk;
}

int report(Common c, const std::string& in_dir, std::ostream& out) {
  const std::filesystem::path dir(in_dir);
  if (c.config_path.empty() && std::filesystem::exists(dir / kConfigEcho)) c.config_path = (dir / kConfigEcho).string();
  const std::string out_dir = c.out;
  c.out.clear();
  const StudyConfig cfg = resolve_config(c);
  const StudyReport rep = recompute_report(cfg, dir);
  if (out_dir.empty()) {
    out << summary_text(rep, cfg.format);
  } else {
    write_summary(rep, out_dir, cfg.format);
    out << "wrote " << summary_path(out_dir, cfg.format).string() << '\n';
  }
  return kExitOk;
}

int calibrate_cmd(const Common& c, std::ostream& out, std::ostream& err) {
  StudyConfig base = resolve_config(c);
  CalibrationGrid grid;
  CalibrationTargets targets;
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    const json j = json::parse(in);
    if (j.contains("calibration")) read_calibration_inputs(j["calibration"], grid, targets);
  }
  const CalibrationResult res = calibrate(base, grid, targets, [&](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) err << "calibrate: " << done << "/" << total << '\n';
  });
  json fitted = config_to_json(res.fitted);
  fitted["calibration"] = calibration_to_json(res, grid, targets);
  const std::string text = fitted.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
  } else {
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (ec) throw Error("cannot create " + c.out + ": " + ec.message());
    const auto path = std::filesystem::path(c.out) / "fitted_config.json";
    write_text(path, text);
    out << "objective " << format_double(res.best.objective) << ", wrote " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop transperineal needle placement simulator", "tpsim"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common sim_opts;
  bool emit_default = false;
  CLI::App* sim = app.add_subcommand("simulate", "run the study and write CSV and summary files");
  add_common(sim, sim_opts, true);
  sim->add_option("--out", sim_opts.out, "output directory");
  sim->add_flag("--emit-default-config", emit_default, "print the default config and exit");

  Common rep_opts;
  std::string in_dir;
  CLI::App* rep = app.add_subcommand("report", "recompute the summary from a directory of per-insertion CSVs");
  rep->add_option("dir", in_dir, "directory written by simulate")->required()->check(CLI::ExistingDirectory);
  add_common(rep, rep_opts, false);
  rep->add_option("--out", rep_opts.out, "write the summary here instead of stdout");

  Common cal_opts;
  CLI::App* cal = app.add_subcommand("calibrate", "grid-search motion and noise parameters; emit a fitted config");
  add_common(cal, cal_opts, true);
  cal->add_option("--out", cal_opts.out, "write fitted_config.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return simulate(sim_opts, emit_default, out);
    if (*rep) return report(rep_opts, in_dir, out);
    if (*cal) return calibrate_cmd(cal_opts, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace tpsim
