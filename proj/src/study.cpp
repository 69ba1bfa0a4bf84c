#include "tpsim/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "tpsim/config.hpp"

namespace tpsim {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::ClosedLoop: return "closed";
    case Mode::OpenLoop: return "open";
    case Mode::Both: return "both";
  }
  return "both";
}

std::string_view to_string(ReportFormat f) { return f == ReportFormat::Csv ? "csv" : "json"; }

void StudyConfig::validate() const {
  if (n_phantoms < 1) throw ConfigError("study.n_phantoms", "must be >= 1");
  if (targets_per_phantom < 1 || targets_per_phantom > 64) {
    throw ConfigError("study.targets_per_phantom", "must be in [1, 64]");
  }
  if (n_seed_replicates < 1) throw ConfigError("study.n_seed_replicates", "must be >= 1");
  if (threads < 0) throw ConfigError("study.threads", "must be >= 0");
  auto check_dim = [&](const char* key, std::initializer_list<std::optional<int>> counts) {
    int set = 0, sum = 0;
    for (const auto& c : counts) {
      if (c) {
        ++set;
        if (*c < 0) throw ConfigError(std::string("quotas.") + key, "counts must be >= 0");
        sum += *c;
      }
    }
    if (set == 0) return;
    if (set != static_cast<int>(counts.size())) {
      throw ConfigError(std::string("quotas.") + key, "set all counts of this dimension or none");
    }
    if (sum != total_targets()) {
      throw ConfigError(std::string("quotas.") + key, "counts sum to " + std::to_string(sum) + " but the study has " +
                                                          std::to_string(total_targets()) + " targets");
    }
  };
  check_dim("depth", {quotas.apex, quotas.base});
  check_dim("lateral", {quotas.left, quotas.center, quotas.right});
  check_dim("ap", {quotas.anterior, quotas.posterior});
  if (!(phantom.semiaxes.x > 0 && phantom.semiaxes.y > 0 && phantom.semiaxes.z > 0)) {
    throw ConfigError("phantom.semiaxes", "all must be positive");
  }
  if (!(phantom.min_spacing >= 0.0)) throw ConfigError("phantom.min_spacing", "must be >= 0");
  if (!(phantom.left_bias >= 0.0)) throw ConfigError("phantom.left_bias", "must be >= 0");
  if (!(motion.axial_gain >= 0.0)) throw ConfigError("motion.axial_gain", "must be >= 0");
  if (!(motion.axial_base_offset >= 0.0)) throw ConfigError("motion.axial_base_offset", "must be >= 0");
  if (!(motion.rotation_gain >= 0.0)) throw ConfigError("motion.rotation_gain", "must be >= 0");
  if (!(motion.noise_sd_motion >= 0.0)) throw ConfigError("motion.noise_sd_motion", "must be >= 0");
  if (!(entry_region.x_min < entry_region.x_max && entry_region.y_min < entry_region.y_max)) {
    throw ConfigError("entry_region", "empty rectangle");
  }
  if (!(planner.angulation_step > 0.0)) throw ConfigError("planner.angulation_step", "must be positive");
  if (!(planner.azimuth_step > 0.0)) throw ConfigError("planner.azimuth_step", "must be positive");
  if (!(planner.needle_radius > 0.0)) throw ConfigError("planner.needle_radius", "must be positive");
  robot.validate();
  arch.validate();
  noise.validate();
  convergence.validate();
}

PhantomSpec StudyConfig::phantom_spec(int phantom_index) const {
  PhantomSpec spec = phantom;
  spec.n_targets = targets_per_phantom;
  spec.motion = motion;
  // Label j of a dimension gets floor(P_j (i+1) / n) - floor(P_j i / n) minus
  // the previous labels' share, with P_j the prefix sum of the study counts.
  auto split = [&](std::initializer_list<std::optional<int>*> outs,
                   std::initializer_list<std::optional<int>> totals) {
    if (!totals.begin()->has_value()) return;
    long long prefix = 0;
    long long prev_alloc = 0;
    auto out = outs.begin();
    for (const auto& t : totals) {
      prefix += *t;
      const long long alloc = prefix * (phantom_index + 1) / n_phantoms - prefix * phantom_index / n_phantoms;
      **out = static_cast<int>(alloc - prev_alloc);
      prev_alloc = alloc;
      ++out;
    }
  };
  spec.quotas = {};
  split({&spec.quotas.apex, &spec.quotas.base}, {quotas.apex, quotas.base});
  split({&spec.quotas.left, &spec.quotas.center, &spec.quotas.right}, {quotas.left, quotas.center, quotas.right});
  split({&spec.quotas.anterior, &spec.quotas.posterior}, {quotas.anterior, quotas.posterior});
  return spec;
}

RecordRow to_row(const InsertionRecord& rec) {
  return RecordRow{rec.phantom_id,
                   rec.target_id,
                   rec.replicate,
                   rec.zone.depth,
                   rec.zone.lateral,
                   rec.zone.ap,
                   rec.zone.approach,
                   rec.n_corrections,
                   rec.axial_motion,
                   rec.distance_error,
                   rec.motion.x,
                   rec.motion.y,
                   rec.motion.z,
                   rec.disengaged};
}

namespace {

struct PhantomRun {
  std::vector<InsertionRecord> closed;
  std::vector<InsertionRecord> open;
};

PhantomRun run_phantom(const StudyConfig& cfg, int replicate, int phantom_index) {
  const RngStream master(cfg.seed);
  const RngStream rep = master.split(static_cast<std::uint64_t>(replicate));
  const std::uint64_t phantom_seed = rep.split({0x50ULL, static_cast<std::uint64_t>(phantom_index)}).next_u64();
  const ProstatePhantom ph = generate_phantom(cfg.phantom_spec(phantom_index), phantom_seed);

  PhantomRun out;
  InsertionContext ctx{&ph, cfg.robot, cfg.arch, cfg.entry_region, cfg.planner, cfg.noise, cfg.convergence, 0, RngStream(0)};
  for (std::size_t k = 0; k < ph.targets.size(); ++k) {
    const Target& t = ph.targets[k];
    ctx.completed_insertions = static_cast<int>(k);
    ctx.stream = rep.split({0x49ULL, static_cast<std::uint64_t>(phantom_index), static_cast<std::uint64_t>(t.id),
                            cfg.noise.rng_seed});
    auto tag = [&](InsertionRecord r) {
      r.phantom_id = phantom_index;
      r.replicate = replicate;
      return r;
    };
    if (cfg.mode != Mode::OpenLoop) out.closed.push_back(tag(run_insertion(ctx, t.id)));
    if (cfg.mode != Mode::ClosedLoop) out.open.push_back(tag(open_loop_insertion(ctx, t.id)));
  }
  return out;
}

std::optional<stats::Summary> maybe_summary(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return stats::median_iqr(v);
}

std::optional<double> maybe_mw(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  return stats::mann_whitney_u(a, b).p;
}

std::optional<double> maybe_kw(const std::vector<std::vector<double>>& groups) {
  for (const auto& g : groups) {
    if (g.size() < 2) return std::nullopt;
  }
  return stats::kruskal_wallis(groups).p;
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const int n_tasks = config.n_seed_replicates * config.n_phantoms;
  std::vector<PhantomRun> runs(static_cast<std::size_t>(n_tasks));

  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_tasks));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int task; !failed && (task = next.fetch_add(1)) < n_tasks;) {
      try {
        runs[static_cast<std::size_t>(task)] = run_phantom(config, task / config.n_phantoms, task % config.n_phantoms);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  StudyResult result;
  for (auto& run : runs) {
    for (auto& r : run.closed) result.closed_records.push_back(std::move(r));
    for (auto& r : run.open) result.open_records.push_back(std::move(r));
  }
  for (const auto& r : result.closed_records) result.closed_rows.push_back(to_row(r));
  for (const auto& r : result.open_records) result.open_rows.push_back(to_row(r));
  result.report = build_report(config, result.closed_rows, result.open_rows);
  return result;
}

LoopSummary summarize(const std::vector<RecordRow>& rows) {
  if (rows.empty()) throw EmptySample("summarize: no records");
  LoopSummary s;
  s.n_records = static_cast<int>(rows.size());

  auto errors_where = [&](auto pred) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (pred(r)) v.push_back(r.error_mm);
    }
    return v;
  };
  auto depth_where = [&](auto pred) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (pred(r)) v.push_back(r.depth_correction_mm);
    }
    return v;
  };
  auto all = [](const RecordRow&) { return true; };
  s.error = stats::median_iqr(errors_where(all));
  s.depth_correction = stats::median_iqr(depth_where(all));

  int zero = 0, one = 0, more = 0;
  for (const auto& r : rows) {
    (r.n_corrections == 0 ? zero : r.n_corrections == 1 ? one : more)++;
    s.n_disengaged += r.disengaged ? 1 : 0;
  }
  s.fraction_zero_corrections = static_cast<double>(zero) / s.n_records;
  s.fraction_one_correction = static_cast<double>(one) / s.n_records;
  s.fraction_two_plus = static_cast<double>(more) / s.n_records;

  using Pred = std::function<bool(const RecordRow&)>;
  const std::vector<std::pair<std::string, Pred>> strata = {
      {"apex", [](const RecordRow& r) { return r.zone_depth == DepthZone::Apex; }},
      {"base", [](const RecordRow& r) { return r.zone_depth == DepthZone::Base; }},
      {"center", [](const RecordRow& r) { return r.zone_lateral == LateralZone::Center; }},
      {"left", [](const RecordRow& r) { return r.zone_lateral == LateralZone::Left; }},
      {"right", [](const RecordRow& r) { return r.zone_lateral == LateralZone::Right; }},
      {"anterior", [](const RecordRow& r) { return r.zone_ap == ApZone::Anterior; }},
      {"posterior", [](const RecordRow& r) { return r.zone_ap == ApZone::Posterior; }},
      {"horizontal", [](const RecordRow& r) { return r.approach == Approach::Horizontal; }},
      {"angled", [](const RecordRow& r) { return r.approach == Approach::Angled; }},
  };
  std::vector<std::vector<double>> err(strata.size()), dep(strata.size());
  for (std::size_t i = 0; i < strata.size(); ++i) {
    err[i] = errors_where(strata[i].second);
    dep[i] = depth_where(strata[i].second);
    s.table1.push_back({strata[i].first, static_cast<int>(err[i].size()), maybe_summary(err[i]), maybe_summary(dep[i])});
  }
  s.tests.push_back({"apex_vs_base", "mann_whitney", maybe_mw(err[0], err[1]), maybe_mw(dep[0], dep[1])});
  s.tests.push_back({"center_left_right", "kruskal_wallis", maybe_kw({err[2], err[3], err[4]}),
                     maybe_kw({dep[2], dep[3], dep[4]})});
  s.tests.push_back({"anterior_vs_posterior", "mann_whitney", maybe_mw(err[5], err[6]), maybe_mw(dep[5], dep[6])});
  s.tests.push_back({"horizontal_vs_angled", "mann_whitney", maybe_mw(err[7], err[8]), maybe_mw(dep[7], dep[8])});

  // Axis table row order: overall, apex, base, right, center, left, anterior, posterior.
  const std::vector<std::pair<std::string, Pred>> axis_strata = {
      {"overall", all},       strata[0], strata[1], strata[4], strata[2], strata[3], strata[5], strata[6]};
  for (const auto& [name, pred] : axis_strata) {
    std::vector<double> x, y, z;
    for (const auto& r : rows) {
      if (!pred(r)) continue;
      x.push_back(std::abs(r.motion_x_mm));
      y.push_back(std::abs(r.motion_y_mm));
      z.push_back(std::abs(r.motion_z_mm));
    }
    s.table2.push_back({name, static_cast<int>(x.size()), maybe_summary(x), maybe_summary(y), maybe_summary(z)});
  }

  int max_rep = 0;
  for (const auto& r : rows) max_rep = std::max(max_rep, r.replicate);
  for (int rep = 0; rep <= max_rep; ++rep) {
    auto in_rep = [rep](const RecordRow& r) { return r.replicate == rep; };
    const auto e = errors_where(in_rep);
    if (e.empty()) continue;
    s.per_replicate.push_back({rep, static_cast<int>(e.size()), stats::median_iqr(e).median,
                               stats::median_iqr(depth_where(in_rep)).median});
  }
  return s;
}

const StratumRow& LoopSummary::stratum(const std::string& name) const {
  for (const auto& r : table1) {
    if (r.name == name) return r;
  }
  throw Error("no stratum " + name);
}

const StratumTest& LoopSummary::test(const std::string& name) const {
  for (const auto& t : tests) {
    if (t.name == name) return t;
  }
  throw Error("no test " + name);
}

const AxisRow& LoopSummary::axes(const std::string& name) const {
  for (const auto& r : table2) {
    if (r.name == name) return r;
  }
  throw Error("no axis row " + name);
}

StudyReport build_report(const StudyConfig& config, const std::vector<RecordRow>& closed,
                         const std::vector<RecordRow>& open) {
  StudyReport report;
  report.seed = config.seed;
  report.config_echo = config_echo_json(config).dump();
  report.perineum_peak_force_n = config.phantom.perineum_peak_force_n;
  report.notes = {
      "Overall error, axial motion, apex/base depth correction and overall per-axis motion medians are "
      "calibration-fit reproductions of the calibration targets, not independent predictions.",
      "Quartiles use linear interpolation between order statistics (type 7).",
      "Distance error is measured between bead and target in the gland's rest (material) frame.",
      "motion_x/y/z is the tracked target displacement with the gland's axial push along the needle removed.",
      "Perineum peak force is stored as metadata only; needle-tissue force is not simulated.",
  };
  if (!closed.empty()) report.closed_loop = summarize(closed);
  if (!open.empty()) report.open_loop = summarize(open);
  return report;
}

}  // namespace tpsim
