#include "tpsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace tpsim {

namespace {

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

json opt_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

// Strict reader over one JSON object: remembers the key path for error
// messages and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw ConfigError(key_path(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, Point3& out) {
    if (const json* v = find(key)) out = to_point(*v, key_path(key));
  }
  void get(const std::string& key, std::optional<int>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number_integer()) {
        out = v->get<int>();
      } else {
        throw ConfigError(key_path(key), "expected an integer or null");
      }
    }
  }

  void get(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  Reader sub(const std::string& key) { return Reader(find(key), key_path(key)); }

  void finish() const {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()), "unknown key");
    }
  }

  static Point3 to_point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
      throw ConfigError(path, "expected [x, y, z]");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

json motion_json(const MotionParams& m) {
  return {{"axial_gain", m.axial_gain},
          {"axial_base_offset", m.axial_base_offset},
          {"rotation_gain", m.rotation_gain},
          {"noise_sd_motion", m.noise_sd_motion},
          {"rng_seed", m.rng_seed}};
}

void read_motion(Reader r, MotionParams& m) {
  r.get("axial_gain", m.axial_gain);
  r.get("axial_base_offset", m.axial_base_offset);
  r.get("rotation_gain", m.rotation_gain);
  r.get("noise_sd_motion", m.noise_sd_motion);
  r.get("rng_seed", m.rng_seed);
  r.finish();
}

json quotas_json(const ZoneQuotas& q) {
  return {{"apex", opt_json(q.apex)},         {"base", opt_json(q.base)},
          {"left", opt_json(q.left)},         {"center", opt_json(q.center)},
          {"right", opt_json(q.right)},       {"anterior", opt_json(q.anterior)},
          {"posterior", opt_json(q.posterior)}};
}

void read_quotas(Reader r, ZoneQuotas& q) {
  r.get("apex", q.apex);
  r.get("base", q.base);
  r.get("left", q.left);
  r.get("center", q.center);
  r.get("right", q.right);
  r.get("anterior", q.anterior);
  r.get("posterior", q.posterior);
  r.finish();
}

void read_phantom_spec(Reader r, PhantomSpec& s) {
  r.get("semiaxes", s.semiaxes);
  r.get("n_targets", s.n_targets);
  if (const json* q = r.find("quotas")) read_quotas(Reader(q, r.key_path("quotas")), s.quotas);
  r.get("min_spacing", s.min_spacing);
  r.get("margin", s.margin);
  r.get("pivot", s.pivot);
  if (const json* m = r.find("motion")) read_motion(Reader(m, r.key_path("motion")), s.motion);
  r.get("left_bias", s.left_bias);
  r.get("left_bias_enabled", s.left_bias_enabled);
  r.get("perineum_peak_force_n", s.perineum_peak_force_n);
  r.finish();
}

json summary_json(const std::optional<stats::Summary>& s) {
  if (!s) return nullptr;
  return {{"median", s->median}, {"q1", s->q1}, {"q3", s->q3}};
}

std::optional<stats::Summary> summary_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return stats::Summary{j.at("median").get<double>(), j.at("q1").get<double>(), j.at("q3").get<double>()};
}

json opt_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json loop_json(const LoopSummary& s) {
  json t1 = json::array();
  for (const auto& r : s.table1) {
    t1.push_back({{"stratum", r.name},
                  {"count", r.count},
                  {"error_mm", summary_json(r.error)},
                  {"depth_correction_mm", summary_json(r.depth_correction)}});
  }
  json tests = json::array();
  for (const auto& t : s.tests) {
    tests.push_back({{"comparison", t.name},
                     {"test", t.test},
                     {"p_error", opt_double(t.p_error)},
                     {"p_depth_correction", opt_double(t.p_depth_correction)}});
  }
  json t2 = json::array();
  for (const auto& r : s.table2) {
    t2.push_back({{"stratum", r.name},
                  {"count", r.count},
                  {"x_mm", summary_json(r.x)},
                  {"y_mm", summary_json(r.y)},
                  {"z_mm", summary_json(r.z)}});
  }
  json reps = json::array();
  for (const auto& r : s.per_replicate) {
    reps.push_back({{"replicate", r.replicate},
                    {"count", r.count},
                    {"median_error_mm", r.median_error},
                    {"median_depth_correction_mm", r.median_depth_correction}});
  }
  return {{"n_records", s.n_records},
          {"error_mm", summary_json(s.error)},
          {"depth_correction_mm", summary_json(s.depth_correction)},
          {"fraction_zero_corrections", s.fraction_zero_corrections},
          {"fraction_one_correction", s.fraction_one_correction},
          {"fraction_two_plus_corrections", s.fraction_two_plus},
          {"n_disengaged", s.n_disengaged},
          {"table1", t1},
          {"tests", tests},
          {"table2", t2},
          {"per_replicate", reps}};
}

LoopSummary loop_from(const json& j) {
  LoopSummary s;
  s.n_records = j.at("n_records").get<int>();
  s.error = *summary_from(j.at("error_mm"));
  s.depth_correction = *summary_from(j.at("depth_correction_mm"));
  s.fraction_zero_corrections = j.at("fraction_zero_corrections").get<double>();
  s.fraction_one_correction = j.at("fraction_one_correction").get<double>();
  s.fraction_two_plus = j.at("fraction_two_plus_corrections").get<double>();
  s.n_disengaged = j.at("n_disengaged").get<int>();
  for (const auto& r : j.at("table1")) {
    s.table1.push_back({r.at("stratum").get<std::string>(), r.at("count").get<int>(), summary_from(r.at("error_mm")),
                        summary_from(r.at("depth_correction_mm"))});
  }
  for (const auto& t : j.at("tests")) {
    s.tests.push_back({t.at("comparison").get<std::string>(), t.at("test").get<std::string>(),
                       opt_double_from(t.at("p_error")), opt_double_from(t.at("p_depth_correction"))});
  }
  for (const auto& r : j.at("table2")) {
    s.table2.push_back({r.at("stratum").get<std::string>(), r.at("count").get<int>(), summary_from(r.at("x_mm")),
                        summary_from(r.at("y_mm")), summary_from(r.at("z_mm"))});
  }
  for (const auto& r : j.at("per_replicate")) {
    s.per_replicate.push_back({r.at("replicate").get<int>(), r.at("count").get<int>(),
                               r.at("median_error_mm").get<double>(), r.at("median_depth_correction_mm").get<double>()});
  }
  return s;
}

}  // namespace

json phantom_spec_to_json(const PhantomSpec& s) {
  return {{"semiaxes", point_json(s.semiaxes)},
          {"n_targets", s.n_targets},
          {"quotas", quotas_json(s.quotas)},
          {"min_spacing", s.min_spacing},
          {"margin", s.margin},
          {"pivot", point_json(s.pivot)},
          {"motion", motion_json(s.motion)},
          {"left_bias", s.left_bias},
          {"left_bias_enabled", s.left_bias_enabled},
          {"perineum_peak_force_n", s.perineum_peak_force_n}};
}

PhantomSpec phantom_spec_from_json(const json& j, const std::string& path) {
  PhantomSpec s;
  read_phantom_spec(Reader(&j, path), s);
  return s;
}

json phantom_to_json(const ProstatePhantom& ph) {
  json targets = json::array();
  for (const auto& t : ph.targets) {
    targets.push_back({{"id", t.id},
                       {"position_rest", point_json(t.position_rest)},
                       {"zone_depth", std::string(to_string(t.zone.depth))},
                       {"zone_lateral", std::string(to_string(t.zone.lateral))},
                       {"zone_ap", std::string(to_string(t.zone.ap))}});
  }
  return {{"semiaxes", point_json(ph.semiaxes)},
          {"centroid_rest", point_json(ph.centroid_rest)},
          {"pivot", point_json(ph.pivot)},
          {"motion", motion_json(ph.motion)},
          {"left_bias", ph.left_bias},
          {"perineum_peak_force_n", ph.perineum_peak_force_n},
          {"targets", targets}};
}

ProstatePhantom phantom_from_json(const json& j) {
  ProstatePhantom ph;
  Reader r(&j, "phantom");
  r.get("semiaxes", ph.semiaxes);
  r.get("centroid_rest", ph.centroid_rest);
  r.get("pivot", ph.pivot);
  if (const json* m = r.find("motion")) read_motion(Reader(m, "phantom.motion"), ph.motion);
  r.get("left_bias", ph.left_bias);
  r.get("perineum_peak_force_n", ph.perineum_peak_force_n);
  if (const json* ts = r.find("targets")) {
    for (const auto& t : *ts) {
      Target tg;
      tg.id = t.at("id").get<int>();
      tg.position_rest = Reader::to_point(t.at("position_rest"), "phantom.targets.position_rest");
      tg.zone.depth = parse_depth_zone(t.at("zone_depth").get<std::string>());
      tg.zone.lateral = parse_lateral_zone(t.at("zone_lateral").get<std::string>());
      tg.zone.ap = parse_ap_zone(t.at("zone_ap").get<std::string>());
      ph.targets.push_back(tg);
    }
  }
  r.finish();
  return ph;
}

json config_to_json(const StudyConfig& c) {
  json capsules = json::array();
  for (const auto& cap : c.arch.capsules) {
    capsules.push_back({{"a", point_json(cap.axis.a)}, {"b", point_json(cap.axis.b)}, {"radius", cap.radius}});
  }
  json phantom = phantom_spec_to_json(c.phantom);
  // Study-level fields own these; keep a single source of truth in the file.
  phantom.erase("n_targets");
  phantom.erase("quotas");
  phantom.erase("motion");
  return {
      {"study",
       {{"n_phantoms", c.n_phantoms},
        {"targets_per_phantom", c.targets_per_phantom},
        {"seed", c.seed},
        {"n_seed_replicates", c.n_seed_replicates},
        {"mode", std::string(to_string(c.mode))},
        {"threads", c.threads}}},
      {"quotas", quotas_json(c.quotas)},
      {"phantom", phantom},
      {"robot",
       {{"stage_separation", c.robot.stage_separation},
        {"stage_travel", c.robot.stage_travel},
        {"z_travel", c.robot.z_travel},
        {"max_angulation", c.robot.max_angulation},
        {"insertion_speed", c.robot.insertion_speed},
        {"rotation_speed", c.robot.rotation_speed},
        {"home_front_z", c.robot.home_front_z},
        {"standoff", c.robot.standoff}}},
      {"arch", {{"enabled", c.arch.enabled}, {"capsules", capsules}}},
      {"entry_region",
       {{"plane_z", c.entry_region.plane_z},
        {"x_min", c.entry_region.x_min},
        {"x_max", c.entry_region.x_max},
        {"y_min", c.entry_region.y_min},
        {"y_max", c.entry_region.y_max}}},
      {"planner",
       {{"angulation_step", c.planner.angulation_step},
        {"azimuth_step", c.planner.azimuth_step},
        {"needle_radius", c.planner.needle_radius}}},
      {"motion", motion_json(c.motion)},
      {"noise",
       {{"sigma0", c.noise.sigma0},
        {"depth_gain", c.noise.depth_gain},
        {"degradation_per_needle", c.noise.degradation_per_needle},
        {"rng_seed", c.noise.rng_seed}}},
      {"convergence",
       {{"depth_epsilon", c.convergence.depth_epsilon}, {"max_corrections", c.convergence.max_corrections}}},
      {"output", {{"dir", c.out_dir}, {"format", std::string(to_string(c.format))}}},
  };
}

json config_echo_json(const StudyConfig& config) {
  json j = config_to_json(config);
  j["study"].erase("threads");
  j["output"].erase("dir");
  return j;
}

StudyConfig config_from_json(const json& j) {
  StudyConfig c;
  Reader root(&j, "");
  {
    Reader r = root.sub("study");
    r.get("n_phantoms", c.n_phantoms);
    r.get("targets_per_phantom", c.targets_per_phantom);
    r.get("seed", c.seed);
    r.get("n_seed_replicates", c.n_seed_replicates);
    std::string mode(to_string(c.mode));
    r.get("mode", mode);
    if (mode == "closed") {
      c.mode = Mode::ClosedLoop;
    } else if (mode == "open") {
      c.mode = Mode::OpenLoop;
    } else if (mode == "both") {
      c.mode = Mode::Both;
    } else {
      throw ConfigError("study.mode", "expected closed, open or both");
    }
    r.get("threads", c.threads);
    r.finish();
  }
  if (const json* q = root.find("quotas")) read_quotas(Reader(q, "quotas"), c.quotas);
  if (const json* p = root.find("phantom")) read_phantom_spec(Reader(p, "phantom"), c.phantom);
  {
    Reader r = root.sub("robot");
    r.get("stage_separation", c.robot.stage_separation);
    r.get("stage_travel", c.robot.stage_travel);
    r.get("z_travel", c.robot.z_travel);
    r.get("max_angulation", c.robot.max_angulation);
    r.get("insertion_speed", c.robot.insertion_speed);
    r.get("rotation_speed", c.robot.rotation_speed);
    r.get("home_front_z", c.robot.home_front_z);
    r.get("standoff", c.robot.standoff);
    r.finish();
  }
  {
    Reader r = root.sub("arch");
    r.get("enabled", c.arch.enabled);
    if (const json* caps = r.find("capsules")) {
      if (!caps->is_array()) throw ConfigError("arch.capsules", "expected an array");
      c.arch.capsules.clear();
      for (std::size_t i = 0; i < caps->size(); ++i) {
        const std::string path = "arch.capsules[" + std::to_string(i) + "]";
        Reader cr(&(*caps)[i], path);
        Capsule cap;
        cr.get("a", cap.axis.a);
        cr.get("b", cap.axis.b);
        cr.get("radius", cap.radius);
        cr.finish();
        c.arch.capsules.push_back(cap);
      }
    }
    r.finish();
  }
  {
    Reader r = root.sub("entry_region");
    r.get("plane_z", c.entry_region.plane_z);
    r.get("x_min", c.entry_region.x_min);
    r.get("x_max", c.entry_region.x_max);
    r.get("y_min", c.entry_region.y_min);
    r.get("y_max", c.entry_region.y_max);
    r.finish();
  }
  {
    Reader r = root.sub("planner");
    r.get("angulation_step", c.planner.angulation_step);
    r.get("azimuth_step", c.planner.azimuth_step);
    r.get("needle_radius", c.planner.needle_radius);
    r.finish();
  }
  if (const json* m = root.find("motion")) read_motion(Reader(m, "motion"), c.motion);
  {
    Reader r = root.sub("noise");
    r.get("sigma0", c.noise.sigma0);
    r.get("depth_gain", c.noise.depth_gain);
    r.get("degradation_per_needle", c.noise.degradation_per_needle);
    r.get("rng_seed", c.noise.rng_seed);
    r.finish();
  }
  {
    Reader r = root.sub("convergence");
    r.get("depth_epsilon", c.convergence.depth_epsilon);
    r.get("max_corrections", c.convergence.max_corrections);
    r.finish();
  }
  {
    Reader r = root.sub("output");
    r.get("dir", c.out_dir);
    std::string fmt(to_string(c.format));
    r.get("format", fmt);
    if (fmt == "csv") {
      c.format = ReportFormat::Csv;
    } else if (fmt == "json") {
      c.format = ReportFormat::Json;
    } else {
      throw ConfigError("output.format", "expected csv or json");
    }
    r.finish();
  }
  if (const json* cal = root.find("calibration")) {
    // Only the grid and targets are inputs; the rest is the fit record.
    CalibrationGrid grid;
    CalibrationTargets targets;
    read_calibration_inputs(*cal, grid, targets);
  }
  root.finish();
  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json report_to_json(const StudyReport& r) {
  json j = {{"version", r.version},
            {"seed", r.seed},
            {"perineum_peak_force_n", r.perineum_peak_force_n},
            {"notes", r.notes},
            {"closed_loop", r.closed_loop ? loop_json(*r.closed_loop) : json(nullptr)},
            {"open_loop", r.open_loop ? loop_json(*r.open_loop) : json(nullptr)},
            {"config", json::parse(r.config_echo)}};
  return j;
}

StudyReport report_from_json(const json& j) {
  StudyReport r;
  r.version = j.at("version").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.perineum_peak_force_n = j.at("perineum_peak_force_n").get<double>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  if (!j.at("closed_loop").is_null()) r.closed_loop = loop_from(j.at("closed_loop"));
  if (!j.at("open_loop").is_null()) r.open_loop = loop_from(j.at("open_loop"));
  r.config_echo = j.at("config").dump();
  return r;
}

json record_to_json(const InsertionRecord& rec) {
  json corrections = json::array();
  for (const auto& c : rec.corrections) {
    corrections.push_back({{"delta_depth_mm", c.delta_depth}, {"tracked_target", point_json(c.tracked_target)}});
  }
  return {{"phantom_id", rec.phantom_id},
          {"target_id", rec.target_id},
          {"replicate", rec.replicate},
          {"trajectory",
           {{"entry", point_json(rec.trajectory.entry)},
            {"dir", point_json(rec.trajectory.dir.vec())},
            {"planned_depth_mm", rec.trajectory.planned_depth},
            {"approach", std::string(to_string(rec.trajectory.approach))}}},
          {"corrections", corrections},
          {"n_corrections", rec.n_corrections},
          {"bead_rest_position", point_json(rec.bead_rest_position)},
          {"distance_error_mm", rec.distance_error},
          {"axial_motion_mm", rec.axial_motion},
          {"motion_mm", point_json(rec.motion)},
          {"induced_axial_mm", rec.induced_axial},
          {"lateral_miss_mm", rec.lateral_miss},
          {"zone",
           {{"depth", std::string(to_string(rec.zone.depth))},
            {"lateral", std::string(to_string(rec.zone.lateral))},
            {"ap", std::string(to_string(rec.zone.ap))},
            {"approach", std::string(to_string(rec.zone.approach))}}},
          {"disengaged", rec.disengaged},
          {"max_corrections_exceeded", rec.max_corrections_exceeded}};
}

}  // namespace tpsim

namespace tpsim {

void read_calibration_inputs(const json& j, CalibrationGrid& grid, CalibrationTargets& targets) {
  Reader r(&j, "calibration");
  {
    Reader g = r.sub("grid");
    g.get("axial_base_offset", grid.axial_base_offset);
    g.get("axial_gain", grid.axial_gain);
    g.get("rotation_gain", grid.rotation_gain);
    g.get("noise_sd_motion", grid.noise_sd_motion);
    g.get("sigma0", grid.sigma0);
    g.get("replicates", grid.replicates);
    g.finish();
  }
  {
    Reader t = r.sub("targets");
    t.get("error", targets.error);
    t.get("axial_motion", targets.axial_motion);
    t.get("apex_depth_correction", targets.apex_depth_correction);
    t.get("base_depth_correction", targets.base_depth_correction);
    t.get("motion_x", targets.motion_x);
    t.get("motion_y", targets.motion_y);
    t.get("motion_z", targets.motion_z);
    t.finish();
  }
  r.find("note");
  r.find("objective");
  r.find("medians");
  r.find("grid_points");
  r.finish();
  grid.validate();
}

json calibration_to_json(const CalibrationResult& result, const CalibrationGrid& grid,
                         const CalibrationTargets& targets) {
  json medians = json::object();
  const auto names = CalibrationTargets::names();
  for (std::size_t i = 0; i < names.size(); ++i) medians[names[i]] = result.best.medians[i];
  json tj = json::object();
  const auto values = targets.values();
  for (std::size_t i = 0; i < names.size(); ++i) tj[names[i]] = values[i];
  return json{{"note",
               "Fitted by full-factorial grid search minimizing the sum of squared relative deviations of "
               "closed-loop study medians from the targets. The resulting medians are calibration fits, "
               "not independent predictions."},
              {"grid",
               {{"axial_base_offset", grid.axial_base_offset},
                {"axial_gain", grid.axial_gain},
                {"rotation_gain", grid.rotation_gain},
                {"noise_sd_motion", grid.noise_sd_motion},
                {"sigma0", grid.sigma0},
                {"replicates", grid.replicates}}},
              {"grid_points", result.evaluated.size()},
              {"targets", tj},
              {"objective", result.best.objective},
              {"medians", medians}};
}

}  // namespace tpsim
