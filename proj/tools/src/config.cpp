#include "amoo_cli/cli.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <utility>

namespace amoo::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// Reads the keys of one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_ + " must be an object");
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, double def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_number()) fail(where(key) + " must be a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) fail(where(key) + " must be finite");
    return d;
  }

  template <typename Int>
  Int integer(const std::string& key, Int def, Int lo = std::numeric_limits<Int>::min()) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(where(key) + " must be an integer");
    const std::string low = where(key) + " must be >= " + std::to_string(lo);
    Int i{};
    if (v->is_number_unsigned()) {
      const auto u = v->get<std::uint64_t>();
      if (!std::in_range<Int>(u)) fail(where(key) + " is out of range");
      i = static_cast<Int>(u);
    } else {
      const auto s = v->get<std::int64_t>();
      if (s < 0 && !std::numeric_limits<Int>::is_signed) fail(low);
      if (!std::in_range<Int>(s)) fail(where(key) + " is out of range");
      i = static_cast<Int>(s);
    }
    if (i < lo) fail(low);
    return i;
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(where(key) + " must be true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(where(key) + " must be a string");
    return v->get<std::string>();
  }

  std::optional<Vector> vector(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    return to_vector(*v, where(key));
  }

  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) fail("unknown key '" + key + "' in " + path_);
    }
  }

  static Vector to_vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where + " must be a non-empty array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(where + " must be a non-empty array of numbers");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum>
Enum choice(const std::optional<std::string>& got, const std::string& where,
            std::initializer_list<std::pair<const char*, Enum>> options, Enum def) {
  if (!got) return def;
  std::string names;
  for (const auto& [name, value] : options) {
    if (*got == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  fail(where + " must be one of: " + names + " (got '" + *got + "')");
}

Matrix to_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where + " must be a non-empty array of rows");
  const Vector first = Section::to_vector(v[0], where + "[0]");
  Matrix out(static_cast<Eigen::Index>(v.size()), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vector row = Section::to_vector(v[i], where + "[" + std::to_string(i) + "]");
    if (row.size() != first.size()) fail(where + " rows must have equal length");
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
  return rows;
}

ProblemSpec parse_problem(const json& node, const std::string& path) {
  Section s(node, path);
  const auto kind = s.string("kind");
  if (!kind) fail(path + ".kind is required");
  ProblemSpec spec;
  if (*kind == "specification") {
    spec.kind = SpecificationSpec{s.number("delta", 0.1)};
  } else if (*kind == "selection") {
    SelectionSpec k;
    k.delta = s.number("delta", k.delta);
    k.m = s.integer<std::size_t>("m", k.m, 1);
    k.n = s.integer<std::size_t>("n", k.n, 1);
    spec.kind = k;
  } else if (*kind == "local_curvature") {
    spec.kind = LocalCurvatureSpec{s.integer<std::size_t>("n", 1, 1)};
  } else if (*kind == "quad_family") {
    QuadFamilySpec k;
    const json* hs = s.raw("hessians");
    if (!hs || !hs->is_array() || hs->empty()) fail(path + ".hessians must be a non-empty array");
    for (std::size_t i = 0; i < hs->size(); ++i) {
      k.hessians.push_back(to_matrix((*hs)[i], path + ".hessians[" + std::to_string(i) + "]"));
    }
    if (const auto a = s.vector("alphas")) {
      k.alphas.assign(a->data(), a->data() + a->size());
    } else {
      k.alphas.assign(k.hessians.size(), 1.0);
    }
    spec.kind = k;
  } else if (*kind == "mlp_matching") {
    MlpMatchingSpec k;
    if (s.boolean("paper_scale", false)) k = MlpMatchingSpec::paper_scale(k.variant, 0);
    k.variant = choice<MlpVariant>(s.string("variant"), s.where("variant"),
                                   {{"selection", MlpVariant::kSelection},
                                    {"local_curvature", MlpVariant::kLocalCurvature}},
                                   k.variant);
    k.input_dim = s.integer<std::size_t>("input_dim", k.input_dim, 1);
    k.hidden = s.integer<std::size_t>("hidden", k.hidden, 1);
    k.output_dim = s.integer<std::size_t>("output_dim", k.output_dim, 1);
    k.dataset_size = s.integer<std::size_t>("dataset_size", k.dataset_size, 1);
    k.seed = s.integer<std::uint64_t>("seed", k.seed, 0);
    k.activation = choice<Activation>(
        s.string("activation"), s.where("activation"),
        {{"relu", Activation::kRelu}, {"softplus", Activation::kSoftplus}}, k.activation);
    k.target_offset = s.number("target_offset", k.target_offset);
    spec.kind = k;
  } else if (*kind == "misaligned") {
    MisalignedSpec k;
    const json* base = s.raw("base");
    if (!base) fail(path + ".base is required");
    k.base = std::make_shared<const ProblemSpec>(parse_problem(*base, path + ".base"));
    const json* shifts = s.raw("shifts");
    if (!shifts || !shifts->is_array()) fail(path + ".shifts must be an array of vectors");
    for (std::size_t i = 0; i < shifts->size(); ++i) {
      k.shifts.push_back(
          Section::to_vector((*shifts)[i], path + ".shifts[" + std::to_string(i) + "]"));
    }
    spec.kind = k;
  } else {
    std::string names;
    for (const auto& [name, _] : problem_catalog()) names += (names.empty() ? "" : ", ") + name;
    fail(path + ".kind must be one of: " + names + " (got '" + *kind + "')");
  }
  s.finish();
  return spec;
}

WeightingSpec parse_weighting(const json& node) {
  Section s(node, "weighting");
  const std::string kind = s.string("kind").value_or("ew");
  WeightingSpec out;
  if (kind == "ew") {
    out = EqualWeighting{};
  } else if (kind == "camoo") {
    CamooConfig c;
    c.mode = choice<CamooMode>(
        s.string("mode"), s.where("mode"),
        {{"diagonal", CamooMode::kDiagonalBilinear}, {"exact", CamooMode::kExactEigen}}, c.mode);
    c.w_min = s.number("w_min", c.w_min);
    c.pu_iterations = s.integer<int>("pu_iterations", c.pu_iterations, 1);
    c.pu_tau = s.number("pu_tau", c.pu_tau);
    c.supergrad_iterations = s.integer<int>("supergrad_iterations", c.supergrad_iterations, 1);
    c.supergrad_step = s.number("supergrad_step", c.supergrad_step);
    c.warm_start = s.boolean("warm_start", c.warm_start);
    out = c;
  } else if (kind == "pamoo") {
    PamooConfig c;
    c.step = s.number("step", c.step);
    c.iterations = s.integer<int>("iterations", c.iterations, 1);
    c.clip_floor = s.number("clip_floor", c.clip_floor);
    c.gram_tau = s.number("gram_tau", c.gram_tau);
    c.f_star = s.vector("f_star");
    c.warm_start = s.boolean("warm_start", c.warm_start);
    c.step_rule = choice<PamooStepRule>(
        s.string("step_rule"), s.where("step_rule"),
        {{"fixed", PamooStepRule::kFixed}, {"lipschitz", PamooStepRule::kLipschitz}}, c.step_rule);
    c.tolerance = s.number("tolerance", c.tolerance);
    out = c;
  } else {
    fail("weighting.kind must be one of: ew, camoo, pamoo (got '" + kind + "')");
  }
  s.finish();
  return out;
}

InnerRule parse_inner(const json& node) {
  Section s(node, "inner");
  const std::string rule = s.string("rule").value_or("gd");
  InnerRule out;
  if (rule == "gd") {
    GdRule g;
    g.step = s.number("step", g.step);
    out = g;
  } else if (rule == "adam") {
    AdamRule a;
    a.step = s.number("step", a.step);
    a.beta1 = s.number("beta1", a.beta1);
    a.beta2 = s.number("beta2", a.beta2);
    a.eps = s.number("eps", a.eps);
    out = a;
  } else {
    fail("inner.rule must be one of: gd, adam (got '" + rule + "')");
  }
  s.finish();
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  Section top(doc, "config");
  ExperimentConfig cfg;

  const json* problem = top.raw("problem");
  if (!problem) fail("config.problem is required");
  cfg.run.problem = parse_problem(*problem, "problem");

  if (const json* w = top.raw("weighting")) cfg.run.weighting = parse_weighting(*w);
  if (const json* i = top.raw("inner")) cfg.run.inner = parse_inner(*i);

  if (const json* r = top.raw("run")) {
    Section s(*r, "run");
    cfg.run.steps = s.integer<int>("steps", cfg.run.steps, 0);
    cfg.run.seed = s.integer<std::uint64_t>("seed", cfg.run.seed, 0);
    cfg.run.record_every = s.integer<int>("record_every", cfg.run.record_every, 1);
    cfg.run.camoo_lr_scale_by_m = s.boolean("camoo_lr_scale_by_m", cfg.run.camoo_lr_scale_by_m);
    cfg.run.x0 = s.vector("x0");
    cfg.run.f_star = s.vector("f_star");
    cfg.preset = s.string("preset");
    if (cfg.preset) {
      const auto names = preset_names();
      if (std::find(names.begin(), names.end(), *cfg.preset) == names.end()) {
        fail("run.preset '" + *cfg.preset + "' is not a known preset");
      }
    }
    if (const json* h = s.raw("hutchinson")) {
      Section hs(*h, "run.hutchinson");
      auto& hc = cfg.run.hutchinson;
      hc.num_samples = hs.integer<int>("num_samples", hc.num_samples, 1);
      hc.fd_step = hs.number("fd_step", hc.fd_step);
      hc.ema_decay = hs.number("ema_decay", hc.ema_decay);
      if (hc.ema_decay < 0.0 || hc.ema_decay >= 1.0) fail("run.hutchinson.ema_decay must lie in [0, 1)");
      if (!(hc.fd_step > 0.0)) fail("run.hutchinson.fd_step must be positive");
      hs.finish();
    }
    s.finish();
  }

  if (const json* o = top.raw("output")) {
    Section s(*o, "output");
    cfg.output.out_dir = s.string("out_dir");
    cfg.output.plot = s.boolean("plot", cfg.output.plot);
    cfg.output.fit_tail = s.number("fit_tail", cfg.output.fit_tail);
    if (!(cfg.output.fit_tail > 0.0 && cfg.output.fit_tail <= 1.0)) {
      fail("output.fit_tail must lie in (0, 1]");
    }
    s.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json problem_to_json(const ProblemSpec& spec) {
  return std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SpecificationSpec>) {
          return {{"kind", "specification"}, {"delta", k.delta}};
        } else if constexpr (std::is_same_v<T, SelectionSpec>) {
          return {{"kind", "selection"}, {"delta", k.delta}, {"m", k.m}, {"n", k.n}};
        } else if constexpr (std::is_same_v<T, LocalCurvatureSpec>) {
          return {{"kind", "local_curvature"}, {"n", k.n}};
        } else if constexpr (std::is_same_v<T, QuadFamilySpec>) {
          json hs = json::array();
          for (const auto& h : k.hessians) hs.push_back(to_json(h));
          return {{"kind", "quad_family"}, {"hessians", hs}, {"alphas", k.alphas}};
        } else if constexpr (std::is_same_v<T, MlpMatchingSpec>) {
          return {{"kind", "mlp_matching"},
                  {"variant", k.variant == MlpVariant::kSelection ? "selection" : "local_curvature"},
                  {"input_dim", k.input_dim},
                  {"hidden", k.hidden},
                  {"output_dim", k.output_dim},
                  {"dataset_size", k.dataset_size},
                  {"seed", k.seed},
                  {"activation", k.activation == Activation::kRelu ? "relu" : "softplus"},
                  {"target_offset", k.target_offset}};
        } else {
          json shifts = json::array();
          for (const auto& s : k.shifts) shifts.push_back(to_json(s));
          return {{"kind", "misaligned"},
                  {"base", k.base ? problem_to_json(*k.base) : json()},
                  {"shifts", shifts}};
        }
      },
      spec.kind);
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["problem"] = problem_to_json(cfg.run.problem);

  doc["weighting"] = std::visit(
      [](const auto& w) -> json {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, EqualWeighting>) {
          return {{"kind", "ew"}};
        } else if constexpr (std::is_same_v<T, CamooConfig>) {
          return {{"kind", "camoo"},
                  {"mode", w.mode == CamooMode::kExactEigen ? "exact" : "diagonal"},
                  {"w_min", w.w_min},
                  {"pu_iterations", w.pu_iterations},
                  {"pu_tau", w.pu_tau},
                  {"supergrad_iterations", w.supergrad_iterations},
                  {"supergrad_step", w.supergrad_step},
                  {"warm_start", w.warm_start}};
        } else {
          json j = {{"kind", "pamoo"},
                    {"step", w.step},
                    {"iterations", w.iterations},
                    {"clip_floor", w.clip_floor},
                    {"gram_tau", w.gram_tau},
                    {"warm_start", w.warm_start},
                    {"step_rule", w.step_rule == PamooStepRule::kFixed ? "fixed" : "lipschitz"},
                    {"tolerance", w.tolerance}};
          if (w.f_star) j["f_star"] = to_json(*w.f_star);
          return j;
        }
      },
      cfg.run.weighting);

  doc["inner"] = std::visit(
      [](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, GdRule>) {
          return {{"rule", "gd"}, {"step", r.step}};
        } else {
          return {{"rule", "adam"},
                  {"step", r.step},
                  {"beta1", r.beta1},
                  {"beta2", r.beta2},
                  {"eps", r.eps}};
        }
      },
      cfg.run.inner);

  json run = {{"steps", cfg.run.steps},
              {"seed", cfg.run.seed},
              {"record_every", cfg.run.record_every},
              {"camoo_lr_scale_by_m", cfg.run.camoo_lr_scale_by_m},
              {"hutchinson",
               {{"num_samples", cfg.run.hutchinson.num_samples},
                {"fd_step", cfg.run.hutchinson.fd_step},
                {"ema_decay", cfg.run.hutchinson.ema_decay}}}};
  if (cfg.run.x0) run["x0"] = to_json(*cfg.run.x0);
  if (cfg.run.f_star) run["f_star"] = to_json(*cfg.run.f_star);
  if (cfg.preset) run["preset"] = *cfg.preset;
  doc["run"] = run;

  json output = {{"plot", cfg.output.plot}, {"fit_tail", cfg.output.fit_tail}};
  if (cfg.output.out_dir) output["out_dir"] = *cfg.output.out_dir;
  doc["output"] = output;
  return doc;
}

RunConfig resolve(const ExperimentConfig& cfg, const Problem& problem) {
  return cfg.preset ? apply_preset(*cfg.preset, cfg.run, problem) : cfg.run;
}

}  // namespace amoo::cli
