#include "amoo_cli/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

namespace amoo::cli {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(); }

json vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json fit_summary(const RunTrace& trace, double tail) {
  try {
    const RateFit fit = fit_rate(trace, tail);
    return {{"rho", fit.rho}, {"clipped", fit.clipped}, {"points", fit.points},
            {"tail_fraction", tail}};
  } catch (const ArgumentError& e) {
    return {{"rho", nullptr}, {"tail_fraction", tail}, {"note", e.what()}};
  }
}

json theorem_summary(const std::optional<std::string>& preset, const Problem& p,
                     const RunTrace& trace) {
  const bool camoo = preset && *preset == "camoo-theory";
  const bool pamoo = preset && *preset == "pamoo-theory";
  if (!camoo && !pamoo) return {{"skipped", "no theory preset"}};
  const auto mu = camoo ? p.meta.mu_G : p.meta.mu_L;
  if (!p.meta.beta || !mu || !p.meta.M_f) return {{"skipped", "problem constants unknown"}};
  if (p.optimum.alignment_eps > 0.0) return {{"skipped", "objectives are not exactly aligned"}};
  if (trace.records.empty() || !trace.records.front().residual) {
    return {{"skipped", "trace has no residuals"}};
  }
  TheoremParams tp;
  tp.beta = *p.meta.beta;
  tp.mu = *mu;
  tp.M_f = *p.meta.M_f;
  tp.m = p.objectives.size();
  tp.which = camoo ? TheoremKind::kCamoo : TheoremKind::kPamoo;
  try {
    const BoundCheckReport r = theorem_bound_check(trace, tp);
    return {{"which", camoo ? "camoo" : "pamoo"},
            {"holds", r.holds},
            {"k0", r.k0},
            {"max_ratio", r.max_ratio},
            {"first_violation_step", r.first_violation_step}};
  } catch (const ArgumentError& e) {
    return {{"skipped", e.what()}};
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace

json record_to_json(const IterateRecord& r) {
  return {{"step", r.step},
          {"f", vec(r.f)},
          {"w", vec(r.w)},
          {"grad_norm", r.grad_norm},
          {"residual", opt(r.residual)},
          {"msq", opt(r.msq)},
          {"mean_norm", opt(r.mean_norm)},
          {"lambda_min_est", opt(r.lambda_min_est)},
          {"pu_gap", opt(r.pu_gap)}};
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const OutputOptions& output) {
  if (flag) return *flag;
  if (output.out_dir) return *output.out_dir;
  if (const char* env = std::getenv("AMOO_OUT_DIR"); env && *env) return env;
  return "amoo_out";
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  std::optional<Problem> built;
  RunConfig rc;
  try {
    cfg = load_config(options.config_path);
    built.emplace(build(cfg.run.problem));
    rc = resolve(cfg, *built);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric failure while building the problem: " << e.what() << '\n';
    return kNumericFailure;
  }

  const Problem& problem = *built;
  const std::filesystem::path dir = resolve_out_dir(options.out_dir, cfg.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
    return kCheckFailed;
  }

  RunTrace trace;
  json failure;
  try {
    trace = run(rc, problem);
  } catch (const RunDiverged& e) {
    trace = e.partial_trace();
    failure = {{"step", e.step()}, {"message", e.what()}};
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    failure = {{"step", nullptr}, {"message", e.what()}};
  }
  trace.problem_name = problem.name;

  ExperimentConfig echo = cfg;
  echo.run = rc;
  json summary = {{"schema_version", 1},
                  {"problem", problem.name},
                  {"config", config_to_json(echo)},
                  {"status", failure.is_null() ? "ok" : "numeric_failure"},
                  {"failure", failure},
                  {"records", trace.records.size()},
                  {"final", trace.records.empty() ? json() : record_to_json(trace.records.back())},
                  {"final_x", trace.final_x.size() ? vec(trace.final_x) : json()},
                  {"problem_meta",
                   {{"beta", opt(problem.meta.beta)},
                    {"mu_G", opt(problem.meta.mu_G)},
                    {"mu_L", opt(problem.meta.mu_L)},
                    {"M_f", opt(problem.meta.M_f)},
                    {"alignment_eps", problem.meta.alignment_eps}}},
                  {"fit", fit_summary(trace, cfg.output.fit_tail)},
                  {"suites", {{"theorem_bound", theorem_summary(cfg.preset, problem, trace)}}}};

  try {
    write_trace_csv(dir / "trace.csv", trace, problem.objectives.size());
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    if (cfg.output.plot) write_text(dir / "plot.svg", render_svg(trace, problem.name));
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return kCheckFailed;
  }

  if (!failure.is_null()) {
    err << failure["message"].get<std::string>() << "\n"
        << "partial trace written to " << (dir / "trace.csv").string() << '\n';
    return kNumericFailure;
  }
  out << problem.name << ": " << trace.records.size() << " records written to " << dir.string()
      << '\n';
  return kOk;
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  RunTrace trace;
  try {
    trace = read_trace_csv(std::filesystem::path(o.trace_path));
  } catch (const TraceError& e) {
    err << "trace error: " << e.what() << '\n';
    return kConfigError;
  }
  int code = kOk;
  const bool fit = o.fit_rate || !o.theorem;
  try {
    if (fit) {
      const RateFit f = fit_rate(trace, o.tail);
      out << "rho=" << fixed(f.rho) << " points=" << f.points
          << " clipped=" << (f.clipped ? "yes" : "no") << '\n';
    }
    if (o.theorem) {
      TheoremParams tp;
      tp.beta = o.beta;
      tp.mu = o.mu;
      tp.M_f = o.M_f;
      tp.r0 = o.r0;
      tp.which = *o.theorem;
      tp.m = trace.records.empty() ? 1 : static_cast<std::size_t>(trace.records.front().w.size());
      const BoundCheckReport r = theorem_bound_check(trace, tp);
      out << "theorem " << (tp.which == TheoremKind::kCamoo ? "camoo" : "pamoo") << ": "
          << (r.holds ? "holds" : "violated") << " k0=" << r.k0
          << " max_ratio=" << fixed(r.max_ratio);
      if (!r.holds) out << " first_violation_step=" << r.first_violation_step;
      out << '\n';
      if (!r.holds) code = kCheckFailed;
    }
  } catch (const ArgumentError& e) {
    err << "analysis error: " << e.what() << '\n';
    return kConfigError;
  }
  return code;
}

int cmd_plot(const std::string& trace_path, const std::string& svg_path, std::ostream& out,
             std::ostream& err) {
  RunTrace trace;
  try {
    trace = read_trace_csv(std::filesystem::path(trace_path));
  } catch (const TraceError& e) {
    err << "trace error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    write_text(svg_path, render_svg(trace, std::filesystem::path(trace_path).filename().string()));
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return kCheckFailed;
  }
  out << "wrote " << svg_path << '\n';
  return kOk;
}

int cmd_list_problems(std::ostream& out) {
  out << "problems:\n";
  for (const auto& [name, what] : problem_catalog()) out << "  " << name << ": " << what << '\n';
  out << "presets:\n";
  for (const auto& name : preset_names()) out << "  " << name << '\n';
  return kOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  bool ok = true;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    ok = ok && pass;
    out << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << '\n';
  };
  try {
    const auto rec = recurrence_suite(1000);
    line(rec.passes == rec.cases, "recurrence lemmas",
         std::to_string(rec.passes) + "/" + std::to_string(rec.cases) + " cases");
    for (const auto& f : rec.failures) out << "    " << f << '\n';

    const auto weyl = weyl_degradation_suite(o.seed, o.trials);
    line(weyl.passes == weyl.trials, "diagonal degradation",
         std::to_string(weyl.passes) + "/" + std::to_string(weyl.trials) + " trials");

    const auto sc = self_concordance_suite(o.seed, 200);
    line(sc.passes == sc.cases, "self-concordance",
         std::to_string(sc.passes) + "/" + std::to_string(sc.cases) + " pairs");

    const auto bil = bilinear_suite(o.seed, 50, 20, 5, 8, 1e-3);
    line(bil.gap_passes == bil.instances && bil.value_passes == 20, "bilinear solver",
         "gap " + std::to_string(bil.gap_passes) + "/" + std::to_string(bil.instances) +
             " (max " + fixed(bil.max_gap) + "), value " + std::to_string(bil.value_passes) +
             "/20 (max err " + fixed(bil.max_value_error) + ")");
  } catch (const std::exception& e) {
    err << "verify error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace amoo::cli
