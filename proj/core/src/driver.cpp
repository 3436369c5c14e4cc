#include "amoo/driver.hpp"

#include <chrono>
#include <cmath>

namespace amoo {

Vector step_gd(const Vector& x, const Vector& g, double step) {
  if (!g.allFinite()) throw NumericError("gradient step: non-finite gradient");
  return x - step * g;
}

Vector step_adam(AdamState& state, const Vector& x, const Vector& g, const AdamRule& rule) {
  if (!g.allFinite()) throw NumericError("adam step: non-finite gradient");
  if (state.t == 0 || state.m.size() != g.size()) {
    state.m = Vector::Zero(g.size());
    state.v = Vector::Zero(g.size());
    state.t = 0;
  }
  ++state.t;
  state.m = rule.beta1 * state.m + (1.0 - rule.beta1) * g;
  state.v = rule.beta2 * state.v + (1.0 - rule.beta2) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(rule.beta1, state.t);
  const double c2 = 1.0 - std::pow(rule.beta2, state.t);
  const Vector m_hat = state.m / c1;
  const Vector v_hat = state.v / c2;
  return x - rule.step * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + rule.eps).matrix());
}

namespace {

void validate(const RunConfig& cfg, const Problem& p) {
  if (cfg.steps < 0) throw ConfigError("run.steps must be >= 0");
  if (cfg.record_every < 1) throw ConfigError("run.record_every must be >= 1");
  const double step = std::visit([](const auto& r) { return r.step; }, cfg.inner);
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("inner.step must be positive");
  if (cfg.x0 && static_cast<std::size_t>(cfg.x0->size()) != p.objectives.dim()) {
    throw ConfigError("run.x0 has the wrong dimension");
  }
  if (cfg.f_star && static_cast<std::size_t>(cfg.f_star->size()) != p.objectives.size()) {
    throw ConfigError("f_star needs one value per objective");
  }
  if (std::holds_alternative<PamooConfig>(cfg.weighting)) {
    const auto& pc = std::get<PamooConfig>(cfg.weighting);
    if (!pc.f_star && !cfg.f_star && !p.optimum.f_star) {
      throw ConfigError("PAMOO needs f_star: the problem has none and no override was given");
    }
  }
}

}  // namespace

RunTrace run(const RunConfig& cfg) { return run(cfg, build(cfg.problem)); }

RunTrace run(const RunConfig& cfg, const Problem& p) {
  validate(cfg, p);
  const auto t_start = std::chrono::steady_clock::now();
  const ObjectiveSet& set = p.objectives;
  const std::size_t m = set.size();

  Vector f_star;
  if (const auto* pc = std::get_if<PamooConfig>(&cfg.weighting)) {
    f_star = pc->f_star ? *pc->f_star : cfg.f_star ? *cfg.f_star : *p.optimum.f_star;
    if (static_cast<std::size_t>(f_star.size()) != m) {
      throw ConfigError("f_star needs one value per objective");
    }
  }

  double step = std::visit([](const auto& r) { return r.step; }, cfg.inner);
  if (cfg.camoo_lr_scale_by_m && std::holds_alternative<CamooConfig>(cfg.weighting)) {
    step *= static_cast<double>(m);
  }

  RunTrace trace;
  trace.problem_name = p.name;
  Vector x = cfg.x0 ? *cfg.x0 : p.default_start;
  AdamState adam;
  DiagHessianSmoother smoother(cfg.hutchinson.ema_decay);
  std::optional<Vector> warm_w;
  std::optional<BilinearSolution> warm_game;

  auto finish = [&] {
    trace.final_x = x;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  auto fail = [&](const std::string& why, int k) {
    finish();
    return RunDiverged("numeric failure at step " + std::to_string(k) + ": " + why, k, trace);
  };

  for (int k = 0; k <= cfg.steps; ++k) {
    IterateRecord rec;
    Vector g;
    try {
      rec.f = set.values(x);
      if (!rec.f.allFinite()) throw NumericError("objective values are not finite");

      WeightingContext ctx;
      ctx.m = m;
      ctx.warm_w = warm_w;
      ctx.warm_game = warm_game;
      if (const auto* cc = std::get_if<CamooConfig>(&cfg.weighting)) {
        if (cc->mode == CamooMode::kExactEigen) {
          std::vector<SymMatrix> hs;
          for (const auto& h : set.hessians(x)) hs.emplace_back(h);
          ctx.hessians = std::move(hs);
        } else {
          HutchinsonConfig hc = cfg.hutchinson;
          hc.rng_seed = split_seed(cfg.seed, static_cast<std::uint64_t>(k));
          ctx.diag_hessians = smoother.update(diag_hessian_matrix(set, x, hc));
        }
      } else if (std::holds_alternative<PamooConfig>(cfg.weighting)) {
        ctx.pamoo = make_pamoo_context(set, x, f_star);
      }
      WeightStep ws = weight_optimizer_step(cfg.weighting, ctx);
      warm_w = ws.w.entries();
      warm_game = ws.game;

      g = set.jacobian(x) * ws.w.entries();
      if (!g.allFinite()) throw NumericError("weighted gradient is not finite");
      rec.step = k;
      rec.w = ws.w.entries();
      rec.grad_norm = g.norm();
      rec.lambda_min_est = ws.lambda_min_est;
      rec.pu_gap = ws.pu_gap;
      if (p.optimum.x_star) rec.residual = residual(x, p.optimum);
      if (p.match_metrics) {
        const MatchMetrics mm = p.match_metrics(x);
        rec.msq = mm.msq;
        rec.mean_norm = mm.mean_norm;
      }
    } catch (const ArgumentError& e) {
      // Weight solvers reject non-finite inputs as argument errors.
      if (x.allFinite() && rec.f.allFinite()) throw;
      throw fail(e.what(), k);
    } catch (const RunDiverged&) {
      throw;
    } catch (const NumericError& e) {
      throw fail(e.what(), k);
    }

    if (k % cfg.record_every == 0 || k == cfg.steps) trace.records.push_back(rec);
    if (k == cfg.steps) break;

    x = std::visit(
        [&](const auto& r) -> Vector {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, GdRule>) {
            return step_gd(x, g, step);
          } else {
            AdamRule scaled = r;
            scaled.step = step;
            return step_adam(adam, x, g, scaled);
          }
        },
        cfg.inner);
    if (!x.allFinite()) throw fail("iterate is not finite", k + 1);
  }
  finish();
  return trace;
}

std::vector<std::string> preset_names() {
  return {"camoo-theory", "pamoo-theory", "practical-sgd", "practical-adam"};
}

RunConfig apply_preset(const std::string& name, RunConfig cfg, const Problem& p) {
  const double m = static_cast<double>(p.objectives.size());
  if (name == "camoo-theory") {
    if (!p.meta.beta || !p.meta.mu_G) {
      throw ConfigError("preset camoo-theory needs beta and mu_G for problem " + p.name);
    }
    CamooConfig cc;
    cc.mode = CamooMode::kExactEigen;
    cc.w_min = *p.meta.mu_G / (8.0 * m * *p.meta.beta);
    cc.supergrad_iterations = 2000;
    cfg.weighting = cc;
    cfg.inner = GdRule{1.0 / (2.0 * *p.meta.beta)};
    cfg.camoo_lr_scale_by_m = false;
  } else if (name == "pamoo-theory") {
    PamooConfig pc;
    pc.step_rule = PamooStepRule::kLipschitz;
    pc.iterations = 20000;
    pc.tolerance = 1e-13;
    pc.clip_floor = 0.0;
    pc.gram_tau = 0.0;
    cfg.weighting = pc;
    cfg.inner = GdRule{1.0};
  } else if (name == "practical-sgd") {
    cfg.inner = GdRule{0.0005};
  } else if (name == "practical-adam") {
    cfg.inner = AdamRule{0.005};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return cfg;
}

}  // namespace amoo
