#include "amoo/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace amoo {

BilinearSolution evaluate_bilinear(const Matrix& a, const Vector& w, const Vector& q) {
  BilinearSolution s{w, q, 0.0, 0.0, 0.0};
  s.lower = (a.transpose() * w).minCoeff();
  s.upper = (a * q).maxCoeff();
  s.gap = s.upper - s.lower;
  return s;
}

namespace {

constexpr double kLogFloor = -700.0;

Vector safe_log(const Vector& p) {
  return p.unaryExpr([](double v) { return v > 0.0 ? std::max(std::log(v), kLogFloor) : kLogFloor; });
}

// Normalizes log-weights in place and returns the probabilities.
Vector softmax(Vector& logp) {
  const double top = logp.maxCoeff();
  Vector p = (logp.array() - top).exp();
  const double s = p.sum();
  logp.array() -= top + std::log(s);
  p /= s;
  return p;
}

Vector uniform(Eigen::Index k) { return Vector::Constant(k, 1.0 / static_cast<double>(k)); }

}  // namespace

BilinearSolution solve_bilinear_pu(const Matrix& a, const CamooConfig& cfg,
                                   const std::optional<BilinearSolution>& warm) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (m < 1 || n < 1) throw ArgumentError("bilinear game needs a nonempty matrix");
  if (!a.allFinite()) throw ArgumentError("bilinear game matrix has non-finite entries");
  if (cfg.pu_iterations < 1) throw ArgumentError("pu_iterations must be positive");
  if (cfg.pu_tau < 0.0) throw ArgumentError("pu_tau must be nonnegative");

  Vector w = uniform(m);
  Vector q = uniform(n);
  if (warm && warm->w.size() == m && warm->q.size() == n) {
    w = warm->w;
    q = warm->q;
  }

  const double scale = 2.0 * a.cwiseAbs().maxCoeff() + cfg.pu_tau;
  if (!(scale > 0.0)) return evaluate_bilinear(a, w, q);  // zero game, every pair is optimal
  const double eta = 1.0 / scale;
  const double keep = 1.0 - eta * cfg.pu_tau;

  Vector logw = safe_log(w);
  Vector logq = safe_log(q);
  Vector w_avg = Vector::Zero(m);
  Vector q_avg = Vector::Zero(n);

  for (int t = 0; t < cfg.pu_iterations; ++t) {
    // Predictive (extrapolation) step from the current iterate.
    Vector logw_bar = keep * logw + eta * (a * q);
    Vector logq_bar = keep * logq - eta * (a.transpose() * w);
    const Vector w_bar = softmax(logw_bar);
    const Vector q_bar = softmax(logq_bar);
    // Update using the opponent's predicted play.
    logw = keep * logw + eta * (a * q_bar);
    logq = keep * logq - eta * (a.transpose() * w_bar);
    w = softmax(logw);
    q = softmax(logq);
    w_avg += w_bar;
    q_avg += q_bar;
  }
  w_avg /= static_cast<double>(cfg.pu_iterations);
  q_avg /= static_cast<double>(cfg.pu_iterations);

  const BilinearSolution last = evaluate_bilinear(a, w, q);
  const BilinearSolution avg = evaluate_bilinear(a, w_avg, q_avg);
  const Vector& best_w = avg.lower > last.lower ? w_avg : w;
  const Vector& best_q = avg.upper < last.upper ? q_avg : q;
  return evaluate_bilinear(a, best_w, best_q);
}

WeightVector equal_weights(std::size_t m) {
  if (m == 0) throw ArgumentError("equal_weights needs m >= 1");
  return WeightVector::simplex(uniform(static_cast<Eigen::Index>(m)));
}

// ---------------------------------------------------------------------------

namespace {

void check_floor(std::size_t m, double w_min) {
  if (w_min < 0.0 || static_cast<double>(m) * w_min > 1.0 + WeightVector::kSumTolerance) {
    throw ArgumentError("CAMOO requires 0 <= w_min and m * w_min <= 1 (m = " + std::to_string(m) +
                        ", w_min = " + std::to_string(w_min) + ")");
  }
}

}  // namespace

CamooResult camoo_weights_exact(std::span<const SymMatrix> hessians, const CamooConfig& cfg,
                                const std::optional<Vector>& warm) {
  const std::size_t m = hessians.size();
  if (m == 0) throw ArgumentError("CAMOO needs at least one Hessian");
  check_floor(m, cfg.w_min);
  if (cfg.supergrad_iterations < 1) throw ArgumentError("supergrad_iterations must be positive");
  if (!(cfg.supergrad_step > 0.0)) throw ArgumentError("supergrad_step must be positive");
  const std::size_t n = hessians.front().size();
  for (const auto& h : hessians) {
    if (h.size() != n) throw ArgumentError("CAMOO Hessians must share a dimension");
  }

  const auto mm = static_cast<Eigen::Index>(m);
  Vector start = uniform(mm);
  if (warm && warm->size() == mm) start = *warm;
  Vector w = WeightVector::project(start, cfg.w_min).entries();

  double scale = 0.0;
  for (const auto& h : hessians) scale = std::max(scale, h.matrix().cwiseAbs().maxCoeff());

  auto objective = [&](const Vector& weights) {
    return min_eigenpair(weighted_hessian(hessians, weights));
  };

  CamooResult result{WeightVector::project(w, cfg.w_min), 0.0, false, 0};
  if (m == 1 || scale == 0.0 || static_cast<double>(m) * cfg.w_min >= 1.0 - 1e-15) {
    result.lambda_min = objective(w).value;
    result.stationary = true;
    return result;
  }

  Vector best_w = w;
  double best_value = -std::numeric_limits<double>::infinity();
  Vector tail_sum = Vector::Zero(mm);
  int tail_count = 0;
  const int tail_start = cfg.supergrad_iterations / 2;
  Vector supergrad(mm);

  int t = 0;
  for (; t < cfg.supergrad_iterations; ++t) {
    const EigenPair eig = objective(w);
    if (eig.value > best_value) {
      best_value = eig.value;
      best_w = w;
    }
    for (std::size_t i = 0; i < m; ++i) {
      supergrad[static_cast<Eigen::Index>(i)] = hessians[i].quadratic_form(eig.vector);
    }
    // Component along the simplex plane; a constant supergradient certifies optimality.
    const Vector d = supergrad.array() - supergrad.mean();
    const double dnorm = d.norm();
    if (dnorm <= 1e-13 * scale) {
      result.stationary = true;
      break;
    }
    const double step = cfg.supergrad_step / std::sqrt(static_cast<double>(t) + 1.0);
    w = WeightVector::project(w + (step / dnorm) * d, cfg.w_min).entries();
    if (t >= tail_start) {
      tail_sum += w;
      ++tail_count;
    }
  }
  result.iterations = t;

  if (tail_count > 0) {
    const Vector avg = WeightVector::project(tail_sum / tail_count, cfg.w_min).entries();
    const double avg_value = objective(avg).value;
    if (avg_value > best_value) {
      best_value = avg_value;
      best_w = avg;
    }
  }
  const double final_value = objective(w).value;
  if (final_value > best_value) {
    best_value = final_value;
    best_w = w;
  }
  result.w = WeightVector::project(best_w, cfg.w_min);
  result.lambda_min = best_value;
  return result;
}

CamooDiagResult camoo_weights_diag(const Matrix& diag_hessians, const CamooConfig& cfg,
                                   const std::optional<BilinearSolution>& warm) {
  check_floor(static_cast<std::size_t>(diag_hessians.rows()), cfg.w_min);
  BilinearSolution game = solve_bilinear_pu(diag_hessians, cfg, warm);
  WeightVector w = WeightVector::project(game.w, cfg.w_min);
  if (cfg.w_min > 0.0) game = evaluate_bilinear(diag_hessians, w.entries(), game.q);
  return {std::move(w), std::move(game)};
}

// ---------------------------------------------------------------------------

PamooContext make_pamoo_context(const ObjectiveSet& set, const Vector& x, const Vector& f_star) {
  if (static_cast<std::size_t>(f_star.size()) != set.size()) {
    throw ArgumentError("PAMOO needs one optimal value per objective");
  }
  const Matrix j = set.jacobian(x);
  return {set.values(x) - f_star, SymMatrix(j.transpose() * j)};
}

double pamoo_objective(const PamooContext& ctx, const Vector& w, double tau) {
  return 2.0 * w.dot(ctx.gaps) - ctx.gram.quadratic_form(w) - tau * w.squaredNorm();
}

namespace {

double projected_gradient_norm(const Vector& grad, const Vector& w, double floor) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const bool active = w[i] <= floor + 1e-15 * std::max(1.0, std::abs(floor));
    if (active && grad[i] <= 0.0) continue;
    s += grad[i] * grad[i];
  }
  return std::sqrt(s);
}

}  // namespace

PamooResult pamoo_weights(const PamooContext& ctx, const PamooConfig& cfg,
                          const std::optional<Vector>& warm) {
  const Eigen::Index m = ctx.gaps.size();
  if (m < 1 || static_cast<Eigen::Index>(ctx.gram.size()) != m) {
    throw ArgumentError("PAMOO context has mismatched gaps and Gram matrix");
  }
  if (!ctx.gaps.allFinite()) throw ArgumentError("PAMOO gaps must be finite");
  if (!(cfg.step > 0.0)) throw ArgumentError("PAMOO step must be positive");
  if (cfg.gram_tau < 0.0) throw ArgumentError("PAMOO gram_tau must be nonnegative");
  if (cfg.iterations < 1) throw ArgumentError("PAMOO iterations must be positive");
  if (cfg.clip_floor < 0.0) throw ArgumentError("PAMOO clip_floor must be nonnegative");

  const SymmetricEigen eig = symmetric_eigen(ctx.gram);
  const double gram_scale = std::max(std::abs(eig.values[0]), std::abs(eig.values[m - 1]));
  if (eig.values[0] < -1e-10 * (1.0 + gram_scale)) {
    throw ArgumentError("PAMOO Gram matrix is not positive semidefinite (lambda_min = " +
                        std::to_string(eig.values[0]) + ")");
  }

  const Matrix reg = ctx.gram.matrix() + cfg.gram_tau * Matrix::Identity(m, m);
  double step = cfg.step;
  if (cfg.step_rule == PamooStepRule::kLipschitz) {
    const double lmax = eig.values[m - 1] + cfg.gram_tau;
    step = lmax > 0.0 ? 1.0 / (2.0 * lmax) : cfg.step;
  }

  Vector w = Vector::Constant(m, std::max(cfg.clip_floor, 1.0 / static_cast<double>(m)));
  if (warm && warm->size() == m && warm->allFinite()) w = *warm;
  w = w.cwiseMax(cfg.clip_floor);

  PamooResult result{WeightVector::orthant(w), 0.0, 0.0, 0};
  const double stop = cfg.tolerance * 2.0 * ctx.gaps.norm();
  int t = 0;
  for (; t < cfg.iterations; ++t) {
    const Vector grad = 2.0 * (ctx.gaps - reg * w);
    if (cfg.tolerance > 0.0 && projected_gradient_norm(grad, w, cfg.clip_floor) <= stop) {
      break;
    }
    w = (w + step * grad).cwiseMax(cfg.clip_floor);
  }
  if (!w.allFinite()) throw NumericError("PAMOO weights diverged; reduce the solver step");
  result.iterations = t;
  result.w = WeightVector::orthant(w);
  result.objective = pamoo_objective(ctx, w, cfg.gram_tau);
  result.projected_gradient_norm =
      projected_gradient_norm(2.0 * (ctx.gaps - reg * w), w, cfg.clip_floor);
  return result;
}

// ---------------------------------------------------------------------------

WeightStep weight_optimizer_step(const WeightingSpec& kind, const WeightingContext& ctx) {
  if (ctx.m == 0) throw ArgumentError("weighting context: field 'm' must be positive");
  return std::visit(
      [&](const auto& spec) -> WeightStep {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, EqualWeighting>) {
          return {equal_weights(ctx.m), std::nullopt, std::nullopt, std::nullopt};
        } else if constexpr (std::is_same_v<T, CamooConfig>) {
          const bool warm = spec.warm_start;
          if (spec.mode == CamooMode::kExactEigen) {
            if (!ctx.hessians) throw ArgumentError("weighting context: CAMOO needs field 'hessians'");
            CamooResult r = camoo_weights_exact(*ctx.hessians, spec,
                                                warm ? ctx.warm_w : std::optional<Vector>{});
            return {std::move(r.w), r.lambda_min, std::nullopt, std::nullopt};
          }
          if (!ctx.diag_hessians) {
            throw ArgumentError("weighting context: CAMOO needs field 'diag_hessians'");
          }
          CamooDiagResult r = camoo_weights_diag(*ctx.diag_hessians, spec,
                                                 warm ? ctx.warm_game : std::nullopt);
          const double lambda = r.game.lower;
          const double gap = r.game.gap;
          return {std::move(r.w), lambda, gap, std::move(r.game)};
        } else {
          if (!ctx.pamoo) throw ArgumentError("weighting context: PAMOO needs field 'pamoo'");
          PamooResult r = pamoo_weights(*ctx.pamoo, spec, spec.warm_start ? ctx.warm_w : std::nullopt);
          return {std::move(r.w), std::nullopt, std::nullopt, std::nullopt};
        }
      },
      kind);
}

}  // namespace amoo
