#pragma once

#include "amoo/core.hpp"
#include "amoo/hessians.hpp"
#include "amoo/problems.hpp"
#include "amoo/weighting.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace amoo {

struct GdRule {
  double step = 0.25;
};

struct AdamRule {
  double step = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using InnerRule = std::variant<GdRule, AdamRule>;

struct RunConfig {
  ProblemSpec problem;
  WeightingSpec weighting = EqualWeighting{};
  InnerRule inner = GdRule{};
  /// Number of parameter updates. Zero records the starting point only.
  int steps = 100;
  std::uint64_t seed = 0;
  int record_every = 1;
  /// Multiply the CAMOO step by m, since simplex weights sum to 1.
  bool camoo_lr_scale_by_m = true;
  /// Starting point; the problem's default when absent.
  std::optional<Vector> x0;
  HutchinsonConfig hutchinson;
  /// Overrides the problem's optimal values (used by PAMOO).
  std::optional<Vector> f_star;
};

struct IterateRecord {
  int step = 0;
  Vector f;
  Vector w;
  /// Norm of the weighted gradient sum_i w_i grad f_i(x_k).
  double grad_norm = 0.0;
  std::optional<double> residual;
  std::optional<double> msq;
  std::optional<double> mean_norm;
  std::optional<double> lambda_min_est;
  std::optional<double> pu_gap;
};

struct RunTrace {
  std::string problem_name;
  std::vector<IterateRecord> records;
  Vector final_x;
  double wall_seconds = 0.0;
};

/// Non-finite iterate or weight computation. Carries everything recorded
/// before the failing step.
class RunDiverged : public NumericError {
 public:
  RunDiverged(const std::string& what, int step, RunTrace partial)
      : NumericError(what), step_(step), partial_(std::move(partial)) {}

  int step() const { return step_; }
  const RunTrace& partial_trace() const { return partial_; }

 private:
  int step_;
  RunTrace partial_;
};

Vector step_gd(const Vector& x, const Vector& g, double step);

struct AdamState {
  Vector m;
  Vector v;
  int t = 0;
};

/// One bias-corrected Adam update; initializes the moments on first use.
Vector step_adam(AdamState& state, const Vector& x, const Vector& g, const AdamRule& rule);

RunTrace run(const RunConfig& cfg);
/// Same as run(cfg) on an already built problem; cfg.problem is ignored.
RunTrace run(const RunConfig& cfg, const Problem& problem);

/// Named presets: "camoo-theory", "pamoo-theory", "practical-sgd",
/// "practical-adam". Theory presets need beta (and mu_G for CAMOO) in the
/// problem meta.
RunConfig apply_preset(const std::string& name, RunConfig cfg, const Problem& problem);
std::vector<std::string> preset_names();

}  // namespace amoo
