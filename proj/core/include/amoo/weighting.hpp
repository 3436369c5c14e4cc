#pragma once

#include "amoo/core.hpp"
#include "amoo/linalg.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace amoo {

enum class CamooMode { kExactEigen, kDiagonalBilinear };

struct CamooConfig {
  CamooMode mode = CamooMode::kDiagonalBilinear;
  /// Floor of the weight simplex. The theory value is mu_G / (8 m beta); the
  /// practical default optimizes over the full simplex.
  double w_min = 0.0;
  int pu_iterations = 100;
  double pu_tau = 0.01;
  int supergrad_iterations = 500;
  double supergrad_step = 0.1;
  bool warm_start = true;
};

enum class PamooStepRule {
  kFixed,      // cfg.step, as in the practical solver
  kLipschitz,  // 1 / (2 lambda_max(G + tau I)), converges for any scale
};

struct PamooConfig {
  double step = 3e-3;
  int iterations = 200;
  double clip_floor = 1e-6;
  double gram_tau = 1e-4;
  /// Optimal objective values; the problem's values are used when absent.
  std::optional<Vector> f_star;
  bool warm_start = true;
  PamooStepRule step_rule = PamooStepRule::kFixed;
  /// Stop early once the projected gradient norm drops below
  /// tolerance * |2 gaps|. Zero runs exactly `iterations` updates.
  double tolerance = 0.0;
};

struct BilinearSolution {
  Vector w;
  Vector q;
  /// min_j (A^T w)_j, the value guaranteed by w.
  double lower = 0.0;
  /// max_i (A q)_i, the value conceded by q.
  double upper = 0.0;
  double gap = 0.0;
};

/// Duality gap of (w, q) for max_w min_q w^T A q.
BilinearSolution evaluate_bilinear(const Matrix& a, const Vector& w, const Vector& q);

/// Approximate saddle point of max_{w in simplex} min_{q in simplex} w^T A q.
///
/// Runs cfg.pu_iterations predictive-update steps of entropy-regularized
/// multiplicative weights with step 1 / (2 max|A_ij| + tau). The returned w
/// and q are each the better of the last and the averaged extrapolated
/// iterate, so the reported gap is a certificate for the returned pair.
BilinearSolution solve_bilinear_pu(const Matrix& a, const CamooConfig& cfg,
                                   const std::optional<BilinearSolution>& warm = std::nullopt);

WeightVector equal_weights(std::size_t m);

struct CamooResult {
  WeightVector w;
  double lambda_min = 0.0;
  /// True when a stationary supergradient was found before the iteration cap.
  bool stationary = false;
  int iterations = 0;
};

/// Maximizes lambda_min(sum_i w_i H_i) over the floored simplex with
/// normalized projected supergradient ascent.
CamooResult camoo_weights_exact(std::span<const SymMatrix> hessians, const CamooConfig& cfg,
                                const std::optional<Vector>& warm = std::nullopt);

struct CamooDiagResult {
  WeightVector w;
  BilinearSolution game;
};

CamooDiagResult camoo_weights_diag(const Matrix& diag_hessians, const CamooConfig& cfg,
                                   const std::optional<BilinearSolution>& warm = std::nullopt);

struct PamooContext {
  /// f_i(x) - f_i(x_star).
  Vector gaps;
  /// J^T J with J = [grad f_1(x) ... grad f_m(x)].
  SymMatrix gram;
};

PamooContext make_pamoo_context(const ObjectiveSet& set, const Vector& x, const Vector& f_star);

struct PamooResult {
  WeightVector w;
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
};

/// 2 w^T gaps - w^T (G + tau I) w.
double pamoo_objective(const PamooContext& ctx, const Vector& w, double tau);

/// Projected gradient ascent on the PAMOO quadratic over {w >= clip_floor}.
PamooResult pamoo_weights(const PamooContext& ctx, const PamooConfig& cfg,
                          const std::optional<Vector>& warm = std::nullopt);

struct EqualWeighting {};

using WeightingSpec = std::variant<EqualWeighting, CamooConfig, PamooConfig>;

/// What a weight optimizer may consume at the current iterate. Which fields
/// are required depends on the optimizer kind.
struct WeightingContext {
  std::size_t m = 0;
  std::optional<std::vector<SymMatrix>> hessians;
  std::optional<Matrix> diag_hessians;
  std::optional<PamooContext> pamoo;
  std::optional<Vector> warm_w;
  std::optional<BilinearSolution> warm_game;
};

struct WeightStep {
  WeightVector w;
  std::optional<double> lambda_min_est;
  std::optional<double> pu_gap;
  std::optional<BilinearSolution> game;
};

WeightStep weight_optimizer_step(const WeightingSpec& kind, const WeightingContext& ctx);

}  // namespace amoo
