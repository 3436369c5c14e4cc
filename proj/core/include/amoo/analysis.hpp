#pragma once

#include "amoo/core.hpp"
#include "amoo/driver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace amoo {

// Recurrence lemmas ---------------------------------------------------------

/// r_{k+1}^2 <= r_k^2 - a1 r_k^2 / (1 + a2 r_k) + a3 + a4 r_k.
struct RecurrenceParams {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
  double r0 = 1.0;
  int horizon = 100;
};

enum class RecurrenceVariant { kExact, kEps };

struct RecurrenceResult {
  /// Tight recurrence (equality), r[0..horizon].
  std::vector<double> r;
  /// Closed-form bound evaluated at each k.
  std::vector<double> bound;
  int k0 = 0;
  bool holds = true;
  /// First k with r[k] > bound[k] + 1e-12, or -1.
  int first_violation = -1;
};

RecurrenceResult recurrence_simulate_and_bound(const RecurrenceParams& p, RecurrenceVariant variant);

/// Largest a3, a4 allowed by the eps lemma for the given a1, a2. With a2 = 0
/// the a4 term has no finite bound term, so a4 = 0 and a3 = a1^2 / 256.
RecurrenceParams max_admissible_eps(double alpha1, double alpha2, double r0, int horizon);

// Theorem rate bounds --------------------------------------------------------

enum class TheoremKind { kCamoo, kPamoo };

struct TheoremParams {
  double beta = 1.0;
  double mu = 1.0;
  double M_f = 0.0;
  std::size_t m = 1;
  /// Initial distance to the optimum; the first recorded residual if absent.
  std::optional<double> r0;
  TheoremKind which = TheoremKind::kCamoo;
};

struct BoundCheckReport {
  bool holds = true;
  int k0 = 0;
  /// Largest residual / bound over the records.
  double max_ratio = 0.0;
  int first_violation_step = -1;
  std::vector<double> bounds;  // one per record
};

/// The two-phase bound of the CAMOO (c = 16) or PAMOO (c = 64) theorem:
///   k < k0:  r0 - k mu^{3/2} / (c beta^2 sqrt(m) M_f)
///   k >= k0: r_{k0} (1 - 3 mu / (c' beta))^{(k - k0)/2},  c' = 8 or 32.
BoundCheckReport theorem_bound_check(const RunTrace& trace, const TheoremParams& tp);

// Rates and inequalities ------------------------------------------------------

struct RateFit {
  double rho = 1.0;
  /// True when nonpositive values were clipped to 1e-300 before the log.
  bool clipped = false;
  std::size_t points = 0;
};

/// exp of the least-squares slope of log(values) against steps.
RateFit fit_rate(const std::vector<double>& steps, const std::vector<double>& values);
/// fit_rate over the residuals of the last tail_fraction of the records.
RateFit fit_rate(const RunTrace& trace, double tail_fraction);

struct SelfConcordanceResult {
  bool holds = true;
  double lhs = 0.0;  // f(y)
  double rhs = 0.0;  // f(x) + <grad f(x), y - x> + t^2 / (2 (1 + M_f t))
  double t = 0.0;    // |y - x| in the Hessian norm at x
};

SelfConcordanceResult self_concordance_check(const Objective& f, const Vector& x, const Vector& y,
                                             double M_f);

// Diagonal-Hessian degradation -----------------------------------------------

struct WeylTrial {
  std::size_t m = 0;
  std::size_t n = 0;
  /// Best weighted curvature over the simplex (grid and solver).
  double mu_star = 0.0;
  /// lambda_min of the full weighted Hessian at the diagonal optimum.
  double lambda_hat = 0.0;
  /// max_i |H_i - Diag(H_i)|_2.
  double offdiag_norm = 0.0;
  /// Duality gap of the diagonal game solution.
  double solver_gap = 0.0;
  bool passed = false;
};

struct WeylReport {
  int trials = 0;
  int passes = 0;
  std::vector<WeylTrial> details;
};

/// Random SPD instances (m <= 3, n <= 6): checks
///   lambda_min(sum_i w_i H_i) >= mu_star - 2 |Delta| - solver_gap
/// for w the optimal weights of the diagonal problem.
WeylReport weyl_degradation_suite(std::uint64_t seed, int trials);

/// Exact value of max_{w in simplex} min_j (A^T w)_j for a 2-row A.
double bilinear_value_two_rows(const Matrix& a);

struct BilinearSuiteReport {
  int instances = 0;
  int gap_passes = 0;
  int value_passes = 0;
  double max_gap = 0.0;
  double max_value_error = 0.0;
};

/// PU solver on random m x n matrices with entries in [0, 3]: duality gap
/// <= tol on `instances` draws, and agreement with the exact 2-row value.
BilinearSuiteReport bilinear_suite(std::uint64_t seed, int instances, int value_instances,
                                   std::size_t m, std::size_t n, double tol);

struct RecurrenceSuiteReport {
  int cases = 0;
  int passes = 0;
  std::vector<std::string> failures;
};

/// Grid a1 in {0.1, 0.5, 1.5}, a2 in {0, 1, 10}, r0 in {0.1, 1, 100} for both
/// variants (eps with maximal admissible a3, a4).
RecurrenceSuiteReport recurrence_suite(int horizon);

struct SelfConcordanceSuiteReport {
  int cases = 0;
  int passes = 0;
};

/// exp(x) - x with M_f = 1 and quadratics with M_f = 0 on seeded random pairs.
SelfConcordanceSuiteReport self_concordance_suite(std::uint64_t seed, int cases);

}  // namespace amoo
