#include "amoo/analysis.hpp"

#include "amoo/hessians.hpp"
#include "amoo/linalg.hpp"
#include "amoo/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace amoo {

namespace {

constexpr double kBoundSlack = 1e-12;

int clamp_k0(double raw) {
  if (!(raw > 0.0)) return 0;  // also catches NaN from 0/0
  if (raw > 1e9) return std::numeric_limits<int>::max();
  return static_cast<int>(std::ceil(raw));
}

void validate_recurrence(const RecurrenceParams& p, RecurrenceVariant v) {
  auto fail = [](const std::string& what) {
    throw ArgumentError("recurrence hypothesis violated: " + what);
  };
  if (v == RecurrenceVariant::kExact) {
    if (!(p.alpha1 >= 0.0 && p.alpha1 < 2.0)) fail("alpha1 in [0, 2)");
  } else if (!(p.alpha1 > 0.0 && p.alpha1 < 2.0)) {
    fail("alpha1 in (0, 2)");
  }
  if (!(p.alpha2 >= 0.0)) fail("alpha2 >= 0");
  if (!(p.r0 >= 0.0)) fail("r0 >= 0");
  if (p.horizon < 0) fail("horizon >= 0");
  if (v == RecurrenceVariant::kExact) return;
  if (!(p.alpha3 >= 0.0)) fail("alpha3 >= 0");
  if (!(p.alpha4 >= 0.0)) fail("alpha4 >= 0");
  const double rel = 1.0 + 1e-12;
  if (p.alpha2 > 0.0) {
    if (p.alpha3 > rel * p.alpha1 * p.alpha1 / (256.0 * p.alpha2 * p.alpha2)) {
      fail("alpha3 <= alpha1^2 / (256 alpha2^2)");
    }
    if (p.alpha4 > rel * p.alpha1 / (4.0 * p.alpha2)) fail("alpha4 <= alpha1 / (4 alpha2)");
  } else if (p.alpha4 > 0.0) {
    fail("alpha4 = 0 when alpha2 = 0");
  }
}

}  // namespace

RecurrenceParams max_admissible_eps(double alpha1, double alpha2, double r0, int horizon) {
  RecurrenceParams p{alpha1, alpha2, 0.0, 0.0, r0, horizon};
  if (alpha2 > 0.0) {
    p.alpha3 = alpha1 * alpha1 / (256.0 * alpha2 * alpha2);
    p.alpha4 = alpha1 / (4.0 * alpha2);
  } else {
    p.alpha3 = alpha1 * alpha1 / 256.0;
  }
  return p;
}

RecurrenceResult recurrence_simulate_and_bound(const RecurrenceParams& p, RecurrenceVariant v) {
  validate_recurrence(p, v);
  const bool eps = v == RecurrenceVariant::kEps;
  const auto n = static_cast<std::size_t>(p.horizon) + 1;
  RecurrenceResult res;
  res.r.resize(n);
  res.bound.resize(n);
  res.r[0] = p.r0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double r = res.r[k];
    double sq = r * r - p.alpha1 * r * r / (1.0 + p.alpha2 * r);
    if (eps) sq += p.alpha3 + p.alpha4 * r;
    res.r[k + 1] = std::sqrt(std::max(sq, 0.0));
  }

  const double c = eps ? 16.0 : 4.0;
  res.k0 = p.alpha1 > 0.0 ? clamp_k0(c * (p.r0 * p.alpha2 - 1.0) / p.alpha1) : 0;
  const double slope = p.alpha2 > 0.0 ? p.alpha1 / (c * p.alpha2) : 0.0;
  double plateau = 0.0;
  if (eps) {
    plateau = 2.0 * p.alpha3 / p.alpha1;
    if (p.alpha2 > 0.0) plateau += 2.0 * p.alpha4 / (p.alpha1 * p.alpha2);
    plateau = std::sqrt(plateau);
  }
  const double factor = std::sqrt(1.0 - p.alpha1 / 2.0);
  const double r_k0 = static_cast<std::size_t>(res.k0) < n ? res.r[res.k0] : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto ki = static_cast<int>(k);
    if (ki < res.k0) {
      res.bound[k] = p.r0 - slope * static_cast<double>(k);
    } else {
      res.bound[k] = r_k0 * std::pow(factor, ki - res.k0) + plateau;
    }
    if (res.r[k] > res.bound[k] + kBoundSlack) {
      res.holds = false;
      if (res.first_violation < 0) res.first_violation = ki;
    }
  }
  return res;
}

BoundCheckReport theorem_bound_check(const RunTrace& trace, const TheoremParams& tp) {
  if (!(tp.beta > 0.0)) throw ArgumentError("theorem hypothesis violated: beta > 0");
  if (!(tp.mu > 0.0)) throw ArgumentError("theorem hypothesis violated: mu > 0");
  if (!(tp.mu <= tp.beta)) throw ArgumentError("theorem hypothesis violated: mu <= beta");
  if (!(tp.M_f >= 0.0)) throw ArgumentError("theorem hypothesis violated: M_f >= 0");
  if (tp.m < 1) throw ArgumentError("theorem hypothesis violated: m >= 1");
  if (trace.records.empty()) throw ArgumentError("theorem check: trace has no records");
  for (const auto& rec : trace.records) {
    if (!rec.residual) throw ArgumentError("theorem check: trace has no residuals");
  }

  const bool camoo = tp.which == TheoremKind::kCamoo;
  const double c = camoo ? 16.0 : 64.0;
  const double geo = 1.0 - 3.0 * tp.mu / ((camoo ? 8.0 : 32.0) * tp.beta);
  const double r0 = tp.r0 ? *tp.r0 : *trace.records.front().residual;
  const double sm = std::sqrt(static_cast<double>(tp.m));
  const double mu15 = std::pow(tp.mu, 1.5);

  BoundCheckReport rep;
  if (tp.M_f > 0.0) {
    rep.k0 = clamp_k0(c * tp.beta * (r0 * 3.0 * sm * tp.beta * tp.M_f - std::sqrt(tp.mu)) /
                      (3.0 * mu15));
  }
  const double slope = tp.M_f > 0.0 ? mu15 / (c * tp.beta * tp.beta * sm * tp.M_f) : 0.0;
  auto linear = [&](int k) { return r0 - slope * static_cast<double>(k); };

  // Geometric phase anchor: r0 when k0 = 0, otherwise the recorded residual
  // at k0, falling back to the linear-phase bound there.
  double anchor = rep.k0 == 0 ? r0 : linear(rep.k0);
  if (rep.k0 > 0) {
    for (const auto& rec : trace.records) {
      if (rec.step == rep.k0) anchor = *rec.residual;
    }
  }

  for (const auto& rec : trace.records) {
    const double b = rec.step < rep.k0 ? linear(rec.step)
                                       : anchor * std::pow(geo, 0.5 * (rec.step - rep.k0));
    rep.bounds.push_back(b);
    const double r = *rec.residual;
    if (b > 0.0) rep.max_ratio = std::max(rep.max_ratio, r / b);
    if (r > b + kBoundSlack) {
      if (rep.holds) rep.first_violation_step = rec.step;
      rep.holds = false;
    }
  }
  return rep;
}

RateFit fit_rate(const std::vector<double>& steps, const std::vector<double>& values) {
  if (steps.size() != values.size()) throw ArgumentError("fit_rate: size mismatch");
  if (steps.size() < 2) throw ArgumentError("fit_rate: need at least two points");
  RateFit out;
  out.points = steps.size();
  double sx = 0, sy = 0;
  std::vector<double> ys(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (!(v > 1e-300)) {
      v = 1e-300;
      out.clipped = true;
    }
    ys[i] = std::log(v);
    sx += steps[i];
    sy += ys[i];
  }
  const double n = static_cast<double>(steps.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    sxx += (steps[i] - mx) * (steps[i] - mx);
    sxy += (steps[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("fit_rate: steps must not all be equal");
  out.rho = std::exp(sxy / sxx);
  return out;
}

RateFit fit_rate(const RunTrace& trace, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw ArgumentError("fit_rate: tail_fraction must lie in (0, 1]");
  }
  std::vector<double> steps, values;
  for (const auto& rec : trace.records) {
    if (rec.residual) {
      steps.push_back(rec.step);
      values.push_back(*rec.residual);
    }
  }
  const auto take = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(steps.size())));
  if (take < 10) throw ArgumentError("fit_rate: need at least 10 tail records with residuals");
  steps.erase(steps.begin(), steps.end() - static_cast<std::ptrdiff_t>(take));
  values.erase(values.begin(), values.end() - static_cast<std::ptrdiff_t>(take));
  return fit_rate(steps, values);
}

SelfConcordanceResult self_concordance_check(const Objective& f, const Vector& x, const Vector& y,
                                             double M_f) {
  if (!f.has_hessian()) throw ArgumentError("self-concordance check needs an analytic Hessian");
  if (!(M_f >= 0.0)) throw ArgumentError("self-concordance check needs M_f >= 0");
  const Vector d = y - x;
  SelfConcordanceResult r;
  r.t = std::sqrt(std::max(0.0, d.dot(f.hessian(x) * d)));
  r.lhs = f.value(y);
  r.rhs = f.value(x) + f.gradient(x).dot(d) + r.t * r.t / (2.0 * (1.0 + M_f * r.t));
  r.holds = r.lhs >= r.rhs - 1e-10 * (1.0 + std::abs(r.lhs));
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Matrix random_spd(std::mt19937_64& rng, Eigen::Index n) {
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = 2.0 * uniform01(rng) - 1.0;
  }
  return b * b.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n);
}

double lambda_min_at(std::span<const SymMatrix> hs, const Vector& w) {
  return min_eigenpair(weighted_hessian(hs, w)).value;
}

// Best lambda_min over a grid of the simplex (m <= 3), refined near the best
// coarse point for m = 3.
double grid_optimum(std::span<const SymMatrix> hs) {
  const std::size_t m = hs.size();
  if (m == 1) return lambda_min_at(hs, Vector::Ones(1));
  double best = -std::numeric_limits<double>::infinity();
  if (m == 2) {
    for (int i = 0; i <= 1000; ++i) {
      const double a = i / 1000.0;
      best = std::max(best, lambda_min_at(hs, Vector{{a, 1.0 - a}}));
    }
    return best;
  }
  int bi = 0, bj = 0;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; i + j <= 100; ++j) {
      const double v = lambda_min_at(hs, Vector{{i / 100.0, j / 100.0, (100 - i - j) / 100.0}});
      if (v > best) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }
  for (int i = 10 * bi - 10; i <= 10 * bi + 10; ++i) {
    for (int j = 10 * bj - 10; j <= 10 * bj + 10; ++j) {
      if (i < 0 || j < 0 || i + j > 1000) continue;
      best = std::max(best,
                      lambda_min_at(hs, Vector{{i / 1000.0, j / 1000.0, (1000 - i - j) / 1000.0}}));
    }
  }
  return best;
}

}  // namespace

WeylReport weyl_degradation_suite(std::uint64_t seed, int trials) {
  if (trials < 1) throw ArgumentError("weyl suite needs trials >= 1");
  WeylReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(t)));
    WeylTrial tr;
    tr.m = 1 + rng() % 3;
    tr.n = 1 + rng() % 6;
    const auto n = static_cast<Eigen::Index>(tr.n);
    std::vector<SymMatrix> hs;
    Matrix diags(static_cast<Eigen::Index>(tr.m), n);
    for (std::size_t i = 0; i < tr.m; ++i) {
      const Matrix h = random_spd(rng, n);
      hs.emplace_back(h);
      diags.row(static_cast<Eigen::Index>(i)) = h.diagonal().transpose();
      const Matrix off = h - Matrix(h.diagonal().asDiagonal());
      tr.offdiag_norm = std::max(tr.offdiag_norm, spectral_norm(SymMatrix(off)));
    }

    CamooConfig exact;
    exact.mode = CamooMode::kExactEigen;
    exact.supergrad_iterations = 3000;
    tr.mu_star = std::max(grid_optimum(hs), camoo_weights_exact(hs, exact).lambda_min);

    CamooConfig game;
    game.pu_tau = 0.0;
    game.pu_iterations = 20000;
    const BilinearSolution sol = solve_bilinear_pu(diags, game);
    tr.solver_gap = sol.gap;
    tr.lambda_hat = lambda_min_at(hs, sol.w);
    tr.passed = tr.lambda_hat >=
                tr.mu_star - 2.0 * tr.offdiag_norm - tr.solver_gap - 1e-9 * (1.0 + tr.mu_star);
    if (tr.passed) ++rep.passes;
    rep.details.push_back(tr);
  }
  return rep;
}

double bilinear_value_two_rows(const Matrix& a) {
  if (a.rows() != 2 || a.cols() < 1) throw ArgumentError("two-row oracle needs a 2 x n matrix");
  // v(s) = min_j (s a0j + (1 - s) a1j) is concave piecewise linear in s, so
  // its maximum sits at s in {0, 1} or where two columns cross.
  auto value = [&](double s) { return (s * a.row(0) + (1.0 - s) * a.row(1)).minCoeff(); };
  double best = std::max(value(0.0), value(1.0));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index k = j + 1; k < a.cols(); ++k) {
      const double dj = a(0, j) - a(1, j), dk = a(0, k) - a(1, k);
      if (dj == dk) continue;
      const double s = (a(1, k) - a(1, j)) / (dj - dk);
      if (s > 0.0 && s < 1.0) best = std::max(best, value(s));
    }
  }
  return best;
}

BilinearSuiteReport bilinear_suite(std::uint64_t seed, int instances, int value_instances,
                                   std::size_t m, std::size_t n, double tol) {
  BilinearSuiteReport rep;
  rep.instances = instances;
  CamooConfig cfg;
  cfg.pu_tau = 0.0;
  cfg.pu_iterations = 20000;
  auto draw = [](std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = 3.0 * uniform01(rng);
    }
    return a;
  };
  for (int t = 0; t < instances; ++t) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(t)));
    const BilinearSolution s = solve_bilinear_pu(draw(rng, m, n), cfg);
    rep.max_gap = std::max(rep.max_gap, s.gap);
    if (s.gap <= tol) ++rep.gap_passes;
  }
  for (int t = 0; t < value_instances; ++t) {
    std::mt19937_64 rng(split_seed(seed, 0x10000 + static_cast<std::uint64_t>(t)));
    const Matrix a = draw(rng, 2, n);
    const BilinearSolution s = solve_bilinear_pu(a, cfg);
    const double err = std::abs(0.5 * (s.lower + s.upper) - bilinear_value_two_rows(a));
    rep.max_value_error = std::max(rep.max_value_error, err);
    if (err <= tol) ++rep.value_passes;
  }
  return rep;
}

RecurrenceSuiteReport recurrence_suite(int horizon) {
  RecurrenceSuiteReport rep;
  for (double a1 : {0.1, 0.5, 1.5}) {
    for (double a2 : {0.0, 1.0, 10.0}) {
      for (double r0 : {0.1, 1.0, 100.0}) {
        for (auto v : {RecurrenceVariant::kExact, RecurrenceVariant::kEps}) {
          const RecurrenceParams p = v == RecurrenceVariant::kExact
                                         ? RecurrenceParams{a1, a2, 0.0, 0.0, r0, horizon}
                                         : max_admissible_eps(a1, a2, r0, horizon);
          const RecurrenceResult r = recurrence_simulate_and_bound(p, v);
          ++rep.cases;
          if (r.holds) {
            ++rep.passes;
          } else {
            std::ostringstream os;
            os << (v == RecurrenceVariant::kExact ? "exact" : "eps") << " a1=" << a1
               << " a2=" << a2 << " r0=" << r0 << " violated at k=" << r.first_violation;
            rep.failures.push_back(os.str());
          }
        }
      }
    }
  }
  return rep;
}

SelfConcordanceSuiteReport self_concordance_suite(std::uint64_t seed, int cases) {
  SelfConcordanceSuiteReport rep;
  const FunctionObjective expf(
      1, [](const Vector& x) { return std::exp(x[0]) - x[0]; },
      [](const Vector& x) { return Vector::Constant(1, std::exp(x[0]) - 1.0); },
      [](const Vector& x) { return Matrix::Constant(1, 1, std::exp(x[0])); });
  std::mt19937_64 rng(split_seed(seed, 7));
  for (int c = 0; c < cases; ++c) {
    // exp(x) - x satisfies the bound with M_f = 1 for x >= 0.
    const Vector x = Vector::Constant(1, 2.0 * uniform01(rng));
    const Vector y = Vector::Constant(1, 6.0 * uniform01(rng) - 3.0);
    ++rep.cases;
    if (self_concordance_check(expf, x, y, 1.0).holds) ++rep.passes;

    Matrix b(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) b.data()[i] = 2.0 * uniform01(rng) - 1.0;
    const Matrix h = b * b.transpose();
    const FunctionObjective quad(
        3, [h](const Vector& z) { return 0.5 * z.dot(h * z); },
        [h](const Vector& z) -> Vector { return h * z; }, [h](const Vector&) -> Matrix { return h; });
    Vector p(3), q(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      p[i] = 2.0 * uniform01(rng) - 1.0;
      q[i] = 2.0 * uniform01(rng) - 1.0;
    }
    const auto r = self_concordance_check(quad, p, q, 0.0);
    ++rep.cases;
    if (r.holds && std::abs(r.lhs - r.rhs) <= 1e-10 * (1.0 + std::abs(r.lhs))) ++rep.passes;
  }
  return rep;
}

}  // namespace amoo
