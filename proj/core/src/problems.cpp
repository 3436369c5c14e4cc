#include "amoo/problems.hpp"

#include "amoo/linalg.hpp"
#include "amoo/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace amoo {

namespace {

class QuadPowerObjective final : public Objective {
 public:
  QuadPowerObjective(Matrix h, double alpha, Vector center)
      : h_(std::move(h)), alpha_(alpha), center_(std::move(center)) {}

  std::size_t dim() const override { return static_cast<std::size_t>(h_.rows()); }

  double value(const Vector& x) const override {
    check(x);
    const double q = form(x - center_);
    return alpha_ == 1.0 ? q : std::pow(q, alpha_);
  }

  Vector gradient(const Vector& x) const override {
    check(x);
    const Vector d = x - center_;
    const Vector u = h_ * d;
    if (alpha_ == 1.0) return 2.0 * u;
    const double q = std::max(d.dot(u), 0.0);
    return 2.0 * alpha_ * std::pow(q, alpha_ - 1.0) * u;
  }

  bool has_hessian() const override { return true; }

  Matrix hessian(const Vector& x) const override {
    check(x);
    if (alpha_ == 1.0) return 2.0 * h_;
    const Vector d = x - center_;
    const Vector u = h_ * d;
    const double q = d.dot(u);
    // For PSD H, q = 0 forces H d = 0, so both terms vanish when alpha > 1.
    if (q <= 0.0) return Matrix::Zero(h_.rows(), h_.cols());
    return 2.0 * alpha_ * std::pow(q, alpha_ - 1.0) * h_ +
           4.0 * alpha_ * (alpha_ - 1.0) * std::pow(q, alpha_ - 2.0) * (u * u.transpose());
  }

  std::optional<double> optimal_value() const override { return 0.0; }

 private:
  double form(const Vector& d) const { return std::max(d.dot(h_ * d), 0.0); }
  void check(const Vector& x) const {
    if (x.size() != h_.rows()) throw ArgumentError("quadratic objective: dimension mismatch");
  }

  Matrix h_;
  double alpha_;
  Vector center_;
};

class ShiftedObjective final : public Objective {
 public:
  ShiftedObjective(ObjectivePtr base, Vector shift) : base_(std::move(base)), shift_(std::move(shift)) {}

  std::size_t dim() const override { return base_->dim(); }
  double value(const Vector& x) const override { return base_->value(x - shift_); }
  Vector gradient(const Vector& x) const override { return base_->gradient(x - shift_); }
  bool has_hessian() const override { return base_->has_hessian(); }
  Matrix hessian(const Vector& x) const override { return base_->hessian(x - shift_); }
  bool has_diag_hessian() const override { return base_->has_diag_hessian(); }
  Vector diag_hessian(const Vector& x) const override { return base_->diag_hessian(x - shift_); }
  std::optional<double> optimal_value() const override { return base_->optimal_value(); }

 private:
  ObjectivePtr base_;
  Vector shift_;
};

// sum_j (exp(s xj) - s xj) for s = +1 or -1.
ObjectivePtr make_exp_objective(std::size_t n, double sign) {
  return std::make_shared<FunctionObjective>(
      n,
      [sign](const Vector& x) { return ((sign * x).array().exp() - sign * x.array()).sum(); },
      [sign](const Vector& x) -> Vector { return sign * ((sign * x).array().exp() - 1.0).matrix(); },
      [sign](const Vector& x) -> Matrix { return (sign * x).array().exp().matrix().asDiagonal(); },
      [sign](const Vector& x) -> Vector { return (sign * x).array().exp().matrix(); },
      static_cast<double>(n));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError("invalid problem spec: " + what);
}

double max_curvature_over_simplex(const std::vector<Matrix>& hessians) {
  std::vector<SymMatrix> hs;
  hs.reserve(hessians.size());
  for (const auto& h : hessians) hs.emplace_back(h);
  CamooConfig cfg;
  cfg.supergrad_iterations = 2000;
  return camoo_weights_exact(hs, cfg).lambda_min;
}

Problem build_quadratics(std::string name, std::vector<Matrix> forms) {
  std::vector<ObjectivePtr> objs;
  std::vector<Matrix> hessians;
  double beta = 0.0;
  for (auto& h : forms) {
    hessians.push_back(2.0 * h);
    beta = std::max(beta, spectral_norm(SymMatrix(2.0 * h)));
    objs.push_back(make_quad_power(std::move(h), 1.0));
  }
  const auto n = static_cast<Eigen::Index>(hessians.front().rows());
  const auto m = static_cast<Eigen::Index>(hessians.size());
  Problem p{std::move(name), ObjectiveSet(std::move(objs)), {}, {}, Vector::Ones(n), {}};
  p.optimum.x_star = Vector::Zero(n);
  p.optimum.f_star = Vector::Zero(m);
  p.meta.beta = beta;
  p.meta.M_f = 0.0;
  const double mu = max_curvature_over_simplex(hessians);
  p.meta.mu_G = mu;
  p.meta.mu_L = mu;
  return p;
}

}  // namespace

ObjectivePtr make_quad_power(Matrix h, double alpha, Vector center) {
  if (h.rows() != h.cols() || h.rows() == 0) throw ArgumentError("quadratic form must be square");
  require(alpha >= 1.0, "alpha must be >= 1");
  const SymMatrix sym(h);
  const double lmin = symmetric_eigen(sym).values[0];
  require(lmin >= -1e-12 * std::max(1.0, sym.matrix().cwiseAbs().maxCoeff()),
          "quadratic form must be positive semidefinite");
  if (center.size() == 0) center = Vector::Zero(h.rows());
  require(center.size() == h.rows(), "center dimension mismatch");
  return std::make_shared<QuadPowerObjective>(sym.matrix(), alpha, std::move(center));
}

ObjectivePtr make_shifted(ObjectivePtr base, Vector shift) {
  if (static_cast<std::size_t>(shift.size()) != base->dim()) {
    throw ArgumentError("shift dimension does not match objective");
  }
  require(shift.allFinite(), "shifts must be finite");
  return std::make_shared<ShiftedObjective>(std::move(base), std::move(shift));
}

MlpMatchingSpec MlpMatchingSpec::paper_scale(MlpVariant variant, std::uint64_t seed) {
  MlpMatchingSpec s;
  s.variant = variant;
  s.hidden = 512;
  s.dataset_size = 200;
  s.seed = seed;
  return s;
}

std::string ProblemSpec::name() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SpecificationSpec>) {
          os << "specification(delta=" << k.delta << ")";
        } else if constexpr (std::is_same_v<T, SelectionSpec>) {
          os << "selection(delta=" << k.delta << ", m=" << k.m << ", n=" << k.n << ")";
        } else if constexpr (std::is_same_v<T, LocalCurvatureSpec>) {
          os << "local_curvature(n=" << k.n << ")";
        } else if constexpr (std::is_same_v<T, QuadFamilySpec>) {
          os << "quad_family(m=" << k.hessians.size() << ")";
        } else if constexpr (std::is_same_v<T, MlpMatchingSpec>) {
          os << "mlp_matching("
             << (k.variant == MlpVariant::kSelection ? "selection" : "local_curvature")
             << ", hidden=" << k.hidden << ", points=" << k.dataset_size << ", seed=" << k.seed
             << ")";
        } else {
          os << "misaligned(" << (k.base ? k.base->name() : std::string("?")) << ")";
        }
      },
      kind);
  return os.str();
}

Problem build(const ProblemSpec& spec) {
  return std::visit(
      [&](const auto& k) -> Problem {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SpecificationSpec>) {
          require(k.delta >= 0.0 && k.delta <= 0.5, "delta must lie in [0, 0.5]");
          Matrix h1 = Vector{{1.0 - k.delta, k.delta}}.asDiagonal();
          Matrix h2 = Vector{{k.delta, 1.0 - k.delta}}.asDiagonal();
          Problem p = build_quadratics(spec.name(), {h1, h2});
          p.meta.mu_G = 1.0;
          p.meta.mu_L = 1.0;
          return p;
        } else if constexpr (std::is_same_v<T, SelectionSpec>) {
          require(k.delta >= 0.0 && k.delta <= 0.5, "delta must lie in [0, 0.5]");
          require(k.m >= 1 && k.n >= 1, "selection needs m >= 1 and n >= 1");
          const auto n = static_cast<Eigen::Index>(k.n);
          Vector d = Vector::Constant(n, k.delta);
          d[0] = 1.0 - k.delta;
          std::vector<Matrix> forms(k.m - 1, Matrix(d.asDiagonal()));
          forms.push_back(Matrix::Identity(n, n));
          Problem p = build_quadratics(spec.name(), std::move(forms));
          p.meta.beta = 2.0;
          p.meta.mu_G = 2.0;
          p.meta.mu_L = 2.0;
          return p;
        } else if constexpr (std::is_same_v<T, LocalCurvatureSpec>) {
          require(k.n >= 1, "local_curvature needs n >= 1");
          const auto n = static_cast<Eigen::Index>(k.n);
          Problem p{spec.name(),
                    ObjectiveSet({make_exp_objective(k.n, 1.0), make_exp_objective(k.n, -1.0)}),
                    {},
                    {},
                    Vector::Ones(n),
                    {}};
          p.optimum.x_star = Vector::Zero(n);
          p.optimum.f_star = Vector::Constant(2, static_cast<double>(k.n));
          // Curvature exp(+-x) is unbounded above and not self-concordant with a
          // global constant, so beta and M_f stay unknown.
          p.meta.mu_G = 1.0;
          p.meta.mu_L = 1.0;
          return p;
        } else if constexpr (std::is_same_v<T, QuadFamilySpec>) {
          require(!k.hessians.empty(), "quad_family needs at least one matrix");
          require(k.hessians.size() == k.alphas.size(), "one alpha per matrix");
          const bool all_quadratic =
              std::all_of(k.alphas.begin(), k.alphas.end(), [](double a) { return a == 1.0; });
          if (all_quadratic) {
            for (const auto& h : k.hessians) make_quad_power(h, 1.0);  // validates
            return build_quadratics(spec.name(), k.hessians);
          }
          std::vector<ObjectivePtr> objs;
          for (std::size_t i = 0; i < k.hessians.size(); ++i) {
            objs.push_back(make_quad_power(k.hessians[i], k.alphas[i]));
          }
          const auto n = k.hessians.front().rows();
          const auto m = static_cast<Eigen::Index>(k.hessians.size());
          Problem p{spec.name(), ObjectiveSet(std::move(objs)), {}, {}, Vector::Ones(n), {}};
          p.optimum.x_star = Vector::Zero(n);
          p.optimum.f_star = Vector::Zero(m);
          return p;
        } else if constexpr (std::is_same_v<T, MlpMatchingSpec>) {
          return build_mlp_matching(k);
        } else {
          require(k.base != nullptr, "misaligned needs a base problem");
          return misalign(*k.base, k.shifts);
        }
      },
      spec.kind);
}

// ---------------------------------------------------------------------------

namespace {

// Damped Newton on sum_i w_i f_i from `x`.
Vector minimize_weighted(const ObjectiveSet& set, const Vector& w, Vector x) {
  const Eigen::Index n = static_cast<Eigen::Index>(set.dim());
  auto fw = [&](const Vector& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (w[static_cast<Eigen::Index>(i)] != 0.0) s += w[static_cast<Eigen::Index>(i)] * set[i].value(y);
    }
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    Vector g = Vector::Zero(n);
    Matrix h = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double wi = w[static_cast<Eigen::Index>(i)];
      if (wi == 0.0) continue;
      g += wi * set[i].gradient(x);
      h += wi * set[i].hessian(x);
    }
    if (g.norm() <= 1e-15 * (1.0 + x.norm())) break;
    const double ridge = 1e-14 * (1.0 + h.cwiseAbs().maxCoeff());
    const Vector step = (h + ridge * Matrix::Identity(n, n)).ldlt().solve(-g);
    const double f0 = fw(x);
    double t = 1.0;
    Vector cand = x + step;
    while (fw(cand) > f0 + 1e-4 * t * g.dot(step) && t > 1e-12) {
      t *= 0.5;
      cand = x + t * step;
    }
    if ((cand - x).norm() <= 1e-16 * (1.0 + x.norm())) break;
    x = cand;
  }
  return x;
}

}  // namespace

MinimaxReference minimax_reference(const ObjectiveSet& set, const Vector& f_star,
                                   const Vector& start) {
  if (!set.has_hessians()) throw ArgumentError("minimax reference needs analytic Hessians");
  const auto m = static_cast<Eigen::Index>(set.size());
  if (f_star.size() != m) throw ArgumentError("one optimal value per objective required");

  auto gaps_at = [&](const Vector& x) -> Vector { return set.values(x) - f_star; };

  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector x = minimize_weighted(set, w, start);
  Vector g = gaps_at(x);
  double dual = w.dot(g);

  MinimaxReference best{x, g.maxCoeff(), dual};
  double step = 1.0 / std::max(1e-300, g.cwiseAbs().maxCoeff());
  for (int it = 0; it < 20000 && m > 1; ++it) {
    if (best.eps - best.dual_bound <= 1e-14 * std::max(1.0, std::abs(best.eps))) break;
    bool accepted = false;
    while (step > 1e-300) {
      const Vector w_new = WeightVector::project(w + step * g).entries();
      const Vector x_new = minimize_weighted(set, w_new, x);
      const Vector g_new = gaps_at(x_new);
      const double dual_new = w_new.dot(g_new);
      if (dual_new >= dual + 1e-4 * g.dot(w_new - w)) {
        accepted = (w_new - w).norm() > 0.0;
        w = w_new;
        x = x_new;
        g = g_new;
        dual = dual_new;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (dual > best.dual_bound) best.dual_bound = dual;
    if (g.maxCoeff() < best.eps) {
      best.eps = g.maxCoeff();
      best.x_ref = x;
    }
    if (!accepted) break;
  }
  best.eps = std::max(best.eps, 0.0);
  return best;
}

Problem misalign(const ProblemSpec& base_spec, const std::vector<Vector>& shifts) {
  Problem base = build(base_spec);
  const std::size_t m = base.objectives.size();
  require(shifts.size() == m, "one shift per objective required");
  std::vector<ObjectivePtr> objs;
  bool zero = true;
  for (std::size_t i = 0; i < m; ++i) {
    zero = zero && shifts[i].cwiseAbs().maxCoeff() == 0.0;
    objs.push_back(make_shifted(base.objectives.objectives()[i], shifts[i]));
  }
  require(base.optimum.f_star.has_value() && base.optimum.x_star.has_value(),
          "misaligned base must have a known optimum");

  Problem p{"misaligned(" + base.name + ")", ObjectiveSet(std::move(objs)), {}, {},
            base.default_start, {}};
  p.optimum.f_star = base.optimum.f_star;
  p.meta.beta = base.meta.beta;
  p.meta.M_f = base.meta.M_f;
  if (base.meta.M_f && *base.meta.M_f == 0.0) {
    // Constant Hessians: translation leaves the curvature parameters unchanged.
    p.meta.mu_G = base.meta.mu_G;
    p.meta.mu_L = base.meta.mu_L;
  }
  if (zero) {
    p.optimum.x_star = base.optimum.x_star;
    p.optimum.alignment_eps = 0.0;
  } else {
    const MinimaxReference ref = minimax_reference(p.objectives, *p.optimum.f_star, *base.optimum.x_star);
    p.optimum.x_star = ref.x_ref;
    p.optimum.alignment_eps = ref.eps;
  }
  p.meta.alignment_eps = p.optimum.alignment_eps;
  return p;
}

std::vector<std::pair<std::string, std::string>> problem_catalog() {
  return {
      {"specification", "two 2-D quadratics, each weakly specifying the optimum (param: delta)"},
      {"selection", "m-1 ill-conditioned quadratics plus one isotropic one (params: delta, m, n)"},
      {"local_curvature", "exp(x) - x and exp(-x) + x per coordinate (param: n)"},
      {"quad_family", "(x^T H_i x)^alpha_i for given H_i, alpha_i (params: hessians, alphas)"},
      {"mlp_matching", "two-layer network matching a fixed teacher (params: variant, sizes, seed)"},
      {"misaligned", "base problem with objective i shifted by s_i (params: base, shifts)"},
  };
}

}  // namespace amoo
