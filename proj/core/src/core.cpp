#include "amoo/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace amoo {

Matrix Objective::hessian(const Vector&) const {
  throw UnsupportedQuery("objective does not provide a Hessian");
}

Vector Objective::diag_hessian(const Vector& x) const {
  if (!has_hessian()) {
    throw UnsupportedQuery("objective does not provide a Hessian diagonal");
  }
  return hessian(x).diagonal();
}

FunctionObjective::FunctionObjective(std::size_t dim, ValueFn value, GradFn gradient,
                                     HessFn hessian, DiagFn diag,
                                     std::optional<double> optimal)
    : dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      diag_(std::move(diag)),
      optimal_(optimal) {
  if (dim_ == 0) throw ArgumentError("objective dimension must be positive");
  if (!value_ || !gradient_) throw ArgumentError("objective needs value and gradient");
}

void FunctionObjective::check_dim(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", objective expects " +
                        std::to_string(dim_));
  }
}

double FunctionObjective::value(const Vector& x) const {
  check_dim(x);
  return value_(x);
}

Vector FunctionObjective::gradient(const Vector& x) const {
  check_dim(x);
  return gradient_(x);
}

Matrix FunctionObjective::hessian(const Vector& x) const {
  if (!hessian_) return Objective::hessian(x);
  check_dim(x);
  return hessian_(x);
}

Vector FunctionObjective::diag_hessian(const Vector& x) const {
  check_dim(x);
  if (diag_) return diag_(x);
  return Objective::diag_hessian(x);
}

ObjectiveSet::ObjectiveSet(std::vector<ObjectivePtr> objectives)
    : objectives_(std::move(objectives)) {
  if (objectives_.empty()) throw ArgumentError("objective set needs at least one objective");
  for (const auto& f : objectives_) {
    if (!f) throw ArgumentError("null objective in set");
  }
  dim_ = objectives_.front()->dim();
  for (std::size_t i = 1; i < objectives_.size(); ++i) {
    if (objectives_[i]->dim() != dim_) {
      throw ArgumentError("objective " + std::to_string(i) + " has dimension " +
                          std::to_string(objectives_[i]->dim()) + ", expected " +
                          std::to_string(dim_));
    }
  }
}

bool ObjectiveSet::has_hessians() const {
  return std::all_of(objectives_.begin(), objectives_.end(),
                     [](const ObjectivePtr& f) { return f->has_hessian(); });
}

void ObjectiveSet::check_point(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", set expects " +
                        std::to_string(dim_));
  }
}

Vector ObjectiveSet::values(const Vector& x) const {
  check_point(x);
  Vector out(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) out[static_cast<Eigen::Index>(i)] = objectives_[i]->value(x);
  return out;
}

Matrix ObjectiveSet::jacobian(const Vector& x) const {
  check_point(x);
  Matrix J(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) J.col(static_cast<Eigen::Index>(i)) = objectives_[i]->gradient(x);
  return J;
}

std::vector<Matrix> ObjectiveSet::hessians(const Vector& x) const {
  check_point(x);
  std::vector<Matrix> out;
  out.reserve(size());
  for (const auto& f : objectives_) out.push_back(f->hessian(x));
  return out;
}

// ---------------------------------------------------------------------------
// Weights

WeightVector::WeightVector(Vector entries, WeightDomain domain, double w_min)
    : entries_(std::move(entries)), domain_(domain), w_min_(w_min) {
  if (entries_.size() == 0) throw ArgumentError("weight vector must be nonempty");
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    if (!std::isfinite(entries_[i])) throw ArgumentError("weight entries must be finite");
  }
  const double floor = domain_ == WeightDomain::kFlooredSimplex ? w_min_ : 0.0;
  if (domain_ == WeightDomain::kFlooredSimplex) {
    if (w_min_ < 0.0) throw ArgumentError("w_min must be nonnegative");
    if (static_cast<double>(entries_.size()) * w_min_ > 1.0 + kSumTolerance) {
      throw ArgumentError("floored simplex requires m * w_min <= 1");
    }
  }
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    if (entries_[i] < floor - kSumTolerance) {
      throw ArgumentError("weight entry " + std::to_string(i) + " = " + std::to_string(entries_[i]) +
                          " is below the lower bound " + std::to_string(floor));
    }
  }
  if (domain_ != WeightDomain::kOrthant && std::abs(entries_.sum() - 1.0) > kSumTolerance) {
    throw ArgumentError("simplex weights must sum to 1 (got " + std::to_string(entries_.sum()) + ")");
  }
}

WeightVector WeightVector::orthant(Vector entries) {
  return WeightVector(std::move(entries), WeightDomain::kOrthant, 0.0);
}

WeightVector WeightVector::simplex(Vector entries) {
  return WeightVector(std::move(entries), WeightDomain::kSimplex, 0.0);
}

WeightVector WeightVector::floored_simplex(Vector entries, double w_min) {
  return WeightVector(std::move(entries), WeightDomain::kFlooredSimplex, w_min);
}

Vector project_to_simplex(const Vector& v, double radius) {
  const Eigen::Index m = v.size();
  if (m == 0) throw ArgumentError("cannot project an empty vector");
  if (radius < 0.0) throw ArgumentError("simplex radius must be nonnegative");
  if (radius == 0.0) return Vector::Zero(m);
  // Sort-based projection (Held, Wolfe, Crowder).
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

WeightVector WeightVector::project(const Vector& v, double w_min) {
  const Eigen::Index m = v.size();
  const double free_mass = 1.0 - static_cast<double>(m) * w_min;
  if (w_min < 0.0 || free_mass < -kSumTolerance) {
    throw ArgumentError("floored simplex requires 0 <= w_min and m * w_min <= 1");
  }
  Vector w = project_to_simplex(v.array() - w_min, std::max(free_mass, 0.0)).array() + w_min;
  const double drift = w.sum() - 1.0;
  if (std::abs(drift) > kSumTolerance) {
    // Single renormalization of the free mass above the floor.
    Vector above = w.array() - w_min;
    const double s = above.sum();
    if (s > 0.0) w = (above * (std::max(free_mass, 0.0) / s)).array() + w_min;
  }
  if (w_min > 0.0) return floored_simplex(std::move(w), w_min);
  return simplex(std::move(w));
}

// ---------------------------------------------------------------------------

namespace {

void check_weights(const ObjectiveSet& set, const WeightVector& w, const Vector& x) {
  if (w.size() != set.size()) {
    throw ArgumentError("weight vector has " + std::to_string(w.size()) + " entries for " +
                        std::to_string(set.size()) + " objectives");
  }
  set.check_point(x);
}

}  // namespace

double weighted_value(const ObjectiveSet& set, const WeightVector& w, const Vector& x) {
  check_weights(set, w, x);
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (w[i] != 0.0) total += w[i] * set[i].value(x);
  }
  return total;
}

Vector weighted_gradient(const ObjectiveSet& set, const WeightVector& w, const Vector& x) {
  check_weights(set, w, x);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(set.dim()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (w[i] != 0.0) g += w[i] * set[i].gradient(x);
  }
  return g;
}

double residual(const Vector& x, const OptimalInfo& opt) {
  if (!opt.x_star) throw UnsupportedQuery("residual requires a known optimum x_star");
  if (opt.x_star->size() != x.size()) {
    throw ArgumentError("point and optimum have different dimensions");
  }
  return (x - *opt.x_star).norm();
}

}  // namespace amoo
