#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace amoo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy shared by every module.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedQuery : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar objective over R^n with value and gradient access. Hessian,
/// Hessian diagonal and the optimal value are optional capabilities.
///
/// Implementations must be deterministic pure functions of x so that traces
/// are reproducible and oracles can be shared between threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  virtual bool has_hessian() const { return false; }
  virtual Matrix hessian(const Vector& x) const;

  virtual bool has_diag_hessian() const { return has_hessian(); }
  virtual Vector diag_hessian(const Vector& x) const;

  virtual std::optional<double> optimal_value() const { return std::nullopt; }
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// Objective assembled from callables. Empty hessian/diag callables mean the
/// capability is absent.
class FunctionObjective final : public Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessFn = std::function<Matrix(const Vector&)>;
  using DiagFn = std::function<Vector(const Vector&)>;

  FunctionObjective(std::size_t dim, ValueFn value, GradFn gradient, HessFn hessian = {},
                    DiagFn diag = {}, std::optional<double> optimal = std::nullopt);

  std::size_t dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return static_cast<bool>(hessian_); }
  Matrix hessian(const Vector& x) const override;
  bool has_diag_hessian() const override { return diag_ || hessian_; }
  Vector diag_hessian(const Vector& x) const override;
  std::optional<double> optimal_value() const override { return optimal_; }

 private:
  void check_dim(const Vector& x) const;

  std::size_t dim_;
  ValueFn value_;
  GradFn gradient_;
  HessFn hessian_;
  DiagFn diag_;
  std::optional<double> optimal_;
};

/// The vector objective F(x) = (f_1(x), ..., f_m(x)). All members share dim.
class ObjectiveSet {
 public:
  explicit ObjectiveSet(std::vector<ObjectivePtr> objectives);

  std::size_t size() const { return objectives_.size(); }
  std::size_t dim() const { return dim_; }
  const Objective& operator[](std::size_t i) const { return *objectives_[i]; }
  const std::vector<ObjectivePtr>& objectives() const { return objectives_; }

  bool has_hessians() const;

  Vector values(const Vector& x) const;
  /// n x m matrix whose columns are the objective gradients.
  Matrix jacobian(const Vector& x) const;
  std::vector<Matrix> hessians(const Vector& x) const;

  void check_point(const Vector& x) const;

 private:
  std::vector<ObjectivePtr> objectives_;
  std::size_t dim_ = 0;
};

enum class WeightDomain { kOrthant, kSimplex, kFlooredSimplex };

/// Nonnegative weights over m objectives, optionally constrained to the
/// probability simplex or the floored simplex {w >= w_min, sum w = 1}.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  static WeightVector orthant(Vector entries);
  static WeightVector simplex(Vector entries);
  static WeightVector floored_simplex(Vector entries, double w_min);

  /// Euclidean projection of `v` onto the simplex (w_min = 0) or floored
  /// simplex. Renormalizes once if the sum drifts beyond kSumTolerance.
  static WeightVector project(const Vector& v, double w_min = 0.0);

  const Vector& entries() const { return entries_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.size()); }
  double operator[](std::size_t i) const { return entries_[static_cast<Eigen::Index>(i)]; }
  WeightDomain domain() const { return domain_; }
  double w_min() const { return w_min_; }

 private:
  WeightVector(Vector entries, WeightDomain domain, double w_min);

  Vector entries_;
  WeightDomain domain_;
  double w_min_;
};

/// Euclidean projection onto {u >= 0, sum u = radius}.
Vector project_to_simplex(const Vector& v, double radius = 1.0);

struct OptimalInfo {
  std::optional<Vector> x_star;
  std::optional<Vector> f_star;
  double alignment_eps = 0.0;
};

double weighted_value(const ObjectiveSet& set, const WeightVector& w, const Vector& x);
Vector weighted_gradient(const ObjectiveSet& set, const WeightVector& w, const Vector& x);
double residual(const Vector& x, const OptimalInfo& opt);

}  // namespace amoo
