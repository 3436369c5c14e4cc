#pragma once

#include "amoo/core.hpp"

#include <cstdint>

namespace amoo {

struct HutchinsonConfig {
  int num_samples = 10;
  /// Relative finite-difference step for Hessian-vector products.
  double fd_step = 1e-4;
  std::uint64_t rng_seed = 0;
  /// Exponential moving average coefficient applied across driver steps.
  /// 0 disables smoothing; 0.99 reproduces the earlier EMA variant.
  double ema_decay = 0.0;
};

struct DiagHessianEstimate {
  Vector values;
  int samples_used = 0;
};

/// Central-difference Hessian-vector product:
///   [grad f(x + h v/|v|) - grad f(x - h v/|v|)] / (2h) * |v|,  h = step (1 + |x|).
Vector hvp_fd(const Objective& f, const Vector& x, const Vector& v, double step = 1e-4);

/// H v using the analytic Hessian when the objective has one, finite
/// differences of the gradient otherwise.
Vector hessian_vector_product(const Objective& f, const Vector& x, const Vector& v,
                              double fd_step = 1e-4);

/// Seed of the k-th independent stream derived from a base seed. Streams are
/// a pure function of (seed, k), so probes are schedule independent.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t k);

/// Rademacher probe vector of dimension n for stream `stream_seed`.
Vector rademacher_probe(std::size_t n, std::uint64_t stream_seed);

/// Hutchinson estimate (1/N) sum_k z_k * (H z_k) with Rademacher probes.
DiagHessianEstimate hutchinson_diag(const Objective& f, const Vector& x,
                                    const HutchinsonConfig& cfg);

/// m x n matrix whose row i is the Hessian diagonal of objective i; analytic
/// diagonals are used when available, Hutchinson estimates otherwise. Row i
/// draws its probes from split_seed(cfg.rng_seed, 2^32 + i).
Matrix diag_hessian_matrix(const ObjectiveSet& set, const Vector& x, const HutchinsonConfig& cfg);

/// EMA smoothing state for successive diagonal-Hessian matrices.
class DiagHessianSmoother {
 public:
  explicit DiagHessianSmoother(double decay) : decay_(decay) {}
  const Matrix& update(const Matrix& fresh);
  bool empty() const { return !initialized_; }

 private:
  double decay_;
  bool initialized_ = false;
  Matrix state_;
};

}  // namespace amoo
