#include "amoo/hessians.hpp"

#include <cmath>
#include <random>
#include <string>

namespace amoo {

Vector hvp_fd(const Objective& f, const Vector& x, const Vector& v, double step) {
  const double vnorm = v.norm();
  if (!(vnorm > 0.0)) throw ArgumentError("hvp_fd: direction must be nonzero");
  if (!(step > 0.0)) throw ArgumentError("hvp_fd: step must be positive");
  const double h = step * (1.0 + x.norm());
  const Vector dir = v / vnorm;
  const Vector gp = f.gradient(x + h * dir);
  const Vector gm = f.gradient(x - h * dir);
  return (gp - gm) * (vnorm / (2.0 * h));
}

Vector hessian_vector_product(const Objective& f, const Vector& x, const Vector& v,
                              double fd_step) {
  if (f.has_hessian()) return f.hessian(x) * v;
  return hvp_fd(f, x, v, fd_step);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over a counter offset from the base seed.
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector rademacher_probe(std::size_t n, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  Vector z(static_cast<Eigen::Index>(n));
  std::uint64_t bits = 0;
  int left = 0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (left == 0) {
      bits = rng();
      left = 64;
    }
    z[j] = (bits & 1ULL) ? 1.0 : -1.0;
    bits >>= 1;
    --left;
  }
  return z;
}

DiagHessianEstimate hutchinson_diag(const Objective& f, const Vector& x,
                                    const HutchinsonConfig& cfg) {
  if (cfg.num_samples < 1) throw ArgumentError("Hutchinson needs num_samples >= 1");
  const std::size_t n = f.dim();
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(n));
  for (int k = 0; k < cfg.num_samples; ++k) {
    const Vector z = rademacher_probe(n, split_seed(cfg.rng_seed, static_cast<std::uint64_t>(k)));
    acc += z.cwiseProduct(hessian_vector_product(f, x, z, cfg.fd_step));
  }
  acc /= static_cast<double>(cfg.num_samples);
  if (!acc.allFinite()) throw NumericError("Hutchinson estimate is not finite");
  return {acc, cfg.num_samples};
}

Matrix diag_hessian_matrix(const ObjectiveSet& set, const Vector& x, const HutchinsonConfig& cfg) {
  set.check_point(x);
  Matrix a(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(set.dim()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Objective& f = set[i];
    if (f.has_diag_hessian()) {
      a.row(static_cast<Eigen::Index>(i)) = f.diag_hessian(x).transpose();
    } else {
      HutchinsonConfig row_cfg = cfg;
      row_cfg.rng_seed = split_seed(cfg.rng_seed, 0x100000000ULL + i);
      a.row(static_cast<Eigen::Index>(i)) = hutchinson_diag(f, x, row_cfg).values.transpose();
    }
  }
  return a;
}

const Matrix& DiagHessianSmoother::update(const Matrix& fresh) {
  if (!initialized_ || decay_ <= 0.0 || state_.rows() != fresh.rows() ||
      state_.cols() != fresh.cols()) {
    state_ = fresh;
    initialized_ = true;
  } else {
    state_ = decay_ * state_ + (1.0 - decay_) * fresh;
  }
  return state_;
}

}  // namespace amoo
