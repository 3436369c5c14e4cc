#pragma once

#include "amoo/core.hpp"

#include <span>

namespace amoo {

/// Dense symmetric matrix. Construction validates symmetry to within
/// kSymmetryTolerance (scaled by the largest entry magnitude when above 1)
/// and stores the exactly symmetrized average.
class SymMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(std::size_t n);
  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(const Vector& d);

  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double quadratic_form(const Vector& v) const { return v.dot(m_ * v); }

 private:
  Matrix m_;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Ascending eigenvalues with matching unit eigenvectors in columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Carries the best available estimate when the eigen iteration cap is hit.
class EigenNonConvergence : public NumericError {
 public:
  EigenNonConvergence(const std::string& what, EigenPair best)
      : NumericError(what), best_(std::move(best)) {}
  const EigenPair& best_estimate() const { return best_; }

 private:
  EigenPair best_;
};

inline constexpr int kMaxJacobiSweeps = 10'000;

/// Full eigendecomposition by cyclic Jacobi rotations.
SymmetricEigen symmetric_eigen(const SymMatrix& a, double tol = 1e-10);

/// Smallest eigenvalue and a unit eigenvector. For repeated minimal
/// eigenvalues the vector is an arbitrary member of the eigenspace.
EigenPair min_eigenpair(const SymMatrix& a, double tol = 1e-10);

double spectral_norm(const SymMatrix& a);

/// Entrywise sum_i w_i H_i.
SymMatrix weighted_hessian(std::span<const SymMatrix> hessians, const WeightVector& w);
SymMatrix weighted_hessian(std::span<const SymMatrix> hessians, const Vector& w);

}  // namespace amoo
