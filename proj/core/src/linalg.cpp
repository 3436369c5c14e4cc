#include "amoo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace amoo {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw ArgumentError("symmetric matrix must be square");
  if (m.rows() == 0) throw ArgumentError("symmetric matrix must be nonempty");
  if (!m.allFinite()) throw ArgumentError("symmetric matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw ArgumentError("matrix is not symmetric (max |A - A^T| = " + std::to_string(asym) + ")");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymMatrix(Matrix::Zero(k, k));
}

SymMatrix SymMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymMatrix(Matrix::Identity(k, k));
}

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

SymmetricEigen sorted(const Matrix& a, const Matrix& v) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = a(src, src);
    out.vectors.col(k) = v.col(src).normalized();
  }
  return out;
}

}  // namespace

SymmetricEigen symmetric_eigen(const SymMatrix& sym, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("eigen tolerance must be positive");
  Matrix a = sym.matrix();
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double frob = a.norm();
  // Drive the off-diagonal mass well below the residual contract tol * (1 + ||A||_F).
  const double target = 1e-3 * tol * (1.0 + frob);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) return sorted(a, v);
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  SymmetricEigen best = sorted(a, v);
  throw EigenNonConvergence("Jacobi iteration did not converge within " +
                                std::to_string(kMaxJacobiSweeps) + " sweeps",
                            EigenPair{best.values[0], best.vectors.col(0)});
}

EigenPair min_eigenpair(const SymMatrix& a, double tol) {
  if (a.size() == 1) return {a(0, 0), Vector::Ones(1)};
  SymmetricEigen e = symmetric_eigen(a, tol);
  return {e.values[0], e.vectors.col(0)};
}

double spectral_norm(const SymMatrix& a) {
  const Vector values = symmetric_eigen(a).values;
  return std::max(std::abs(values[0]), std::abs(values[values.size() - 1]));
}

SymMatrix weighted_hessian(std::span<const SymMatrix> hessians, const Vector& w) {
  if (hessians.empty()) throw ArgumentError("weighted_hessian needs at least one matrix");
  if (static_cast<std::size_t>(w.size()) != hessians.size()) {
    throw ArgumentError("weighted_hessian: " + std::to_string(w.size()) + " weights for " +
                        std::to_string(hessians.size()) + " matrices");
  }
  const std::size_t n = hessians.front().size();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    if (hessians[i].size() != n) throw ArgumentError("weighted_hessian: mismatched matrix sizes");
    const double wi = w[static_cast<Eigen::Index>(i)];
    if (wi != 0.0) sum += wi * hessians[i].matrix();
  }
  return SymMatrix(sum);
}

SymMatrix weighted_hessian(std::span<const SymMatrix> hessians, const WeightVector& w) {
  return weighted_hessian(hessians, w.entries());
}

}  // namespace amoo
