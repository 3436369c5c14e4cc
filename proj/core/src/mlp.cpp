#include "amoo/hessians.hpp"
#include "amoo/problems.hpp"

#include <cmath>
#include <random>

namespace amoo {

namespace {

// Uniform on [lo, hi) from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

struct Shapes {
  Eigen::Index d, h, o;
  Eigen::Index size() const { return h * d + h + o * h + o; }
};

struct Params {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

Vector pack(const Params& p, const Shapes& s) {
  Vector theta(s.size());
  Eigen::Index k = 0;
  Eigen::Map<Matrix>(theta.data() + k, s.h, s.d) = p.w1;
  k += s.h * s.d;
  theta.segment(k, s.h) = p.b1;
  k += s.h;
  Eigen::Map<Matrix>(theta.data() + k, s.o, s.h) = p.w2;
  k += s.o * s.h;
  theta.segment(k, s.o) = p.b2;
  return theta;
}

Params init_params(const Shapes& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](Eigen::Index rows, Eigen::Index cols, double bound) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = uniform(rng, -bound, bound);
    }
    return m;
  };
  const double b_in = 1.0 / std::sqrt(static_cast<double>(s.d));
  const double b_hid = 1.0 / std::sqrt(static_cast<double>(s.h));
  Params p;
  p.w1 = fill(s.h, s.d, b_in);
  p.b1 = fill(s.h, 1, b_in);
  p.w2 = fill(s.o, s.h, b_hid);
  p.b2 = fill(s.o, 1, b_hid);
  return p;
}

struct Model {
  Shapes shapes;
  Activation activation;
  Matrix x;        // d x N inputs
  Matrix targets;  // o x N

  struct View {
    Eigen::Map<const Matrix> w1, w2;
    Eigen::Map<const Vector> b1, b2;
  };

  View view(const Vector& theta) const {
    if (theta.size() != shapes.size()) throw ArgumentError("mlp: parameter dimension mismatch");
    const double* p = theta.data();
    const auto& s = shapes;
    return {Eigen::Map<const Matrix>(p, s.h, s.d),
            Eigen::Map<const Matrix>(p + s.h * s.d + s.h, s.o, s.h),
            Eigen::Map<const Vector>(p + s.h * s.d, s.h),
            Eigen::Map<const Vector>(p + s.h * s.d + s.h + s.o * s.h, s.o)};
  }

  struct Forward {
    Matrix z;
    Matrix a;
    Matrix r;  // outputs minus targets
  };

  Matrix act(const Matrix& z) const {
    if (activation == Activation::kRelu) return z.cwiseMax(0.0);
    // softplus, stable for large |z|
    return z.unaryExpr([](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); });
  }

  Matrix act_prime(const Matrix& z) const {
    if (activation == Activation::kRelu) return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }

  Matrix outputs(const Params& p) const {
    const Matrix a = act((p.w1 * x).colwise() + p.b1);
    return (p.w2 * a).colwise() + p.b2;
  }

  Forward forward(const Vector& theta) const {
    const View v = view(theta);
    Forward f;
    f.z.noalias() = v.w1 * x;
    f.z.colwise() += v.b1;
    f.a = act(f.z);
    f.r.noalias() = v.w2 * f.a;
    f.r.colwise() += v.b2;
    f.r -= targets;
    return f;
  }

  double samples() const { return static_cast<double>(x.cols()); }
};

class MlpLoss final : public Objective {
 public:
  MlpLoss(std::shared_ptr<const Model> model, Vector h_diag, double alpha)
      : model_(std::move(model)), h_(std::move(h_diag)), alpha_(alpha) {}

  std::size_t dim() const override { return static_cast<std::size_t>(model_->shapes.size()); }

  double value(const Vector& theta) const override {
    const auto f = model_->forward(theta);
    const Vector q = forms(f.r);
    return q.array().pow(alpha_).sum() / model_->samples();
  }

  Vector gradient(const Vector& theta) const override {
    const auto f = model_->forward(theta);
    const Vector q = forms(f.r);
    // dL/dr_n = (2 alpha / N) q_n^(alpha-1) H r_n
    Vector coef(q.size());
    for (Eigen::Index n = 0; n < q.size(); ++n) {
      coef[n] = alpha_ == 1.0 ? 1.0 : (q[n] > 0.0 ? std::pow(q[n], alpha_ - 1.0) : 0.0);
    }
    coef *= 2.0 * alpha_ / model_->samples();
    const Matrix dy = h_.asDiagonal() * f.r * coef.asDiagonal();

    const Shapes& s = model_->shapes;
    const auto v = model_->view(theta);
    Vector g(s.size());
    double* out = g.data();
    Eigen::Map<Matrix> g_w1(out, s.h, s.d);
    Eigen::Map<Vector> g_b1(out + s.h * s.d, s.h);
    Eigen::Map<Matrix> g_w2(out + s.h * s.d + s.h, s.o, s.h);
    Eigen::Map<Vector> g_b2(out + s.h * s.d + s.h + s.o * s.h, s.o);
    g_w2.noalias() = dy * f.a.transpose();
    g_b2 = dy.rowwise().sum();
    Matrix dz(s.h, dy.cols());
    dz.noalias() = v.w2.transpose() * dy;
    dz = dz.cwiseProduct(model_->act_prime(f.z));
    g_w1.noalias() = dz * model_->x.transpose();
    g_b1 = dz.rowwise().sum();
    return g;
  }

  std::optional<double> optimal_value() const override { return 0.0; }

 private:
  Vector forms(const Matrix& r) const {
    return (h_.asDiagonal() * r).cwiseProduct(r).colwise().sum().transpose();
  }

  std::shared_ptr<const Model> model_;
  Vector h_;
  double alpha_;
};

}  // namespace

Problem build_mlp_matching(const MlpMatchingSpec& spec) {
  if (spec.input_dim < 1 || spec.hidden < 1 || spec.output_dim < 1 || spec.dataset_size < 1) {
    throw ArgumentError("invalid problem spec: mlp sizes must be >= 1");
  }
  if (!std::isfinite(spec.target_offset)) {
    throw ArgumentError("invalid problem spec: target_offset must be finite");
  }
  const Shapes s{static_cast<Eigen::Index>(spec.input_dim), static_cast<Eigen::Index>(spec.hidden),
                 static_cast<Eigen::Index>(spec.output_dim)};
  const auto n_points = static_cast<Eigen::Index>(spec.dataset_size);

  Params teacher = init_params(s, split_seed(spec.seed, 1));
  auto model = std::make_shared<Model>();
  model->shapes = s;
  model->activation = spec.activation;
  model->x.resize(s.d, n_points);
  {
    std::mt19937_64 rng(split_seed(spec.seed, 2));
    for (Eigen::Index j = 0; j < n_points; ++j) {
      for (Eigen::Index i = 0; i < s.d; ++i) model->x(i, j) = uniform(rng, -1.0, 1.0);
    }
  }
  teacher.b2.array() += spec.target_offset;
  model->targets = model->outputs(teacher);

  std::vector<ObjectivePtr> objs;
  if (spec.variant == MlpVariant::kSelection) {
    for (int i = 0; i < 3; ++i) {
      Vector h = Vector::Constant(s.o, std::pow(0.01, i));
      h[0] = 1.0;
      objs.push_back(std::make_shared<MlpLoss>(model, std::move(h), 1.0));
    }
  } else {
    for (double alpha : {1.0, 1.5, 2.0}) {
      objs.push_back(std::make_shared<MlpLoss>(model, Vector::Ones(s.o), alpha));
    }
  }

  MlpMatchingSpec echo = spec;
  Problem p{ProblemSpec{echo}.name(), ObjectiveSet(std::move(objs)), {}, {},
            pack(init_params(s, split_seed(spec.seed, 3)), s), {}};
  p.optimum.x_star = pack(teacher, s);
  p.optimum.f_star = Vector::Zero(3);
  p.match_metrics = [model](const Vector& theta) {
    const auto f = model->forward(theta);
    const Vector sq = f.r.colwise().squaredNorm().transpose();
    return MatchMetrics{sq.mean(), sq.cwiseSqrt().mean()};
  };
  return p;
}

}  // namespace amoo
