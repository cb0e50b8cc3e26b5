#include "bbea/gp.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "bbea/errors.hpp"

namespace bbea {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kVarFloor = 1e-12;
constexpr double kNoiseFloor = 1e-8;

double matern32(double r) { return (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r); }

}  // namespace

GpHyperSample sample_gp_prior(std::size_t n_dims, Rng& rng, bool input_warping) {
  GpHyperSample hp;
  hp.warp.resize(n_dims);
  hp.lengthscales.resize(n_dims);
  for (std::size_t d = 0; d < n_dims; ++d) {
    if (input_warping) {
      hp.warp[d].a = rand_lognormal(rng, 0.0, 0.5);
      hp.warp[d].b = rand_lognormal(rng, 0.0, 0.5);
    }
    hp.lengthscales[d] = rand_lognormal(rng, 0.0, 1.0);
  }
  hp.matern_variance = rand_lognormal(rng, 0.0, 1.0);
  hp.linear_variance = rand_lognormal(rng, 0.0, 1.0);
  hp.noise_variance = std::max(rand_lognormal(rng, -4.0, 1.0), kNoiseFloor);
  return hp;
}

struct FittedGp::Impl {
  struct SampleState {
    GpHyperSample hp;
    Eigen::MatrixXd warped;  // n x d training inputs after warping
    Eigen::MatrixXd chol_lower;
    Eigen::VectorXd alpha;  // (K + sigma^2 I)^-1 y
  };

  std::size_t n_dims = 0;
  std::size_t n_train = 0;
  std::vector<GpHyperSample> hyper_samples;
  std::vector<SampleState> states;

  static Eigen::MatrixXd warp_rows(const std::vector<std::vector<double>>& X,
                                   const GpHyperSample& hp) {
    const auto n = static_cast<Eigen::Index>(X.size());
    const auto d = static_cast<Eigen::Index>(hp.lengthscales.size());
    Eigen::MatrixXd W(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        W(i, j) = kumaraswamy_cdf(X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                  hp.warp[static_cast<std::size_t>(j)].a,
                                  hp.warp[static_cast<std::size_t>(j)].b);
    return W;
  }

  static double kernel(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v,
                       const GpHyperSample& hp) {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      const double diff = (u(j) - v(j)) / hp.lengthscales[static_cast<std::size_t>(j)];
      r2 += diff * diff;
    }
    return hp.linear_variance * u.dot(v) + hp.matern_variance * matern32(std::sqrt(r2));
  }

  static SampleState fit_sample(const std::vector<std::vector<double>>& X,
                                const Eigen::VectorXd& y, GpHyperSample hp) {
    SampleState st;
    st.warped = warp_rows(X, hp);
    const Eigen::Index n = st.warped.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double k = kernel(st.warped.row(i), st.warped.row(j), hp);
        K(i, j) = k;
        K(j, i) = k;
      }
      K(i, i) += hp.noise_variance;
    }
    double jitter = 0.0;
    while (true) {
      Eigen::LLT<Eigen::MatrixXd> llt(K + jitter * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        st.chol_lower = llt.matrixL();
        break;
      }
      jitter = jitter == 0.0 ? 1e-8 : jitter * 10.0;
      if (jitter > 1e-4) throw ModelFitError("kernel matrix not positive definite");
    }
    st.alpha = st.chol_lower.transpose().triangularView<Eigen::Upper>().solve(
        st.chol_lower.triangularView<Eigen::Lower>().solve(y));
    st.hp = std::move(hp);
    return st;
  }
};

FittedGp::FittedGp() : impl_(std::make_unique<Impl>()) {}
FittedGp::FittedGp(FittedGp&&) noexcept = default;
FittedGp& FittedGp::operator=(FittedGp&&) noexcept = default;
FittedGp::~FittedGp() = default;

FittedGp FittedGp::fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       Rng& rng, const GpOptions& options) {
  if (X.size() != y.size() || X.size() < 2)
    throw std::invalid_argument("gp fit needs |X| = |y| >= 2");
  std::vector<GpHyperSample> samples;
  samples.reserve(static_cast<std::size_t>(options.n_mc));
  for (int i = 0; i < options.n_mc; ++i)
    samples.push_back(sample_gp_prior(X[0].size(), rng, options.input_warping));
  return fit_with_samples(X, y, std::move(samples));
}

FittedGp FittedGp::fit_with_samples(const std::vector<std::vector<double>>& X,
                                    const std::vector<double>& y,
                                    std::vector<GpHyperSample> samples) {
  if (X.empty() || X.size() != y.size())
    throw std::invalid_argument("gp fit needs matching non-empty X, y");
  if (samples.empty()) throw std::invalid_argument("gp fit needs at least one hyper sample");
  FittedGp gp;
  gp.impl_->n_dims = X[0].size();
  gp.impl_->n_train = X.size();
  Eigen::VectorXd ty = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  for (auto& hp : samples) {
    if (hp.lengthscales.size() != gp.impl_->n_dims || hp.warp.size() != gp.impl_->n_dims)
      throw std::invalid_argument("hyper sample dimension mismatch");
    gp.impl_->hyper_samples.push_back(hp);
    gp.impl_->states.push_back(Impl::fit_sample(X, ty, std::move(hp)));
  }
  return gp;
}

std::vector<MeanVar> FittedGp::predict(const std::vector<double>& x) const {
  return predict_batch({x})[0];
}

std::vector<std::vector<MeanVar>> FittedGp::predict_batch(
    const std::vector<std::vector<double>>& xs) const {
  for (const auto& x : xs)
    if (x.size() != impl_->n_dims)
      throw std::invalid_argument("prediction input dimension mismatch");
  const auto n_points = xs.size();
  const auto n_samples = impl_->states.size();
  std::vector<std::vector<MeanVar>> out(n_points, std::vector<MeanVar>(n_samples));
  const auto n = static_cast<Eigen::Index>(impl_->n_train);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto& st = impl_->states[s];
    const Eigen::MatrixXd U = Impl::warp_rows(xs, st.hp);
    Eigen::MatrixXd cross(n, static_cast<Eigen::Index>(n_points));
    for (Eigen::Index p = 0; p < cross.cols(); ++p)
      for (Eigen::Index i = 0; i < n; ++i)
        cross(i, p) = Impl::kernel(st.warped.row(i), U.row(p), st.hp);
    const Eigen::VectorXd means = cross.transpose() * st.alpha;
    st.chol_lower.triangularView<Eigen::Lower>().solveInPlace(cross);
    for (Eigen::Index p = 0; p < means.size(); ++p) {
      const double prior =
          st.hp.linear_variance * U.row(p).dot(U.row(p)) + st.hp.matern_variance;
      const double var = prior - cross.col(p).squaredNorm();
      out[static_cast<std::size_t>(p)][s] = {means(p), std::max(var, kVarFloor)};
    }
  }
  return out;
}

std::size_t FittedGp::n_samples() const { return impl_->states.size(); }
std::size_t FittedGp::n_dims() const { return impl_->n_dims; }
std::size_t FittedGp::n_train() const { return impl_->n_train; }
const std::vector<GpHyperSample>& FittedGp::hyper_samples() const {
  return impl_->hyper_samples;
}

}  // namespace bbea
