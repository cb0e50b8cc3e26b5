#pragma once

#include <memory>
#include <vector>

#include "bbea/prediction.hpp"
#include "bbea/rng.hpp"
#include "bbea/transform.hpp"

namespace bbea {

// One Monte Carlo draw of the GP hyperparameters. The kernel is
//   k(x, x') = linear_variance * <w(x), w(x')> + matern32_ard(w(x), w(x'))
// where w warps each input dimension through the Kumaraswamy CDF.
struct GpHyperSample {
  std::vector<WarpParams> warp;          // one per input dimension
  std::vector<double> lengthscales;      // ARD, one per input dimension
  double matern_variance = 1.0;
  double linear_variance = 1.0;
  double noise_variance = 1e-2;
};

struct GpOptions {
  int n_mc = 10;              // hyperparameter samples marginalized at prediction
  bool input_warping = true;  // false pins the warp to the identity (a = b = 1)
};

/// Draws one hyper sample from the log-normal priors:
/// lengthscales and variances ~ LogNormal(0, 1), noise ~ LogNormal(-4, 1)
/// floored at 1e-8, warp a and b ~ LogNormal(0, 0.5).
GpHyperSample sample_gp_prior(std::size_t n_dims, Rng& rng, bool input_warping = true);

/// Gaussian process regressor with Monte Carlo hyperparameter samples; each
/// sample keeps its own Cholesky factorization of (K + sigma^2 I).
class FittedGp {
 public:
  /// Throws ModelFitError if a kernel matrix stays non-positive-definite
  /// after jitter escalation up to 1e-4.
  static FittedGp fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                      Rng& rng, const GpOptions& options = {});

  // Fit with externally chosen hyper samples; used by tests and oracles.
  static FittedGp fit_with_samples(const std::vector<std::vector<double>>& X,
                                   const std::vector<double>& y,
                                   std::vector<GpHyperSample> samples);

  FittedGp(FittedGp&&) noexcept;
  FittedGp& operator=(FittedGp&&) noexcept;
  ~FittedGp();

  /// Exact Gaussian posterior (mean, variance) per hyper sample.
  std::vector<MeanVar> predict(const std::vector<double>& x) const;

  /// predict() over many points at once; result indexed [point][sample].
  std::vector<std::vector<MeanVar>> predict_batch(
      const std::vector<std::vector<double>>& xs) const;

  std::size_t n_samples() const;
  std::size_t n_dims() const;
  std::size_t n_train() const;
  const std::vector<GpHyperSample>& hyper_samples() const;

 private:
  FittedGp();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bbea
