#pragma once

#include <vector>

namespace bbea {

enum class PowerKind { identity, box_cox, yeo_johnson };

/// Fitted output transformation: a power transform (or identity) followed by
/// standardization with the training sample's mean and standard deviation.
struct PowerTransform {
  PowerKind kind = PowerKind::identity;
  double lambda = 1.0;
  double shift = 0.0;  // positivity shift, box_cox only
  double mean = 0.0;
  double std = 1.0;

  double apply(double v) const;
  double invert(double z) const;
};

/// Fits box_cox (after shifting the sample positive) and yeo_johnson by
/// maximum likelihood and keeps the one whose transformed sample has the
/// smaller absolute skewness; yeo_johnson wins ties. Fewer than two distinct
/// values fall back to the identity transform.
PowerTransform fit_power_transform(const std::vector<double>& y);

// Identity transform with the sample's standardization; the
// output-transformation-off path.
PowerTransform standardize_only(const std::vector<double>& y);

/// Kumaraswamy CDF 1 - (1 - x^a)^b on [0,1]; x is clamped to guard float
/// drift in encoded inputs.
double kumaraswamy_cdf(double x, double a, double b);

// Per-dimension warp parameters; a = b = 1 is the identity warp.
struct WarpParams {
  double a = 1.0;
  double b = 1.0;
};

// Test support: sample skewness of a vector (m3 / m2^1.5).
double sample_skewness(const std::vector<double>& v);

}  // namespace bbea
