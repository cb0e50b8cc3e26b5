#include "bbea/transform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace bbea {

namespace {

constexpr double kStdFloor = 1e-12;
constexpr double kSkewTie = 1e-9;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double box_cox_raw(double x, double lambda) {
  return lambda == 0.0 ? std::log(x) : (std::pow(x, lambda) - 1.0) / lambda;
}

double yeo_johnson_raw(double y, double lambda) {
  if (y >= 0.0) {
    return lambda == 0.0 ? std::log1p(y) : (std::pow(y + 1.0, lambda) - 1.0) / lambda;
  }
  return lambda == 2.0 ? -std::log1p(-y)
                       : -(std::pow(1.0 - y, 2.0 - lambda) - 1.0) / (2.0 - lambda);
}

// Profile log-likelihood of the transform parameter; both families reduce to
// -n/2 log(ml variance of transformed data) + (lambda - 1) * jacobian term.
double profile_loglik(const std::vector<double>& t, double lambda, double jacobian_sum,
                      std::size_t n) {
  double m = 0.0;
  for (double x : t) m += x;
  m /= static_cast<double>(n);
  double var = 0.0;
  for (double x : t) var += (x - m) * (x - m);
  var /= static_cast<double>(n);
  if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
  return -0.5 * static_cast<double>(n) * std::log(var) + (lambda - 1.0) * jacobian_sum;
}

// Coarse grid scan over [-5, 5] followed by golden-section refinement.
double maximize_lambda(const std::function<double(double)>& loglik) {
  constexpr double kLo = -5.0, kHi = 5.0;
  constexpr int kGrid = 51;
  double best_ll = -std::numeric_limits<double>::infinity();
  double best_lambda = 1.0;
  const double step = (kHi - kLo) / (kGrid - 1);
  for (int i = 0; i < kGrid; ++i) {
    const double lam = kLo + i * step;
    const double ll = loglik(lam);
    if (ll > best_ll) {
      best_ll = ll;
      best_lambda = lam;
    }
  }
  double a = std::max(kLo, best_lambda - step);
  double b = std::min(kHi, best_lambda + step);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = loglik(x1), f2 = loglik(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = loglik(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = loglik(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double sample_skewness(const std::vector<double>& v) {
  const double m = mean_of(v);
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const auto n = static_cast<double>(v.size());
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

PowerTransform standardize_only(const std::vector<double>& y) {
  if (y.empty()) throw std::invalid_argument("cannot standardize an empty sample");
  PowerTransform t;
  t.kind = PowerKind::identity;
  t.mean = mean_of(y);
  t.std = sample_std(y, t.mean);
  if (t.std < kStdFloor) t.std = 1.0;
  return t;
}

PowerTransform fit_power_transform(const std::vector<double>& y) {
  if (y.size() < 2) throw std::invalid_argument("power transform needs at least 2 values");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("power transform input must be finite");

  const std::set<double> distinct(y.begin(), y.end());
  if (distinct.size() < 2) return standardize_only(y);

  const std::size_t n = y.size();
  const double y_min = *std::min_element(y.begin(), y.end());
  const double shift = y_min <= 0.0 ? 1e-6 - y_min : 0.0;

  std::vector<double> shifted(y);
  for (double& v : shifted) v += shift;
  double log_sum = 0.0;
  for (double v : shifted) log_sum += std::log(v);

  std::vector<double> scratch(n);
  auto bc_loglik = [&](double lam) {
    for (std::size_t i = 0; i < n; ++i) scratch[i] = box_cox_raw(shifted[i], lam);
    return profile_loglik(scratch, lam, log_sum, n);
  };
  const double lambda_bc = maximize_lambda(bc_loglik);

  double yj_jacobian = 0.0;
  for (double v : y) yj_jacobian += (v >= 0.0 ? 1.0 : -1.0) * std::log1p(std::abs(v));
  auto yj_loglik = [&](double lam) {
    for (std::size_t i = 0; i < n; ++i) scratch[i] = yeo_johnson_raw(y[i], lam);
    return profile_loglik(scratch, lam, yj_jacobian, n);
  };
  const double lambda_yj = maximize_lambda(yj_loglik);

  std::vector<double> t_bc(n), t_yj(n);
  for (std::size_t i = 0; i < n; ++i) {
    t_bc[i] = box_cox_raw(shifted[i], lambda_bc);
    t_yj[i] = yeo_johnson_raw(y[i], lambda_yj);
  }
  const double skew_bc = std::abs(sample_skewness(t_bc));
  const double skew_yj = std::abs(sample_skewness(t_yj));

  PowerTransform t;
  const std::vector<double>* chosen;
  if (skew_bc + kSkewTie < skew_yj) {
    t.kind = PowerKind::box_cox;
    t.lambda = lambda_bc;
    t.shift = shift;
    chosen = &t_bc;
  } else {
    t.kind = PowerKind::yeo_johnson;
    t.lambda = lambda_yj;
    chosen = &t_yj;
  }
  t.mean = mean_of(*chosen);
  t.std = sample_std(*chosen, t.mean);
  if (t.std < kStdFloor) t.std = 1.0;
  return t;
}

double PowerTransform::apply(double v) const {
  double raw;
  switch (kind) {
    case PowerKind::identity:
      raw = v;
      break;
    case PowerKind::box_cox: {
      const double x = v + shift;
      if (x <= 0.0)
        throw std::invalid_argument("box_cox transform requires value > -shift");
      raw = box_cox_raw(x, lambda);
      break;
    }
    case PowerKind::yeo_johnson:
      raw = yeo_johnson_raw(v, lambda);
      break;
    default:
      raw = v;
  }
  return (raw - mean) / std;
}

double PowerTransform::invert(double z) const {
  const double raw = z * std + mean;
  switch (kind) {
    case PowerKind::identity:
      return raw;
    case PowerKind::box_cox: {
      const double x = lambda == 0.0 ? std::exp(raw) : std::pow(lambda * raw + 1.0, 1.0 / lambda);
      return x - shift;
    }
    case PowerKind::yeo_johnson: {
      if (raw >= 0.0) {
        return lambda == 0.0 ? std::expm1(raw) : std::pow(lambda * raw + 1.0, 1.0 / lambda) - 1.0;
      }
      return lambda == 2.0 ? -std::expm1(-raw)
                           : 1.0 - std::pow(1.0 - (2.0 - lambda) * raw, 1.0 / (2.0 - lambda));
    }
  }
  return raw;
}

double kumaraswamy_cdf(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("kumaraswamy_cdf requires a > 0 and b > 0");
  x = std::clamp(x, 0.0, 1.0);
  return 1.0 - std::pow(1.0 - std::pow(x, a), b);
}

}  // namespace bbea
