#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "breakscan/matrix.hpp"
#include "breakscan/rng.hpp"

namespace breakscan {

// Innovation law for the shocks (u_t, v_t). u drives the regression error,
// v drives the regressors. rho_uv is a single scalar correlation between u
// and each v component; v components are mutually independent. When
// ma_weights is nonempty, v is the MA-filtered version of the white noise
// (weight 0 must be 1, length <= 4) and burn-in draws are discarded.
struct InnovationLaw {
  double sigma_u = 1.0;
  std::vector<double> sigma_v = {1.0};
  double rho_uv = 0.0;
  std::vector<double> ma_weights;  // empty = no filter

  // Long-run variance of v component i: sigma_v[i]^2 * (sum of weights)^2.
  double long_run_variance(int i) const;

  void validate() const;
};

// Regressor persistence: x_t = (I_p - C/T^gamma) x_{t-1} + v_t with x_0 = 0,
// C = diag(c). gamma = 1 is the local-to-unity case.
struct RegressorLaw {
  int p = 1;
  double gamma = 1.0;
  std::vector<double> c = {1.0};
  InnovationLaw innovations;

  void validate() const;
  // Autoregressive root for component i at sample size T; must land in [0, 1).
  double root(int i, int T) const;
};

// Two-regime predictive regression with a single break at k = floor(T*pi0).
// Rows 0..k-1 belong to regime 1, rows k..T-1 to regime 2.
struct BreakDgp {
  RegressorLaw law;
  int T = 100;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::vector<double> beta1 = {0.0};
  std::vector<double> beta2 = {0.0};
  double pi0 = 0.5;
  bool include_intercept = false;

  int break_index() const;  // k = floor(T * pi0)
  bool is_null() const;     // alpha1 == alpha2 and beta1 == beta2
  void validate() const;
};

// Aligned sample: row t holds the regressors x_t and the one-step-ahead
// response they predict; u and v are the true shocks, kept for
// diagnostics. meta is absent for samples loaded from files.
struct Sample {
  std::vector<double> y;
  Mat x;
  std::vector<double> u;
  Mat v;
  std::optional<BreakDgp> meta;

  int T() const { return static_cast<int>(y.size()); }
  int p() const { return x.cols(); }
};

// Draws (u, v) jointly Gaussian per the law. Throws InvalidCovariance when
// the implied joint covariance is not positive semidefinite.
std::pair<std::vector<double>, Mat> simulate_innovations(const InnovationLaw& law, int T, int p,
                                                         RngStream& stream);

// Runs the persistence recursion; deterministic given v.
Mat simulate_regressors(const RegressorLaw& law, int T, const Mat& v);

Sample simulate_sample(const BreakDgp& dgp, RngStream& stream);

}  // namespace breakscan
