#pragma once

#include <optional>
#include <string>
#include <vector>

#include "breakscan/dgp.hpp"
#include "breakscan/ivx.hpp"
#include "breakscan/matrix.hpp"

namespace breakscan {

enum class StatKind { WaldOLS, WaldIVX };

std::string to_string(StatKind kind);
StatKind stat_kind_from_string(const std::string& s);

// Unrestricted two-regime fit at break index k. theta vectors carry the
// intercept first when one is included; sigma2_hat is the pooled residual
// variance (1/T) sum residuals^2 over both regimes.
struct RegimeFit {
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> residuals;
  double sigma2_hat = 0.0;
  int k = 0;
};

struct ScanConfig {
  double pi_lo = 0.15;
  double pi_hi = 0.85;
  double step = 0.0;  // <= 0 means 1/T, i.e. every feasible break index
  StatKind kind = StatKind::WaldOLS;
  bool intercept = false;
  bool slopes_only = false;  // restrict the tested restriction to the slopes
  std::optional<IvxConfig> ivx;

  void validate() const;
};

struct ScanFailure {
  double pi = 0.0;
  int k = 0;
  std::string reason;
};

// Statistic values over the trimmed break-fraction grid. grid/ks/stats hold
// the successfully evaluated points (strictly increasing in pi, duplicate
// break indices evaluated once); per-point failures are recorded separately.
struct WaldScan {
  std::vector<double> grid;
  std::vector<int> ks;
  std::vector<double> stats;
  double sup_value = 0.0;
  double argmax_fraction = 0.0;
  int argmax_k = 0;
  StatKind kind = StatKind::WaldOLS;
  std::vector<ScanFailure> failures;
  ScanConfig config;  // resolved configuration, kept for export
  int T = 0;
};

RegimeFit fit_two_regime_ols(const Sample& sample, int k, bool intercept);
RegimeFit fit_two_regime_ivx(const Sample& sample, const Mat& z, int k, bool intercept);

// Wald statistic for equality of the two regime coefficient vectors
// (intercept and slopes jointly when an intercept is included; slopes only
// when slopes_only is set). Returns +infinity when the two-regime fit is
// exact (zero residual variance) but the regimes differ.
double wald_ols_at(const Sample& sample, int k, bool intercept, bool slopes_only = false);
double wald_ivx_at(const Sample& sample, const Mat& z, int k, bool intercept,
                   bool slopes_only = false);

// Scalar representation of the Wald-IVX statistic for p = 1 without an
// intercept, built from w_t = Z1_t - (sum Z1 X1 / sum Z X) Z_t and the
// residuals of the restricted full-sample fit. Agrees with wald_ivx_at on
// the same inputs; kept as an independent cross-check route.
double wald_ivx_simplified(const Sample& sample, const Mat& z, int k);

// Evaluates the configured statistic at every break index on the trimmed
// grid and records the sup and its break fraction (smallest on ties).
WaldScan scan(const Sample& sample, const ScanConfig& cfg);

}  // namespace breakscan
