#include "breakscan/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "breakscan/errors.hpp"

namespace breakscan {

namespace {

// Cholesky factor of a covariance matrix, tolerating semidefinite input:
// a (near-)zero pivot zeroes its row, provided the remaining column is
// consistent with degeneracy. Throws InvalidCovariance otherwise.
Mat semidefinite_cholesky(const Mat& a) {
  const int n = a.rows();
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol = 1e-12 * std::max(max_diag, 1e-300);

  Mat l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -tol) {
      throw InvalidCovariance("implied innovation covariance is not positive semidefinite");
    }
    if (d <= tol) {
      l(j, j) = 0.0;
      for (int i = j + 1; i < n; ++i) {
        double off = a(i, j);
        for (int k = 0; k < j; ++k) off -= l(i, k) * l(j, k);
        if (std::abs(off) > std::sqrt(tol) * std::max(max_diag, 1.0)) {
          throw InvalidCovariance("implied innovation covariance is not positive semidefinite");
        }
        l(i, j) = 0.0;
      }
    } else {
      l(j, j) = std::sqrt(d);
      for (int i = j + 1; i < n; ++i) {
        double off = a(i, j);
        for (int k = 0; k < j; ++k) off -= l(i, k) * l(j, k);
        l(i, j) = off / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace

double InnovationLaw::long_run_variance(int i) const {
  double wsum = 1.0;
  if (!ma_weights.empty()) {
    wsum = 0.0;
    for (double w : ma_weights) wsum += w;
  }
  return sigma_v.at(i) * sigma_v.at(i) * wsum * wsum;
}

void InnovationLaw::validate() const {
  if (sigma_u < 0.0) throw ConfigError("sigma_u must be nonnegative");
  if (sigma_v.empty()) throw ConfigError("sigma_v must have at least one component");
  for (double s : sigma_v) {
    if (!(s >= 0.0)) throw ConfigError("sigma_v components must be nonnegative");
  }
  if (!(rho_uv >= -1.0 && rho_uv <= 1.0)) throw ConfigError("rho_uv must lie in [-1, 1]");
  if (!ma_weights.empty()) {
    if (ma_weights.size() > 4) throw ConfigError("ma_weights length must be <= 4");
    if (ma_weights.front() != 1.0) throw ConfigError("ma_weights[0] must equal 1");
  }
}

void RegressorLaw::validate() const {
  if (p < 1) throw ConfigError("p must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (static_cast<int>(c.size()) != p) throw ConfigError("c must have length p");
  for (double ci : c) {
    if (!(ci > 0.0)) throw ConfigError("c components must be strictly positive");
  }
  if (static_cast<int>(innovations.sigma_v.size()) != p) {
    throw ConfigError("sigma_v must have length p");
  }
  innovations.validate();
}

double RegressorLaw::root(int i, int T) const {
  return 1.0 - c.at(i) / std::pow(static_cast<double>(T), gamma);
}

int BreakDgp::break_index() const { return static_cast<int>(std::floor(T * pi0 + 1e-9)); }

bool BreakDgp::is_null() const { return alpha1 == alpha2 && beta1 == beta2; }

void BreakDgp::validate() const {
  law.validate();
  if (T < 20) throw ConfigError("T must be >= 20");
  if (static_cast<int>(beta1.size()) != law.p || static_cast<int>(beta2.size()) != law.p) {
    throw ConfigError("beta1/beta2 must have length p");
  }
  if (!(pi0 > 0.0 && pi0 < 1.0)) throw ConfigError("pi0 must lie in (0, 1)");
  const int k = break_index();
  if (k < 1 || k > T - 1) throw ConfigError("break index floor(T*pi0) must lie in [1, T-1]");
  if (!include_intercept && (alpha1 != 0.0 || alpha2 != 0.0)) {
    throw ConfigError("intercepts must be zero when include_intercept is false");
  }
  for (int i = 0; i < law.p; ++i) {
    double r = law.root(i, T);
    if (!(r >= 0.0 && r < 1.0)) {
      throw ConfigError("autoregressive root 1 - c/T^gamma = " + std::to_string(r) +
                        " outside [0, 1) at T = " + std::to_string(T));
    }
  }
}

std::pair<std::vector<double>, Mat> simulate_innovations(const InnovationLaw& law, int T, int p,
                                                         RngStream& stream) {
  law.validate();
  if (static_cast<int>(law.sigma_v.size()) != p) throw ConfigError("sigma_v must have length p");
  if (T < 1) throw ConfigError("T must be >= 1");

  // Joint covariance of (u, e) where e is the white noise feeding the MA
  // filter (e = v when no filter is configured).
  const int n = p + 1;
  Mat cov(n, n);
  cov(0, 0) = law.sigma_u * law.sigma_u;
  for (int i = 0; i < p; ++i) {
    cov(0, i + 1) = cov(i + 1, 0) = law.rho_uv * law.sigma_u * law.sigma_v[i];
    cov(i + 1, i + 1) = law.sigma_v[i] * law.sigma_v[i];
  }
  const Mat chol = semidefinite_cholesky(cov);

  const int lag = law.ma_weights.empty() ? 0 : static_cast<int>(law.ma_weights.size()) - 1;
  const int total = T + lag;  // burn-in rows for the filter

  std::vector<double> u(T, 0.0);
  Mat v(T, p);
  Mat e_hist(total, p);
  std::vector<double> g(n), shock(n);

  for (int r = 0; r < total; ++r) {
    for (int i = 0; i < n; ++i) g[i] = stream.gaussian();
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k <= i; ++k) s += chol(i, k) * g[k];
      shock[i] = s;
    }
    for (int i = 0; i < p; ++i) e_hist(r, i) = shock[i + 1];
    const int t = r - lag;
    if (t >= 0) {
      u[t] = shock[0];
      if (lag == 0) {
        for (int i = 0; i < p; ++i) v(t, i) = e_hist(r, i);
      } else {
        for (int i = 0; i < p; ++i) {
          double s = 0.0;
          for (size_t w = 0; w < law.ma_weights.size(); ++w) {
            s += law.ma_weights[w] * e_hist(r - static_cast<int>(w), i);
          }
          v(t, i) = s;
        }
      }
    }
  }
  return {std::move(u), std::move(v)};
}

Mat simulate_regressors(const RegressorLaw& law, int T, const Mat& v) {
  law.validate();
  if (T < 1) throw ConfigError("T must be >= 1");
  if (v.rows() != T || v.cols() != law.p) throw DimensionMismatch("v must be T x p");

  std::vector<double> root(law.p);
  for (int i = 0; i < law.p; ++i) {
    root[i] = law.root(i, T);
    if (!(root[i] >= 0.0 && root[i] < 1.0)) {
      throw ConfigError("autoregressive root outside [0, 1) at T = " + std::to_string(T));
    }
  }

  Mat x(T, law.p);
  for (int i = 0; i < law.p; ++i) x(0, i) = v(0, i);  // x_0 = 0 start
  for (int t = 1; t < T; ++t) {
    for (int i = 0; i < law.p; ++i) x(t, i) = root[i] * x(t - 1, i) + v(t, i);
  }
  return x;
}

Sample simulate_sample(const BreakDgp& dgp, RngStream& stream) {
  dgp.validate();
  auto [u, v] = simulate_innovations(dgp.law.innovations, dgp.T, dgp.law.p, stream);
  Mat x = simulate_regressors(dgp.law, dgp.T, v);

  const int k = dgp.break_index();
  std::vector<double> y(dgp.T);
  for (int t = 0; t < dgp.T; ++t) {
    const bool regime1 = t < k;
    double mean = regime1 ? dgp.alpha1 : dgp.alpha2;
    const std::vector<double>& beta = regime1 ? dgp.beta1 : dgp.beta2;
    for (int i = 0; i < dgp.law.p; ++i) mean += beta[i] * x(t, i);
    y[t] = mean + u[t];
  }

  Sample s;
  s.y = std::move(y);
  s.x = std::move(x);
  s.u = std::move(u);
  s.v = std::move(v);
  s.meta = dgp;
  return s;
}

}  // namespace breakscan
