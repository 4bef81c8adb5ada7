#include "breakscan/ivx.hpp"

#include <cmath>
#include <string>

#include "breakscan/errors.hpp"

namespace breakscan {

void IvxConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(cz > 0.0)) throw ConfigError("cz must be strictly positive");
}

double IvxConfig::root(int T) const {
  return 1.0 - cz / std::pow(static_cast<double>(T), delta);
}

Mat build_instruments(const Mat& x, const IvxConfig& cfg) {
  cfg.validate();
  const int T = x.rows();
  const int p = x.cols();
  if (T < 2) throw ConfigError("build_instruments requires T >= 2");
  const double rho = cfg.root(T);
  if (!(rho > 0.0 && rho < 1.0)) {
    throw ConfigError("instrument root 1 - cz/T^delta = " + std::to_string(rho) +
                      " outside (0, 1) at T = " + std::to_string(T));
  }

  Mat z(T, p);
  for (int i = 0; i < p; ++i) z(0, i) = x(0, i);  // dx_1 = x_1
  for (int t = 1; t < T; ++t) {
    for (int i = 0; i < p; ++i) {
      const double dx = x(t, i) - x(t - 1, i);
      z(t, i) = rho * z(t - 1, i) + dx;
    }
  }
  return z;
}

Mat augment_with_intercept(const Mat& z) {
  const int T = z.rows();
  Mat out(T, z.cols() + 1);
  for (int t = 0; t < T; ++t) {
    out(t, 0) = 1.0;
    for (int j = 0; j < z.cols(); ++j) out(t, j + 1) = z(t, j);
  }
  return out;
}

}  // namespace breakscan
