#pragma once

#include "breakscan/matrix.hpp"

namespace breakscan {

// Persistence of the self-generated instrument: root 1 - c_z/T^delta.
// Defaults follow common IVX practice.
struct IvxConfig {
  double delta = 0.95;
  double cz = 5.0;

  void validate() const;
  double root(int T) const;
};

// Builds the instruments z_t = sum_{j<=t} rho^{t-j} dx_j from the observed
// regressors, via the recursion z_t = rho z_{t-1} + dx_t with z_0 = 0
// (dx_1 = x_1 because the regressors start at zero). Output is T x p.
Mat build_instruments(const Mat& x, const IvxConfig& cfg);

// Prepends a column of ones; remaining columns are copied unchanged.
Mat augment_with_intercept(const Mat& z);

}  // namespace breakscan
