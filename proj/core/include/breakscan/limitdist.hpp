#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "breakscan/matrix.hpp"
#include "breakscan/rng.hpp"

namespace breakscan {

// Limiting functionals simulated on a uniform grid:
//   SupNBB          sup over trimming of |W(r) - r W(1)|^2 / (r (1 - r)),
//                   W a p-dimensional standard Brownian motion
//   ChiSqPlusSupBB  an independent chi-square(p) draw plus a SupNBB draw
//   ChiSq           chi-square(p)
//   OUQuadratic     1 + int J dJ (Ito) for the mean-reverting OU path J
//                   with decay c, driven by a unit-variance Brownian motion
enum class FunctionalKind { SupNBB, ChiSqPlusSupBB, ChiSq, OUQuadratic };

std::string to_string(FunctionalKind kind);
FunctionalKind functional_kind_from_string(const std::string& s);

struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::SupNBB;
  int p = 1;
  double pi_lo = 0.15;
  double pi_hi = 0.85;
  int grid_points = 1000;
  std::optional<double> c;  // OU decay, OUQuadratic only

  void validate() const;
};

struct CriticalValueTable {
  FunctionalSpec spec;
  long replications = 0;
  std::uint64_t seed = 0;
  std::map<double, double> quantiles;  // probability level -> value
  std::vector<double> draws;           // sorted ascending when kept
};

struct PValue {
  double value = 1.0;
  bool clamped = false;
};

// Standard Brownian motion on {i/n}, returned as an (n+1) x dim matrix with
// row 0 at the origin; increments are iid N(0, 1/n) per coordinate.
Mat simulate_brownian_grid(int n, int dim, RngStream& stream);

// Euler path of the OU recursion dJ = -c J dt + dW on {i/n}; length n+1,
// J(0) = 0. With c = 0 this reproduces the Brownian path exactly.
std::vector<double> simulate_ou_grid(int n, double c, RngStream& stream);

double draw_functional(const FunctionalSpec& spec, RngStream& stream);

// Empirical quantiles over `replications` independent draws; replicate r
// uses a sub-stream derived from (master_seed, r), so the table is
// reproducible for any worker count.
CriticalValueTable build_table(const FunctionalSpec& spec, long replications,
                               const std::vector<double>& levels, std::uint64_t master_seed,
                               int threads = 0, bool keep_draws = false);

// Exceedance probability of `observed` under the table's distribution:
// exact draw fraction when draws were kept, otherwise interpolation
// between stored quantiles, clamped to the resolvable range with the
// clamped flag set.
PValue p_value(const CriticalValueTable& table, double observed);

// Critical value for a test of size alpha: the stored (or interpolated)
// quantile at level 1 - alpha. alpha >= 1 maps to -infinity.
double critical_value(const CriticalValueTable& table, double alpha);

}  // namespace breakscan
