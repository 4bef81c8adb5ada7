#include <doctest.h>

#include <cmath>
#include <vector>

#include "breakscan/dgp.hpp"
#include "breakscan/errors.hpp"
#include "breakscan/ivx.hpp"
#include "breakscan/limitdist.hpp"
#include "breakscan/parallel.hpp"
#include "test_helpers.hpp"

using namespace breakscan;

TEST_CASE("build_instruments: zero input gives zero instruments") {
  Mat x(10, 2);
  Mat z = build_instruments(x, IvxConfig{});
  for (double e : z.entries()) CHECK(e == 0.0);
}

TEST_CASE("build_instruments: first row equals x_1 for any config") {
  RngStream rng(21);
  Mat x(50, 1);
  for (int t = 0; t < 50; ++t) x(t, 0) = rng.gaussian();
  for (double delta : {0.3, 0.75, 0.95}) {
    Mat z = build_instruments(x, IvxConfig{delta, 1.0});
    CHECK(z(0, 0) == x(0, 0));
  }
}

TEST_CASE("build_instruments: hand recursion with exact root") {
  // T=3, delta=0.5, cz=1: rho = 1 - 3^{-1/2}; x=(1,2,3) so dx=(1,1,1)
  Mat x(3, 1, {1.0, 2.0, 3.0});
  Mat z = build_instruments(x, IvxConfig{0.5, 1.0});
  const double rho = 1.0 - 1.0 / std::sqrt(3.0);
  CHECK(rho == doctest::Approx(0.4226497).epsilon(1e-6));
  CHECK(z(0, 0) == doctest::Approx(1.0));
  CHECK(z(1, 0) == doctest::Approx(1.4226497).epsilon(1e-6));
  CHECK(z(2, 0) == doctest::Approx(1.6012825).epsilon(1e-6));
  // recursion values from first principles
  CHECK(z(1, 0) == doctest::Approx(rho * 1.0 + 1.0).epsilon(1e-12));
  CHECK(z(2, 0) == doctest::Approx(rho * (rho + 1.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("build_instruments: recursion matches the summation definition") {
  RngStream rng(22);
  for (int T : {5, 37, 200}) {
    Mat x(T, 2);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < 2; ++j) x(t, j) = x(std::max(t - 1, 0), j) * (t > 0) + rng.gaussian();
    IvxConfig cfg{0.7, 2.5};
    Mat z = build_instruments(x, cfg);
    const double rho = cfg.root(T);
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < 2; ++j) {
        double direct = 0.0;
        for (int s = 0; s <= t; ++s) {
          const double dx = s == 0 ? x(0, j) : x(s, j) - x(s - 1, j);
          direct += std::pow(rho, t - s) * dx;
        }
        CHECK(testutil::rel_diff(direct, z(t, j)) < 1e-12);
      }
    }
  }
}

TEST_CASE("build_instruments: config validation") {
  Mat x(10, 1);
  CHECK_THROWS_AS(build_instruments(x, IvxConfig{1.2, 1.0}), ConfigError);
  CHECK_THROWS_AS(build_instruments(x, IvxConfig{0.5, -1.0}), ConfigError);
  Mat tiny(1, 1);
  CHECK_THROWS_AS(build_instruments(tiny, IvxConfig{}), ConfigError);
}

TEST_CASE("augment_with_intercept: ones column prepended") {
  Mat empty(3, 0);
  Mat ones = augment_with_intercept(empty);
  CHECK(ones.rows() == 3);
  CHECK(ones.cols() == 1);
  for (int t = 0; t < 3; ++t) CHECK(ones(t, 0) == 1.0);

  Mat z(2, 1, {5.0, 7.0});
  Mat out = augment_with_intercept(z);
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 5.0);
  CHECK(out(1, 0) == 1.0);
  CHECK(out(1, 1) == 7.0);
}

// Replicate mean of sum x_t z_t / T^(1+delta) for a LUR regressor against
// the Euler-discretized oracle for E[1 + int J dJ] / cz. The brute-force
// oracle is an independent route through the OU functional simulator.
//
// The moment carries an O(T^(delta-1)) instrument-memory bias, about 18%
// at T = 5000 for these parameters, so the fixed-T comparison uses a 25%
// band and the approach to the limit is asserted separately.
TEST_CASE("build_instruments: LUR instrument cross-moment limit") {
  const double c = 1.0, cz = 1.0, delta = 0.75;

  RegressorLaw law;
  law.gamma = 1.0;
  law.c = {c};
  auto moment_mean = [&](int T, int reps, std::uint64_t seed) {
    std::vector<double> vals(reps);
    parallel_for(reps, 0, [&](std::int64_t r) {
      RngStream stream = derive_stream(seed, static_cast<std::uint64_t>(r));
      auto [u, v] = simulate_innovations(law.innovations, T, 1, stream);
      (void)u;
      Mat x = simulate_regressors(law, T, v);
      Mat z = build_instruments(x, IvxConfig{delta, cz});
      double s = 0.0;
      for (int t = 0; t < T; ++t) s += x(t, 0) * z(t, 0);
      vals[r] = s / std::pow(static_cast<double>(T), 1.0 + delta);
    });
    double mean = 0.0;
    for (double vv : vals) mean += vv;
    return mean / reps;
  };

  FunctionalSpec spec;
  spec.kind = FunctionalKind::OUQuadratic;
  spec.c = c;
  spec.grid_points = 500;
  std::vector<double> q_draws(20000);
  parallel_for(static_cast<long>(q_draws.size()), 0, [&](std::int64_t r) {
    RngStream stream = derive_stream(778, static_cast<std::uint64_t>(r));
    q_draws[r] = draw_functional(spec, stream);
  });
  double q_mean = 0.0;
  for (double qd : q_draws) q_mean += qd;
  q_mean /= static_cast<double>(q_draws.size());

  const double target = q_mean / cz;
  CHECK(target > 0.0);  // mean-reverting J keeps E[Q(1)] positive

  // closed form E[1 + int J dJ] = (1 + E[J(1)^2]) / 2
  const double closed = 0.5 * (1.0 + (1.0 - std::exp(-2.0 * c)) / (2.0 * c));
  CHECK(std::abs(q_mean - closed) < 0.02);

  const double at_5000 = moment_mean(5000, 2000, 777);
  CHECK(at_5000 > 0.0);  // the cross moment shares the sign of E[Q(1)]
  CHECK(std::abs(at_5000 - target) / std::abs(target) < 0.25);

  // the deficit shrinks as T grows
  const double at_2000 = moment_mean(2000, 1000, 779);
  const double at_20000 = moment_mean(20000, 500, 780);
  CHECK(std::abs(at_20000 - target) < std::abs(at_2000 - target));
}
