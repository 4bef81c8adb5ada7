#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "breakscan/errors.hpp"
#include "breakscan/limitdist.hpp"
#include "breakscan/parallel.hpp"
#include "test_helpers.hpp"

using namespace breakscan;

TEST_CASE("simulate_brownian_grid: path is the cumulative sum of scaled gaussians") {
  RngStream path_stream(61), check_stream(61);
  const int n = 16;
  Mat path = simulate_brownian_grid(n, 2, path_stream);
  REQUIRE(path.rows() == n + 1);
  CHECK(path(0, 0) == 0.0);
  CHECK(path(0, 1) == 0.0);
  double w0 = 0.0, w1 = 0.0;
  const double sd = std::sqrt(1.0 / n);
  for (int i = 1; i <= n; ++i) {
    w0 += sd * check_stream.gaussian();
    w1 += sd * check_stream.gaussian();
    CHECK(path(i, 0) == w0);
    CHECK(path(i, 1) == w1);
  }
}

TEST_CASE("simulate_brownian_grid: terminal variance and covariance") {
  const int reps = 100000, n = 16;
  double sum_sq = 0.0, sum_cov = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream s = derive_stream(62, r);
    Mat path = simulate_brownian_grid(n, 1, s);
    sum_sq += path(n, 0) * path(n, 0);
    sum_cov += path(n / 2, 0) * path(n, 0);
  }
  CHECK(std::abs(sum_sq / reps - 1.0) < 0.02);
  CHECK(std::abs(sum_cov / reps - 0.5) < 0.02);
}

TEST_CASE("draw_functional: degenerate trimming reproduces chi-square(1)") {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::SupNBB;
  spec.pi_lo = 0.5;
  spec.pi_hi = 0.5;
  spec.grid_points = 200;
  const int reps = 100000;
  std::vector<double> draws(reps);
  parallel_for(reps, 0, [&](std::int64_t r) {
    RngStream s = derive_stream(63, static_cast<std::uint64_t>(r));
    draws[r] = draw_functional(spec, s);
  });

  CHECK(testutil::ks_distance(draws, testutil::chi2_cdf_1) <= 0.01);

  std::sort(draws.begin(), draws.end());
  const double q95 = draws[static_cast<size_t>(0.95 * reps)];
  CHECK(std::abs(q95 - 3.8415) < 0.1);
}

TEST_CASE("draw_functional: chi-square mean at p = 2") {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::ChiSq;
  spec.p = 2;
  const int reps = 100000;
  double sum = 0.0;
  RngStream s(64);
  for (int r = 0; r < reps; ++r) sum += draw_functional(spec, s);
  CHECK(std::abs(sum / reps - 2.0) < 0.05);
}

TEST_CASE("draw_functional: combined functional adds a chi-square to the bridge sup") {
  FunctionalSpec combined;
  combined.kind = FunctionalKind::ChiSqPlusSupBB;
  combined.p = 2;
  combined.grid_points = 200;
  FunctionalSpec bridge = combined;
  bridge.kind = FunctionalKind::SupNBB;

  const int reps = 20000;
  double sum_combined = 0.0, sum_bridge = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream s1 = derive_stream(65, r);
    RngStream s2 = derive_stream(66, r);
    sum_combined += draw_functional(combined, s1);
    sum_bridge += draw_functional(bridge, s2);
  }
  const double mean_combined = sum_combined / reps;
  const double mean_bridge = sum_bridge / reps;
  CHECK(mean_combined > 2.0);  // exceeds the chi-square mean alone
  CHECK(std::abs(mean_combined - (2.0 + mean_bridge)) < 0.15);
}

TEST_CASE("simulate_ou_grid: c = 0 reproduces the Brownian path exactly") {
  RngStream s1(67), s2(67);
  const int n = 500;
  const auto ou = simulate_ou_grid(n, 0.0, s1);
  Mat bm = simulate_brownian_grid(n, 1, s2);
  for (int i = 0; i <= n; ++i) CHECK(ou[i] == bm(i, 0));
}

TEST_CASE("simulate_ou_grid: strong decay matches the stationary variance") {
  const double c = 10.0;
  const int n = 500, reps = 20000;
  std::vector<double> vals(reps);
  parallel_for(reps, 0, [&](std::int64_t r) {
    RngStream s = derive_stream(68, static_cast<std::uint64_t>(r));
    const auto j = simulate_ou_grid(n, c, s);
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += j[i] * j[i] / n;
    vals[r] = integral;
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= reps;
  CHECK(std::abs(mean - 1.0 / (2.0 * c)) / (1.0 / (2.0 * c)) < 0.15);
}

TEST_CASE("build_table: chi-square(1) median") {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::ChiSq;
  CriticalValueTable t = build_table(spec, 100000, {0.5}, 69);
  CHECK(std::abs(t.quantiles.at(0.5) - 0.4549) < 0.02);
}

TEST_CASE("build_table: quantiles are monotone and deterministic across thread counts") {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::SupNBB;
  spec.grid_points = 200;
  CriticalValueTable a = build_table(spec, 5000, {0.90, 0.95, 0.99}, 70, /*threads=*/1);
  CriticalValueTable b = build_table(spec, 5000, {0.90, 0.95, 0.99}, 70, /*threads=*/2);
  CHECK(a.quantiles.at(0.90) <= a.quantiles.at(0.95));
  CHECK(a.quantiles.at(0.95) <= a.quantiles.at(0.99));
  CHECK(a.quantiles == b.quantiles);
}

TEST_CASE("build_table: extending the replication count preserves early draws") {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::ChiSq;
  CriticalValueTable small = build_table(spec, 2000, {0.5}, 71, 0, /*keep_draws=*/true);
  CriticalValueTable big = build_table(spec, 3000, {0.5}, 71, 0, /*keep_draws=*/true);
  // same seeds per replicate index: the smaller draw set is a subset
  std::vector<double> big_head(big.draws.begin(), big.draws.end());
  for (double d : small.draws) {
    CHECK(std::binary_search(big_head.begin(), big_head.end(), d));
  }
}

TEST_CASE("build_table: SupNBB 95% quantile is stable across seeds" * doctest::timeout(600)) {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::SupNBB;
  spec.grid_points = 1000;
  CriticalValueTable a = build_table(spec, 200000, {0.95}, 72);
  CriticalValueTable b = build_table(spec, 200000, {0.95}, 73);
  CHECK(std::abs(a.quantiles.at(0.95) - b.quantiles.at(0.95)) < 0.15);
}

TEST_CASE("build_table: grid refinement moves the 95% quantile up and stabilizes" *
          doctest::timeout(600)) {
  FunctionalSpec coarse;
  coarse.kind = FunctionalKind::SupNBB;
  coarse.grid_points = 500;
  FunctionalSpec fine = coarse;
  fine.grid_points = 2000;
  CriticalValueTable qc = build_table(coarse, 200000, {0.95}, 74);
  CriticalValueTable qf = build_table(fine, 200000, {0.95}, 74);
  const double diff = qf.quantiles.at(0.95) - qc.quantiles.at(0.95);
  CHECK(diff > -0.05);
  CHECK(std::abs(diff) <= 0.2);
}

TEST_CASE("p_value: draw-backed tables") {
  FunctionalSpec spec;
  spec.kind = FunctionalKind::ChiSq;
  CriticalValueTable t = build_table(spec, 20000, {0.5, 0.95}, 75, 0, /*keep_draws=*/true);

  PValue low = p_value(t, -1.0);
  CHECK(low.value == 1.0);
  CHECK(low.clamped);

  PValue at95 = p_value(t, t.quantiles.at(0.95));
  CHECK(std::abs(at95.value - 0.05) < 0.005);

  PValue median = p_value(t, 0.4549);  // chi-square(1) median
  CHECK(std::abs(median.value - 0.5) < 0.02);
}

TEST_CASE("p_value: quantile-only tables interpolate and clamp") {
  CriticalValueTable t;
  t.replications = 10000;
  t.quantiles = {{0.90, 2.71}, {0.95, 3.84}, {0.99, 6.63}};

  PValue mid = p_value(t, 3.84);
  CHECK(mid.value == doctest::Approx(0.05));
  CHECK_FALSE(mid.clamped);

  PValue interp = p_value(t, (2.71 + 3.84) / 2.0);
  CHECK(interp.value > 0.05);
  CHECK(interp.value < 0.10);

  PValue below = p_value(t, 0.1);
  CHECK(below.value == doctest::Approx(0.10));
  CHECK(below.clamped);

  PValue above = p_value(t, 100.0);
  CHECK(above.value == doctest::Approx(0.01));
  CHECK(above.clamped);
}

TEST_CASE("critical_value: exact, interpolated, and boundary levels") {
  CriticalValueTable t;
  t.quantiles = {{0.90, 2.0}, {0.95, 3.0}, {0.99, 5.0}};
  CHECK(critical_value(t, 0.05) == doctest::Approx(3.0));
  CHECK(critical_value(t, 0.075) == doctest::Approx(2.5));
  CHECK(critical_value(t, 1.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(critical_value(t, 0.5), ConfigError);
}

TEST_CASE("FunctionalSpec: validation") {
  FunctionalSpec spec;
  spec.grid_points = 50;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.grid_points = 1000;
  spec.kind = FunctionalKind::OUQuadratic;
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // missing c
  spec.c = 2.0;
  CHECK_NOTHROW(spec.validate());
}
