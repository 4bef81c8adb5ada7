#include "breakscan/limitdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "breakscan/errors.hpp"
#include "breakscan/parallel.hpp"

namespace breakscan {

namespace {

// Stream-domain tag so table draws never collide with other consumers of
// the same master seed.
constexpr std::uint64_t kTableDomain = 0x7ab1eULL;

struct TrimRange {
  int lo;
  int hi;
};

TrimRange trim_indices(double pi_lo, double pi_hi, int n) {
  int lo = static_cast<int>(std::ceil(pi_lo * n - 1e-9));
  int hi = static_cast<int>(std::floor(pi_hi * n + 1e-9));
  lo = std::max(lo, 1);
  hi = std::min(hi, n - 1);
  if (lo > hi) {
    throw ConfigError("trimming interval contains no interior grid point");
  }
  return {lo, hi};
}

// sup over the trimmed grid of |W(r) - r W(1)|^2 / (r (1 - r)).
double sup_nbb_draw(int p, double pi_lo, double pi_hi, int n, RngStream& stream) {
  thread_local std::vector<double> path;
  path.assign(static_cast<size_t>(n) * p, 0.0);

  const double sd = std::sqrt(1.0 / n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const double prev = i == 0 ? 0.0 : path[static_cast<size_t>(i - 1) * p + j];
      path[static_cast<size_t>(i) * p + j] = prev + sd * stream.gaussian();
    }
  }

  const double* w1 = path.data() + static_cast<size_t>(n - 1) * p;
  const TrimRange trim = trim_indices(pi_lo, pi_hi, n);
  double sup = 0.0;
  for (int i = trim.lo; i <= trim.hi; ++i) {
    const double r = static_cast<double>(i) / n;
    const double* wi = path.data() + static_cast<size_t>(i - 1) * p;
    double norm2 = 0.0;
    for (int j = 0; j < p; ++j) {
      const double b = wi[j] - r * w1[j];
      norm2 += b * b;
    }
    sup = std::max(sup, norm2 / (r * (1.0 - r)));
  }
  return sup;
}

double chi_square_draw(int p, RngStream& stream) {
  double s = 0.0;
  for (int j = 0; j < p; ++j) {
    const double g = stream.gaussian();
    s += g * g;
  }
  return s;
}

}  // namespace

std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::SupNBB:
      return "sup_nbb";
    case FunctionalKind::ChiSqPlusSupBB:
      return "chisq_plus_sup_bb";
    case FunctionalKind::ChiSq:
      return "chisq";
    case FunctionalKind::OUQuadratic:
      return "ou_quadratic";
  }
  return "?";
}

FunctionalKind functional_kind_from_string(const std::string& s) {
  if (s == "sup_nbb") return FunctionalKind::SupNBB;
  if (s == "chisq_plus_sup_bb") return FunctionalKind::ChiSqPlusSupBB;
  if (s == "chisq") return FunctionalKind::ChiSq;
  if (s == "ou_quadratic") return FunctionalKind::OUQuadratic;
  throw ConfigError("unknown functional kind '" + s + "'");
}

void FunctionalSpec::validate() const {
  if (p < 1) throw ConfigError("functional dimension p must be >= 1");
  if (!(pi_lo > 0.0 && pi_hi < 1.0 && pi_lo <= pi_hi)) {
    throw ConfigError("trimming must satisfy 0 < pi_lo <= pi_hi < 1");
  }
  if (grid_points < 100) throw ConfigError("grid_points must be >= 100");
  if (kind == FunctionalKind::OUQuadratic) {
    if (!c || !(*c > 0.0)) throw ConfigError("OUQuadratic requires a positive decay c");
  }
}

Mat simulate_brownian_grid(int n, int dim, RngStream& stream) {
  if (n < 2) throw ConfigError("simulate_brownian_grid requires n >= 2");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  Mat path(n + 1, dim);
  const double sd = std::sqrt(1.0 / n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 0; j < dim; ++j) path(i, j) = path(i - 1, j) + sd * stream.gaussian();
  }
  return path;
}

std::vector<double> simulate_ou_grid(int n, double c, RngStream& stream) {
  if (n < 2) throw ConfigError("simulate_ou_grid requires n >= 2");
  if (c < 0.0) throw ConfigError("decay c must be nonnegative");
  std::vector<double> path(n + 1, 0.0);
  const double dt = 1.0 / n;
  const double sd = std::sqrt(dt);
  for (int i = 0; i < n; ++i) {
    path[i + 1] = path[i] - c * path[i] * dt + sd * stream.gaussian();
  }
  return path;
}

double draw_functional(const FunctionalSpec& spec, RngStream& stream) {
  spec.validate();
  switch (spec.kind) {
    case FunctionalKind::SupNBB:
      return sup_nbb_draw(spec.p, spec.pi_lo, spec.pi_hi, spec.grid_points, stream);
    case FunctionalKind::ChiSq:
      return chi_square_draw(spec.p, stream);
    case FunctionalKind::ChiSqPlusSupBB: {
      const double chi = chi_square_draw(spec.p, stream);
      return chi + sup_nbb_draw(spec.p, spec.pi_lo, spec.pi_hi, spec.grid_points, stream);
    }
    case FunctionalKind::OUQuadratic: {
      // 1 + int J dJ with the left-point (Ito) sum.
      const std::vector<double> j = simulate_ou_grid(spec.grid_points, *spec.c, stream);
      double integral = 0.0;
      for (size_t i = 0; i + 1 < j.size(); ++i) integral += j[i] * (j[i + 1] - j[i]);
      return 1.0 + integral;
    }
  }
  throw ConfigError("unhandled functional kind");
}

CriticalValueTable build_table(const FunctionalSpec& spec, long replications,
                               const std::vector<double>& levels, std::uint64_t master_seed,
                               int threads, bool keep_draws) {
  spec.validate();
  if (replications < 1000) throw ConfigError("build_table requires >= 1000 replications");
  if (levels.empty()) throw ConfigError("at least one quantile level is required");
  for (double l : levels) {
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("levels must lie in (0, 1)");
  }

  std::vector<double> draws(replications);
  parallel_for(replications, resolve_threads(threads), [&](std::int64_t r) {
    RngStream stream = derive_stream(master_seed, static_cast<std::uint64_t>(r), kTableDomain);
    draws[r] = draw_functional(spec, stream);
  });
  std::sort(draws.begin(), draws.end());

  CriticalValueTable table;
  table.spec = spec;
  table.replications = replications;
  table.seed = master_seed;
  for (double l : levels) {
    // type-7 empirical quantile (linear interpolation between order stats)
    const double h = (replications - 1) * l;
    const auto lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, static_cast<size_t>(replications - 1));
    table.quantiles[l] = draws[lo] + (h - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
  }
  if (keep_draws) table.draws = std::move(draws);
  return table;
}

PValue p_value(const CriticalValueTable& table, double observed) {
  if (!table.draws.empty()) {
    const auto n = static_cast<double>(table.draws.size());
    const auto above = table.draws.end() - std::upper_bound(table.draws.begin(), table.draws.end(), observed);
    PValue out;
    out.value = static_cast<double>(above) / n;
    out.clamped = observed < table.draws.front() || observed > table.draws.back();
    return out;
  }

  if (table.quantiles.empty()) throw ConfigError("table holds no quantiles");
  const auto first = table.quantiles.begin();
  const auto last = std::prev(table.quantiles.end());
  PValue out;
  if (observed <= first->second) {
    out.value = 1.0 - first->first;
    out.clamped = observed < first->second;
    return out;
  }
  if (observed >= last->second) {
    out.value = 1.0 - last->first;
    out.clamped = observed > last->second;
    return out;
  }
  auto upper = table.quantiles.begin();
  while (upper != table.quantiles.end() && upper->second < observed) ++upper;
  auto lower = std::prev(upper);
  const double span = upper->second - lower->second;
  const double frac = span > 0.0 ? (observed - lower->second) / span : 0.0;
  out.value = 1.0 - (lower->first + frac * (upper->first - lower->first));
  out.clamped = false;
  return out;
}

double critical_value(const CriticalValueTable& table, double alpha) {
  if (alpha >= 1.0) return -std::numeric_limits<double>::infinity();
  if (alpha <= 0.0) return std::numeric_limits<double>::infinity();
  const double level = 1.0 - alpha;
  if (table.quantiles.empty()) throw ConfigError("table holds no quantiles");

  auto exact = table.quantiles.lower_bound(level - 1e-12);
  if (exact != table.quantiles.end() && std::abs(exact->first - level) <= 1e-12) {
    return exact->second;
  }
  auto upper = table.quantiles.upper_bound(level);
  if (upper == table.quantiles.begin() || upper == table.quantiles.end()) {
    throw ConfigError("level " + std::to_string(level) + " not bracketed by stored quantiles");
  }
  auto lower = std::prev(upper);
  const double frac = (level - lower->first) / (upper->first - lower->first);
  return lower->second + frac * (upper->second - lower->second);
}

}  // namespace breakscan
