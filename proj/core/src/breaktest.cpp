#include "breakscan/breaktest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "breakscan/errors.hpp"

namespace breakscan {

namespace {

constexpr int kMaxDim = 16;  // design width is p + 1 at most, p <= 10

// LU factorization with partial pivoting on stack buffers. Statistics are
// assembled through solves against this factorization.
struct TinyLU {
  int n = 0;
  double lu[kMaxDim * kMaxDim];
  int piv[kMaxDim];

  // Returns false on exact singularity.
  bool factor(const double* a, int dim) {
    n = dim;
    std::memcpy(lu, a, sizeof(double) * n * n);
    for (int col = 0; col < n; ++col) {
      int best = col;
      double best_abs = std::abs(lu[col * n + col]);
      for (int r = col + 1; r < n; ++r) {
        double v = std::abs(lu[r * n + col]);
        if (v > best_abs) {
          best_abs = v;
          best = r;
        }
      }
      piv[col] = best;
      if (best != col) {
        for (int j = 0; j < n; ++j) std::swap(lu[col * n + j], lu[best * n + j]);
      }
      const double pivot = lu[col * n + col];
      if (pivot == 0.0 || !std::isfinite(pivot)) return false;
      for (int r = col + 1; r < n; ++r) {
        const double m = lu[r * n + col] / pivot;
        lu[r * n + col] = m;
        for (int j = col + 1; j < n; ++j) lu[r * n + j] -= m * lu[col * n + j];
      }
    }
    return true;
  }

  void solve_vec(const double* b, double* x) const {
    for (int i = 0; i < n; ++i) x[i] = b[i];
    for (int i = 0; i < n; ++i) {
      if (piv[i] != i) std::swap(x[i], x[piv[i]]);
      for (int k = 0; k < i; ++k) x[i] -= lu[i * n + k] * x[k];
    }
    for (int i = n - 1; i >= 0; --i) {
      for (int k = i + 1; k < n; ++k) x[i] -= lu[i * n + k] * x[k];
      x[i] /= lu[i * n + i];
    }
  }

  // Solves A X = B for row-major B (n x m), writing row-major X.
  void solve_cols(const double* b, int m, double* x) const {
    double col[kMaxDim], sol[kMaxDim];
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) col[i] = b[i * m + j];
      solve_vec(col, sol);
      for (int i = 0; i < n; ++i) x[i * m + j] = sol[i];
    }
  }

  // Infinity-norm condition estimate of the factored matrix.
  double cond_inf(const double* a) const {
    double inv[kMaxDim * kMaxDim];
    double e[kMaxDim], sol[kMaxDim];
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) e[i] = i == j ? 1.0 : 0.0;
      solve_vec(e, sol);
      for (int i = 0; i < n; ++i) inv[i * n + j] = sol[i];
    }
    double norm_a = 0.0, norm_inv = 0.0;
    for (int i = 0; i < n; ++i) {
      double ra = 0.0, ri = 0.0;
      for (int j = 0; j < n; ++j) {
        ra += std::abs(a[i * n + j]);
        ri += std::abs(inv[i * n + j]);
      }
      norm_a = std::max(norm_a, ra);
      norm_inv = std::max(norm_inv, ri);
    }
    if (!std::isfinite(norm_inv)) return std::numeric_limits<double>::infinity();
    return norm_a * norm_inv;
  }
};

// Running cross moments of (y, design D, instrument Z) with cut points at
// every row, so any regime split costs O(d^2) lookups. prefix arrays hold
// sums over rows [0, t) at index t. When the instrument IS the design
// (Wald-OLS), the Z blocks alias the D blocks and the two statistics share
// every solve.
struct MomentPrefix {
  int T = 0;
  int d = 0;
  bool z_is_d = true;
  std::vector<double> dd, dy, yy;  // (T+1)*d*d, (T+1)*d, (T+1)
  std::vector<double> zd, zz, zy;  // empty when z_is_d

  const double* dd_at(int t) const { return dd.data() + static_cast<size_t>(t) * d * d; }
  const double* dy_at(int t) const { return dy.data() + static_cast<size_t>(t) * d; }
  const double* zd_at(int t) const {
    return z_is_d ? dd_at(t) : zd.data() + static_cast<size_t>(t) * d * d;
  }
  const double* zz_at(int t) const {
    return z_is_d ? dd_at(t) : zz.data() + static_cast<size_t>(t) * d * d;
  }
  const double* zy_at(int t) const {
    return z_is_d ? dy_at(t) : zy.data() + static_cast<size_t>(t) * d;
  }
};

// Design matrix rows: intercept column first when requested.
Mat build_design(const Mat& x, bool intercept) {
  if (!intercept) return x;
  Mat d(x.rows(), x.cols() + 1);
  for (int t = 0; t < x.rows(); ++t) {
    d(t, 0) = 1.0;
    for (int j = 0; j < x.cols(); ++j) d(t, j + 1) = x(t, j);
  }
  return d;
}

MomentPrefix build_prefix(const std::vector<double>& y, const Mat& design, const Mat* instr) {
  MomentPrefix pm;
  pm.T = design.rows();
  pm.d = design.cols();
  pm.z_is_d = instr == nullptr;
  const int T = pm.T, d = pm.d;
  if (d > kMaxDim) throw ConfigError("design width exceeds supported maximum");
  if (static_cast<int>(y.size()) != T) throw DimensionMismatch("y length must equal design rows");
  if (instr && (instr->rows() != T || instr->cols() != d)) {
    throw DimensionMismatch("instrument matrix must match design shape");
  }

  pm.dd.assign(static_cast<size_t>(T + 1) * d * d, 0.0);
  pm.dy.assign(static_cast<size_t>(T + 1) * d, 0.0);
  pm.yy.assign(T + 1, 0.0);
  if (!pm.z_is_d) {
    pm.zd.assign(static_cast<size_t>(T + 1) * d * d, 0.0);
    pm.zz.assign(static_cast<size_t>(T + 1) * d * d, 0.0);
    pm.zy.assign(static_cast<size_t>(T + 1) * d, 0.0);
  }

  for (int t = 0; t < T; ++t) {
    const double* prev_dd = pm.dd.data() + static_cast<size_t>(t) * d * d;
    double* cur_dd = pm.dd.data() + static_cast<size_t>(t + 1) * d * d;
    const double* prev_dy = pm.dy.data() + static_cast<size_t>(t) * d;
    double* cur_dy = pm.dy.data() + static_cast<size_t>(t + 1) * d;
    for (int i = 0; i < d; ++i) {
      const double di = design(t, i);
      for (int j = 0; j < d; ++j) cur_dd[i * d + j] = prev_dd[i * d + j] + di * design(t, j);
      cur_dy[i] = prev_dy[i] + di * y[t];
    }
    pm.yy[t + 1] = pm.yy[t] + y[t] * y[t];

    if (!pm.z_is_d) {
      const double* prev_zd = pm.zd.data() + static_cast<size_t>(t) * d * d;
      double* cur_zd = pm.zd.data() + static_cast<size_t>(t + 1) * d * d;
      const double* prev_zz = pm.zz.data() + static_cast<size_t>(t) * d * d;
      double* cur_zz = pm.zz.data() + static_cast<size_t>(t + 1) * d * d;
      const double* prev_zy = pm.zy.data() + static_cast<size_t>(t) * d;
      double* cur_zy = pm.zy.data() + static_cast<size_t>(t + 1) * d;
      for (int i = 0; i < d; ++i) {
        const double zi = (*instr)(t, i);
        for (int j = 0; j < d; ++j) cur_zd[i * d + j] = prev_zd[i * d + j] + zi * design(t, j);
        for (int j = 0; j < d; ++j) cur_zz[i * d + j] = prev_zz[i * d + j] + zi * (*instr)(t, j);
        cur_zy[i] = prev_zy[i] + zi * y[t];
      }
    }
  }
  return pm;
}

void regime_block(const double* prefix_k, const double* prefix_T, int len, double* r1, double* r2) {
  for (int i = 0; i < len; ++i) {
    r1[i] = prefix_k[i];
    r2[i] = prefix_T[i] - prefix_k[i];
  }
}

void check_regime_sizes(int k, int T, int d) {
  if (k < d + 2 || T - k < d + 2) {
    throw RegimeTooSmall("regime at break index " + std::to_string(k) + " has fewer than " +
                         std::to_string(d + 2) + " observations (T = " + std::to_string(T) + ")");
  }
}

[[noreturn]] void throw_singular(StatKind kind, const char* where, double cond) {
  const std::string msg = std::string(where) + ": condition estimate " + std::to_string(cond) +
                          " exceeds 1e12";
  if (kind == StatKind::WaldOLS) throw SingularDesign(msg);
  throw SingularMoment(msg);
}

struct RegimeSolve {
  double theta1[kMaxDim], theta2[kMaxDim];
  double sigma2 = 0.0;
  TinyLU lu1, lu2;
};

// Regime coefficient solves plus the pooled residual variance, computed
// from the moment blocks (no per-observation pass).
RegimeSolve solve_regimes(const MomentPrefix& pm, int k, StatKind kind) {
  const int d = pm.d, T = pm.T;
  check_regime_sizes(k, T, d);

  double a1[kMaxDim * kMaxDim], a2[kMaxDim * kMaxDim];
  double b1[kMaxDim], b2[kMaxDim];
  regime_block(pm.zd_at(k), pm.zd_at(T), d * d, a1, a2);
  regime_block(pm.zy_at(k), pm.zy_at(T), d, b1, b2);

  RegimeSolve rs;
  if (!rs.lu1.factor(a1, d)) throw_singular(kind, "regime 1 moment matrix", std::numeric_limits<double>::infinity());
  double cond1 = rs.lu1.cond_inf(a1);
  if (!(cond1 <= kConditionLimit)) throw_singular(kind, "regime 1 moment matrix", cond1);
  if (!rs.lu2.factor(a2, d)) throw_singular(kind, "regime 2 moment matrix", std::numeric_limits<double>::infinity());
  double cond2 = rs.lu2.cond_inf(a2);
  if (!(cond2 <= kConditionLimit)) throw_singular(kind, "regime 2 moment matrix", cond2);

  rs.lu1.solve_vec(b1, rs.theta1);
  rs.lu2.solve_vec(b2, rs.theta2);

  double s1[kMaxDim * kMaxDim], s2[kMaxDim * kMaxDim];
  double c1[kMaxDim], c2[kMaxDim];
  regime_block(pm.dd_at(k), pm.dd_at(T), d * d, s1, s2);
  regime_block(pm.dy_at(k), pm.dy_at(T), d, c1, c2);
  const double yy1 = pm.yy[k];
  const double yy2 = pm.yy[T] - pm.yy[k];

  auto regime_rss = [d](const double* theta, const double* s, const double* c, double yy) {
    double lin = 0.0, quad = 0.0;
    for (int i = 0; i < d; ++i) {
      lin += theta[i] * c[i];
      double row = 0.0;
      for (int j = 0; j < d; ++j) row += s[i * d + j] * theta[j];
      quad += theta[i] * row;
    }
    return yy - 2.0 * lin + quad;
  };
  rs.sigma2 = (regime_rss(rs.theta1, s1, c1, yy1) + regime_rss(rs.theta2, s2, c2, yy2)) / T;
  if (rs.sigma2 < 0.0) rs.sigma2 = 0.0;  // cancellation noise on exact fits
  return rs;
}

// Wald statistic at break index k: diff' Q^-1 diff / sigma2 with
// Q = sum over regimes of (Z_i'D_i)^-1 (Z_i'Z_i) (D_i'Z_i)^-1. With Z = D
// this is the regime-orthogonal OLS covariance (D1'D1)^-1 + (D2'D2)^-1.
double eval_wald(const MomentPrefix& pm, int k, StatKind kind, bool slopes_only) {
  const int d = pm.d, T = pm.T;
  RegimeSolve rs = solve_regimes(pm, k, kind);

  double g1[kMaxDim * kMaxDim], g2[kMaxDim * kMaxDim];
  regime_block(pm.zz_at(k), pm.zz_at(T), d * d, g1, g2);

  // B = A^-1 G A^-T assembled as solve(A, solve(A, G)^T)^T.
  auto sandwich = [d](const TinyLU& lu, const double* g, double* out) {
    double tmp[kMaxDim * kMaxDim], tmp_t[kMaxDim * kMaxDim];
    lu.solve_cols(g, d, tmp);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) tmp_t[i * d + j] = tmp[j * d + i];
    lu.solve_cols(tmp_t, d, out);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) std::swap(out[i * d + j], out[j * d + i]);
  };

  double q1[kMaxDim * kMaxDim], q2[kMaxDim * kMaxDim], q[kMaxDim * kMaxDim];
  sandwich(rs.lu1, g1, q1);
  sandwich(rs.lu2, g2, q2);
  for (int i = 0; i < d * d; ++i) q[i] = q1[i] + q2[i];

  double diff[kMaxDim];
  for (int i = 0; i < d; ++i) diff[i] = rs.theta1[i] - rs.theta2[i];

  // Restrict to the slope sub-block when requested (intercept column 0).
  int dim = d;
  double qr[kMaxDim * kMaxDim], diffr[kMaxDim];
  const double* q_use = q;
  const double* diff_use = diff;
  if (slopes_only) {
    dim = d - 1;
    for (int i = 0; i < dim; ++i) {
      diffr[i] = diff[i + 1];
      for (int j = 0; j < dim; ++j) qr[i * dim + j] = q[(i + 1) * d + (j + 1)];
    }
    q_use = qr;
    diff_use = diffr;
  }

  TinyLU luq;
  const char* q_name = "wald covariance";
  if (!luq.factor(q_use, dim)) {
    if (kind == StatKind::WaldOLS) throw SingularDesign(std::string(q_name) + ": exactly singular");
    throw SingularQ(std::string(q_name) + ": exactly singular");
  }
  double condq = luq.cond_inf(q_use);
  if (!(condq <= kConditionLimit)) {
    const std::string msg =
        std::string(q_name) + ": condition estimate " + std::to_string(condq) + " exceeds 1e12";
    if (kind == StatKind::WaldOLS) throw SingularDesign(msg);
    throw SingularQ(msg);
  }

  double w[kMaxDim];
  luq.solve_vec(diff_use, w);
  double quad = 0.0;
  for (int i = 0; i < dim; ++i) quad += diff_use[i] * w[i];
  if (quad < 0.0) quad = 0.0;

  if (rs.sigma2 == 0.0) {
    return quad == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return quad / rs.sigma2;
}

RegimeFit finish_fit(const MomentPrefix& pm, const Mat& design, const std::vector<double>& y,
                     int k, StatKind kind) {
  RegimeSolve rs = solve_regimes(pm, k, kind);
  const int d = pm.d, T = pm.T;

  RegimeFit fit;
  fit.k = k;
  fit.theta1.assign(rs.theta1, rs.theta1 + d);
  fit.theta2.assign(rs.theta2, rs.theta2 + d);
  fit.residuals.resize(T);
  double rss = 0.0;
  for (int t = 0; t < T; ++t) {
    const double* theta = t < k ? rs.theta1 : rs.theta2;
    double fitted = 0.0;
    for (int i = 0; i < d; ++i) fitted += theta[i] * design(t, i);
    fit.residuals[t] = y[t] - fitted;
    rss += fit.residuals[t] * fit.residuals[t];
  }
  fit.sigma2_hat = rss / T;
  return fit;
}

void validate_k(const Sample& sample, int k) {
  if (k < 1 || k > sample.T() - 1) {
    throw ConfigError("break index k must lie in [1, T-1]");
  }
}

Mat augmented_instruments(const Mat& z, bool intercept) {
  return intercept ? augment_with_intercept(z) : z;
}

}  // namespace

std::string to_string(StatKind kind) { return kind == StatKind::WaldOLS ? "ols" : "ivx"; }

StatKind stat_kind_from_string(const std::string& s) {
  if (s == "ols") return StatKind::WaldOLS;
  if (s == "ivx") return StatKind::WaldIVX;
  throw ConfigError("unknown statistic kind '" + s + "' (expected ols or ivx)");
}

void ScanConfig::validate() const {
  if (!(pi_lo > 0.0 && pi_hi < 1.0 && pi_lo <= pi_hi)) {
    throw ConfigError("trimming must satisfy 0 < pi_lo <= pi_hi < 1");
  }
  if (slopes_only && !intercept) {
    throw ConfigError("slopes_only requires an intercept in the fit");
  }
  if (ivx) ivx->validate();
}

RegimeFit fit_two_regime_ols(const Sample& sample, int k, bool intercept) {
  validate_k(sample, k);
  Mat design = build_design(sample.x, intercept);
  MomentPrefix pm = build_prefix(sample.y, design, nullptr);
  return finish_fit(pm, design, sample.y, k, StatKind::WaldOLS);
}

RegimeFit fit_two_regime_ivx(const Sample& sample, const Mat& z, int k, bool intercept) {
  validate_k(sample, k);
  Mat design = build_design(sample.x, intercept);
  Mat instr = augmented_instruments(z, intercept);
  MomentPrefix pm = build_prefix(sample.y, design, &instr);
  return finish_fit(pm, design, sample.y, k, StatKind::WaldIVX);
}

double wald_ols_at(const Sample& sample, int k, bool intercept, bool slopes_only) {
  validate_k(sample, k);
  if (slopes_only && !intercept) throw ConfigError("slopes_only requires an intercept");
  Mat design = build_design(sample.x, intercept);
  MomentPrefix pm = build_prefix(sample.y, design, nullptr);
  return eval_wald(pm, k, StatKind::WaldOLS, slopes_only);
}

double wald_ivx_at(const Sample& sample, const Mat& z, int k, bool intercept, bool slopes_only) {
  validate_k(sample, k);
  if (slopes_only && !intercept) throw ConfigError("slopes_only requires an intercept");
  Mat design = build_design(sample.x, intercept);
  Mat instr = augmented_instruments(z, intercept);
  MomentPrefix pm = build_prefix(sample.y, design, &instr);
  return eval_wald(pm, k, StatKind::WaldIVX, slopes_only);
}

double wald_ivx_simplified(const Sample& sample, const Mat& z, int k) {
  if (sample.p() != 1 || z.cols() != 1) {
    throw ConfigError("wald_ivx_simplified requires a single regressor and no intercept");
  }
  validate_k(sample, k);
  const int T = sample.T();
  check_regime_sizes(k, T, 1);

  double szx = 0.0, szx1 = 0.0, szy = 0.0;
  for (int t = 0; t < T; ++t) {
    const double zx = z(t, 0) * sample.x(t, 0);
    szx += zx;
    if (t < k) szx1 += zx;
    szy += z(t, 0) * sample.y[t];
  }
  if (std::abs(szx) < 1e-300) throw DegenerateDenominator("sum z*x is numerically zero");

  const double ratio = szx1 / szx;
  const double theta_full = szy / szx;  // restricted (no-break) fit

  double num = 0.0, sw2 = 0.0;
  for (int t = 0; t < T; ++t) {
    const double w = (t < k ? z(t, 0) : 0.0) - ratio * z(t, 0);
    const double resid = sample.y[t] - theta_full * sample.x(t, 0);
    num += w * resid;
    sw2 += w * w;
  }
  if (sw2 < 1e-300) throw DegenerateDenominator("sum w^2 is numerically zero");

  MomentPrefix pm = build_prefix(sample.y, sample.x, &z);
  const double sigma2 = solve_regimes(pm, k, StatKind::WaldIVX).sigma2;
  if (sigma2 == 0.0) {
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (num * num) / (sigma2 * sw2);
}

WaldScan scan(const Sample& sample, const ScanConfig& cfg) {
  cfg.validate();
  const int T = sample.T();

  ScanConfig resolved = cfg;
  if (resolved.kind == StatKind::WaldIVX && !resolved.ivx) resolved.ivx = IvxConfig{};

  Mat design = build_design(sample.x, resolved.intercept);
  const int d = design.cols();

  Mat instr_storage;
  const Mat* instr = nullptr;
  if (resolved.kind == StatKind::WaldIVX) {
    instr_storage = augmented_instruments(build_instruments(sample.x, *resolved.ivx),
                                          resolved.intercept);
    instr = &instr_storage;
  }
  MomentPrefix pm = build_prefix(sample.y, design, instr);

  // Break-fraction grid; duplicate and infeasible break indices dropped.
  const double step = resolved.step > 0.0 ? resolved.step : 1.0 / T;
  std::vector<std::pair<double, int>> points;
  const long n_steps = static_cast<long>(std::floor((resolved.pi_hi - resolved.pi_lo) / step + 1e-9));
  int last_k = -1;
  for (long i = 0; i <= n_steps; ++i) {
    const double pi = resolved.pi_lo + static_cast<double>(i) * step;
    // guard against representation error at integer boundaries (0.57 * 100)
    const int k = static_cast<int>(std::floor(T * pi + 1e-9));
    if (k == last_k) continue;
    last_k = k;
    if (k < d + 2 || T - k < d + 2) continue;
    points.emplace_back(pi, k);
  }
  if (points.empty()) {
    throw EmptyGrid("no feasible break indices in [" + std::to_string(resolved.pi_lo) + ", " +
                    std::to_string(resolved.pi_hi) + "] at T = " + std::to_string(T));
  }

  WaldScan out;
  out.kind = resolved.kind;
  out.config = resolved;
  out.T = T;
  for (const auto& [pi, k] : points) {
    try {
      double stat = eval_wald(pm, k, resolved.kind, resolved.slopes_only);
      if (std::isnan(stat)) throw Error("non-finite statistic");
      out.grid.push_back(pi);
      out.ks.push_back(k);
      out.stats.push_back(stat);
    } catch (const Error& e) {
      out.failures.push_back({pi, k, e.what()});
    }
  }

  if (out.failures.size() * 20 > points.size()) {  // > 5% failed
    throw ScanFailed(std::to_string(out.failures.size()) + " of " +
                     std::to_string(points.size()) + " grid points failed");
  }
  if (out.stats.empty()) {
    throw ScanFailed("no grid point evaluated successfully");
  }

  size_t best = 0;
  for (size_t i = 1; i < out.stats.size(); ++i) {
    if (out.stats[i] > out.stats[best]) best = i;
  }
  out.sup_value = out.stats[best];
  out.argmax_fraction = out.grid[best];
  out.argmax_k = out.ks[best];
  return out;
}

}  // namespace breakscan
