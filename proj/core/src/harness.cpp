#include "breakscan/harness.hpp"

#include <cmath>
#include <fstream>

#include "breakscan/errors.hpp"
#include "breakscan/io.hpp"
#include "breakscan/parallel.hpp"

namespace breakscan {

namespace {

constexpr std::uint64_t kReplicateDomain = 0xda7aULL;

ExperimentSummary make_summary(const Experiment& exp) {
  ExperimentSummary s;
  s.name = exp.name;
  s.kind = exp.test.kind;
  s.T = exp.dgp.T;
  s.gamma = exp.dgp.law.gamma;
  s.c = exp.dgp.law.c;
  if (exp.test.kind == StatKind::WaldIVX) {
    const IvxConfig cfg = exp.test.ivx.value_or(IvxConfig{});
    s.delta = cfg.delta;
    s.cz = cfg.cz;
  }
  s.pi0 = exp.dgp.pi0;
  s.level = exp.level;
  s.replications = exp.replications;
  return s;
}

ExperimentResult run_experiment(const Experiment& exp, int threads, bool keep_replicates,
                                bool require_null) {
  exp.validate();
  if (require_null && !exp.dgp.is_null()) {
    throw ConfigError("run_size requires a no-break dgp (alpha1 == alpha2, beta1 == beta2)");
  }
  const double cv = critical_value(exp.table, exp.level);
  const long R = exp.replications;

  std::vector<ReplicateOutcome> outcomes(R);
  std::vector<unsigned char> ok(R, 0);
  std::vector<std::string> reasons(R);

  parallel_for(R, resolve_threads(threads), [&](std::int64_t r) {
    RngStream stream = derive_stream(exp.master_seed, static_cast<std::uint64_t>(r), kReplicateDomain);
    try {
      Sample sample = simulate_sample(exp.dgp, stream);
      WaldScan s = scan(sample, exp.test);
      outcomes[r] = {s.sup_value, s.argmax_fraction, s.sup_value > cv};
      ok[r] = 1;
    } catch (const Error& e) {
      reasons[r] = e.what();
    }
  });

  ExperimentResult result;
  result.summary = make_summary(exp);
  result.master_seed = exp.master_seed;
  result.config_hash = experiment_config_hash(exp);

  long rejections = 0;
  double argmax_sum = 0.0;
  for (long r = 0; r < R; ++r) {
    if (!ok[r]) {
      ++result.failures;
      result.failure_reasons.push_back("replicate " + std::to_string(r) + ": " + reasons[r]);
      continue;
    }
    ++result.successes;
    if (outcomes[r].reject) ++rejections;
    argmax_sum += outcomes[r].argmax_fraction;
    if (keep_replicates) result.per_replicate.push_back(outcomes[r]);
  }

  if (result.successes > 0) {
    result.rejection_rate = static_cast<double>(rejections) / result.successes;
    result.mc_stderr =
        std::sqrt(result.rejection_rate * (1.0 - result.rejection_rate) / result.successes);
    result.mean_argmax = argmax_sum / result.successes;
  }
  result.tainted = result.failures * 50 > R;  // > 2% of replications
  return result;
}

}  // namespace

void Experiment::validate() const {
  dgp.validate();
  test.validate();
  if (replications < 100) throw ConfigError("replications must be >= 100");
  if (!(level > 0.0 && level <= 1.0)) throw ConfigError("level must lie in (0, 1]");
  critical_value(table, level);  // level must be present or bracketed
}

ExperimentResult run_size(const Experiment& exp, int threads, bool keep_replicates) {
  return run_experiment(exp, threads, keep_replicates, /*require_null=*/true);
}

ExperimentResult run_power(const Experiment& exp, int threads, bool keep_replicates) {
  return run_experiment(exp, threads, keep_replicates, /*require_null=*/false);
}

std::vector<MomentCheckRow> run_moment_check(const RegressorLaw& law, int T, long replications,
                                             std::uint64_t master_seed, double pi,
                                             std::optional<IvxConfig> ivx, int threads) {
  law.validate();
  if (T < 500) throw ConfigError("run_moment_check requires T >= 500");
  if (replications < 2) throw ConfigError("run_moment_check requires >= 2 replications");
  if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi must lie in (0, 1)");
  if (ivx) ivx->validate();

  const int p = law.p;
  // The instrument cross-moment target is the LUR result for iid v.
  const bool with_xz = ivx.has_value() && law.gamma == 1.0 && law.innovations.ma_weights.empty();
  const int per_component = with_xz ? 4 : 3;
  const int n_stats = p * per_component;
  const int k = static_cast<int>(std::floor(T * pi + 1e-9));

  std::vector<double> values(static_cast<size_t>(replications) * n_stats);
  parallel_for(replications, resolve_threads(threads), [&](std::int64_t r) {
    RngStream stream = derive_stream(master_seed, static_cast<std::uint64_t>(r), kReplicateDomain);
    auto [u, v] = simulate_innovations(law.innovations, T, p, stream);
    (void)u;
    Mat x = simulate_regressors(law, T, v);
    Mat z;
    if (with_xz) z = build_instruments(x, *ivx);

    const double norm_x = std::pow(static_cast<double>(T), 1.0 + law.gamma);
    double* row = values.data() + static_cast<size_t>(r) * n_stats;
    for (int i = 0; i < p; ++i) {
      double full = 0.0, regime1 = 0.0, xz = 0.0;
      for (int t = 0; t < T; ++t) {
        const double x2 = x(t, i) * x(t, i);
        full += x2;
        if (t < k) regime1 += x2;
        if (with_xz) xz += x(t, i) * z(t, i);
      }
      row[i * per_component + 0] = full / norm_x;
      row[i * per_component + 1] = regime1 / norm_x;
      row[i * per_component + 2] = (full - regime1) / norm_x;
      if (with_xz) {
        const double norm_z = std::pow(static_cast<double>(T), 1.0 + ivx->delta);
        row[i * per_component + 3] = xz / norm_z;
      }
    }
  });

  std::vector<MomentCheckRow> report(n_stats);
  for (int i = 0; i < p; ++i) {
    const std::string suffix = p > 1 ? "[" + std::to_string(i + 1) + "]" : "";
    const double lrv = law.innovations.long_run_variance(i);
    const double base = lrv / (2.0 * law.c[i]);
    report[i * per_component + 0] = {"sum_x2_norm" + suffix, 0, base, 0, 0};
    report[i * per_component + 1] = {"sum_x2_regime1_norm" + suffix, 0, pi * base, 0, 0};
    report[i * per_component + 2] = {"sum_x2_regime2_norm" + suffix, 0, (1.0 - pi) * base, 0, 0};
    if (with_xz) {
      // E[1 + int J dJ] / cz with sigma_v^2 scaling; positive for a
      // mean-reverting path.
      const double s2 = law.innovations.sigma_v[i] * law.innovations.sigma_v[i];
      const double ci = law.c[i];
      const double eq1 = s2 * 0.5 * (1.0 + (1.0 - std::exp(-2.0 * ci)) / (2.0 * ci));
      report[i * per_component + 3] = {"sum_xz_norm" + suffix, 0, eq1 / ivx->cz, 0, 0};
    }
  }

  for (int s = 0; s < n_stats; ++s) {
    double mean = 0.0;
    for (long r = 0; r < replications; ++r) mean += values[static_cast<size_t>(r) * n_stats + s];
    mean /= replications;
    double var = 0.0;
    for (long r = 0; r < replications; ++r) {
      const double d = values[static_cast<size_t>(r) * n_stats + s] - mean;
      var += d * d;
    }
    var /= (replications - 1);
    report[s].empirical = mean;
    report[s].mc_stderr = std::sqrt(var / replications);
    const double denom = std::abs(report[s].target);
    report[s].rel_error = denom > 0 ? std::abs(mean - report[s].target) / denom
                                    : std::abs(mean - report[s].target);
  }
  return report;
}

void persist_result(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_result_json(out, result);
  if (!out) throw IoError("write failed for '" + path + "'");
}

ExperimentResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_result_json(in);
}

}  // namespace breakscan
