#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "breakscan/breaktest.hpp"
#include "breakscan/dgp.hpp"
#include "breakscan/ivx.hpp"
#include "breakscan/limitdist.hpp"

namespace breakscan {

// One Monte Carlo experiment: simulate from dgp, scan each replicate, and
// reject when the sup exceeds the table's critical value at `level`.
struct Experiment {
  std::string name = "experiment";
  BreakDgp dgp;
  ScanConfig test;
  CriticalValueTable table;
  std::string table_path;  // provenance only
  double level = 0.05;
  long replications = 1000;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct ReplicateOutcome {
  double sup_value = 0.0;
  double argmax_fraction = 0.0;
  bool reject = false;
};

// Compact echo of the experiment design, embedded in persisted results so
// the CSV summary can be produced from the result file alone.
struct ExperimentSummary {
  std::string name;
  StatKind kind = StatKind::WaldOLS;
  int T = 0;
  double gamma = 1.0;
  std::vector<double> c;
  std::optional<double> delta;
  std::optional<double> cz;
  double pi0 = 0.5;
  double level = 0.05;
  long replications = 0;
};

struct ExperimentResult {
  ExperimentSummary summary;
  double rejection_rate = 0.0;
  double mc_stderr = 0.0;  // binomial sqrt(r(1-r)/n)
  double mean_argmax = 0.0;
  long successes = 0;
  long failures = 0;
  std::vector<std::string> failure_reasons;
  bool tainted = false;  // failures exceeded 2% of replications
  std::vector<ReplicateOutcome> per_replicate;  // kept on request
  std::uint64_t master_seed = 0;
  std::string config_hash;
};

// Null rejection rate; requires a no-break dgp (alpha1 == alpha2,
// beta1 == beta2). Replicate r draws from a sub-stream keyed by
// (master_seed, r), so extending the replication count leaves earlier
// replicates unchanged.
ExperimentResult run_size(const Experiment& exp, int threads = 0, bool keep_replicates = false);

// Rejection rate under the configured break; also reports the mean break
// fraction at the sup.
ExperimentResult run_power(const Experiment& exp, int threads = 0, bool keep_replicates = false);

struct MomentCheckRow {
  std::string statistic;
  double empirical = 0.0;
  double target = 0.0;
  double rel_error = 0.0;
  double mc_stderr = 0.0;
};

// Replicate means of the normalized sample moments against their
// theoretical targets: sum x^2 / T^(1+gamma) per component, the regime
// split at `pi`, and (for LUR laws with an IvxConfig and iid v) the
// instrument cross moment sum x z / T^(1+delta).
std::vector<MomentCheckRow> run_moment_check(const RegressorLaw& law, int T, long replications,
                                             std::uint64_t master_seed, double pi = 0.3,
                                             std::optional<IvxConfig> ivx = std::nullopt,
                                             int threads = 0);

// JSON persistence; round-trips every field. Throws SchemaMismatch on
// malformed input, IoError on filesystem failures.
void persist_result(const ExperimentResult& result, const std::string& path);
ExperimentResult load_result(const std::string& path);

}  // namespace breakscan
