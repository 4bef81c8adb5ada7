#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "breakscan/breaktest.hpp"
#include "breakscan/dgp.hpp"
#include "breakscan/harness.hpp"
#include "breakscan/limitdist.hpp"

namespace breakscan {

inline constexpr const char* kVersion = "0.1.0";

// Provenance echoed into output files: version, seed, config hash.
struct RunProvenance {
  std::string version = kVersion;
  std::optional<std::uint64_t> seed;
  std::string config_hash;  // empty = omitted
};

// Sample CSV: header `t,y,x1..xp,u,v1..vp`, one row per t (t starts at 1),
// 17 significant digits. A leading `# {...}` meta line is written when
// meta_json is nonempty and skipped on read.
void write_sample_csv(std::ostream& os, const Sample& sample, const std::string& meta_json = "");

// Accepts the full export schema or the plain `t,y,x1..xp` form.
// Throws ParseError with the offending line number.
Sample read_sample_csv(std::istream& is);

// Scan exports: CSV rows `pi,k,stat`; JSON carries the full WaldScan with
// its resolved configuration.
void write_scan_csv(std::ostream& os, const WaldScan& scan);
void write_scan_json(std::ostream& os, const WaldScan& scan,
                     const std::optional<PValue>& pv = std::nullopt,
                     const RunProvenance* prov = nullptr);

// Critical-value table JSON:
// {spec:{kind,p,trimming:[lo,hi],grid_points,c?},replications,seed,
//  quantiles:{"0.90":v,...},draws?:[...]}
// Persisted tables must carry >= 10000 replications.
void write_table_json(std::ostream& os, const CriticalValueTable& table);
CriticalValueTable read_table_json(std::istream& is);
CriticalValueTable load_table(const std::string& path);

// Experiment results: full JSON record plus a one-line CSV summary with
// header `experiment,kind,T,gamma,c,delta,cz,pi0,level,reps,rejection_rate,stderr`.
void write_result_json(std::ostream& os, const ExperimentResult& result);
ExperimentResult read_result_json(std::istream& is);
std::string result_csv_header();
std::string result_csv_row(const ExperimentResult& result);

// Hash of the experiment design (dgp + test + level + replications),
// stable across seeds; 16 hex digits.
std::string experiment_config_hash(const Experiment& exp);

// Shortest fixed-decimal representation that round-trips (>= 2 decimals),
// used for quantile-level JSON keys ("0.90", "0.975").
std::string format_level(double level);

// 17-significant-digit representation used by all CSV output.
std::string format_double(double v);

}  // namespace breakscan
