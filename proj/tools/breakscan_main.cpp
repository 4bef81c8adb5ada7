// breakscan: structural-break testing for predictive regressions with
// persistent regressors. Subcommands wrap the core library: sample
// simulation, sup-Wald scans (OLS and IVX), simulated critical-value
// tables, and size/power experiments.
//
// stdout carries data only; diagnostics and the provenance block go to
// stderr. Every run echoes its resolved configuration and seed, and a
// config JSON with the same field names can be replayed via --config
// (explicit flags win over file values).

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "breakscan/breaktest.hpp"
#include "breakscan/dgp.hpp"
#include "breakscan/errors.hpp"
#include "breakscan/harness.hpp"
#include "breakscan/io.hpp"
#include "breakscan/ivx.hpp"
#include "breakscan/limitdist.hpp"
#include "breakscan/parallel.hpp"
#include "breakscan/rng.hpp"

namespace {

using breakscan::ConfigError;
using breakscan::IoError;
using nlohmann::json;

constexpr std::uint64_t kSampleDomain = 0x5a3eULL;

// Binds options to variables and remembers the JSON key, so a --config
// file can fill in everything the command line left untouched.
class OptionSet {
 public:
  explicit OptionSet(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& flag, T& var, const std::string& desc) {
    auto* opt = app_->add_option(flag, var, desc);
    bind(opt, key_of(flag), [&var](const json& j) { var = j.get<T>(); });
    return opt;
  }

  CLI::Option* add_vec(const std::string& flag, std::vector<double>& var, const std::string& desc) {
    auto* opt = app_->add_option(flag, var, desc)->delimiter(',');
    bind(opt, key_of(flag), [&var](const json& j) { var = j.get<std::vector<double>>(); });
    return opt;
  }

  CLI::Option* add_flag(const std::string& flag, bool& var, const std::string& desc) {
    auto* opt = app_->add_flag(flag, var, desc);
    bind(opt, key_of(flag), [&var](const json& j) { var = j.get<bool>(); });
    return opt;
  }

  void add_config() {
    app_->add_option("--config", config_path_, "JSON config file; explicit flags override it");
  }

  // Applies config-file values to options not given on the command line.
  void finalize() {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw IoError("cannot open config '" + config_path_ + "'");
    json cfg;
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      throw ConfigError("invalid config JSON: " + std::string(e.what()));
    }
    for (const auto& e : entries_) {
      if (e.opt->count() == 0 && cfg.contains(e.key)) {
        try {
          e.set(cfg.at(e.key));
        } catch (const json::exception& err) {
          throw ConfigError("config field '" + e.key + "': " + err.what());
        }
        seen_in_config_.push_back(e.key);
      }
    }
  }

  bool was_set(const CLI::Option* opt) const {
    if (opt->count() > 0) return true;
    for (const auto& k : seen_in_config_) {
      if (key_of(opt->get_name()) == k) return true;
    }
    return false;
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::function<void(const json&)> set;
  };

  // JSON key = first listed flag name, dashes stripped ("--pi_lo,--pi-lo"
  // maps to "pi_lo").
  static std::string key_of(const std::string& flag) {
    const std::string first = flag.substr(0, flag.find(','));
    size_t i = 0;
    while (i < first.size() && first[i] == '-') ++i;
    return first.substr(i);
  }

  void bind(CLI::Option* opt, const std::string& key, std::function<void(const json&)> setter) {
    entries_.push_back({opt, key, std::move(setter)});
  }

  CLI::App* app_;
  std::string config_path_;
  std::vector<Entry> entries_;
  std::vector<std::string> seen_in_config_;
};

struct DgpOpts {
  int T = 200;
  int p = 1;
  double gamma = 1.0;
  std::vector<double> c = {1.0};
  double sigma_u = 1.0;
  std::vector<double> sigma_v = {1.0};
  double rho_uv = 0.0;
  std::vector<double> ma_weights;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::vector<double> beta1 = {0.0};
  std::vector<double> beta2 = {0.0};
  double pi0 = 0.5;
  bool intercept = false;

  void register_options(OptionSet& os) {
    os.add("--T", T, "sample size");
    os.add("--p", p, "number of regressors");
    os.add("--gamma", gamma, "persistence exponent in (0, 1]; 1 = local to unity");
    os.add_vec("--c", c, "persistence decay per regressor (broadcast from 1 value)");
    os.add("--sigma_u,--sigma-u", sigma_u, "std of the regression shock");
    os.add_vec("--sigma_v,--sigma-v", sigma_v, "std of the regressor innovations (broadcast)");
    os.add("--rho_uv,--rho-uv", rho_uv, "correlation between u and each v component");
    os.add_vec("--ma_weights,--ma-weights", ma_weights, "MA filter weights for v (first must be 1)");
    os.add("--alpha1", alpha1, "regime-1 intercept");
    os.add("--alpha2", alpha2, "regime-2 intercept");
    os.add_vec("--beta1", beta1, "regime-1 slopes (broadcast)");
    os.add_vec("--beta2", beta2, "regime-2 slopes (broadcast)");
    os.add("--pi0", pi0, "true break fraction in (0, 1)");
    os.add_flag("--intercept", intercept, "include an intercept in the model and fit");
  }

  breakscan::BreakDgp build() const {
    auto broadcast = [this](std::vector<double> v, const char* name) {
      if (static_cast<int>(v.size()) == 1 && p > 1) v.assign(p, v[0]);
      if (static_cast<int>(v.size()) != p) {
        throw ConfigError(std::string(name) + " must have length p");
      }
      return v;
    };
    breakscan::BreakDgp dgp;
    dgp.T = T;
    dgp.law.p = p;
    dgp.law.gamma = gamma;
    dgp.law.c = broadcast(c, "c");
    dgp.law.innovations.sigma_u = sigma_u;
    dgp.law.innovations.sigma_v = broadcast(sigma_v, "sigma_v");
    dgp.law.innovations.rho_uv = rho_uv;
    dgp.law.innovations.ma_weights = ma_weights;
    dgp.alpha1 = alpha1;
    dgp.alpha2 = alpha2;
    dgp.beta1 = broadcast(beta1, "beta1");
    dgp.beta2 = broadcast(beta2, "beta2");
    dgp.pi0 = pi0;
    dgp.include_intercept = intercept;
    dgp.validate();
    return dgp;
  }

  json to_json() const {
    const breakscan::BreakDgp dgp = build();
    json j;
    j["T"] = dgp.T;
    j["p"] = dgp.law.p;
    j["gamma"] = dgp.law.gamma;
    j["c"] = dgp.law.c;
    j["sigma_u"] = dgp.law.innovations.sigma_u;
    j["sigma_v"] = dgp.law.innovations.sigma_v;
    j["rho_uv"] = dgp.law.innovations.rho_uv;
    j["ma_weights"] = dgp.law.innovations.ma_weights;
    j["alpha1"] = dgp.alpha1;
    j["alpha2"] = dgp.alpha2;
    j["beta1"] = dgp.beta1;
    j["beta2"] = dgp.beta2;
    j["pi0"] = dgp.pi0;
    j["intercept"] = dgp.include_intercept;
    return j;
  }
};

struct ScanOpts {
  std::string kind = "ols";
  double pi_lo = 0.15;
  double pi_hi = 0.85;
  double step = 0.0;
  bool slopes_only = false;
  double delta = 0.95;
  double cz = 5.0;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* cz_opt = nullptr;

  void register_options(OptionSet& os) {
    os.add("--kind", kind, "statistic: ols or ivx")->check(CLI::IsMember({"ols", "ivx"}));
    os.add("--pi_lo,--pi-lo", pi_lo, "lower trimming bound");
    os.add("--pi_hi,--pi-hi", pi_hi, "upper trimming bound");
    os.add("--step", step, "break-fraction grid step (0 = every feasible k)");
    os.add_flag("--slopes_only,--slopes-only", slopes_only, "test slope equality only (needs --intercept)");
    delta_opt = os.add("--delta", delta, "IVX instrument persistence exponent");
    cz_opt = os.add("--cz", cz, "IVX instrument decay");
  }

  breakscan::ScanConfig build(bool intercept) const {
    breakscan::ScanConfig cfg;
    cfg.kind = breakscan::stat_kind_from_string(kind);
    cfg.pi_lo = pi_lo;
    cfg.pi_hi = pi_hi;
    cfg.step = step;
    cfg.intercept = intercept;
    cfg.slopes_only = slopes_only;
    if (cfg.kind == breakscan::StatKind::WaldIVX) {
      cfg.ivx = breakscan::IvxConfig{delta, cz};
    }
    cfg.validate();
    return cfg;
  }

  json to_json(bool intercept) const {
    json j;
    j["kind"] = kind;
    j["pi_lo"] = pi_lo;
    j["pi_hi"] = pi_hi;
    j["step"] = step;
    j["intercept"] = intercept;
    j["slopes_only"] = slopes_only;
    if (kind == "ivx") {
      j["delta"] = delta;
      j["cz"] = cz;
    }
    return j;
  }
};

struct SeedOpt {
  std::uint64_t seed = 0;
  CLI::Option* opt = nullptr;
  const OptionSet* os = nullptr;

  void register_options(OptionSet& o) {
    opt = o.add("--seed", seed, "master seed (default: entropy; echoed either way)");
    os = &o;
  }

  std::uint64_t resolve() {
    if (!os->was_set(opt)) seed = breakscan::entropy_seed();
    return seed;
  }
};

void emit_provenance(const std::string& command, const json& config,
                     std::optional<std::uint64_t> seed) {
  json j;
  j["version"] = breakscan::kVersion;
  j["command"] = command;
  if (seed) j["seed"] = *seed;
  j["config"] = config;
  std::cerr << j.dump() << "\n";
}

// stdout or file; data output only.
class DataSink {
 public:
  explicit DataSink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
      out_ = &file_;
    } else {
      out_ = &std::cout;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

int run_simulate(DgpOpts& dgp_opts, SeedOpt& seed_opt, const std::string& out_path,
                 bool with_meta) {
  const breakscan::BreakDgp dgp = dgp_opts.build();
  const std::uint64_t seed = seed_opt.resolve();
  const json config = dgp_opts.to_json();
  emit_provenance("simulate", config, seed);

  breakscan::RngStream stream = breakscan::derive_stream(seed, 0, kSampleDomain);
  const breakscan::Sample sample = breakscan::simulate_sample(dgp, stream);

  std::string meta;
  if (with_meta) {
    json m;
    m["version"] = breakscan::kVersion;
    m["command"] = "simulate";
    m["seed"] = seed;
    m["config"] = config;
    meta = m.dump();
  }
  DataSink sink(out_path);
  breakscan::write_sample_csv(sink.stream(), sample, meta);
  return 0;
}

int run_test(const std::string& in_path, ScanOpts& scan_opts, bool intercept,
             const std::string& table_path, const std::string& out_path, bool csv_out) {
  breakscan::Sample sample;
  if (in_path.empty() || in_path == "-") {
    sample = breakscan::read_sample_csv(std::cin);
  } else {
    std::ifstream in(in_path);
    if (!in) throw IoError("cannot open '" + in_path + "'");
    sample = breakscan::read_sample_csv(in);
  }

  const breakscan::ScanConfig cfg = scan_opts.build(intercept);
  json config = scan_opts.to_json(intercept);
  config["in"] = in_path.empty() ? "-" : in_path;
  if (!table_path.empty()) config["table"] = table_path;
  if (cfg.kind == breakscan::StatKind::WaldIVX) {
    std::cerr << "ivx instruments: delta=" << cfg.ivx->delta << " cz=" << cfg.ivx->cz << "\n";
  }

  const breakscan::WaldScan result = breakscan::scan(sample, cfg);

  std::optional<breakscan::PValue> pv;
  if (!table_path.empty()) {
    const breakscan::CriticalValueTable table = breakscan::load_table(table_path);
    pv = breakscan::p_value(table, result.sup_value);
  }

  std::ostringstream summary;
  summary << "sup=" << result.sup_value << " at pi=" << result.argmax_fraction
          << " (k=" << result.argmax_k << ")";
  if (pv) summary << " p_value=" << pv->value << (pv->clamped ? " (clamped)" : "");
  if (!result.failures.empty()) summary << " [" << result.failures.size() << " grid failures]";
  std::cerr << summary.str() << "\n";

  emit_provenance("test", config, std::nullopt);

  breakscan::RunProvenance prov;
  DataSink sink(out_path);
  if (csv_out) {
    breakscan::write_scan_csv(sink.stream(), result);
  } else {
    breakscan::write_scan_json(sink.stream(), result, pv, &prov);
  }
  return 0;
}

int run_critvals(const std::string& kind, int p, double pi_lo, double pi_hi, int grid_points,
                 double ou_c, bool have_ou_c, long reps, std::vector<double>& levels,
                 SeedOpt& seed_opt, int threads, const std::string& out_path, bool force,
                 bool keep_draws) {
  breakscan::FunctionalSpec spec;
  spec.kind = breakscan::functional_kind_from_string(kind);
  spec.p = p;
  spec.pi_lo = pi_lo;
  spec.pi_hi = pi_hi;
  spec.grid_points = grid_points;
  if (have_ou_c) spec.c = ou_c;
  spec.validate();

  if (out_path.empty()) throw ConfigError("--out is required for critvals");
  if (file_exists(out_path) && !force) {
    throw IoError("'" + out_path + "' exists; pass --force to overwrite");
  }

  const std::uint64_t seed = seed_opt.resolve();
  json config;
  config["kind"] = kind;
  config["p"] = p;
  config["pi_lo"] = pi_lo;
  config["pi_hi"] = pi_hi;
  config["grid_points"] = grid_points;
  if (have_ou_c) config["c"] = ou_c;
  config["reps"] = reps;
  config["levels"] = levels;
  config["keep_draws"] = keep_draws;
  config["out"] = out_path;
  emit_provenance("critvals", config, seed);

  const breakscan::CriticalValueTable table =
      breakscan::build_table(spec, reps, levels, seed, threads, keep_draws);

  std::ofstream out(out_path);
  if (!out) throw IoError("cannot open '" + out_path + "' for writing");
  breakscan::write_table_json(out, table);
  std::cerr << "wrote " << out_path << " (" << reps << " draws)\n";
  return 0;
}

int run_experiment_cmd(const std::string& name, DgpOpts& dgp_opts, ScanOpts& scan_opts,
                       const std::string& table_path, double level, long reps, SeedOpt& seed_opt,
                       int threads, const std::string& out_path, const std::string& csv_path,
                       bool keep_replicates) {
  breakscan::Experiment exp;
  exp.name = name;
  exp.dgp = dgp_opts.build();
  exp.test = scan_opts.build(exp.dgp.include_intercept);
  exp.table = breakscan::load_table(table_path);
  exp.table_path = table_path;
  exp.level = level;
  exp.replications = reps;
  exp.master_seed = seed_opt.resolve();

  // flat config so the provenance block replays through --config
  json config = dgp_opts.to_json();
  config.update(scan_opts.to_json(exp.dgp.include_intercept));
  config["table"] = table_path;
  config["level"] = level;
  config["reps"] = reps;
  emit_provenance(name, config, exp.master_seed);

  const breakscan::ExperimentResult result =
      name == "size" ? breakscan::run_size(exp, threads, keep_replicates)
                     : breakscan::run_power(exp, threads, keep_replicates);

  std::ostringstream summary;
  summary << name << ": rejection_rate=" << result.rejection_rate
          << " stderr=" << result.mc_stderr << " successes=" << result.successes
          << " failures=" << result.failures;
  if (name == "power") summary << " mean_argmax=" << result.mean_argmax;
  if (result.tainted) summary << " TAINTED (failure rate above 2%)";
  std::cerr << summary.str() << "\n";

  DataSink sink(out_path);
  breakscan::write_result_json(sink.stream(), result);

  if (!csv_path.empty()) {
    const bool fresh = !file_exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw IoError("cannot open '" + csv_path + "' for writing");
    if (fresh) csv << breakscan::result_csv_header() << "\n";
    csv << breakscan::result_csv_row(result) << "\n";
  }
  return 0;
}

struct LawOpts {
  int T = 5000;
  int p = 1;
  double gamma = 0.5;
  std::vector<double> c = {1.0};
  double sigma_u = 1.0;
  std::vector<double> sigma_v = {1.0};
  double rho_uv = 0.0;
  std::vector<double> ma_weights;

  void register_options(OptionSet& os) {
    os.add("--T", T, "sample size (>= 500)");
    os.add("--p", p, "number of regressors");
    os.add("--gamma", gamma, "persistence exponent in (0, 1]");
    os.add_vec("--c", c, "persistence decay per regressor (broadcast)");
    os.add("--sigma_u,--sigma-u", sigma_u, "std of the regression shock");
    os.add_vec("--sigma_v,--sigma-v", sigma_v, "std of the regressor innovations (broadcast)");
    os.add("--rho_uv,--rho-uv", rho_uv, "correlation between u and each v component");
    os.add_vec("--ma_weights,--ma-weights", ma_weights, "MA filter weights for v");
  }

  breakscan::RegressorLaw build() const {
    breakscan::RegressorLaw law;
    law.p = p;
    law.gamma = gamma;
    law.c = c;
    if (static_cast<int>(law.c.size()) == 1 && p > 1) law.c.assign(p, law.c[0]);
    law.innovations.sigma_u = sigma_u;
    law.innovations.sigma_v = sigma_v;
    if (static_cast<int>(law.innovations.sigma_v.size()) == 1 && p > 1) {
      law.innovations.sigma_v.assign(p, law.innovations.sigma_v[0]);
    }
    law.innovations.rho_uv = rho_uv;
    law.innovations.ma_weights = ma_weights;
    law.validate();
    return law;
  }
};

int run_moments(LawOpts& law_opts, long reps, double pi, SeedOpt& seed_opt, int threads,
                bool with_ivx, double delta, double cz, const std::string& out_path) {
  const breakscan::RegressorLaw law = law_opts.build();
  const int T = law_opts.T;

  std::optional<breakscan::IvxConfig> ivx;
  if (with_ivx) ivx = breakscan::IvxConfig{delta, cz};

  const std::uint64_t seed = seed_opt.resolve();
  json config;
  config["T"] = T;
  config["p"] = law.p;
  config["gamma"] = law.gamma;
  config["c"] = law.c;
  config["sigma_v"] = law.innovations.sigma_v;
  config["rho_uv"] = law.innovations.rho_uv;
  config["ma_weights"] = law.innovations.ma_weights;
  config["pi"] = pi;
  config["reps"] = reps;
  config["with_ivx"] = with_ivx;
  if (with_ivx) {
    config["delta"] = delta;
    config["cz"] = cz;
  }
  emit_provenance("moments", config, seed);

  const auto report = breakscan::run_moment_check(law, T, reps, seed, pi, ivx, threads);

  DataSink sink(out_path);
  sink.stream() << "statistic,empirical,target,rel_error,mc_stderr\n";
  double worst = 0.0;
  for (const auto& row : report) {
    sink.stream() << row.statistic << ',' << breakscan::format_double(row.empirical) << ','
                  << breakscan::format_double(row.target) << ','
                  << breakscan::format_double(row.rel_error) << ','
                  << breakscan::format_double(row.mc_stderr) << "\n";
    worst = std::max(worst, row.rel_error);
  }
  std::cerr << "moments: " << report.size() << " statistics, worst rel_error=" << worst << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structural-break tests for predictive regressions with persistent regressors"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker cap (default: BREAKSCAN_THREADS env, then hardware)");
  app.fallthrough();  // app-level flags may follow the subcommand name

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "simulate a two-regime predictive regression sample");
  OptionSet sim_os(sim);
  DgpOpts sim_dgp;
  SeedOpt sim_seed;
  std::string sim_out;
  bool sim_with_meta = false;
  sim_dgp.register_options(sim_os);
  sim_seed.register_options(sim_os);
  sim->add_option("--out", sim_out, "output CSV path (default stdout)");
  sim->add_flag("--with_meta,--with-meta", sim_with_meta, "prepend a '# {json}' meta header line");
  sim_os.add_config();

  // --- test ---
  auto* tst = app.add_subcommand("test", "run a sup-Wald break scan on a sample CSV");
  OptionSet tst_os(tst);
  ScanOpts tst_scan;
  bool tst_intercept = false;
  std::string tst_in = "-", tst_table, tst_out;
  bool tst_csv = false;
  tst->add_option("--in", tst_in, "input sample CSV ('-' = stdin)");
  tst_scan.register_options(tst_os);
  tst_os.add_flag("--intercept", tst_intercept, "fit an intercept in both regimes");
  tst->add_option("--table", tst_table, "critical-value table JSON for a p-value");
  tst->add_option("--out", tst_out, "output path (default stdout)");
  tst->add_flag("--csv", tst_csv, "emit pi,k,stat CSV instead of JSON");
  tst_os.add_config();

  // --- critvals ---
  auto* cv = app.add_subcommand("critvals", "simulate a limiting functional and tabulate quantiles");
  OptionSet cv_os(cv);
  std::string cv_kind = "sup_nbb";
  int cv_p = 1, cv_grid = 1000;
  double cv_lo = 0.15, cv_hi = 0.85, cv_c = 1.0;
  long cv_reps = 100000;
  std::vector<double> cv_levels = {0.90, 0.95, 0.99};
  SeedOpt cv_seed;
  std::string cv_out;
  bool cv_force = false, cv_keep = false;
  cv_os.add("--kind", cv_kind, "sup_nbb | chisq_plus_sup_bb | chisq | ou_quadratic")
      ->check(CLI::IsMember({"sup_nbb", "chisq_plus_sup_bb", "chisq", "ou_quadratic"}));
  cv_os.add("--p", cv_p, "functional dimension");
  cv_os.add("--pi_lo,--pi-lo", cv_lo, "lower trimming bound");
  cv_os.add("--pi_hi,--pi-hi", cv_hi, "upper trimming bound");
  cv_os.add("--grid_points,--grid-points", cv_grid, "time grid resolution");
  auto* cv_c_opt = cv_os.add("--c", cv_c, "OU decay (required for ou_quadratic)");
  cv_os.add("--reps", cv_reps, "number of draws");
  cv_os.add_vec("--levels", cv_levels, "quantile levels");
  cv_seed.register_options(cv_os);
  cv->add_option("--out", cv_out, "output table JSON path")->required();
  cv->add_flag("--force", cv_force, "overwrite an existing output file");
  cv->add_flag("--keep_draws,--keep-draws", cv_keep, "persist the sorted draw vector in the table");
  cv_os.add_config();

  // --- size / power ---
  auto* sz = app.add_subcommand("size", "empirical null rejection rate against a table");
  auto* pw = app.add_subcommand("power", "empirical rejection rate under the configured break");
  struct ExpCmd {
    OptionSet os;
    DgpOpts dgp;
    ScanOpts scan;
    SeedOpt seed;
    double level = 0.05;
    long reps = 1000;
    std::string table, out, csv;
    bool keep_replicates = false;
    explicit ExpCmd(CLI::App* cmd) : os(cmd) {
      dgp.register_options(os);
      scan.register_options(os);
      seed.register_options(os);
      os.add("--level", level, "test size");
      os.add("--reps", reps, "Monte Carlo replications");
      cmd->add_option("--table", table, "critical-value table JSON")->required();
      cmd->add_option("--out", out, "result JSON path (default stdout)");
      cmd->add_option("--csv", csv, "append a one-line CSV summary to this file");
      cmd->add_flag("--keep_replicates,--keep-replicates", keep_replicates, "store per-replicate records");
      os.add_config();
    }
  };
  ExpCmd sz_cmd(sz), pw_cmd(pw);

  // --- moments ---
  auto* mo = app.add_subcommand("moments", "replicate means of normalized sample moments vs targets");
  OptionSet mo_os(mo);
  LawOpts mo_law;
  SeedOpt mo_seed;
  long mo_reps = 2000;
  double mo_pi = 0.3;
  bool mo_ivx = false;
  double mo_delta = 0.95, mo_cz = 5.0;
  std::string mo_out;
  mo_law.register_options(mo_os);
  mo_os.add("--reps", mo_reps, "Monte Carlo replications");
  mo_os.add("--pi", mo_pi, "regime split for the regime moments");
  mo_os.add_flag("--with_ivx,--with-ivx", mo_ivx, "also check the instrument cross moment (LUR, iid v)");
  mo_os.add("--delta", mo_delta, "IVX instrument persistence exponent");
  mo_os.add("--cz", mo_cz, "IVX instrument decay");
  mo_seed.register_options(mo_os);
  mo->add_option("--out", mo_out, "output CSV path (default stdout)");
  mo_os.add_config();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      sim_os.finalize();
      return run_simulate(sim_dgp, sim_seed, sim_out, sim_with_meta);
    }
    if (*tst) {
      tst_os.finalize();
      return run_test(tst_in, tst_scan, tst_intercept, tst_table, tst_out, tst_csv);
    }
    if (*cv) {
      cv_os.finalize();
      return run_critvals(cv_kind, cv_p, cv_lo, cv_hi, cv_grid, cv_c, cv_os.was_set(cv_c_opt),
                          cv_reps, cv_levels, cv_seed, threads, cv_out, cv_force, cv_keep);
    }
    if (*sz) {
      sz_cmd.os.finalize();
      return run_experiment_cmd("size", sz_cmd.dgp, sz_cmd.scan, sz_cmd.table, sz_cmd.level,
                                sz_cmd.reps, sz_cmd.seed, threads, sz_cmd.out, sz_cmd.csv,
                                sz_cmd.keep_replicates);
    }
    if (*pw) {
      pw_cmd.os.finalize();
      return run_experiment_cmd("power", pw_cmd.dgp, pw_cmd.scan, pw_cmd.table, pw_cmd.level,
                                pw_cmd.reps, pw_cmd.seed, threads, pw_cmd.out, pw_cmd.csv,
                                pw_cmd.keep_replicates);
    }
    if (*mo) {
      mo_os.finalize();
      return run_moments(mo_law, mo_reps, mo_pi, mo_seed, threads, mo_ivx, mo_delta, mo_cz,
                         mo_out);
    }
  } catch (const breakscan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
