#include "breakscan/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "breakscan/errors.hpp"

namespace breakscan {

namespace {

using nlohmann::json;

// Infinite sup values are legal (exact-fit regimes), but JSON numbers
// cannot carry them; encode non-finite values as strings.
json json_num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw SchemaMismatch("expected a number, got " + j.dump());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, long line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("cannot parse number '" + s + "'", line_no);
  }
  return v;
}

json scan_config_to_json(const ScanConfig& cfg) {
  json j;
  j["kind"] = to_string(cfg.kind);
  j["pi_lo"] = cfg.pi_lo;
  j["pi_hi"] = cfg.pi_hi;
  j["step"] = cfg.step;
  j["intercept"] = cfg.intercept;
  j["slopes_only"] = cfg.slopes_only;
  if (cfg.ivx) j["ivx"] = {{"delta", cfg.ivx->delta}, {"cz", cfg.ivx->cz}};
  return j;
}

json dgp_to_json(const BreakDgp& dgp) {
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
  j["include_intercept"] = dgp.include_intercept;
  return j;
}

json provenance_to_json(const RunProvenance& prov) {
  json j;
  j["version"] = prov.version;
  if (prov.seed) j["seed"] = *prov.seed;
  if (!prov.config_hash.empty()) j["config_hash"] = prov.config_hash;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_level(double level) {
  for (int prec = 2; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, level);
    if (std::strtod(buf, nullptr) == level) return buf;
  }
  return format_double(level);
}

void write_sample_csv(std::ostream& os, const Sample& sample, const std::string& meta_json) {
  const int T = sample.T();
  const int p = sample.p();
  if (!meta_json.empty()) os << "# " << meta_json << "\n";

  os << "t,y";
  for (int i = 1; i <= p; ++i) os << ",x" << i;
  os << ",u";
  for (int i = 1; i <= p; ++i) os << ",v" << i;
  os << "\n";

  const bool have_shocks = static_cast<int>(sample.u.size()) == T && sample.v.rows() == T;
  for (int t = 0; t < T; ++t) {
    os << (t + 1) << ',' << format_double(sample.y[t]);
    for (int i = 0; i < p; ++i) os << ',' << format_double(sample.x(t, i));
    os << ',' << format_double(have_shocks ? sample.u[t] : 0.0);
    for (int i = 0; i < p; ++i) os << ',' << format_double(have_shocks ? sample.v(t, i) : 0.0);
    os << "\n";
  }
}

Sample read_sample_csv(std::istream& is) {
  std::string line;
  long line_no = 0;

  // header (skipping meta/comment lines)
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 3 || header[0] != "t" || header[1] != "y") {
    throw ParseError("expected header starting with 't,y,x1'", line_no);
  }
  int p = 0;
  size_t col = 2;
  while (col < header.size() && header[col] == "x" + std::to_string(p + 1)) {
    ++p;
    ++col;
  }
  if (p == 0) throw ParseError("no regressor columns found", line_no);
  bool have_shocks = false;
  if (col < header.size()) {
    if (header[col] != "u") throw ParseError("unexpected column '" + header[col] + "'", line_no);
    ++col;
    for (int i = 1; i <= p; ++i, ++col) {
      if (col >= header.size() || header[col] != "v" + std::to_string(i)) {
        throw ParseError("expected column v" + std::to_string(i), line_no);
      }
    }
    have_shocks = true;
  }
  if (col != header.size()) throw ParseError("trailing columns in header", line_no);

  std::vector<double> y, u;
  std::vector<std::vector<double>> x_rows, v_rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    size_t f = 1;
    y.push_back(parse_double(fields[f++], line_no));
    std::vector<double> xr(p), vr(p);
    for (int i = 0; i < p; ++i) xr[i] = parse_double(fields[f++], line_no);
    if (have_shocks) {
      u.push_back(parse_double(fields[f++], line_no));
      for (int i = 0; i < p; ++i) vr[i] = parse_double(fields[f++], line_no);
    }
    x_rows.push_back(std::move(xr));
    if (have_shocks) v_rows.push_back(std::move(vr));
  }
  const int T = static_cast<int>(y.size());
  if (T == 0) throw ParseError("no data rows", line_no);

  Sample s;
  s.y = std::move(y);
  s.x = Mat(T, p);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < p; ++i) s.x(t, i) = x_rows[t][i];
  if (have_shocks) {
    s.u = std::move(u);
    s.v = Mat(T, p);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < p; ++i) s.v(t, i) = v_rows[t][i];
  } else {
    s.u.assign(T, 0.0);
    s.v = Mat(T, p);
  }
  return s;
}

void write_scan_csv(std::ostream& os, const WaldScan& scan) {
  os << "pi,k,stat\n";
  for (size_t i = 0; i < scan.grid.size(); ++i) {
    os << format_double(scan.grid[i]) << ',' << scan.ks[i] << ','
       << format_double(scan.stats[i]) << "\n";
  }
}

void write_scan_json(std::ostream& os, const WaldScan& scan, const std::optional<PValue>& pv,
                     const RunProvenance* prov) {
  json j;
  j["kind"] = to_string(scan.kind);
  j["trimming"] = {scan.config.pi_lo, scan.config.pi_hi};
  j["step"] = scan.config.step > 0.0 ? scan.config.step : 1.0 / scan.T;
  j["intercept"] = scan.config.intercept;
  j["slopes_only"] = scan.config.slopes_only;
  if (scan.config.ivx) {
    j["ivx"] = {{"delta", scan.config.ivx->delta}, {"cz", scan.config.ivx->cz}};
  }
  j["T"] = scan.T;
  j["grid"] = scan.grid;
  j["k"] = scan.ks;
  json stats = json::array();
  for (double s : scan.stats) stats.push_back(json_num(s));
  j["stats"] = std::move(stats);
  j["sup_value"] = json_num(scan.sup_value);
  j["argmax_fraction"] = scan.argmax_fraction;
  j["argmax_k"] = scan.argmax_k;
  json failures = json::array();
  for (const auto& f : scan.failures) {
    failures.push_back({{"pi", f.pi}, {"k", f.k}, {"reason", f.reason}});
  }
  j["failures"] = std::move(failures);
  if (pv) j["p_value"] = {{"value", pv->value}, {"clamped", pv->clamped}};
  if (prov) j["provenance"] = provenance_to_json(*prov);
  os << j.dump(2) << "\n";
}

void write_table_json(std::ostream& os, const CriticalValueTable& table) {
  if (table.replications < 10000) {
    throw ConfigError("persisted tables require >= 10000 replications");
  }
  json spec;
  spec["kind"] = to_string(table.spec.kind);
  spec["p"] = table.spec.p;
  spec["trimming"] = {table.spec.pi_lo, table.spec.pi_hi};
  spec["grid_points"] = table.spec.grid_points;
  if (table.spec.c) spec["c"] = *table.spec.c;

  json j;
  j["spec"] = std::move(spec);
  j["replications"] = table.replications;
  j["seed"] = table.seed;
  json q = json::object();
  for (const auto& [level, value] : table.quantiles) q[format_level(level)] = value;
  j["quantiles"] = std::move(q);
  if (!table.draws.empty()) j["draws"] = table.draws;
  os << j.dump(2) << "\n";
}

CriticalValueTable read_table_json(std::istream& is) {
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("invalid table JSON: ") + e.what());
  }
  try {
    CriticalValueTable table;
    const json& spec = j.at("spec");
    table.spec.kind = functional_kind_from_string(spec.at("kind").get<std::string>());
    table.spec.p = spec.at("p").get<int>();
    table.spec.pi_lo = spec.at("trimming").at(0).get<double>();
    table.spec.pi_hi = spec.at("trimming").at(1).get<double>();
    table.spec.grid_points = spec.at("grid_points").get<int>();
    if (spec.contains("c")) table.spec.c = spec.at("c").get<double>();
    table.replications = j.at("replications").get<long>();
    table.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [key, value] : j.at("quantiles").items()) {
      table.quantiles[std::stod(key)] = value.get<double>();
    }
    if (j.contains("draws")) table.draws = j.at("draws").get<std::vector<double>>();
    return table;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("table JSON missing or mistyped field: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw SchemaMismatch("table JSON has a non-numeric quantile level");
  }
}

CriticalValueTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table '" + path + "'");
  return read_table_json(in);
}

void write_result_json(std::ostream& os, const ExperimentResult& result) {
  json exp;
  exp["name"] = result.summary.name;
  exp["kind"] = to_string(result.summary.kind);
  exp["T"] = result.summary.T;
  exp["gamma"] = result.summary.gamma;
  exp["c"] = result.summary.c;
  if (result.summary.delta) exp["delta"] = *result.summary.delta;
  if (result.summary.cz) exp["cz"] = *result.summary.cz;
  exp["pi0"] = result.summary.pi0;
  exp["level"] = result.summary.level;
  exp["replications"] = result.summary.replications;

  json j;
  j["version"] = kVersion;
  j["experiment"] = std::move(exp);
  j["rejection_rate"] = result.rejection_rate;
  j["mc_stderr"] = result.mc_stderr;
  j["mean_argmax"] = result.mean_argmax;
  j["successes"] = result.successes;
  j["failures"] = result.failures;
  j["failure_reasons"] = result.failure_reasons;
  j["tainted"] = result.tainted;
  if (!result.per_replicate.empty()) {
    json reps = json::array();
    for (const auto& r : result.per_replicate) {
      reps.push_back({json_num(r.sup_value), r.argmax_fraction, r.reject});
    }
    j["per_replicate"] = std::move(reps);
  }
  j["master_seed"] = result.master_seed;
  j["config_hash"] = result.config_hash;
  os << j.dump(2) << "\n";
}

ExperimentResult read_result_json(std::istream& is) {
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("invalid result JSON: ") + e.what());
  }
  try {
    ExperimentResult r;
    const json& exp = j.at("experiment");
    r.summary.name = exp.at("name").get<std::string>();
    r.summary.kind = stat_kind_from_string(exp.at("kind").get<std::string>());
    r.summary.T = exp.at("T").get<int>();
    r.summary.gamma = exp.at("gamma").get<double>();
    r.summary.c = exp.at("c").get<std::vector<double>>();
    if (exp.contains("delta")) r.summary.delta = exp.at("delta").get<double>();
    if (exp.contains("cz")) r.summary.cz = exp.at("cz").get<double>();
    r.summary.pi0 = exp.at("pi0").get<double>();
    r.summary.level = exp.at("level").get<double>();
    r.summary.replications = exp.at("replications").get<long>();
    r.rejection_rate = j.at("rejection_rate").get<double>();
    r.mc_stderr = j.at("mc_stderr").get<double>();
    r.mean_argmax = j.at("mean_argmax").get<double>();
    r.successes = j.at("successes").get<long>();
    r.failures = j.at("failures").get<long>();
    r.failure_reasons = j.at("failure_reasons").get<std::vector<std::string>>();
    r.tainted = j.at("tainted").get<bool>();
    if (j.contains("per_replicate")) {
      for (const auto& rep : j.at("per_replicate")) {
        ReplicateOutcome o;
        o.sup_value = num_from_json(rep.at(0));
        o.argmax_fraction = rep.at(1).get<double>();
        o.reject = rep.at(2).get<bool>();
        r.per_replicate.push_back(o);
      }
    }
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("result JSON missing or mistyped field: ") + e.what());
  }
}

std::string result_csv_header() {
  return "experiment,kind,T,gamma,c,delta,cz,pi0,level,reps,rejection_rate,stderr";
}

std::string result_csv_row(const ExperimentResult& result) {
  const ExperimentSummary& s = result.summary;
  std::string c_joined;
  for (size_t i = 0; i < s.c.size(); ++i) {
    if (i) c_joined += ';';
    c_joined += format_double(s.c[i]);
  }
  std::string row = s.name + ',' + to_string(s.kind) + ',' + std::to_string(s.T) + ',' +
                    format_double(s.gamma) + ',' + c_joined + ',';
  row += s.delta ? format_double(*s.delta) : "";
  row += ',';
  row += s.cz ? format_double(*s.cz) : "";
  row += ',' + format_double(s.pi0) + ',' + format_double(s.level) + ',' +
         std::to_string(s.replications) + ',' + format_double(result.rejection_rate) + ',' +
         format_double(result.mc_stderr);
  return row;
}

std::string experiment_config_hash(const Experiment& exp) {
  json j;
  j["dgp"] = dgp_to_json(exp.dgp);
  j["test"] = scan_config_to_json(exp.test);
  j["level"] = exp.level;
  j["replications"] = exp.replications;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace breakscan
