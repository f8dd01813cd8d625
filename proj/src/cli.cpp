#include "seqfdr/cli.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "seqfdr/calibrate.hpp"
#include "seqfdr/core.hpp"
#include "seqfdr/kernels.hpp"
#include "seqfdr/worstcase.hpp"

namespace seqfdr::cli {

using nlohmann::json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain:
    case ErrorKind::Config: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numerical: return 4;
  }
  return 4;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

json RunManifest::to_json() const {
  return {{"command", command}, {"config_digest", config_digest}, {"seed", seed}, {"versions", versions}};
}

namespace {

// Typed access to one JSON object with dotted-path error messages.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double real(const std::string& key, std::optional<double> def = std::nullopt) {
    if (!has(key)) return required(key, def);
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt) {
    if (!has(key)) return required(key, def);
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> def = std::nullopt) {
    if (!has(key)) return required(key, def);
    const std::int64_t v = integer(key);
    if (v < 0) throw ConfigError(where(key), "must be nonnegative");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key), "is required (experiments are always seeded)");
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(where(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!has(key)) return required(key, def);
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key), "expected a string");
    return v.get<std::string>();
  }

  template <class E>
  E choice(const std::string& key, std::initializer_list<std::pair<const char*, E>> options, E def) {
    if (!has(key)) return def;
    const std::string s = text(key);
    std::string list;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      list += list.empty() ? name : std::string("|") + name;
    }
    throw ConfigError(where(key), "expected one of " + list + ", got '" + s + "'");
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where(k), "unknown field");
  }

 private:
  template <class T>
  T required(const std::string& key, const std::optional<T>& def) const {
    if (!def) throw ConfigError(where(key), "is required");
    return *def;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Family family_field(Fields& f) {
  return f.choice<Family>("family", {{"bernoulli", Family::Bernoulli}, {"binomial", Family::Bernoulli},
                                     {"poisson", Family::Poisson}},
                          Family::Bernoulli);
}

}  // namespace

SimulationConfig simulation_config_from_json(const json& j) {
  Fields f(j, "");
  SimulationConfig c;
  c.family = family_field(f);
  const bool pois = c.family == Family::Poisson;
  c.null_param = f.real("null", pois ? 1.5 : 0.05);
  c.alt_param = f.real("alt", pois ? 2.0 : 0.15);
  c.J = f.count("J", 10);
  c.m0 = f.count("m0");
  c.copula_rho = f.real("rho", -0.6);
  c.q1 = f.real("q1", 0.25);
  c.q2 = f.real("q2", 0.15);
  c.mode = f.choice<Mode>("mode", {{"open", Mode::Open}, {"rejective", Mode::Rejective}}, Mode::Open);
  c.scheme = f.choice<StepScheme>("scheme", {{"bh", StepScheme::BH}, {"bl", StepScheme::BL}}, StepScheme::BH);
  c.control = f.choice<Control>("control", {{"fdr", Control::FDR}, {"pfdr", Control::PFDR}}, Control::FDR);
  c.unscaled = f.boolean("unscaled", false);
  c.wald.rho = f.real("wald_rho", 0.583);
  c.wald.rule = f.choice<BoundaryRule>(
      "boundary_rule", {{"wald", BoundaryRule::Wald}, {"conservative", BoundaryRule::Conservative}},
      BoundaryRule::Wald);
  c.reps = f.count("reps", 10000);
  c.seed = f.seed("seed");
  c.n_bar = f.integer("n_bar", 50);
  c.calibration_reps = f.count("calibration_reps", 20000);
  c.gamma_reps = f.count("gamma_reps", 20000);
  c.max_steps = f.integer("max_steps", 100000);
  f.has("write_trials");  // consumed by the command
  f.finish();
  validate(c);
  return c;
}

json to_json(const SimulationConfig& c) {
  return {{"family", to_string(c.family)},
          {"null", c.null_param},
          {"alt", c.alt_param},
          {"J", c.J},
          {"m0", c.m0},
          {"rho", c.copula_rho},
          {"q1", c.q1},
          {"q2", c.q2},
          {"mode", to_string(c.mode)},
          {"scheme", to_string(c.scheme)},
          {"control", to_string(c.control)},
          {"unscaled", c.unscaled},
          {"wald_rho", c.wald.rho},
          {"boundary_rule", c.wald.rule == BoundaryRule::Wald ? "wald" : "conservative"},
          {"reps", c.reps},
          {"seed", c.seed},
          {"n_bar", c.n_bar},
          {"calibration_reps", c.calibration_reps},
          {"gamma_reps", c.gamma_reps},
          {"max_steps", c.max_steps}};
}

FssConfig fss_config_from_json(const json& j) {
  Fields f(j, "");
  FssConfig c;
  c.family = family_field(f);
  const bool pois = c.family == Family::Poisson;
  c.null_param = f.real("null", pois ? 1.5 : 0.05);
  c.alt_param = f.real("alt", pois ? 2.0 : 0.15);
  c.J = f.count("J", 10);
  c.m0 = f.count("m0");
  c.copula_rho = f.real("rho", -0.6);
  c.q1 = f.real("q1", 0.25);
  c.target_fnr = f.real("target_fnr");
  c.reps = f.count("reps", 2000);
  c.seed = f.seed("seed");
  c.n_max = f.integer("n_max", 1000);
  c.scaling = f.choice<FssScaling>("scaling", {{"dscaled", FssScaling::DScaled}, {"plain", FssScaling::Plain}},
                                   FssScaling::DScaled);
  f.finish();
  try {
    SimpleModel(c.family, c.null_param, c.alt_param);
  } catch (const DomainError& e) {
    throw ConfigError("model", e.what());
  }
  if (c.J < 2) throw ConfigError("J", "must be >= 2");
  if (c.m0 > c.J) throw ConfigError("m0", "must not exceed J");
  if (!(c.q1 > 0.0 && c.q1 < 1.0)) throw ConfigError("q1", "must lie in (0, 1)");
  if (!(c.target_fnr > 0.0 && c.target_fnr <= 1.0)) throw ConfigError("target_fnr", "must lie in (0, 1]");
  if (c.reps < 2) throw ConfigError("reps", "must be >= 2");
  if (c.n_max < 1) throw ConfigError("n_max", "must be >= 1");
  if (!(c.copula_rho > -1.0 && c.copula_rho < 1.0)) throw ConfigError("rho", "must lie in (-1, 1)");
  return c;
}

json to_json(const FssConfig& c) {
  return {{"family", to_string(c.family)}, {"null", c.null_param}, {"alt", c.alt_param},
          {"J", c.J}, {"m0", c.m0}, {"rho", c.copula_rho}, {"q1", c.q1},
          {"target_fnr", c.target_fnr}, {"reps", c.reps}, {"seed", c.seed}, {"n_max", c.n_max},
          {"scaling", c.scaling == FssScaling::DScaled ? "dscaled" : "plain"}};
}

json to_json(const MetricsSummary& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"fdr", m.fdr}, {"fdr_se", m.fdr_se}, {"fnr", m.fnr}, {"fnr_se", m.fnr_se},
          {"pfdr", opt(m.pfdr)}, {"pfdr_se", opt(m.pfdr_se)}, {"pfnr", opt(m.pfnr)},
          {"pfnr_se", opt(m.pfnr_se)}, {"mean_max_n", m.mean_max_n},
          {"mean_max_n_se", m.mean_max_n_se}, {"mean_stream_n", m.mean_stream_n},
          {"mean_stream_n_se", m.mean_stream_n_se}, {"n_trials", m.n_trials},
          {"n_trials_with_rejection", m.n_trials_with_rejection},
          {"n_trials_with_acceptance", m.n_trials_with_acceptance}};
}

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string out;
  std::string simd = "auto";
};

class Session {
 public:
  Session(std::string command, const Common& opts) : command_(std::move(command)), opts_(opts) {
    out_dir_ = opts.out;
    if (out_dir_.empty()) {
      const char* env = std::getenv("SEQFDR_OUT");
      out_dir_ = env && *env ? env : "out";
    }
    manifest_.command = command_;
    manifest_.versions = {{"seqfdr", kVersion}, {"simd", std::string(kernels::active().name)},
                          {"compiler", __VERSION__}};
  }

  json read_config() const {
    if (opts_.config.empty()) throw ConfigError("--config", "is required for " + command_);
    std::ifstream in(opts_.config);
    if (!in) throw ConfigError("--config", "cannot open " + opts_.config);
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(opts_.config, e.what());
    }
  }

  void set_resolved(const json& config, std::uint64_t seed) {
    manifest_.config_digest = fnv1a_hex(config.dump());
    manifest_.seed = seed;
    resolved_ = config;
  }

  template <class Fn>
  auto timed(const std::string& phase, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = fn();
    manifest_.timings[phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  std::filesystem::path path(const std::string& name) const { return std::filesystem::path(out_dir_) / name; }

  std::ofstream open(const std::string& name) const {
    std::filesystem::create_directories(out_dir_);
    std::ofstream f(path(name));
    if (!f) throw DataError("cannot write " + path(name).string());
    return f;
  }

  json report_header() const {
    return {{"manifest", "manifest.json"}, {"config_digest", manifest_.config_digest}};
  }

  void finish() const {
    json m = manifest_.to_json();
    m["config"] = resolved_;
    open("manifest.json") << m.dump(2) << '\n';
    open("timings.json") << json(manifest_.timings).dump(2) << '\n';
    std::cerr << "wrote " << out_dir_ << "/ (manifest.json, timings.json)\n";
  }

 private:
  std::string command_;
  Common opts_;
  std::string out_dir_;
  RunManifest manifest_;
  json resolved_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

int cmd_bounds(const std::string& scheme, double q, std::size_t J, std::optional<std::size_t> m,
               std::optional<double> target) {
  if (scheme != "bh" && scheme != "bl") throw ConfigError("--scheme", "expected bh or bl");
  const StepVector alpha = scheme == "bh" ? bh_steps(q, J) : bl_steps(q, J);
  const BoundResult d = d_bound(alpha);
  std::cout << "m,D\n";
  for (std::size_t k = 0; k <= J; ++k)
    if (!m || *m == k) std::cout << k << ',' << fmt(d.per_m[k]) << '\n';
  if (m && *m > J) throw DomainError("m exceeds J");
  std::cout << "# D(alpha) = " << fmt(d.value) << " at m = " << d.argmax_m << '\n';
  auto print = [](const char* label, const StepVector& v) {
    std::cout << "# " << label;
    for (double x : v.values()) std::cout << ' ' << fmt(x);
    std::cout << '\n';
  };
  print("alpha:", alpha);
  const double qq = target.value_or(q);
  print(("scaled to " + fmt(qq) + ":").c_str(), scale_for_fdr(alpha, qq));
  return 0;
}

int cmd_simulate(const Common& opts) {
  Session s("simulate", opts);
  const json raw = s.read_config();
  SimulationConfig cfg = simulation_config_from_json(raw);
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.workers = opts.workers;
  const bool write_trials = raw.value("write_trials", false);
  s.set_resolved(to_json(cfg), cfg.seed);

  const auto out = s.timed("simulate", [&] { return run_simulation(cfg); });
  const auto& m = out.metrics;
  {
    auto f = s.open("metrics.csv");
    f << "family,mode,control,J,m0,rho,reps,fdr,fdr_se,fnr,fnr_se,pfdr,pfdr_se,pfnr,pfnr_se,"
         "mean_stream_n,mean_stream_n_se,mean_max_n,mean_max_n_se\n";
    f << to_string(cfg.family) << ',' << to_string(cfg.mode) << ',' << to_string(cfg.control) << ','
      << cfg.J << ',' << cfg.m0 << ',' << fmt(cfg.copula_rho) << ',' << cfg.reps << ',' << fmt(m.fdr)
      << ',' << fmt(m.fdr_se) << ',' << fmt(m.fnr) << ',' << fmt(m.fnr_se) << ',' << csv_opt(m.pfdr)
      << ',' << csv_opt(m.pfdr_se) << ',' << csv_opt(m.pfnr) << ',' << csv_opt(m.pfnr_se) << ','
      << fmt(m.mean_stream_n) << ',' << fmt(m.mean_stream_n_se) << ',' << fmt(m.mean_max_n) << ','
      << fmt(m.mean_max_n_se) << '\n';
  }
  json rep = s.report_header();
  rep["metrics"] = to_json(m);
  rep["alpha"] = out.alpha;
  rep["beta"] = out.beta;
  rep["a"] = out.a;
  rep["b"] = out.b;
  if (out.crit) rep["critical_values"] = {{"A", out.crit->A}, {"B", out.crit->B}};
  if (out.calibration) rep["calibration"] = to_json(*out.calibration);
  if (out.gamma) rep["gamma"] = {{"gamma1", out.gamma->gamma}, {"history", out.gamma->history}};
  s.open("metrics.json") << rep.dump(2) << '\n';
  if (write_trials) {
    auto f = s.open("trials.csv");
    write_trial_records(f, out.trials);
  }
  s.finish();
  std::cout << "fdr=" << fmt(m.fdr) << " (se " << fmt(m.fdr_se) << ") fnr=" << fmt(m.fnr) << " (se "
            << fmt(m.fnr_se) << ") E[N]=" << fmt(m.mean_stream_n) << '\n';
  return 0;
}

int cmd_calibrate(const Common& opts) {
  Session s("calibrate", opts);
  SimulationConfig cfg = simulation_config_from_json(s.read_config());
  if (opts.seed) cfg.seed = *opts.seed;
  s.set_resolved(to_json(cfg), cfg.seed);
  const SimpleModel model(cfg.family, cfg.null_param, cfg.alt_param);
  const StepVector alpha = scale_for_fdr(scheme_steps(cfg.scheme, cfg.q1, cfg.J), cfg.q1);
  const auto rep = s.timed("calibrate", [&] {
    return mc_truncated_critical_values(model, alpha, cfg.n_bar, cfg.calibration_reps, cfg.seed, opts.workers);
  });
  json j = s.report_header();
  j["calibration"] = to_json(rep);
  s.open("calibration.json") << j.dump(2) << '\n';
  s.finish();
  for (std::size_t k = 0; k < rep.B.size(); ++k)
    std::cout << "k=" << k + 1 << " alpha=" << fmt(rep.alpha[k]) << " B=" << fmt(rep.B[k])
              << " achieved=" << fmt(rep.achieved[k]) << '\n';
  return 0;
}

int cmd_fss(const Common& opts) {
  Session s("fss", opts);
  FssConfig cfg = fss_config_from_json(s.read_config());
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.workers = opts.workers;
  s.set_resolved(to_json(cfg), cfg.seed);
  const auto r = s.timed("search", [&] { return find_matching_fss(cfg); });
  {
    auto f = s.open("fss.csv");
    f << "family,J,m0,target_fnr,n_fss,found,achieved_fnr,achieved_fnr_se,achieved_fdr,within_tolerance\n";
    f << to_string(cfg.family) << ',' << cfg.J << ',' << cfg.m0 << ',' << fmt(cfg.target_fnr) << ','
      << r.n_fss << ',' << (r.found ? 1 : 0) << ',' << fmt(r.achieved_fnr) << ','
      << fmt(r.achieved_fnr_se) << ',' << fmt(r.achieved_fdr) << ',' << (r.within_tolerance ? 1 : 0)
      << '\n';
  }
  json j = s.report_header();
  j["n_fss"] = r.n_fss;
  j["found"] = r.found;
  j["achieved_fnr"] = r.achieved_fnr;
  j["achieved_fnr_se"] = r.achieved_fnr_se;
  j["achieved_fdr"] = r.achieved_fdr;
  j["within_tolerance"] = r.within_tolerance;
  j["probes"] = r.probes;
  s.open("fss.json") << j.dump(2) << '\n';
  s.finish();
  std::cout << "n_fss=" << r.n_fss << (r.found ? "" : " (not found)") << " fnr=" << fmt(r.achieved_fnr)
            << '\n';
  return 0;
}

int cmd_verify_lp(std::size_t j_min, std::size_t j_max, const std::vector<std::string>& schemes,
                  std::uint64_t seed, const std::string& out) {
  if (j_min < 2 || j_min > j_max) throw ConfigError("--j-min", "need 2 <= j-min <= j-max");
  if (j_max > kMaxLpJ) throw DomainError("LP oracle is limited to J <= " + std::to_string(kMaxLpJ));
  std::ostringstream table;
  table << "J,m0,scheme,lp,d,gap,pass\n";
  std::size_t failures = 0;
  for (std::size_t J = j_min; J <= j_max; ++J) {
    for (const auto& scheme : schemes) {
      std::optional<StepVector> alpha;
      if (scheme == "bh") alpha = bh_steps(0.2, J);
      else if (scheme == "bl") alpha = bl_steps(0.05, J);
      else if (scheme == "random") {
        Rng rng = make_rng(seed, StreamPurpose::Misc, J);
        std::vector<double> v(J);
        for (double& x : v) x = 0.01 + 0.49 * uniform_open01(rng);
        std::sort(v.begin(), v.end());
        alpha = StepVector(v);
      } else {
        throw ConfigError("--schemes", "unknown scheme '" + scheme + "' (bh, bl, random)");
      }
      for (std::size_t m0 = 0; m0 <= J; ++m0) {
        const VerifyRow r = verify_bound(*alpha, m0, scheme);
        failures += !r.pass;
        table << r.J << ',' << r.m0 << ',' << r.scheme << ',' << fmt(r.lp) << ',' << fmt(r.d) << ','
              << fmt(r.gap) << ',' << (r.pass ? "pass" : "FAIL") << '\n';
      }
    }
  }
  std::cout << table.str();
  std::cout << "# " << failures << " instance(s) outside tolerance\n";
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "verify_lp.csv") << table.str();
  }
  return 0;
}

int cmd_yellowcard(const Common& opts, const std::string& csv) {
  Session s("yellowcard", opts);
  YellowCardConfig cfg;
  json cj = json::object();
  if (!opts.config.empty()) cj = s.read_config();
  {
    Fields f(cj, "");
    cfg.q1 = f.real("q1", 0.05);
    cfg.q2 = f.real("q2", 0.15);
    if (f.has("p_h")) cfg.p_h = f.real("p_h");
    if (f.has("p_g")) cfg.p_g = f.real("p_g");
    cfg.top_n = f.count("top_n", 1800);
    cfg.wald.rho = f.real("wald_rho", 0.583);
    cfg.all_null = f.boolean("all_null", false);
    cfg.max_steps = f.integer("max_steps", 100000);
    if (f.has("seed")) cfg.seed = f.seed("seed");
    else if (!opts.seed) throw ConfigError("seed", "is required (config field or --seed)");
    f.finish();
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (!(cfg.q1 > 0.0 && cfg.q1 < 1.0)) throw ConfigError("q1", "must lie in (0, 1)");
  if (!(cfg.q2 > 0.0 && cfg.q2 < 1.0)) throw ConfigError("q2", "must lie in (0, 1)");
  if (cfg.top_n < 2) throw ConfigError("top_n", "must be >= 2");

  const DrugTable table = s.timed("load", [&] { return load_drug_table(csv); });
  for (const auto& r : table.rejected)
    std::cerr << csv << ":" << r.line << ": row rejected: " << r.reason << '\n';
  cfg.records = table.records;

  json resolved = {{"csv", csv}, {"q1", cfg.q1}, {"q2", cfg.q2}, {"top_n", cfg.top_n},
                   {"wald_rho", cfg.wald.rho}, {"all_null", cfg.all_null}, {"seed", cfg.seed},
                   {"records", cfg.records.size()}, {"rejected_rows", table.rejected.size()}};
  if (cfg.p_h) resolved["p_h"] = *cfg.p_h;
  if (cfg.p_g) resolved["p_g"] = *cfg.p_g;
  s.set_resolved(resolved, cfg.seed);

  const auto res = s.timed("monitor", [&] { return run_monitoring(cfg); });
  {
    auto f = s.open("yellowcard_decisions.csv");
    write_monitoring_csv(f, res);
  }
  json j = s.report_header();
  j["run"] = monitoring_manifest(cfg, res);
  s.open("yellowcard_run.json") << j.dump(2) << '\n';
  s.finish();
  std::cout << "monitored " << res.rows.size() << " drugs: " << res.trial.R << " rejected, p_H="
            << fmt(res.p_h) << " p_G=" << fmt(res.p_g) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential step-down multiple testing: bounds, simulation, calibration, "
               "fixed-sample comparison, LP verification and report monitoring."};
  app.require_subcommand(1);
  Common opts;
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel level: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  app.set_version_flag("--version", kVersion);

  auto add_common = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("--config", opts.config, "JSON configuration file");
    sub->add_option("--seed", opts.seed, "Override the configured seed");
    sub->add_option("--workers", opts.workers, "Worker threads (0 = all cores)");
    sub->add_option("--out", opts.out, "Output directory (default $SEQFDR_OUT or ./out)");
  };

  std::string scheme = "bh";
  double q = 0.25;
  std::size_t J = 10;
  std::optional<std::size_t> m;
  std::optional<double> target;
  auto* bounds = app.add_subcommand("bounds", "Print D(alpha, m) for a step-value scheme");
  bounds->add_option("--scheme", scheme, "bh or bl");
  bounds->add_option("--q", q, "Scheme level q");
  bounds->add_option("--J", J, "Number of hypotheses");
  bounds->add_option("--m", m, "Only this m");
  bounds->add_option("--target", target, "Scale the vector to this bound (default q)");

  auto* simulate = app.add_subcommand("simulate", "Run the sequential procedure on copula data");
  add_common(simulate, true);
  auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo critical values for the rejective procedure");
  add_common(calibrate, true);
  auto* fss = app.add_subcommand("fss", "Find the matching fixed sample size");
  add_common(fss, true);

  std::size_t j_min = 2, j_max = 4;
  std::vector<std::string> schemes{"bh", "bl", "random"};
  std::uint64_t lp_seed = 1;
  std::string lp_out;
  auto* verify = app.add_subcommand("verify-lp", "Compare the worst-case LP with D(alpha, m0)");
  verify->add_option("--j-min", j_min);
  verify->add_option("--j-max", j_max);
  verify->add_option("--schemes", schemes)->delimiter(',');
  verify->add_option("--seed", lp_seed, "Seed for the random scheme");
  verify->add_option("--out", lp_out, "Also write verify_lp.csv here");

  std::string csv;
  auto* yc = app.add_subcommand("yellowcard", "Monitor a drug-report table");
  yc->add_option("--csv", csv, "Drug table CSV")->required();
  add_common(yc, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    kernels::select(simd);
    if (bounds->parsed()) return cmd_bounds(scheme, q, J, m, target);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (calibrate->parsed()) return cmd_calibrate(opts);
    if (fss->parsed()) return cmd_fss(opts);
    if (verify->parsed()) return cmd_verify_lp(j_min, j_max, schemes, lp_seed, lp_out);
    if (yc->parsed()) return cmd_yellowcard(opts, csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

}  // namespace seqfdr::cli
