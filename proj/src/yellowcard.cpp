#include "seqfdr/yellowcard.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "seqfdr/core.hpp"
#include "seqfdr/datagen.hpp"
#include "seqfdr/error.hpp"

namespace seqfdr {

namespace {

std::vector<std::string> split_csv(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw DataError(where + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::int64_t parse_int(const std::string& s, const std::string& where, const char* col) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end || errno) throw DataError(where + ": column " + col + ": malformed integer '" + t + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& where, const char* col) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end) throw DataError(where + ": column " + col + ": malformed number '" + t + "'");
  return v;
}

}  // namespace

DrugTable parse_drug_table(std::istream& is, const std::string& source) {
  DrugTable table;
  std::string line;
  std::size_t lineno = 0;
  auto getline = [&]() {
    if (!std::getline(is, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  do {
    if (!getline()) return table;
  } while (trim(line).empty());

  const char* names[] = {"name", "amnesia_count", "other_count", "years", "cluster"};
  std::size_t col[5];
  {
    auto header = split_csv(line, source + ":" + std::to_string(lineno));
    for (auto& h : header) h = trim(h);
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    for (int c = 0; c < 5; ++c) {
      const auto it = std::find(header.begin(), header.end(), names[c]);
      if (it == header.end())
        throw DataError(source + ":" + std::to_string(lineno) + ": missing column '" + names[c] + "'");
      col[c] = static_cast<std::size_t>(it - header.begin());
    }
  }
  const std::size_t need = *std::max_element(std::begin(col), std::end(col)) + 1;

  while (getline()) {
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto f = split_csv(line, where);
    if (f.size() < need) throw DataError(where + ": expected at least " + std::to_string(need) + " fields");
    DrugRecord r;
    r.name = trim(f[col[0]]);
    r.amnesia_count = parse_int(f[col[1]], where, names[1]);
    r.other_count = parse_int(f[col[2]], where, names[2]);
    r.years = parse_real(f[col[3]], where, names[3]);
    r.cluster = static_cast<int>(parse_int(f[col[4]], where, names[4]));
    std::string why;
    if (r.name.empty()) why = "empty drug name";
    else if (r.amnesia_count < 0 || r.other_count < 0) why = "negative report count";
    else if (!(r.years > 0.0) || !std::isfinite(r.years)) why = "years must be positive";
    else if (r.cluster < 0) why = "negative cluster id";
    if (!why.empty()) table.rejected.push_back({lineno, why});
    else table.records.push_back(std::move(r));
  }
  return table;
}

DrugTable load_drug_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  return parse_drug_table(in, path);
}

Rates derive_rates(const DrugRecord& r) {
  return {(static_cast<double>(r.amnesia_count) + 1.0) / r.years,
          (static_cast<double>(r.other_count) + 1.0) / r.years};
}

double amnesia_fraction(const Rates& rates) { return rates.amnesia / (rates.amnesia + rates.other); }
double amnesia_fraction(const DrugRecord& r) { return amnesia_fraction(derive_rates(r)); }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::pair<double, double> thresholds(const std::vector<DrugRecord>& records) {
  if (records.size() < 2) throw DomainError("thresholds need at least 2 drug records");
  std::vector<double> p;
  p.reserve(records.size());
  for (const auto& r : records) p.push_back(amnesia_fraction(r));
  return {percentile(p, 0.5), percentile(p, 0.9)};
}

MonitoringResult run_monitoring(const YellowCardConfig& cfg) {
  if (cfg.records.size() < 2) throw DomainError("monitoring needs at least 2 drug records");
  MonitoringResult res;
  const auto th = thresholds(cfg.records);
  res.p_h = cfg.p_h.value_or(th.first);
  res.p_g = cfg.p_g.value_or(th.second);
  if (!(0.0 < res.p_h && res.p_h < res.p_g && res.p_g < 1.0))
    throw DomainError("need 0 < p_H < p_G < 1 (got p_H = " + std::to_string(res.p_h) +
                      ", p_G = " + std::to_string(res.p_g) + ")");

  // Top-N by total reports; ties keep table order.
  std::vector<std::size_t> order(cfg.records.size());
  std::iota(order.begin(), order.end(), 0);
  auto total = [&](std::size_t i) { return cfg.records[i].amnesia_count + cfg.records[i].other_count; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return total(x) > total(y); });
  order.resize(std::min(order.size(), std::max<std::size_t>(cfg.top_n, 2)));
  const std::size_t J = order.size();

  // One correlation per cluster of the full table, in increasing id order.
  std::set<int> ids;
  for (const auto& r : cfg.records) ids.insert(r.cluster);
  {
    Rng rng = make_rng(cfg.seed, StreamPurpose::Clusters, 0);
    std::gamma_distribution<double> g4(4.0, 1.0), g2(2.0, 1.0);
    for (int id : ids) {
      const double x = g4(rng), y = g2(rng);
      res.rho_of_cluster[id] = 2.0 * (x / (x + y)) - 1.0;
    }
  }

  BlockClusters bc;
  std::map<int, std::size_t> compact;
  std::vector<MarginalSpec> marginals;
  for (std::size_t idx : order) {
    const DrugRecord& r = cfg.records[idx];
    res.monitored.push_back(r.name);
    auto [it, fresh] = compact.try_emplace(r.cluster, compact.size());
    if (fresh) bc.rho_of_cluster.push_back(res.rho_of_cluster.at(r.cluster));
    bc.cluster_of.push_back(it->second);

    Rates rates = derive_rates(r);
    const double p = amnesia_fraction(rates);
    if (cfg.all_null) {
      const double sum = rates.amnesia + rates.other;
      rates = {res.p_h * sum, (1.0 - res.p_h) * sum};
      res.truth.push_back(Truth::Null);
    } else {
      res.truth.push_back(p <= res.p_h ? Truth::Null : p >= res.p_g ? Truth::Alternative : Truth::Unlabeled);
    }
    marginals.emplace_back(ReportPairMarginal{rates.amnesia, rates.other});
  }

  const StepVector alpha = scale_for_fdr(bh_steps(cfg.q1, J), cfg.q1);
  const StepVector beta = scale_for_fdr(bh_steps(cfg.q2, J), cfg.q2);
  res.alpha.assign(alpha.values().begin(), alpha.values().end());
  res.beta.assign(beta.values().begin(), beta.values().end());
  const auto crit = stepdown_critical_values(alpha, beta, cfg.wald);
  const auto phi = std::make_shared<const Standardizer>(make_standardizer(crit));
  const SimpleModel model(Family::ConditionalBinomial, res.p_h, res.p_g);

  const auto sampler = std::make_shared<const CopulaSampler>(CopulaConfig{J, bc});
  auto panel = std::make_shared<CopulaPanel>(sampler, marginals, make_rng(cfg.seed, StreamPurpose::Trials, 0));
  auto obs = panel->sources();
  SourceList src;
  for (auto& o : obs) src.push_back(std::make_unique<LlrStream>(std::move(o), model, phi));
  res.trial = run_open_ended(src, phi->a(), phi->b(), cfg.max_steps);
  res.trial.tally(res.truth);

  std::vector<std::size_t> rows(J);
  std::iota(rows.begin(), rows.end(), 0);
  const auto& d = res.trial.decisions;
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t x, std::size_t y) {
    const int ax = d[x].action == Action::Accept ? 0 : 1;
    const int ay = d[y].action == Action::Accept ? 0 : 1;
    if (ax != ay) return ax < ay;
    if (d[x].step != d[y].step) return d[x].step < d[y].step;
    return d[x].level < d[y].level;
  });
  for (std::size_t j : rows)
    res.rows.push_back({res.monitored[j], d[j].action, d[j].step, d[j].level, d[j].truncated});
  return res;
}

void write_monitoring_csv(std::ostream& os, const MonitoringResult& r) {
  os << "drug,action,termination_step,termination_level,truncated_flag\n";
  for (const auto& row : r.rows) {
    std::string name = row.drug;
    if (name.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : name) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      name = q + "\"";
    }
    os << name << ',' << to_string(row.action) << ',' << row.step << ',' << row.level << ','
       << (row.truncated ? 1 : 0) << '\n';
  }
}

nlohmann::json monitoring_manifest(const YellowCardConfig& cfg, const MonitoringResult& r) {
  nlohmann::json rho = nlohmann::json::object();
  for (const auto& [id, v] : r.rho_of_cluster) rho[std::to_string(id)] = v;
  std::size_t nulls = 0, alts = 0;
  for (Truth t : r.truth) {
    nulls += t == Truth::Null;
    alts += t == Truth::Alternative;
  }
  return {{"seed", cfg.seed},
          {"q1", cfg.q1},
          {"q2", cfg.q2},
          {"p_h", r.p_h},
          {"p_g", r.p_g},
          {"top_n", cfg.top_n},
          {"J", r.monitored.size()},
          {"all_null", cfg.all_null},
          {"statistic", "conditional_binomial"},
          {"wald_rho", cfg.wald.rho},
          {"rho_of_cluster", rho},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"labeled_null", nulls},
          {"labeled_alternative", alts},
          {"rejections", r.trial.R},
          {"false_rejections", r.trial.V},
          {"false_acceptances", r.trial.W}};
}

}  // namespace seqfdr
