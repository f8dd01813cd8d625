#include "seqfdr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>

#include "seqfdr/error.hpp"
#include "seqfdr/kernels.hpp"

namespace seqfdr {

Matrix Matrix::identity(std::size_t size) {
  Matrix m(size);
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

namespace {

void check_rho(double rho, const std::string& what) {
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError(what + " correlation must lie in (-1, 1)");
}

Matrix ar1(std::size_t n, double rho) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = i == j ? 1.0 : std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
  return m;
}

// Members of each cluster, in stream order.
std::vector<std::vector<std::size_t>> cluster_members(std::size_t J, const BlockClusters& bc) {
  if (bc.cluster_of.size() != J) throw DomainError("cluster_of must have J entries");
  std::vector<std::vector<std::size_t>> members(bc.rho_of_cluster.size());
  for (std::size_t j = 0; j < J; ++j) {
    const std::size_t c = bc.cluster_of[j];
    if (c >= members.size())
      throw DomainError("stream " + std::to_string(j + 1) + " has cluster " + std::to_string(c) +
                        " without a correlation");
    members[c].push_back(j);
  }
  for (std::size_t c = 0; c < members.size(); ++c)
    check_rho(bc.rho_of_cluster[c], "cluster " + std::to_string(c));
  return members;
}

}  // namespace

Matrix correlation_matrix(const CopulaConfig& config) {
  if (config.J == 0) throw DomainError("copula needs J >= 1");
  if (const auto* t = std::get_if<Toeplitz>(&config.structure)) {
    check_rho(t->rho, "Toeplitz");
    return ar1(config.J, t->rho);
  }
  const auto& bc = std::get<BlockClusters>(config.structure);
  Matrix m = Matrix::identity(config.J);
  const auto members = cluster_members(config.J, bc);
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& mem = members[c];
    for (std::size_t r = 0; r < mem.size(); ++r)
      for (std::size_t s = 0; s < mem.size(); ++s)
        if (r != s)
          m(mem[r], mem[s]) =
              std::pow(bc.rho_of_cluster[c], static_cast<double>(r > s ? r - s : s - r));
  }
  return m;
}

Matrix cholesky(const Matrix& sigma) {
  const std::size_t n = sigma.n;
  Matrix L(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = sigma(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalError("matrix is not positive definite: pivot " + std::to_string(j + 1) +
                           " = " + std::to_string(d));
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / ljj;
    }
  }
  return L;
}

CopulaSampler::CopulaSampler(const CopulaConfig& config) : J_(config.J) {
  if (J_ == 0) throw DomainError("copula needs J >= 1");
  if (const auto* t = std::get_if<Toeplitz>(&config.structure)) {
    check_rho(t->rho, "Toeplitz");
    Block b;
    b.members.resize(J_);
    for (std::size_t j = 0; j < J_; ++j) b.members[j] = j;
    b.L = cholesky(ar1(J_, t->rho));
    blocks_.push_back(std::move(b));
    return;
  }
  const auto& bc = std::get<BlockClusters>(config.structure);
  auto members = cluster_members(J_, bc);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    Block b;
    b.L = cholesky(ar1(members[c].size(), bc.rho_of_cluster[c]));
    b.members = std::move(members[c]);
    blocks_.push_back(std::move(b));
  }
}

void CopulaSampler::sample_latent(Rng& rng, std::span<double> y) const {
  if (y.size() != J_) throw DomainError("latent buffer has the wrong size");
  thread_local std::vector<double> z, yb;
  std::normal_distribution<double> normal;
  const auto& k = kernels::active();
  for (const Block& b : blocks_) {
    const std::size_t n = b.members.size();
    z.resize(n);
    yb.resize(n);
    for (double& v : z) v = normal(rng);
    k.lower_tri_matvec(b.L.data.data(), z.data(), yb.data(), n);
    for (std::size_t r = 0; r < n; ++r) y[b.members[r]] = yb[r];
  }
}

void CopulaSampler::sample(Rng& rng, std::span<double> u) const {
  sample_latent(rng, u);
  kernels::active().normal_cdf(u.data(), u.data(), u.size());
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - 0x1.0p-53;
  for (double& v : u) v = std::clamp(v, lo, hi);
}

void validate(const MarginalSpec& spec) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BernoulliMarginal>) {
          if (!(m.p > 0.0 && m.p < 1.0)) throw DomainError("Bernoulli p must lie in (0, 1)");
        } else if constexpr (std::is_same_v<T, PoissonMarginal>) {
          if (!(m.lambda > 0.0) || !std::isfinite(m.lambda))
            throw DomainError("Poisson lambda must be positive");
        } else {
          if (!(m.lambda_amn > 0.0) || !(m.lambda_other > 0.0) || !std::isfinite(m.lambda_amn) ||
              !std::isfinite(m.lambda_other))
            throw DomainError("report rates must be positive");
        }
      },
      spec);
}

PoissonTable::PoissonTable(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda) || lambda > 1e8)
    throw DomainError("Poisson lambda must lie in (0, 1e8]");
  const double sd = std::sqrt(lambda);
  // Mass below lo and above hi is far below double resolution.
  lo_ = static_cast<std::int64_t>(std::max(0.0, std::floor(lambda - 12.0 * sd - 10.0)));
  const auto hi = static_cast<std::int64_t>(std::ceil(lambda + 15.0 * sd + 40.0));
  const double log_lambda = std::log(lambda);
  double acc = 0.0;
  cdf_.reserve(static_cast<std::size_t>(hi - lo_ + 1));
  for (std::int64_t k = lo_; k <= hi; ++k) {
    const double kd = static_cast<double>(k);
    acc += std::exp(kd * log_lambda - lambda - std::lgamma(kd + 1.0));
    cdf_.push_back(std::min(acc, 1.0));
    if (acc >= 1.0) break;
  }
  cdf_.back() = 1.0;
}

std::int64_t PoissonTable::invert(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform must lie in (0, 1)");
  return lo_ + (std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

Observation invert_marginal(const MarginalSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform must lie in (0, 1)");
  validate(spec);
  if (const auto* b = std::get_if<BernoulliMarginal>(&spec)) return {u <= b->p ? 1 : 0, 1};
  if (const auto* p = std::get_if<PoissonMarginal>(&spec)) return {PoissonTable(p->lambda).invert(u), 1};
  throw DomainError("report pairs need two uniforms; use invert_report_pair");
}

Observation invert_report_pair(const ReportPairMarginal& spec, double u_amn, double u_other) {
  validate(spec);
  const std::int64_t a = PoissonTable(spec.lambda_amn).invert(u_amn);
  const std::int64_t o = PoissonTable(spec.lambda_other).invert(u_other);
  return {a, a + o};
}

namespace {

bool same_spec(const MarginalSpec& x, const MarginalSpec& y) {
  if (x.index() != y.index()) return false;
  if (const auto* b = std::get_if<BernoulliMarginal>(&x)) return b->p == std::get<BernoulliMarginal>(y).p;
  if (const auto* p = std::get_if<PoissonMarginal>(&x))
    return p->lambda == std::get<PoissonMarginal>(y).lambda;
  const auto& r = std::get<ReportPairMarginal>(x);
  const auto& s = std::get<ReportPairMarginal>(y);
  return r.lambda_amn == s.lambda_amn && r.lambda_other == s.lambda_other;
}

class PanelSource final : public ObservationSource {
 public:
  PanelSource(std::shared_ptr<CopulaPanel> panel, std::size_t j) : panel_(std::move(panel)), j_(j) {}
  std::optional<Observation> next() override { return panel_->at(j_, ++n_); }

 private:
  std::shared_ptr<CopulaPanel> panel_;
  std::size_t j_;
  std::int64_t n_ = 0;
};

}  // namespace

CopulaPanel::CopulaPanel(std::shared_ptr<const CopulaSampler> sampler,
                         std::vector<MarginalSpec> marginals, Rng rng, std::int64_t horizon)
    : sampler_(std::move(sampler)), marginals_(std::move(marginals)), rng_(std::move(rng)),
      horizon_(horizon) {
  if (!sampler_) throw DomainError("panel needs a copula sampler");
  const std::size_t J = marginals_.size();
  if (J != sampler_->size()) throw DomainError("marginal count does not match the copula dimension");
  if (horizon_ < 0) throw DomainError("horizon must be nonnegative");
  for (const auto& m : marginals_) validate(m);

  for (std::size_t j = 0; j < J; ++j) {
    auto it = std::find_if(groups_.begin(), groups_.end(),
                           [&](const Group& g) { return same_spec(g.spec, marginals_[j]); });
    if (it == groups_.end()) {
      Group g;
      g.spec = marginals_[j];
      if (const auto* p = std::get_if<PoissonMarginal>(&g.spec))
        g.table = std::make_shared<PoissonTable>(p->lambda);
      if (const auto* r = std::get_if<ReportPairMarginal>(&g.spec)) {
        g.table = std::make_shared<PoissonTable>(r->lambda_amn);
        g.table_other = std::make_shared<PoissonTable>(r->lambda_other);
        pairs_ = true;
      }
      groups_.push_back(std::move(g));
      it = std::prev(groups_.end());
    }
    it->members.push_back(j);
  }
  row_.resize(J);
  u_.resize(J);
  if (pairs_) u2_.resize(J);
  buf_.resize(J);
  out_.resize(J);
}

void CopulaPanel::advance() {
  ++step_;
  sampler_->sample(rng_, u_);
  if (pairs_) sampler_->sample(rng_, u2_);
  const auto& k = kernels::active();
  for (const Group& g : groups_) {
    const std::size_t n = g.members.size();
    for (std::size_t r = 0; r < n; ++r) buf_[r] = u_[g.members[r]];
    if (const auto* b = std::get_if<BernoulliMarginal>(&g.spec)) {
      k.bernoulli_indicator(buf_.data(), b->p, out_.data(), n);
      for (std::size_t r = 0; r < n; ++r) row_[g.members[r]] = {static_cast<std::int64_t>(out_[r]), 1};
      continue;
    }
    const auto cdf = g.table->cdf();
    k.table_invert(buf_.data(), cdf.data(), cdf.size(), out_.data(), n);
    for (std::size_t r = 0; r < n; ++r)
      row_[g.members[r]] = {g.table->offset() + static_cast<std::int64_t>(out_[r]), 1};
    if (g.table_other) {
      for (std::size_t r = 0; r < n; ++r) buf_[r] = u2_[g.members[r]];
      const auto cdf2 = g.table_other->cdf();
      k.table_invert(buf_.data(), cdf2.data(), cdf2.size(), out_.data(), n);
      for (std::size_t r = 0; r < n; ++r) {
        Observation& o = row_[g.members[r]];
        o.trials = o.count + g.table_other->offset() + static_cast<std::int64_t>(out_[r]);
      }
    }
  }
}

std::optional<Observation> CopulaPanel::at(std::size_t j, std::int64_t n) {
  if (j >= marginals_.size()) throw DomainError("stream index out of range");
  if (n < 1) throw DomainError("steps are 1-based");
  if (n > horizon_) return std::nullopt;
  if (n < step_) throw DomainError("panel steps cannot be revisited");
  while (step_ < n) advance();
  return row_[j];
}

std::vector<std::unique_ptr<ObservationSource>> CopulaPanel::sources() {
  std::vector<std::unique_ptr<ObservationSource>> out;
  out.reserve(marginals_.size());
  auto self = shared_from_this();
  for (std::size_t j = 0; j < marginals_.size(); ++j) out.push_back(std::make_unique<PanelSource>(self, j));
  return out;
}

std::vector<MarginalSpec> marginals_for_truth(Family family, double null_param, double alt_param,
                                              std::span<const Truth> truth) {
  std::vector<MarginalSpec> out;
  out.reserve(truth.size());
  for (Truth t : truth) {
    const double v = t == Truth::Alternative ? alt_param : null_param;
    switch (family) {
      case Family::Bernoulli: out.emplace_back(BernoulliMarginal{v}); break;
      case Family::Poisson: out.emplace_back(PoissonMarginal{v}); break;
      case Family::ConditionalBinomial:
        throw DomainError("conditional binomial streams need report rates, not a single parameter");
    }
  }
  return out;
}

std::vector<Truth> first_m0_null(std::size_t J, std::size_t m0) {
  if (m0 > J) throw DomainError("m0 exceeds J");
  std::vector<Truth> t(J, Truth::Alternative);
  std::fill(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(m0), Truth::Null);
  return t;
}

void write_fixture(std::ostream& os, std::span<const FixtureTrial> trials) {
  os << "trial,step,stream,value\n";
  char buf[64];
  for (const FixtureTrial& t : trials) {
    std::size_t longest = 0;
    for (const auto& p : t.paths) longest = std::max(longest, p.size());
    for (std::size_t n = 0; n < longest; ++n) {
      for (std::size_t j = 0; j < t.paths.size(); ++j) {
        if (n >= t.paths[j].size()) continue;
        std::snprintf(buf, sizeof buf, "%.17g", t.paths[j][n]);
        os << t.trial << ',' << n + 1 << ',' << j + 1 << ',' << buf << '\n';
      }
    }
  }
}

std::vector<FixtureTrial> read_fixture(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "trial,step,stream,value") throw DataError("fixture line 1: unexpected header");
  std::vector<FixtureTrial> out;
  std::map<std::uint64_t, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "fixture line " + std::to_string(lineno);
    std::stringstream ss(line);
    std::string f[4];
    for (int i = 0; i < 4; ++i)
      if (!std::getline(ss, f[i], ',')) throw DataError(where + ": expected 4 fields");
    char* end = nullptr;
    const auto trial = std::strtoull(f[0].c_str(), &end, 10);
    if (*end) throw DataError(where + ": bad trial id");
    const auto step = std::strtoll(f[1].c_str(), &end, 10);
    if (*end || step < 1) throw DataError(where + ": bad step");
    const auto stream = std::strtoll(f[2].c_str(), &end, 10);
    if (*end || stream < 1) throw DataError(where + ": bad stream");
    const double value = std::strtod(f[3].c_str(), &end);
    if (*end || f[3].empty()) throw DataError(where + ": bad value");

    auto [it, fresh] = index.try_emplace(trial, out.size());
    if (fresh) out.push_back(FixtureTrial{trial, {}});
    auto& paths = out[it->second].paths;
    const auto j = static_cast<std::size_t>(stream - 1);
    if (paths.size() <= j) paths.resize(j + 1);
    if (static_cast<std::size_t>(step) != paths[j].size() + 1)
      throw DataError(where + ": steps of a stream must be consecutive");
    paths[j].push_back(value);
  }
  return out;
}

SourceList replay_sources(const FixtureTrial& trial) {
  SourceList out;
  out.reserve(trial.paths.size());
  for (const auto& p : trial.paths) out.push_back(std::make_unique<ReplaySource>(p));
  return out;
}

}  // namespace seqfdr
