#pragma once

// Gaussian-copula generation of dependent count streams.

#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <variant>
#include <vector>

#include "seqfdr/procedures.hpp"
#include "seqfdr/rng.hpp"
#include "seqfdr/sprt.hpp"

namespace seqfdr {

/// Dense row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> data;

  Matrix() = default;
  explicit Matrix(std::size_t size) : n(size), data(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  static Matrix identity(std::size_t size);
};

/// Sigma_jj' = rho^|j - j'|.
struct Toeplitz {
  double rho = 0.0;
};

/// Independent clusters; inside cluster c, Sigma = rho_c^|r - r'| where r is
/// a stream's rank among the members of its cluster.
struct BlockClusters {
  std::vector<std::size_t> cluster_of;
  std::vector<double> rho_of_cluster;
};

struct CopulaConfig {
  std::size_t J = 0;
  std::variant<Toeplitz, BlockClusters> structure;
};

Matrix correlation_matrix(const CopulaConfig& config);

/// Lower-triangular L with L L^T = sigma. Throws NumericalError naming the
/// first nonpositive pivot.
Matrix cholesky(const Matrix& sigma);

/// Draws U = Phi(L Z). Block-structured configurations are factored one
/// cluster at a time.
class CopulaSampler {
 public:
  explicit CopulaSampler(const CopulaConfig& config);

  std::size_t size() const noexcept { return J_; }

  /// Writes J uniforms in (0, 1) to `u`.
  void sample(Rng& rng, std::span<double> u) const;

  /// Latent normal vector Y = L Z (before the probability transform).
  void sample_latent(Rng& rng, std::span<double> y) const;

 private:
  struct Block {
    std::vector<std::size_t> members;
    Matrix L;
  };
  std::size_t J_ = 0;
  std::vector<Block> blocks_;
};

struct BernoulliMarginal {
  double p = 0.5;
};
struct PoissonMarginal {
  double lambda = 1.0;
};
/// Yellow-card style compound step: amnesia and other report counts.
struct ReportPairMarginal {
  double lambda_amn = 1.0;
  double lambda_other = 1.0;
};

using MarginalSpec = std::variant<BernoulliMarginal, PoissonMarginal, ReportPairMarginal>;

void validate(const MarginalSpec& spec);

/// Inverse CDF of a Poisson law, tabulated on a window that carries all but
/// a negligible amount of mass.
class PoissonTable {
 public:
  explicit PoissonTable(double lambda);

  double lambda() const noexcept { return lambda_; }
  std::int64_t offset() const noexcept { return lo_; }
  /// cdf()[k] = F(offset + k); the last entry is exactly 1.
  std::span<const double> cdf() const noexcept { return cdf_; }

  /// min{n >= 0 : F(n) >= u}.
  std::int64_t invert(double u) const;

 private:
  double lambda_;
  std::int64_t lo_ = 0;
  std::vector<double> cdf_;
};

/// Bernoulli and Poisson inversion of one uniform. ReportPair needs two;
/// use invert_report_pair.
Observation invert_marginal(const MarginalSpec& spec, double u);
Observation invert_report_pair(const ReportPairMarginal& spec, double u_amn, double u_other);

/// Lazily generated panel of J dependent streams. Each time step draws one
/// copula vector (two for ReportPair margins) from the panel's own RNG.
class CopulaPanel : public std::enable_shared_from_this<CopulaPanel> {
 public:
  static constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

  CopulaPanel(std::shared_ptr<const CopulaSampler> sampler, std::vector<MarginalSpec> marginals,
              Rng rng, std::int64_t horizon = kUnbounded);

  std::size_t size() const noexcept { return marginals_.size(); }
  std::int64_t horizon() const noexcept { return horizon_; }

  /// Observation of stream j at step n (1-based). Steps must be requested in
  /// nondecreasing order; only the latest step is retained. Returns nullopt
  /// past the horizon.
  std::optional<Observation> at(std::size_t j, std::int64_t n);

  /// Per-stream pull sources sharing this panel.
  std::vector<std::unique_ptr<ObservationSource>> sources();

 private:
  void advance();

  std::shared_ptr<const CopulaSampler> sampler_;
  std::vector<MarginalSpec> marginals_;
  Rng rng_;
  std::int64_t horizon_;
  std::int64_t step_ = 0;
  std::vector<Observation> row_;

  struct Group {
    std::vector<std::size_t> members;
    MarginalSpec spec;
    std::shared_ptr<const PoissonTable> table;        // Poisson
    std::shared_ptr<const PoissonTable> table_other;  // ReportPair
  };
  std::vector<Group> groups_;
  bool pairs_ = false;
  std::vector<double> u_, u2_, buf_, out_;
};

/// Null or alternative margins per stream. Unlabeled streams get the null.
std::vector<MarginalSpec> marginals_for_truth(Family family, double null_param, double alt_param,
                                              std::span<const Truth> truth);

/// First m0 streams null, the rest alternative.
std::vector<Truth> first_m0_null(std::size_t J, std::size_t m0);

/// Replayable record of standardized statistic paths.
struct FixtureTrial {
  std::uint64_t trial = 0;
  std::vector<std::vector<double>> paths;  // paths[stream][step-1]
};

/// Wraps a source and keeps every value it yields.
class RecordingSource final : public StreamSource {
 public:
  explicit RecordingSource(std::unique_ptr<StreamSource> inner) : inner_(std::move(inner)) {}
  std::optional<double> next() override {
    auto v = inner_->next();
    if (v) seen_.push_back(*v);
    return v;
  }
  const std::vector<double>& values() const noexcept { return seen_; }

 private:
  std::unique_ptr<StreamSource> inner_;
  std::vector<double> seen_;
};

/// Line format "trial,step,stream,value" with a header row; values printed
/// with 17 significant digits so they round-trip exactly.
void write_fixture(std::ostream& os, std::span<const FixtureTrial> trials);
std::vector<FixtureTrial> read_fixture(std::istream& is);
SourceList replay_sources(const FixtureTrial& trial);

}  // namespace seqfdr
