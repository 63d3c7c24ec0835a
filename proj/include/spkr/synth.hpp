#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spkr/backends.hpp"
#include "spkr/clustering.hpp"

namespace spkr {

/// SplitMix64 in counter form: output i is mix(seed + (i + 1) * golden_gamma).
/// Satisfies the UniformRandomBitGenerator requirements.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t state_;
};

/// Finalizer of SplitMix64; also used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t z) noexcept;
/// Seed of the sub-stream `index` of `seed`; sub-streams do not overlap in practice.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// --- generators ------------------------------------------------------------

/// Gaussian generator parameters. Covariances only need to be positive
/// semi-definite, so degenerate priors (B = 0) are allowed here.
struct PldaGenerator {
  Vector mu;
  Eigen::MatrixXd between;
  Eigen::MatrixXd within;

  static PldaGenerator spherical(std::size_t dim, double between_var, double within_var);
  static PldaGenerator from_model(const PldaModel& m);
};

struct PsdaGenerator {
  Vector mu;  // unit mean direction
  double b = 0.0;
  double w = 0.0;

  static PsdaGenerator from_model(const PsdaModel& m);
};

using GeneratorParams = std::variant<PldaGenerator, PsdaGenerator>;

enum class StreamOrder { Grouped, Shuffled, Interleaved };

std::string_view to_string(StreamOrder order) noexcept;
StreamOrder parse_stream_order(std::string_view name);

struct SynthSpec {
  GeneratorParams model;
  std::size_t n_speakers = 1;
  // Per-speaker embedding count drawn uniformly from [count_min, count_max].
  std::size_t count_min = 1;
  std::size_t count_max = 1;
  std::uint64_t seed = 0;
  StreamOrder stream_order = StreamOrder::Grouped;
};

struct SynthData {
  std::vector<Embedding> embeddings;  // grouped by speaker
  std::vector<std::string> labels;    // speaker id per embedding
  std::vector<Vector> speakers;       // latent identity variable per speaker
  std::vector<std::size_t> order;     // stream order as indices into embeddings
};

/// Draws speakers and embeddings. Speaker i uses sub-stream split_seed(seed, i),
/// so output is a pure function of the SynthSpec.
SynthData sample(const SynthSpec& spec);
/// As sample(), requiring a Gaussian or a VMF generator respectively.
SynthData sample_plda(const SynthSpec& spec);
SynthData sample_psda(const SynthSpec& spec);

/// Events in stream order.
std::vector<Embedding> stream_events(const SynthData& data);
std::vector<std::string> stream_labels(const SynthData& data);

/// n draws from N(mean, cov) with cov positive semi-definite.
std::vector<Vector> sample_gaussian(std::span<const double> mean, const Eigen::MatrixXd& cov, std::size_t n,
                                    SplitMix64& rng);

/// n unit vectors from VMF(mean_dir, kappa): rejection sampling of the cosine
/// to the mean direction plus a uniform tangent direction.
std::vector<Vector> sample_vmf(std::span<const double> mean_dir, double kappa, std::size_t n, std::uint64_t seed);
std::vector<Vector> sample_vmf(std::span<const double> mean_dir, double kappa, std::size_t n, SplitMix64& rng);

// --- Monte-Carlo oracle ----------------------------------------------------

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// log E_{y ~ prior}[prod_j p(x_j | y)] by simple Monte Carlo over prior draws,
/// with a jackknife standard error of the log-mean-exp.
McEstimate mc_log_marginal(std::span<const Embedding> xs, const OnlineModel& model, std::size_t n_samples,
                           std::uint64_t seed);

// --- protocols -------------------------------------------------------------

struct ProtocolConfig {
  std::size_t n_enroll = 1;
  std::size_t n_test = 1;
  std::size_t n_trials = 1000;  // half target, half impostor
  std::uint64_t seed = 0;
};

/// Balanced target/impostor trials. Each side is drawn from one speaker without
/// replacement; in target trials enrollment and test sets are disjoint.
std::vector<Trial> make_protocol(std::span<const Embedding> embeddings, std::span<const std::string> labels,
                                 const ProtocolConfig& config);

/// Concatenation of protocols.
std::vector<Trial> pool_protocols(std::span<const std::vector<Trial>> protocols);

}  // namespace spkr
