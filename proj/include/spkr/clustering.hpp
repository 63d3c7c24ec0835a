#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "spkr/backends.hpp"

namespace spkr {

enum class Assignment { Soft, Hard };

struct OnlineConfig {
  // Prior mass of the unknown-speaker class (online VB only).
  double p_new = 0.01;
  // Decision threshold (threshold clustering only).
  double tau = 0.0;
  int n_update_iters = 1;
  Assignment assignment = Assignment::Soft;
};

/// q(y) = N(m, s I) under spherical PLDA, kept in natural form (precision, eta).
struct GaussianSphericalPosterior {
  Vector m;
  double s = 0.0;
  double precision = 0.0;
  Vector eta;
};

/// q(y) = N(m, S) for diagonal or full PLDA. Experimental.
struct GaussianFullPosterior {
  Eigen::VectorXd m;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd precision;
  Eigen::VectorXd eta;
};

/// q(y) = VMF(m, r) under PSDA; r = |eta|, m = eta / r.
struct VmfPosterior {
  Vector m;
  double r = 0.0;
  Vector eta;
};

using ClusterPosterior = std::variant<GaussianSphericalPosterior, GaussianFullPosterior, VmfPosterior>;

using OnlineModel = std::variant<PldaModel, PsdaModel>;

struct StepOutcome {
  // Posterior over the K clusters that existed before the step plus the
  // unknown-speaker class (last entry). One-hot for hard decisions.
  std::vector<double> gamma;
  // Index of the winning class; equals the previous K when a cluster was created.
  std::size_t assigned = 0;
  bool created = false;
  std::size_t num_clusters = 0;  // K after the step
};

// --- online variational Bayes ----------------------------------------------

/// Prior p(y) written as a posterior; initial state of every new cluster.
ClusterPosterior prior_posterior(const OnlineModel& model);

/// E_q[log p(x | y)].
double expected_loglik(const ClusterPosterior& post, const Embedding& x, const OnlineModel& model);

/// Natural-parameter update of q(y) with observation x at weight gamma.
/// gamma == 0 returns the input unchanged.
ClusterPosterior update_posterior(const ClusterPosterior& post, const Embedding& x, double gamma,
                                  const OnlineModel& model);

/// Single-writer streaming state of the incremental VB clusterer.
class OnlineVbClusterer {
 public:
  OnlineVbClusterer(OnlineModel model, OnlineConfig config);

  /// q(z_t) over existing clusters plus the unknown class, normalized in the
  /// log domain. K = 0 yields {1}.
  std::vector<double> assignment_posterior(const Embedding& x) const;

  StepOutcome step(const Embedding& x);

  std::size_t num_clusters() const noexcept { return clusters_.size(); }
  const std::vector<ClusterPosterior>& clusters() const noexcept { return clusters_; }
  const OnlineModel& model() const noexcept { return model_; }
  const OnlineConfig& config() const noexcept { return config_; }

 private:
  std::vector<double> posterior_over(std::span<const ClusterPosterior> clusters, const ClusterPosterior& unknown,
                                     const Embedding& x) const;

  OnlineModel model_;
  OnlineConfig config_;
  ClusterPosterior prior_;
  std::vector<ClusterPosterior> clusters_;
};

// --- threshold clustering --------------------------------------------------

/// Multi-enrollment scorer: score(enrollment set, test set).
using MultiScorer = std::function<double(std::span<const Embedding>, std::span<const Embedding>)>;

/// Wraps a back-end model and scoring mode; embeddings must already be preprocessed.
MultiScorer make_scorer(BackendModel model, ScoreMode mode);

/// Threshold-based online clustering. Clusters keep their raw member
/// embeddings, so memory grows with the stream.
class ThresholdClusterer {
 public:
  ThresholdClusterer(MultiScorer scorer, double tau);

  StepOutcome step(const Embedding& x);

  std::size_t num_clusters() const noexcept { return clusters_.size(); }
  const std::vector<std::vector<Embedding>>& clusters() const noexcept { return clusters_; }
  // Scores of the last step against each cluster that existed before it.
  const std::vector<double>& last_scores() const noexcept { return last_scores_; }

 private:
  MultiScorer scorer_;
  double tau_;
  std::vector<std::vector<Embedding>> clusters_;
  std::vector<double> last_scores_;
};

// --- streams ---------------------------------------------------------------

struct StreamResult {
  std::vector<std::size_t> labels;
  std::vector<StepOutcome> outcomes;
  std::size_t num_clusters = 0;
};

StreamResult run_stream(std::span<const Embedding> events, OnlineVbClusterer& clusterer);
StreamResult run_stream(std::span<const Embedding> events, ThresholdClusterer& clusterer);
StreamResult run_stream_vb(std::span<const Embedding> events, OnlineModel model, OnlineConfig config);
StreamResult run_stream_threshold(std::span<const Embedding> events, MultiScorer scorer, double tau);

}  // namespace spkr
