#include <algorithm>

#include "spkr/clustering.hpp"

namespace spkr {

MultiScorer make_scorer(BackendModel model, ScoreMode mode) {
  if (mode == ScoreMode::ByTheBook && std::holds_alternative<CosineModel>(model)) {
    fail(Errc::ModeMismatch, "make_scorer: by-the-book scoring requires a PLDA or PSDA model");
  }
  return [model = std::move(model), mode](std::span<const Embedding> enroll, std::span<const Embedding> test) {
    return score_trial(model, mode, enroll, test);
  };
}

ThresholdClusterer::ThresholdClusterer(MultiScorer scorer, double tau) : scorer_(std::move(scorer)), tau_(tau) {
  if (!scorer_) fail(Errc::InvalidArgument, "ThresholdClusterer: empty scorer");
}

StepOutcome ThresholdClusterer::step(const Embedding& x) {
  const std::size_t k = clusters_.size();
  last_scores_.assign(k, 0.0);
  const std::span<const Embedding> test(&x, 1);
  for (std::size_t i = 0; i < k; ++i) last_scores_[i] = scorer_(clusters_[i], test);

  StepOutcome out;
  out.gamma.assign(k + 1, 0.0);
  // The first event always opens a cluster.
  std::size_t best = k;
  if (k > 0) {
    const auto it = std::max_element(last_scores_.begin(), last_scores_.end());
    if (*it >= tau_) best = static_cast<std::size_t>(it - last_scores_.begin());
  }
  out.gamma[best] = 1.0;
  out.assigned = best;
  out.created = best == k;
  if (out.created) {
    clusters_.push_back({x});
  } else {
    clusters_[best].push_back(x);
  }
  out.num_clusters = clusters_.size();
  return out;
}

}  // namespace spkr
