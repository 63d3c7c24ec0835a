#include "spkr/clustering.hpp"

namespace spkr {

namespace {

template <typename Clusterer>
StreamResult fold(std::span<const Embedding> events, Clusterer& clusterer) {
  StreamResult result;
  result.labels.reserve(events.size());
  result.outcomes.reserve(events.size());
  for (const Embedding& x : events) {
    StepOutcome out = clusterer.step(x);
    result.labels.push_back(out.assigned);
    result.outcomes.push_back(std::move(out));
  }
  result.num_clusters = clusterer.num_clusters();
  return result;
}

}  // namespace

StreamResult run_stream(std::span<const Embedding> events, OnlineVbClusterer& clusterer) {
  return fold(events, clusterer);
}

StreamResult run_stream(std::span<const Embedding> events, ThresholdClusterer& clusterer) {
  return fold(events, clusterer);
}

StreamResult run_stream_vb(std::span<const Embedding> events, OnlineModel model, OnlineConfig config) {
  OnlineVbClusterer clusterer(std::move(model), config);
  return run_stream(events, clusterer);
}

StreamResult run_stream_threshold(std::span<const Embedding> events, MultiScorer scorer, double tau) {
  ThresholdClusterer clusterer(std::move(scorer), tau);
  return run_stream(events, clusterer);
}

}  // namespace spkr
