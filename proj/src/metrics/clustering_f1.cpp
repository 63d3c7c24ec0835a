#include <map>
#include <utility>

#include "spkr/error.hpp"
#include "spkr/metrics.hpp"

namespace spkr {

namespace {

double pairs(double n) { return n * (n - 1.0) / 2.0; }

template <typename T>
PairwiseF1 f1_from_labels(std::span<const T> truth, std::span<const T> predicted) {
  if (truth.size() != predicted.size()) fail(Errc::DimensionMismatch, "pairwise_f1: label sequences differ in length");
  std::map<std::pair<T, T>, double> joint;
  std::map<T, double> t_count, p_count;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    joint[{truth[i], predicted[i]}] += 1.0;
    t_count[truth[i]] += 1.0;
    p_count[predicted[i]] += 1.0;
  }
  double tp = 0.0, true_pairs = 0.0, pred_pairs = 0.0;
  for (const auto& [k, n] : joint) tp += pairs(n);
  for (const auto& [k, n] : t_count) true_pairs += pairs(n);
  for (const auto& [k, n] : p_count) pred_pairs += pairs(n);

  PairwiseF1 r;
  // With no pairs on one side the corresponding ratio is vacuously perfect.
  r.precision = pred_pairs > 0.0 ? tp / pred_pairs : 1.0;
  r.recall = true_pairs > 0.0 ? tp / true_pairs : 1.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace

PairwiseF1 pairwise_f1(std::span<const std::size_t> truth, std::span<const std::size_t> predicted) {
  return f1_from_labels(truth, predicted);
}

PairwiseF1 pairwise_f1(std::span<const std::string> truth, std::span<const std::string> predicted) {
  return f1_from_labels(truth, predicted);
}

}  // namespace spkr
