#include <cmath>
#include <map>
#include <string>

#include "spkr/backends.hpp"
#include "spkr/kernels.hpp"
#include "spkr/log.hpp"
#include "spkr/specfun.hpp"

namespace spkr {

namespace {

struct SpeakerSums {
  std::vector<double> counts;
  std::vector<Vector> sums;
  double total = 0.0;
};

SpeakerSums speaker_sums(const std::vector<Embedding>& data, std::span<const std::string> labels) {
  SpeakerSums s;
  std::map<std::string, std::size_t> index;
  const std::size_t d = data.front().dim();
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto [it, inserted] = index.emplace(labels[i], s.sums.size());
    if (inserted) {
      s.sums.emplace_back(d, 0.0);
      s.counts.push_back(0.0);
    }
    kernels::axpy(1.0, data[i].vec, s.sums[it->second]);
    s.counts[it->second] += 1.0;
  }
  for (double c : s.counts) s.total += c;
  return s;
}

struct ConcentrationSolver {
  int dim;
  double max_concentration;
  std::vector<std::string>* warnings;
  bool* clamped;

  // Solves rho_d(kappa) = r, clamping when r is numerically 1.
  double operator()(double r, const char* which) const {
    const double kappa_at_cap = max_concentration;
    if (r >= specfun::vmf_mean_resultant(dim, kappa_at_cap)) {
      if (!*clamped) {
        const std::string msg = std::string("train_psda: ") + which +
                                " mean resultant length reached 1; concentration clamped to " +
                                std::to_string(max_concentration);
        log::warn(msg);
        warnings->push_back(msg);
      }
      *clamped = true;
      return kappa_at_cap;
    }
    return specfun::vmf_concentration_from_resultant(dim, r);
  }
};

double data_loglik(const SpeakerSums& s, const Vector& mu, double b, double w, int dim) {
  const double log_cw = specfun::vmf_log_norm(dim, w);
  const double log_cb = specfun::vmf_log_norm(dim, b);
  double total = 0.0;
  Vector eta(mu.size());
  for (std::size_t i = 0; i < s.sums.size(); ++i) {
    for (std::size_t k = 0; k < mu.size(); ++k) eta[k] = b * mu[k] + w * s.sums[i][k];
    total += s.counts[i] * log_cw + log_cb - specfun::vmf_log_norm(dim, l2_norm(eta));
  }
  return total;
}

}  // namespace

PsdaTrainResult train_psda(std::span<const Embedding> xs, std::span<const std::string> labels,
                           std::vector<PreprocessStep> steps, const PsdaTrainOptions& options) {
  if (xs.size() != labels.size()) fail(Errc::InvalidArgument, "train_psda: embeddings and labels differ in length");
  if (xs.empty()) fail(Errc::InsufficientData, "train_psda: no training data");
  if (steps.empty() || steps.back() != PreprocessStep::LengthNorm) {
    fail(Errc::InvalidArgument, "train_psda: preprocessing must end with length normalization");
  }
  const std::size_t dim = xs.front().dim();
  if (dim < 2) fail(Errc::InvalidArgument, "train_psda: dimension must be >= 2");
  check_same_dim(xs, dim, "train_psda");
  for (const Embedding& x : xs) check_finite(x.vec, "train_psda");

  PreprocessParams pre{mean_embedding(xs), std::move(steps)};
  const std::vector<Embedding> data = preprocess_all(xs, pre);
  const SpeakerSums sums = speaker_sums(data, labels);
  if (sums.sums.size() < 2) fail(Errc::InsufficientData, "train_psda: need at least 2 speakers");
  for (double c : sums.counts) {
    if (c < 2.0) fail(Errc::InsufficientData, "train_psda: every speaker needs at least 2 embeddings");
  }

  const int d = static_cast<int>(dim);
  const double n_spk = static_cast<double>(sums.sums.size());
  std::vector<std::string> warnings;
  bool clamped = false;
  std::vector<double> trace;
  const ConcentrationSolver solve{d, options.max_concentration, &warnings, &clamped};

  // Initialization from mean resultant lengths: within from the per-speaker
  // resultants, between from the speaker mean directions.
  double within_resultant = 0.0;
  Vector direction_sum(dim, 0.0);
  for (std::size_t i = 0; i < sums.sums.size(); ++i) {
    const double norm = l2_norm(sums.sums[i]);
    within_resultant += norm;
    if (norm > 0.0) kernels::axpy(1.0 / norm, sums.sums[i], direction_sum);
  }
  within_resultant /= sums.total;
  const double between_norm = l2_norm(direction_sum);
  if (between_norm == 0.0) fail(Errc::DegenerateScatter, "train_psda: speaker mean directions cancel");
  Vector mu = direction_sum;
  kernels::scale(1.0 / between_norm, mu);
  auto approx = [&](double r, const char* which) {
    const double cap = specfun::vmf_mean_resultant(d, options.max_concentration);
    if (r >= cap) return solve(r, which);
    return std::min(specfun::vmf_concentration_approx(d, r), options.max_concentration);
  };
  double w = approx(within_resultant, "within-speaker");
  double b = approx(between_norm / n_spk, "between-speaker");
  b = std::max(b, 1e-8);
  w = std::max(w, 1e-8);

  trace.push_back(data_loglik(sums, mu, b, w, d));
  Vector eta(dim);
  for (int it = 0; it < options.iterations; ++it) {
    // E-step: exact VMF posterior of each speaker variable; accumulate E[y].
    Vector expected_sum(dim, 0.0);
    double within_stat = 0.0;
    for (std::size_t i = 0; i < sums.sums.size(); ++i) {
      for (std::size_t k = 0; k < dim; ++k) eta[k] = b * mu[k] + w * sums.sums[i][k];
      const double r = l2_norm(eta);
      const double rho = specfun::vmf_mean_resultant(d, r);
      kernels::axpy(rho / r, eta, expected_sum);
      within_stat += rho / r * kernels::dot(sums.sums[i], eta);
    }
    // M-step: mean direction and the two concentrations.
    const double t = l2_norm(expected_sum);
    if (t == 0.0) fail(Errc::DegenerateScatter, "train_psda: posterior means cancel");
    mu = expected_sum;
    kernels::scale(1.0 / t, mu);
    b = std::max(solve(t / n_spk, "between-speaker"), 1e-8);
    w = std::max(solve(within_stat / sums.total, "within-speaker"), 1e-8);
    trace.push_back(data_loglik(sums, mu, b, w, d));
  }
  return PsdaTrainResult{PsdaModel(std::move(mu), b, w, std::move(pre)), std::move(trace), std::move(warnings),
                         clamped};
}

}  // namespace spkr
