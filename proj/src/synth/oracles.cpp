#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <limits>

#include "spkr/kernels.hpp"
#include "spkr/specfun.hpp"
#include "spkr/synth.hpp"

namespace spkr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Log-mean-exp of the terms and its jackknife standard error.
McEstimate log_mean_exp(const std::vector<double>& terms) {
  const double n = static_cast<double>(terms.size());
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  McEstimate r;
  r.estimate = top + std::log(sum / n);

  double mean_loo = 0.0;
  std::vector<double> loo(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double rest = std::max(sum - std::exp(terms[i] - top), std::numeric_limits<double>::min());
    loo[i] = top + std::log(rest / (n - 1.0));
    mean_loo += loo[i];
  }
  mean_loo /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  r.std_error = std::sqrt((n - 1.0) / n * ss);
  return r;
}

std::vector<double> plda_terms(std::span<const Embedding> xs, const PldaModel& m, std::size_t n_samples,
                               SplitMix64& rng) {
  const auto d = static_cast<Eigen::Index>(m.dim());
  const Eigen::MatrixXd b = m.between().dense();
  const Eigen::MatrixXd w = m.within().dense();
  const Eigen::MatrixXd lb = Eigen::LLT<Eigen::MatrixXd>(b).matrixL();
  Eigen::LLT<Eigen::MatrixXd> wllt(w);
  const Eigen::MatrixXd lw = wllt.matrixL();
  const double log_det_w = 2.0 * lw.diagonal().array().log().sum();
  const double norm = -0.5 * (static_cast<double>(d) * kLog2Pi + log_det_w);
  const Eigen::Map<const Eigen::VectorXd> mu(m.mu().data(), d);

  std::vector<Eigen::VectorXd> xe;
  for (const auto& x : xs) xe.push_back(Eigen::Map<const Eigen::VectorXd>(x.vec.data(), d));

  boost::random::normal_distribution<double> normal;
  std::vector<double> terms(n_samples);
  Eigen::VectorXd z(d);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    const Eigen::VectorXd y = mu + lb * z;
    double acc = 0.0;
    for (const auto& x : xe) {
      const Eigen::VectorXd r = lw.triangularView<Eigen::Lower>().solve(x - y);
      acc += norm - 0.5 * r.squaredNorm();
    }
    terms[s] = acc;
  }
  return terms;
}

std::vector<double> psda_terms(std::span<const Embedding> xs, const PsdaModel& m, std::size_t n_samples,
                               SplitMix64& rng) {
  Vector sum(m.dim(), 0.0);
  for (const auto& x : xs) kernels::axpy(1.0, x.vec, sum);
  const double n = static_cast<double>(xs.size());
  std::vector<double> terms(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vector y = sample_vmf(m.mu(), m.b(), 1, rng).front();
    terms[s] = n * m.log_norm_w() + m.w() * kernels::dot(y, sum);
  }
  return terms;
}

}  // namespace

McEstimate mc_log_marginal(std::span<const Embedding> xs, const OnlineModel& model, std::size_t n_samples,
                           std::uint64_t seed) {
  if (xs.empty()) return {0.0, 0.0};
  if (n_samples < 2) fail(Errc::InvalidArgument, "mc_log_marginal: need at least two samples");
  const std::size_t d = std::visit([](const auto& m) { return m.dim(); }, model);
  check_same_dim(xs, d, "mc_log_marginal");
  SplitMix64 rng(seed);
  const auto terms = std::holds_alternative<PldaModel>(model)
                         ? plda_terms(xs, std::get<PldaModel>(model), n_samples, rng)
                         : psda_terms(xs, std::get<PsdaModel>(model), n_samples, rng);
  return log_mean_exp(terms);
}

}  // namespace spkr
