#include <algorithm>
#include <cmath>
#include <limits>

#include "spkr/clustering.hpp"
#include "spkr/kernels.hpp"
#include "spkr/specfun.hpp"

namespace spkr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::Map<const Eigen::VectorXd> as_eigen(const Vector& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// W^-1 and log|W| for the diagonal and full forms.
struct WithinTerms {
  Eigen::MatrixXd inv;
  double log_det = 0.0;
};

WithinTerms within_terms(const PldaModel& m) {
  if (m.cov_type() == CovType::Full) return {m.within_inv(), m.log_det_within()};
  const Vector& w = m.within().diag();
  WithinTerms t;
  t.inv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    t.inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / w[i];
    t.log_det += std::log(w[i]);
  }
  return t;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_model_dim(const Embedding& x, std::size_t d) {
  if (x.dim() != d) {
    fail(Errc::DimensionMismatch, "online clustering: embedding '" + x.id + "' has dimension " +
                                      std::to_string(x.dim()) + ", model expects " + std::to_string(d));
  }
}

}  // namespace

ClusterPosterior prior_posterior(const OnlineModel& model) {
  if (const auto* psda = std::get_if<PsdaModel>(&model)) {
    VmfPosterior p;
    p.m = psda->mu();
    p.r = psda->b();
    p.eta = psda->mu();
    kernels::scale(psda->b(), p.eta);
    return p;
  }
  const auto& plda = std::get<PldaModel>(model);
  if (plda.cov_type() == CovType::Spherical) {
    GaussianSphericalPosterior p;
    p.m = plda.mu();
    p.s = plda.between().scalar();
    p.precision = 1.0 / p.s;
    p.eta = plda.mu();
    kernels::scale(p.precision, p.eta);
    return p;
  }
  GaussianFullPosterior p;
  p.m = as_eigen(plda.mu());
  p.cov = plda.between().dense();
  p.precision = plda.cov_type() == CovType::Full ? plda.between_inv() : Eigen::MatrixXd(p.cov.inverse());
  p.eta = p.precision * p.m;
  return p;
}

double expected_loglik(const ClusterPosterior& post, const Embedding& x, const OnlineModel& model) {
  return std::visit(
      [&](const auto& q) -> double {
        using Q = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<Q, VmfPosterior>) {
          const auto& m = std::get<PsdaModel>(model);
          check_model_dim(x, m.dim());
          const double rho = specfun::vmf_mean_resultant(static_cast<int>(m.dim()), q.r);
          if (rho == 0.0) return m.log_norm_w();
          return m.log_norm_w() + m.w() * rho * kernels::dot(q.m, x.vec);
        } else if constexpr (std::is_same_v<Q, GaussianSphericalPosterior>) {
          const auto& m = std::get<PldaModel>(model);
          check_model_dim(x, m.dim());
          const double w = m.within().scalar();
          const double d = static_cast<double>(m.dim());
          return -0.5 * d * (kLog2Pi + std::log(w)) - (kernels::squared_distance(x.vec, q.m) + d * q.s) / (2.0 * w);
        } else {
          const auto& m = std::get<PldaModel>(model);
          check_model_dim(x, m.dim());
          const WithinTerms wt = within_terms(m);
          const Eigen::VectorXd r = as_eigen(x.vec) - q.m;
          const double d = static_cast<double>(m.dim());
          return -0.5 * d * kLog2Pi - 0.5 * wt.log_det -
                 0.5 * (r.dot(wt.inv * r) + (wt.inv.cwiseProduct(q.cov)).sum());
        }
      },
      post);
}

ClusterPosterior update_posterior(const ClusterPosterior& post, const Embedding& x, double gamma,
                                  const OnlineModel& model) {
  if (gamma == 0.0) return post;
  return std::visit(
      [&](const auto& q) -> ClusterPosterior {
        using Q = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<Q, VmfPosterior>) {
          const auto& m = std::get<PsdaModel>(model);
          check_model_dim(x, m.dim());
          VmfPosterior out = q;
          kernels::axpy(m.w() * gamma, x.vec, out.eta);
          out.r = l2_norm(out.eta);
          if (out.r > 0.0) {
            out.m = out.eta;
            kernels::scale(1.0 / out.r, out.m);
          }
          return out;
        } else if constexpr (std::is_same_v<Q, GaussianSphericalPosterior>) {
          const auto& m = std::get<PldaModel>(model);
          check_model_dim(x, m.dim());
          const double weight = gamma / m.within().scalar();
          GaussianSphericalPosterior out = q;
          out.precision = q.precision + weight;
          kernels::axpy(weight, x.vec, out.eta);
          out.s = 1.0 / out.precision;
          out.m = out.eta;
          kernels::scale(out.s, out.m);
          return out;
        } else {
          const auto& m = std::get<PldaModel>(model);
          check_model_dim(x, m.dim());
          const WithinTerms wt = within_terms(m);
          GaussianFullPosterior out;
          out.precision = q.precision + gamma * wt.inv;
          out.eta = q.eta + gamma * (wt.inv * as_eigen(x.vec));
          Eigen::LLT<Eigen::MatrixXd> llt(out.precision);
          if (llt.info() != Eigen::Success) fail(Errc::SingularCovariance, "update_posterior: precision not SPD");
          out.cov = llt.solve(Eigen::MatrixXd::Identity(out.precision.rows(), out.precision.cols()));
          out.m = llt.solve(out.eta);
          return out;
        }
      },
      post);
}

OnlineVbClusterer::OnlineVbClusterer(OnlineModel model, OnlineConfig config)
    : model_(std::move(model)), config_(config), prior_(prior_posterior(model_)) {
  if (!(config_.p_new > 0.0 && config_.p_new < 1.0)) {
    fail(Errc::InvalidArgument, "OnlineVbClusterer: p_new must lie in (0, 1)");
  }
  if (config_.n_update_iters < 1) fail(Errc::InvalidArgument, "OnlineVbClusterer: n_update_iters must be >= 1");
}

std::vector<double> OnlineVbClusterer::posterior_over(std::span<const ClusterPosterior> clusters,
                                                      const ClusterPosterior& unknown, const Embedding& x) const {
  const std::size_t k = clusters.size();
  std::vector<double> log_gamma(k + 1);
  if (k == 0) return {1.0};
  const double log_existing = std::log1p(-config_.p_new) - std::log(static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) log_gamma[i] = log_existing + expected_loglik(clusters[i], x, model_);
  log_gamma[k] = std::log(config_.p_new) + expected_loglik(unknown, x, model_);
  const double top = *std::max_element(log_gamma.begin(), log_gamma.end());
  double total = 0.0;
  for (double& v : log_gamma) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : log_gamma) v /= total;
  return log_gamma;
}

std::vector<double> OnlineVbClusterer::assignment_posterior(const Embedding& x) const {
  return posterior_over(clusters_, prior_, x);
}

StepOutcome OnlineVbClusterer::step(const Embedding& x) {
  const std::size_t k = clusters_.size();
  // Each iteration re-derives q(y_k) from the state before this step, so x is
  // never counted twice; only gamma changes between iterations.
  std::vector<ClusterPosterior> tentative = clusters_;
  ClusterPosterior candidate = prior_;
  std::vector<double> gamma;
  for (int it = 0; it < config_.n_update_iters; ++it) {
    gamma = it == 0 ? posterior_over(clusters_, prior_, x) : posterior_over(tentative, candidate, x);
    if (config_.assignment == Assignment::Hard) {
      const std::size_t best = argmax(gamma);
      std::fill(gamma.begin(), gamma.end(), 0.0);
      gamma[best] = 1.0;
    }
    for (std::size_t i = 0; i < k; ++i) tentative[i] = update_posterior(clusters_[i], x, gamma[i], model_);
    candidate = update_posterior(prior_, x, gamma[k], model_);
  }
  StepOutcome out;
  out.assigned = argmax(gamma);
  out.created = out.assigned == k;
  clusters_ = std::move(tentative);
  if (out.created) clusters_.push_back(std::move(candidate));
  out.gamma = std::move(gamma);
  out.num_clusters = clusters_.size();
  return out;
}

}  // namespace spkr
