#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "spkr/backends.hpp"
#include "spkr/log.hpp"

namespace spkr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct Groups {
  std::vector<std::vector<std::size_t>> members;  // in order of first appearance
};

Groups group_by_label(std::span<const std::string> labels) {
  Groups g;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = index.emplace(labels[i], g.members.size());
    if (inserted) g.members.emplace_back();
    g.members[it->second].push_back(i);
  }
  return g;
}

// Per-speaker counts and centered means (relative to the prior mean), plus the
// pooled within-speaker scatter matrix around each speaker's sample mean.
struct TrainingStats {
  std::size_t dim = 0;
  double total = 0.0;
  std::vector<double> counts;
  Eigen::MatrixXd means;    // dim x speakers
  Eigen::MatrixXd scatter;  // dim x dim
};

TrainingStats collect(const std::vector<Embedding>& data, const Groups& groups, const Vector& mu) {
  TrainingStats s;
  s.dim = mu.size();
  const auto d = static_cast<Eigen::Index>(s.dim);
  const auto k = static_cast<Eigen::Index>(groups.members.size());
  s.means = Eigen::MatrixXd::Zero(d, k);
  s.scatter = Eigen::MatrixXd::Zero(d, d);
  const Eigen::Map<const Eigen::VectorXd> mean_vec(mu.data(), d);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& idx = groups.members[static_cast<std::size_t>(i)];
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (std::size_t j : idx) acc += Eigen::Map<const Eigen::VectorXd>(data[j].vec.data(), d);
    const double n = static_cast<double>(idx.size());
    const Eigen::VectorXd xbar = acc / n;
    for (std::size_t j : idx) {
      const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(data[j].vec.data(), d) - xbar;
      s.scatter.noalias() += c * c.transpose();
    }
    s.means.col(i) = xbar - mean_vec;
    s.counts.push_back(n);
    s.total += n;
  }
  return s;
}

// Posterior of each speaker variable when B and W are diagonal (in whatever
// basis `means` is expressed): variances c_ik and means m_ik.
void posterior_diag(const TrainingStats& s, const Eigen::MatrixXd& means, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& w, Eigen::MatrixXd& post_mean, Eigen::MatrixXd& post_var) {
  post_mean.resize(means.rows(), means.cols());
  post_var.resize(means.rows(), means.cols());
  for (Eigen::Index i = 0; i < means.cols(); ++i) {
    const double n = s.counts[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < means.rows(); ++k) {
      const double c = 1.0 / (1.0 / b[k] + n / w[k]);
      post_var(k, i) = c;
      post_mean(k, i) = c * n * means(k, i) / w[k];
    }
  }
}

// Sum over speakers of the log marginal, for diagonal B and W in the basis of
// `means`; `scatter_diag` is the diagonal of the pooled scatter in that basis.
double loglik_diag(const TrainingStats& s, const Eigen::MatrixXd& means, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& w, const Eigen::VectorXd& scatter_diag) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < means.cols(); ++i) {
    const double n = s.counts[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < means.rows(); ++k) {
      const double denom = w[k] + n * b[k];
      const double sum = n * means(k, i);
      const double between_quad = n * means(k, i) * means(k, i);
      total += -0.5 * (n * kLog2Pi + (n - 1.0) * std::log(w[k]) + std::log(denom)) -
               0.5 * (between_quad / w[k] - b[k] * sum * sum / (w[k] * denom));
    }
  }
  for (Eigen::Index k = 0; k < scatter_diag.size(); ++k) total -= 0.5 * scatter_diag[k] / w[k];
  return total;
}

Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

// Simultaneous diagonalization: T W T' = I and T B T' = diag(psi).
struct JointBasis {
  Eigen::MatrixXd transform;
  Eigen::MatrixXd inverse;
  Eigen::VectorXd psi;
  double log_det_within = 0.0;
};

JointBasis joint_basis(const Eigen::MatrixXd& between, const Eigen::MatrixXd& within) {
  Eigen::LLT<Eigen::MatrixXd> llt(within);
  if (llt.info() != Eigen::Success) fail(Errc::DegenerateScatter, "train_plda: within covariance not SPD");
  const Eigen::MatrixXd l = llt.matrixL();
  const auto d = within.rows();
  const Eigen::MatrixXd l_inv = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd reduced = l_inv * between * l_inv.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (reduced + reduced.transpose()));
  JointBasis jb;
  jb.psi = es.eigenvalues();
  jb.transform = es.eigenvectors().transpose() * l_inv;
  jb.inverse = l * es.eigenvectors();
  jb.log_det_within = 2.0 * l.diagonal().array().log().sum();
  return jb;
}

void require_finite_positive(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || !(v[i] > 0.0)) {
      fail(Errc::DegenerateScatter, std::string("train_plda: ") + what + " variance estimate is not positive");
    }
  }
}

}  // namespace

PldaTrainResult train_plda(std::span<const Embedding> xs, std::span<const std::string> labels, CovType cov_type,
                           std::vector<PreprocessStep> steps, const PldaTrainOptions& options) {
  if (xs.size() != labels.size()) fail(Errc::InvalidArgument, "train_plda: embeddings and labels differ in length");
  if (xs.empty()) fail(Errc::InsufficientData, "train_plda: no training data");
  if (options.iterations < 0) fail(Errc::InvalidArgument, "train_plda: negative iteration count");
  const std::size_t dim = xs.front().dim();
  check_same_dim(xs, dim, "train_plda");
  for (const Embedding& x : xs) check_finite(x.vec, "train_plda");

  const Groups groups = group_by_label(labels);
  if (groups.members.size() < 2) fail(Errc::InsufficientData, "train_plda: need at least 2 speakers");
  for (std::size_t i = 0; i < groups.members.size(); ++i) {
    if (groups.members[i].size() < 2) {
      fail(Errc::InsufficientData, "train_plda: speaker '" + labels[groups.members[i].front()] +
                                       "' has fewer than 2 embeddings");
    }
  }

  PreprocessParams pre{mean_embedding(xs), std::move(steps)};
  const std::vector<Embedding> data = preprocess_all(xs, pre);
  Vector mu = pre.has(PreprocessStep::Center) ? Vector(dim, 0.0) : mean_embedding(data);

  const TrainingStats stats = collect(data, groups, mu);
  const auto d = static_cast<Eigen::Index>(dim);
  const double n_spk = static_cast<double>(stats.counts.size());
  const double floor = options.variance_floor;

  Eigen::MatrixXd within0 = stats.scatter / stats.total;
  Eigen::MatrixXd between0 = stats.means * stats.means.transpose() / n_spk;
  const double within_level = within0.trace() / static_cast<double>(dim);
  if (!std::isfinite(within_level) || within_level <= floor) {
    fail(Errc::DegenerateScatter, "train_plda: within-speaker scatter vanished (all embeddings of a speaker coincide)");
  }
  if (!within0.allFinite() || !between0.allFinite()) fail(Errc::DegenerateScatter, "train_plda: non-finite scatter");

  std::vector<double> trace;
  if (cov_type != CovType::Full) {
    // Spherical and diagonal share the per-dimension recursion; the spherical
    // M-step projects to trace/d, which is the constrained maximizer.
    Eigen::VectorXd b = between0.diagonal();
    Eigen::VectorXd w = within0.diagonal();
    const Eigen::VectorXd scatter_diag = stats.scatter.diagonal();
    auto project = [&](Eigen::VectorXd& v) {
      if (cov_type == CovType::Spherical) v.setConstant(v.mean());
      v = v.cwiseMax(floor);
    };
    project(b);
    project(w);
    trace.push_back(loglik_diag(stats, stats.means, b, w, scatter_diag));
    Eigen::MatrixXd post_mean, post_var;
    for (int it = 0; it < options.iterations; ++it) {
      posterior_diag(stats, stats.means, b, w, post_mean, post_var);
      Eigen::VectorXd b_new = Eigen::VectorXd::Zero(d);
      Eigen::VectorXd w_new = scatter_diag;
      for (Eigen::Index i = 0; i < post_mean.cols(); ++i) {
        const double n = stats.counts[static_cast<std::size_t>(i)];
        b_new += post_mean.col(i).cwiseAbs2() + post_var.col(i);
        w_new += n * ((stats.means.col(i) - post_mean.col(i)).cwiseAbs2() + post_var.col(i));
      }
      b_new /= n_spk;
      w_new /= stats.total;
      require_finite_positive(w_new, "within");
      project(b_new);
      project(w_new);
      b = b_new;
      w = w_new;
      trace.push_back(loglik_diag(stats, stats.means, b, w, scatter_diag));
    }
    if (cov_type == CovType::Spherical) {
      PldaModel model(std::move(mu), Covariance::spherical(dim, b[0]), Covariance::spherical(dim, w[0]), std::move(pre));
      return PldaTrainResult{std::move(model), std::move(trace)};
    }
    Vector bv(b.data(), b.data() + d);
    Vector wv(w.data(), w.data() + d);
    PldaModel model(std::move(mu), Covariance::diagonal(std::move(bv)), Covariance::diagonal(std::move(wv)),
                    std::move(pre));
    return PldaTrainResult{std::move(model), std::move(trace)};
  }

  Eigen::MatrixXd between = floor_eigenvalues(between0, floor);
  Eigen::MatrixXd within = floor_eigenvalues(within0, floor);
  auto full_loglik = [&](const JointBasis& jb) {
    const Eigen::MatrixXd means_t = jb.transform * stats.means;
    const Eigen::VectorXd scatter_t = (jb.transform * stats.scatter * jb.transform.transpose()).diagonal();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
    return loglik_diag(stats, means_t, jb.psi.cwiseMax(floor), ones, scatter_t) - 0.5 * stats.total * jb.log_det_within;
  };
  trace.push_back(full_loglik(joint_basis(between, within)));
  for (int it = 0; it < options.iterations; ++it) {
    const JointBasis jb = joint_basis(between, within);
    const Eigen::MatrixXd means_t = jb.transform * stats.means;
    Eigen::MatrixXd post_mean_t, post_var_t;
    posterior_diag(stats, means_t, jb.psi.cwiseMax(floor), Eigen::VectorXd::Ones(d), post_mean_t, post_var_t);
    const Eigen::MatrixXd post_mean = jb.inverse * post_mean_t;
    Eigen::VectorXd var_sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd weighted_var_sum = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd residual_outer = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < post_mean.cols(); ++i) {
      const double n = stats.counts[static_cast<std::size_t>(i)];
      var_sum += post_var_t.col(i);
      weighted_var_sum += n * post_var_t.col(i);
      const Eigen::VectorXd r = stats.means.col(i) - post_mean.col(i);
      residual_outer.noalias() += n * r * r.transpose();
    }
    Eigen::MatrixXd b_new = (post_mean * post_mean.transpose() +
                             jb.inverse * var_sum.asDiagonal() * jb.inverse.transpose()) / n_spk;
    Eigen::MatrixXd w_new = (stats.scatter + residual_outer +
                             jb.inverse * weighted_var_sum.asDiagonal() * jb.inverse.transpose()) / stats.total;
    if (!w_new.allFinite() || !b_new.allFinite() || !(w_new.trace() > 0.0)) {
      fail(Errc::DegenerateScatter, "train_plda: covariance estimate became degenerate");
    }
    between = floor_eigenvalues(b_new, floor);
    within = floor_eigenvalues(w_new, floor);
    trace.push_back(full_loglik(joint_basis(between, within)));
  }
  PldaModel model(std::move(mu), Covariance::full(between), Covariance::full(within), std::move(pre));
  return PldaTrainResult{std::move(model), std::move(trace)};
}

}  // namespace spkr
