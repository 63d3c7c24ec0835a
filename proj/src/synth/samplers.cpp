#include <algorithm>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <cstdio>

#include "spkr/kernels.hpp"
#include "spkr/synth.hpp"

namespace spkr {

namespace {

constexpr std::size_t kMaxRejections = 1'000'000;

// Symmetric square root of a PSD matrix; tiny negative eigenvalues from
// rounding are clipped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov, const char* what) {
  if (!cov.allFinite()) fail(Errc::NonFinite, std::string("synth: ") + what + " covariance is not finite");
  if (cov.isDiagonal()) {
    Eigen::VectorXd d = cov.diagonal();
    if ((d.array() < 0.0).any()) fail(Errc::InvalidArgument, std::string("synth: ") + what + " variance is negative");
    return d.cwiseSqrt().asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
    fail(Errc::InvalidArgument, std::string("synth: ") + what + " covariance is not positive semi-definite");
  }
  return eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

Vector gaussian_draw(std::span<const double> mean, const Eigen::MatrixXd& root, SplitMix64& rng) {
  boost::random::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(mean.size());
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
  const Eigen::VectorXd x = root * z;
  Vector out(mean.begin(), mean.end());
  for (Eigen::Index i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] += x[i];
  return out;
}

Vector normalized(Vector v) {
  const double n = l2_norm(v);
  kernels::scale(1.0 / n, v);
  return v;
}

Vector uniform_direction(std::size_t d, SplitMix64& rng) {
  boost::random::normal_distribution<double> normal;
  for (;;) {
    Vector v(d);
    for (double& c : v) c = normal(rng);
    if (l2_norm(v) > 0.0) return normalized(std::move(v));
  }
}

// Cosine t = <x, mu> of a VMF draw, by rejection from a beta-based envelope.
// 1 - t is tracked separately so large concentrations keep full precision.
void vmf_cosine(std::size_t dim, double kappa, SplitMix64& rng, double& t, double& one_minus_t) {
  const double m1 = static_cast<double>(dim) - 1.0;
  const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
  const double one_minus_x0 = 2.0 * b / (1.0 + b);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double log_1mx0sq = std::log(one_minus_x0 * (1.0 + x0));
  boost::random::beta_distribution<double> beta(0.5 * m1, 0.5 * m1);
  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double z = beta(rng);
    const double denom = 1.0 - (1.0 - b) * z;
    const double omw = 2.0 * b * z / denom;  // 1 - W
    const double w = 1.0 - omw;
    const double u = rng.uniform();
    const double lhs = kappa * (one_minus_x0 - omw) + m1 * (std::log(one_minus_x0 + x0 * omw) - log_1mx0sq);
    if (u > 0.0 && lhs >= std::log(u)) {
      t = w;
      one_minus_t = omw;
      return;
    }
  }
  fail(Errc::DomainError, "sample_vmf: rejection sampler did not accept within the iteration cap");
}

}  // namespace

std::string_view to_string(StreamOrder order) noexcept {
  switch (order) {
    case StreamOrder::Grouped: return "grouped";
    case StreamOrder::Shuffled: return "shuffled";
    case StreamOrder::Interleaved: return "interleaved";
  }
  return "unknown";
}

StreamOrder parse_stream_order(std::string_view name) {
  if (name == "grouped") return StreamOrder::Grouped;
  if (name == "shuffled") return StreamOrder::Shuffled;
  if (name == "interleaved") return StreamOrder::Interleaved;
  fail(Errc::InvalidArgument, "unknown stream order '" + std::string(name) + "'");
}

PldaGenerator PldaGenerator::spherical(std::size_t dim, double between_var, double within_var) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Vector(dim, 0.0), Eigen::MatrixXd::Identity(d, d) * between_var, Eigen::MatrixXd::Identity(d, d) * within_var};
}

PldaGenerator PldaGenerator::from_model(const PldaModel& m) {
  return {m.mu(), m.between().dense(), m.within().dense()};
}

PsdaGenerator PsdaGenerator::from_model(const PsdaModel& m) { return {m.mu(), m.b(), m.w()}; }

std::vector<Vector> sample_gaussian(std::span<const double> mean, const Eigen::MatrixXd& cov, std::size_t n,
                                    SplitMix64& rng) {
  if (cov.rows() != static_cast<Eigen::Index>(mean.size()) || cov.cols() != cov.rows()) {
    fail(Errc::DimensionMismatch, "sample_gaussian: covariance does not match the mean");
  }
  const Eigen::MatrixXd root = psd_sqrt(cov, "sampling");
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(gaussian_draw(mean, root, rng));
  return out;
}

std::vector<Vector> sample_vmf(std::span<const double> mean_dir, double kappa, std::size_t n, SplitMix64& rng) {
  const std::size_t d = mean_dir.size();
  if (d < 2) fail(Errc::InvalidArgument, "sample_vmf: dimension must be >= 2");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) fail(Errc::DomainError, "sample_vmf: kappa must be finite and >= 0");
  if (std::abs(l2_norm(mean_dir) - 1.0) > 1e-6) fail(Errc::InvalidArgument, "sample_vmf: mean direction must be unit-norm");

  std::vector<Vector> out;
  out.reserve(n);
  boost::random::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    if (kappa == 0.0) {
      out.push_back(uniform_direction(d, rng));
      continue;
    }
    double t = 0.0, omt = 0.0;
    vmf_cosine(d, kappa, rng, t, omt);
    // Tangent direction: a Gaussian draw with its component along mu removed.
    Vector v;
    double vn = 0.0;
    do {
      v.assign(d, 0.0);
      for (double& c : v) c = normal(rng);
      kernels::axpy(-kernels::dot(v, mean_dir), mean_dir, v);
      vn = l2_norm(v);
    } while (!(vn > 0.0));
    const double sin_part = std::sqrt(std::max(0.0, omt * (1.0 + t))) / vn;
    Vector x(mean_dir.begin(), mean_dir.end());
    kernels::scale(t, x);
    kernels::axpy(sin_part, v, x);
    out.push_back(normalized(std::move(x)));
  }
  return out;
}

std::vector<Vector> sample_vmf(std::span<const double> mean_dir, double kappa, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return sample_vmf(mean_dir, kappa, n, rng);
}

SynthData sample(const SynthSpec& spec) {
  if (spec.n_speakers < 1) fail(Errc::InvalidArgument, "synth: n_speakers must be >= 1");
  if (spec.count_min < 1 || spec.count_max < spec.count_min) {
    fail(Errc::InvalidArgument, "synth: counts must satisfy 1 <= count_min <= count_max");
  }

  SynthData data;
  Eigen::MatrixXd between_root, within_root;
  const auto* plda = std::get_if<PldaGenerator>(&spec.model);
  const auto* psda = std::get_if<PsdaGenerator>(&spec.model);
  if (plda) {
    const auto d = static_cast<Eigen::Index>(plda->mu.size());
    if (d == 0 || plda->between.rows() != d || plda->between.cols() != d || plda->within.rows() != d ||
        plda->within.cols() != d) {
      fail(Errc::DimensionMismatch, "synth: generator covariances do not match the mean dimension");
    }
    between_root = psd_sqrt(plda->between, "between");
    within_root = psd_sqrt(plda->within, "within");
  } else {
    if (!(psda->b >= 0.0) || !(psda->w >= 0.0)) fail(Errc::InvalidArgument, "synth: concentrations must be >= 0");
  }

  for (std::size_t s = 0; s < spec.n_speakers; ++s) {
    SplitMix64 rng(split_seed(spec.seed, s));
    const std::size_t count = spec.count_min + rng.below(spec.count_max - spec.count_min + 1);
    char name[32];
    std::snprintf(name, sizeof name, "spk%04zu", s);

    Vector y;
    std::vector<Vector> xs;
    if (plda) {
      y = gaussian_draw(plda->mu, between_root, rng);
      xs.reserve(count);
      for (std::size_t j = 0; j < count; ++j) xs.push_back(gaussian_draw(y, within_root, rng));
    } else {
      y = sample_vmf(psda->mu, psda->b, 1, rng).front();
      xs = sample_vmf(y, psda->w, count, rng);
    }
    for (std::size_t j = 0; j < count; ++j) {
      char id[80];
      std::snprintf(id, sizeof id, "%s-%04zu", name, j);
      data.embeddings.push_back({id, std::move(xs[j])});
      data.labels.emplace_back(name);
    }
    data.speakers.push_back(std::move(y));
  }

  const std::size_t total = data.embeddings.size();
  data.order.resize(total);
  for (std::size_t i = 0; i < total; ++i) data.order[i] = i;
  if (spec.stream_order == StreamOrder::Shuffled) {
    SplitMix64 rng(split_seed(spec.seed, ~std::uint64_t{0}));
    for (std::size_t i = total; i > 1; --i) std::swap(data.order[i - 1], data.order[rng.below(i)]);
  } else if (spec.stream_order == StreamOrder::Interleaved) {
    // Round robin over speakers until each runs out.
    std::vector<std::vector<std::size_t>> per(spec.n_speakers);
    std::size_t s = 0;
    for (std::size_t i = 0; i < total; ++i) {
      if (i > 0 && data.labels[i] != data.labels[i - 1]) ++s;
      per[s].push_back(i);
    }
    data.order.clear();
    for (std::size_t round = 0; data.order.size() < total; ++round) {
      for (const auto& p : per) {
        if (round < p.size()) data.order.push_back(p[round]);
      }
    }
  }
  return data;
}

SynthData sample_plda(const SynthSpec& spec) {
  if (!std::holds_alternative<PldaGenerator>(spec.model)) fail(Errc::InvalidArgument, "sample_plda: need a Gaussian generator");
  return sample(spec);
}

SynthData sample_psda(const SynthSpec& spec) {
  if (!std::holds_alternative<PsdaGenerator>(spec.model)) fail(Errc::InvalidArgument, "sample_psda: need a VMF generator");
  return sample(spec);
}

std::vector<Embedding> stream_events(const SynthData& data) {
  std::vector<Embedding> out;
  out.reserve(data.order.size());
  for (std::size_t i : data.order) out.push_back(data.embeddings[i]);
  return out;
}

std::vector<std::string> stream_labels(const SynthData& data) {
  std::vector<std::string> out;
  out.reserve(data.order.size());
  for (std::size_t i : data.order) out.push_back(data.labels[i]);
  return out;
}

}  // namespace spkr
