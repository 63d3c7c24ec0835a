#include <cmath>
#include <numbers>

#include "spkr/backends.hpp"
#include "spkr/kernels.hpp"

namespace spkr {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Sufficient statistics of a set of embeddings relative to the prior mean:
// count, centered sum, and the quadratic term (sum of squared norms for the
// spherical form, per-dimension sums for diagonal, sum of x' W^-1 x for full).
// Statistics of disjoint sets combine by addition, which keeps the LLR exactly
// symmetric in its two arguments.
struct PldaStats {
  double n = 0.0;
  Vector sum;
  double quad = 0.0;
  Vector quad_diag;
};

PldaStats accumulate(std::span<const Embedding> xs, const PldaModel& m) {
  const std::size_t d = m.dim();
  check_same_dim(xs, d, "plda");
  PldaStats s;
  s.n = static_cast<double>(xs.size());
  s.sum.assign(d, 0.0);
  for (const Embedding& x : xs) kernels::axpy(1.0, x.vec, s.sum);
  kernels::axpy(-s.n, m.mu(), s.sum);

  switch (m.cov_type()) {
    case CovType::Spherical:
      for (const Embedding& x : xs) s.quad += kernels::squared_distance(x.vec, m.mu());
      break;
    case CovType::Diagonal:
      s.quad_diag.assign(d, 0.0);
      for (const Embedding& x : xs) {
        for (std::size_t i = 0; i < d; ++i) {
          const double c = x.vec[i] - m.mu()[i];
          s.quad_diag[i] += c * c;
        }
      }
      break;
    case CovType::Full: {
      Eigen::VectorXd c(static_cast<Eigen::Index>(d));
      for (const Embedding& x : xs) {
        for (std::size_t i = 0; i < d; ++i) c[static_cast<Eigen::Index>(i)] = x.vec[i] - m.mu()[i];
        s.quad += c.dot(m.within_inv() * c);
      }
      break;
    }
  }
  return s;
}

PldaStats combine(const PldaStats& a, const PldaStats& b) {
  PldaStats s;
  s.n = a.n + b.n;
  s.sum.resize(a.sum.size());
  for (std::size_t i = 0; i < s.sum.size(); ++i) s.sum[i] = a.sum[i] + b.sum[i];
  s.quad = a.quad + b.quad;
  if (!a.quad_diag.empty()) {
    s.quad_diag.resize(a.quad_diag.size());
    for (std::size_t i = 0; i < s.quad_diag.size(); ++i) s.quad_diag[i] = a.quad_diag[i] + b.quad_diag[i];
  }
  return s;
}

// One-dimensional marginal with between variance b and within variance w:
//   -1/2 [n log 2pi + (n-1) log w + log(w + n b)] - 1/2 [Q / w - b S^2 / (w (w + n b))]
double scalar_marginal(double n, double b, double w, double sum_sq, double quad) {
  const double denom = w + n * b;
  return -0.5 * (n * kLog2Pi + (n - 1.0) * std::log(w) + std::log(denom)) -
         0.5 * (quad / w - b * sum_sq / (w * denom));
}

double marginal_from_stats(const PldaStats& s, const PldaModel& m) {
  if (s.n == 0.0) return 0.0;
  const std::size_t d = m.dim();
  switch (m.cov_type()) {
    case CovType::Spherical: {
      const double b = m.between().scalar();
      const double w = m.within().scalar();
      const double denom = w + s.n * b;
      const double dd = static_cast<double>(d);
      return -0.5 * dd * (s.n * kLog2Pi + (s.n - 1.0) * std::log(w) + std::log(denom)) -
             0.5 * (s.quad / w - b * kernels::squared_norm(s.sum) / (w * denom));
    }
    case CovType::Diagonal: {
      const Vector& b = m.between().diag();
      const Vector& w = m.within().diag();
      double total = 0.0;
      for (std::size_t i = 0; i < d; ++i) total += scalar_marginal(s.n, b[i], w[i], s.sum[i] * s.sum[i], s.quad_diag[i]);
      return total;
    }
    case CovType::Full: {
      const Eigen::MatrixXd precision = m.between_inv() + s.n * m.within_inv();
      Eigen::LLT<Eigen::MatrixXd> llt(precision);
      if (llt.info() != Eigen::Success) fail(Errc::SingularCovariance, "plda_log_marginal: posterior precision not SPD");
      const Eigen::MatrixXd l = llt.matrixL();
      const double log_det_precision = 2.0 * l.diagonal().array().log().sum();
      const Eigen::Map<const Eigen::VectorXd> sum(s.sum.data(), static_cast<Eigen::Index>(d));
      const Eigen::VectorXd eta = m.within_inv() * sum;
      const Eigen::VectorXd half = llt.matrixL().solve(eta);
      const double dd = static_cast<double>(d);
      return -0.5 * s.n * dd * kLog2Pi - 0.5 * s.n * m.log_det_within() - 0.5 * m.log_det_between() -
             0.5 * log_det_precision - 0.5 * (s.quad - half.squaredNorm());
    }
  }
  return 0.0;
}

}  // namespace

double plda_log_marginal(std::span<const Embedding> xs, const PldaModel& m) {
  if (xs.empty()) return 0.0;
  return marginal_from_stats(accumulate(xs, m), m);
}

double plda_llr(std::span<const Embedding> enroll, std::span<const Embedding> test, const PldaModel& m) {
  if (enroll.empty() || test.empty()) return 0.0;
  const PldaStats e = accumulate(enroll, m);
  const PldaStats t = accumulate(test, m);
  const double joint = marginal_from_stats(combine(e, t), m);
  return joint - (marginal_from_stats(e, m) + marginal_from_stats(t, m));
}

}  // namespace spkr
