#include "spkr/backends.hpp"
#include "spkr/kernels.hpp"
#include "spkr/specfun.hpp"

namespace spkr {

namespace {

struct PsdaStats {
  double n = 0.0;
  Vector sum;
};

PsdaStats accumulate(std::span<const Embedding> xs, const PsdaModel& m) {
  check_same_dim(xs, m.dim(), "psda");
  PsdaStats s;
  s.n = static_cast<double>(xs.size());
  s.sum.assign(m.dim(), 0.0);
  for (const Embedding& x : xs) kernels::axpy(1.0, x.vec, s.sum);
  return s;
}

// n log C_d(w) + log C_d(b) - log C_d(|| w S + b mu ||)
double marginal_from_stats(const PsdaStats& s, const PsdaModel& m) {
  if (s.n == 0.0) return 0.0;
  Vector eta = m.mu();
  kernels::scale(m.b(), eta);
  kernels::axpy(m.w(), s.sum, eta);
  const double r = l2_norm(eta);
  return s.n * m.log_norm_w() + m.log_norm_b() - specfun::vmf_log_norm(static_cast<int>(m.dim()), r);
}

}  // namespace

double psda_log_marginal(std::span<const Embedding> xs, const PsdaModel& m) {
  if (xs.empty()) return 0.0;
  return marginal_from_stats(accumulate(xs, m), m);
}

double psda_llr(std::span<const Embedding> enroll, std::span<const Embedding> test, const PsdaModel& m) {
  if (enroll.empty() || test.empty()) return 0.0;
  const PsdaStats e = accumulate(enroll, m);
  const PsdaStats t = accumulate(test, m);
  PsdaStats joint{e.n + t.n, Vector(m.dim())};
  for (std::size_t i = 0; i < m.dim(); ++i) joint.sum[i] = e.sum[i] + t.sum[i];
  return marginal_from_stats(joint, m) - (marginal_from_stats(e, m) + marginal_from_stats(t, m));
}

}  // namespace spkr
