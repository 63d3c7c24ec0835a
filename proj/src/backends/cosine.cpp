#include <algorithm>
#include <cmath>

#include "spkr/backends.hpp"
#include "spkr/kernels.hpp"

namespace spkr {

namespace {

double cosine_of(std::span<const double> a, std::span<const double> b, std::string_view what) {
  if (a.size() != b.size()) fail(Errc::DimensionMismatch, std::string(what) + ": dimension mismatch");
  const double na = kernels::squared_norm(a);
  const double nb = kernels::squared_norm(b);
  if (na == 0.0 || nb == 0.0) fail(Errc::ZeroVector, std::string(what) + ": zero vector");
  const double c = kernels::dot(a, b) / std::sqrt(na * nb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

double cosine_score(const Embedding& a, const Embedding& b) { return cosine_of(a.vec, b.vec, "cosine_score"); }

double cosine_multi(std::span<const Embedding> enroll, std::span<const Embedding> test, CosineMode mode) {
  if (enroll.empty() || test.empty()) fail(Errc::EmptySet, "cosine_multi: enrollment and test sets must be non-empty");
  if (mode == CosineMode::Csea) {
    // The averaged vectors are not re-normalized; cosine is scale-invariant.
    return cosine_of(mean_embedding(enroll), mean_embedding(test), "cosine_multi(csea)");
  }
  double total = 0.0;
  for (const Embedding& e : enroll) {
    for (const Embedding& t : test) total += cosine_of(e.vec, t.vec, "cosine_multi(cssa)");
  }
  return total / static_cast<double>(enroll.size() * test.size());
}

}  // namespace spkr
