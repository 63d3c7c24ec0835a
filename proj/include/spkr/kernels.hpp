#pragma once

// Vector primitives used by every scoring and update path. Each primitive has a
// scalar reference implementation and optional SIMD variants; the variant is
// picked once at startup from CPU features and can be overridden for testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace spkr::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = alpha * y
  void (*scale)(double alpha, double* y, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* table_for(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

const KernelTable& active() noexcept;
// Returns false (and leaves the selection unchanged) if isa is unavailable.
bool force_isa(Isa isa) noexcept;
void reset_isa() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double squared_norm(std::span<const double> a) {
  return active().dot(a.data(), a.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale(double alpha, std::span<double> y) { active().scale(alpha, y.data(), y.size()); }

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double squared_distance_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double alpha, double* y, std::size_t n);

double dot_avx2(const double* a, const double* b, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double alpha, double* y, std::size_t n);

double dot_neon(const double* a, const double* b, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
void scale_neon(double alpha, double* y, std::size_t n);
}  // namespace detail

}  // namespace spkr::kernels
