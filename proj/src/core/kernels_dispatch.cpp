#include <atomic>
#include <cstdlib>
#include <string>

#include "spkr/kernels.hpp"

namespace spkr::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, detail::dot_scalar, detail::squared_distance_scalar,
                              detail::axpy_scalar, detail::scale_scalar};

#if defined(SPKR_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{Isa::Avx2, detail::dot_avx2, detail::squared_distance_avx2,
                            detail::axpy_avx2, detail::scale_avx2};
#endif

#if defined(SPKR_HAVE_NEON_KERNELS)
constexpr KernelTable kNeon{Isa::Neon, detail::dot_neon, detail::squared_distance_neon,
                            detail::axpy_neon, detail::scale_neon};
#endif

bool cpu_has(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(SPKR_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(SPKR_HAVE_NEON_KERNELS)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* best_table() noexcept {
  // SPKR_KERNELS=scalar pins the reference path (useful for bisecting
  // numerical differences between machines).
  if (const char* env = std::getenv("SPKR_KERNELS"); env != nullptr && std::string(env) == "scalar") {
    return &kScalar;
  }
  if (const KernelTable* t = table_for(Isa::Avx2)) return t;
  if (const KernelTable* t = table_for(Isa::Neon)) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& selected() noexcept {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* table_for(Isa isa) noexcept {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::Scalar:
      return &kScalar;
    case Isa::Avx2:
#if defined(SPKR_HAVE_AVX2_KERNELS)
      return &kAvx2;
#else
      return nullptr;
#endif
    case Isa::Neon:
#if defined(SPKR_HAVE_NEON_KERNELS)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool isa_available(Isa isa) noexcept { return table_for(isa) != nullptr; }

const KernelTable& active() noexcept { return *selected().load(std::memory_order_relaxed); }

bool force_isa(Isa isa) noexcept {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  selected().store(t, std::memory_order_relaxed);
  return true;
}

void reset_isa() noexcept { selected().store(best_table(), std::memory_order_relaxed); }

}  // namespace spkr::kernels
