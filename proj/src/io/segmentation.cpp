#include <cmath>

#include "spkr/io.hpp"

namespace spkr {

namespace {
constexpr double kEps = 1e-9;
}

std::vector<Window> segment_regions(std::span<const Region> regions, double win, double hop) {
  if (!(win > 0.0) || !(hop > 0.0) || hop > win || !std::isfinite(win)) {
    fail(Errc::InvalidArgument, "segment_regions: need 0 < hop <= win");
  }
  std::vector<Window> out;
  for (const Region& r : regions) {
    if (!std::isfinite(r.onset) || !std::isfinite(r.offset) || !(r.offset > r.onset)) {
      fail(Errc::InvalidRegion, "segment_regions: region offset must exceed its onset");
    }
    if (r.offset - r.onset <= win + kEps) {
      out.push_back({r.onset, r.offset - r.onset});
      continue;
    }
    // Window starts are computed as onset + k * hop to avoid drift.
    std::size_t k = 0;
    while (r.onset + static_cast<double>(k) * hop + win <= r.offset + kEps) {
      out.push_back({r.onset + static_cast<double>(k) * hop, win});
      ++k;
    }
    const double last_end = r.onset + static_cast<double>(k - 1) * hop + win;
    if (r.offset - last_end > kEps) {
      const double start = r.onset + static_cast<double>(k) * hop;
      if (r.offset - start >= hop - kEps) {
        out.push_back({start, r.offset - start});
      } else {
        out.back().duration = r.offset - out.back().onset;
      }
    }
  }
  return out;
}

}  // namespace spkr
