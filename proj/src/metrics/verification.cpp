#include <algorithm>
#include <cmath>
#include <limits>

#include "spkr/error.hpp"
#include "spkr/metrics.hpp"

namespace spkr {

namespace {

void validate(const ScoreSet& s, const char* who) {
  if (s.target.empty() || s.nontarget.empty()) {
    fail(Errc::EmptyScores, std::string(who) + ": need at least one target and one non-target score");
  }
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(s.target.begin(), s.target.end(), finite) ||
      !std::all_of(s.nontarget.begin(), s.nontarget.end(), finite)) {
    fail(Errc::NonFinite, std::string(who) + ": scores must be finite");
  }
}

}  // namespace

std::vector<RocPoint> roc_points(const ScoreSet& scores) {
  validate(scores, "roc_points");
  std::vector<double> tar = scores.target, non = scores.nontarget;
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> all;
  all.reserve(tar.size() + non.size());
  std::merge(tar.begin(), tar.end(), non.begin(), non.end(), std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double nt = static_cast<double>(tar.size());
  const double nn = static_cast<double>(non.size());
  std::vector<RocPoint> pts;
  pts.reserve(all.size() + 1);
  std::size_t below_t = 0, below_n = 0;
  for (double th : all) {
    while (below_t < tar.size() && tar[below_t] < th) ++below_t;
    while (below_n < non.size() && non[below_n] < th) ++below_n;
    pts.push_back({th, below_t / nt, (nn - below_n) / nn});
  }
  pts.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return pts;
}

EerResult eer(const ScoreSet& scores) {
  const auto pts = roc_points(scores);
  // The first point has miss = 0 and the last has false alarm = 0, so the
  // sign of (fa - miss) changes somewhere along the curve.
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double da = pts[i].p_fa - pts[i].p_miss;
    const double db = pts[i + 1].p_fa - pts[i + 1].p_miss;
    if (da >= 0.0 && db <= 0.0) {
      const double alpha = da == db ? 0.0 : da / (da - db);
      EerResult r;
      r.eer = pts[i].p_miss + alpha * (pts[i + 1].p_miss - pts[i].p_miss);
      r.threshold = std::isfinite(pts[i + 1].threshold) ? pts[i + 1].threshold : pts[i].threshold;
      return r;
    }
  }
  return {pts.front().p_fa, pts.front().threshold};
}

DcfResult min_dcf(const ScoreSet& scores, const DcfConfig& config) {
  if (!(config.p_target > 0.0 && config.p_target < 1.0) || !(config.c_miss > 0.0) || !(config.c_fa > 0.0)) {
    fail(Errc::InvalidArgument, "min_dcf: p_target must lie in (0, 1) and costs must be positive");
  }
  const auto pts = roc_points(scores);
  const double w_miss = config.c_miss * config.p_target;
  const double w_fa = config.c_fa * (1.0 - config.p_target);
  const double norm = std::min(w_miss, w_fa);
  DcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& p : pts) {
    const double c = (w_miss * p.p_miss + w_fa * p.p_fa) / norm;
    if (c < best.min_dcf) best = {c, p.threshold};
  }
  return best;
}

}  // namespace spkr
