#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "spkr/error.hpp"
#include "spkr/metrics.hpp"

namespace spkr {

namespace {

constexpr double kEps = 1e-9;

struct Interval {
  double start;
  double end;
  std::vector<std::size_t> ref;  // speaker indices active in the interval
  std::vector<std::size_t> hyp;
};

struct Recording {
  std::vector<std::string> ref_speakers;
  std::vector<std::string> hyp_speakers;
  std::vector<const Segment*> ref;
  std::vector<const Segment*> hyp;
};

std::size_t index_of(std::vector<std::string>& names, const std::string& s) {
  const auto it = std::find(names.begin(), names.end(), s);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  names.push_back(s);
  return names.size() - 1;
}

void check_segment(const Segment& s) {
  if (!std::isfinite(s.start) || !std::isfinite(s.duration) || s.duration <= 0.0 || s.start < 0.0) {
    fail(Errc::InvalidRegion, "diarization: invalid segment in recording '" + s.recording + "'");
  }
}

std::vector<double> merged_points(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > kEps) out.push_back(p);
  }
  return out;
}

bool covers(const Segment& s, double t) { return s.start <= t && t < s.end(); }

// Splits the timeline at every boundary and records the active speakers of
// each piece. Pieces inside a no-score collar are dropped when collar > 0.
std::vector<Interval> elementary(const Recording& rec, const std::vector<std::size_t>& ref_idx,
                                 const std::vector<std::size_t>& hyp_idx, double collar) {
  std::vector<double> pts;
  std::vector<std::pair<double, double>> no_score;
  for (const Segment* s : rec.ref) {
    pts.push_back(s->start);
    pts.push_back(s->end());
    if (collar > 0.0) {
      for (double b : {s->start, s->end()}) {
        no_score.emplace_back(b - collar, b + collar);
        pts.push_back(std::max(0.0, b - collar));
        pts.push_back(b + collar);
      }
    }
  }
  for (const Segment* s : rec.hyp) {
    pts.push_back(s->start);
    pts.push_back(s->end());
  }
  pts = merged_points(std::move(pts));

  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    const double mid = 0.5 * (a + b);
    const bool skipped = std::any_of(no_score.begin(), no_score.end(),
                                     [&](const auto& z) { return z.first <= mid && mid < z.second; });
    if (skipped) continue;
    Interval iv{a, b, {}, {}};
    std::set<std::size_t> r, h;
    for (std::size_t k = 0; k < rec.ref.size(); ++k) {
      if (covers(*rec.ref[k], mid)) r.insert(ref_idx[k]);
    }
    for (std::size_t k = 0; k < rec.hyp.size(); ++k) {
      if (covers(*rec.hyp[k], mid)) h.insert(hyp_idx[k]);
    }
    if (r.empty() && h.empty()) continue;
    iv.ref.assign(r.begin(), r.end());
    iv.hyp.assign(h.begin(), h.end());
    out.push_back(std::move(iv));
  }
  return out;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

DerBreakdown recording_der(const Recording& rec, const std::vector<std::size_t>& ref_idx,
                           const std::vector<std::size_t>& hyp_idx, const DiarizationConfig& config) {
  auto ivs = elementary(rec, ref_idx, hyp_idx, config.collar);
  if (config.skip_overlap) {
    std::erase_if(ivs, [](const Interval& iv) { return iv.ref.size() > 1; });
  }
  const std::size_t nr = rec.ref_speakers.size(), nh = rec.hyp_speakers.size();
  std::vector<double> overlap(nr * nh, 0.0);
  for (const auto& iv : ivs) {
    for (std::size_t r : iv.ref)
      for (std::size_t h : iv.hyp) overlap[r * nh + h] += iv.end - iv.start;
  }
  const auto map = max_weight_assignment(overlap, nr, nh);

  DerBreakdown d;
  for (const auto& iv : ivs) {
    const double len = iv.end - iv.start;
    const double nref = static_cast<double>(iv.ref.size());
    const double nhyp = static_cast<double>(iv.hyp.size());
    double correct = 0.0;
    for (std::size_t r : iv.ref) {
      if (map[r] >= 0 && contains(iv.hyp, static_cast<std::size_t>(map[r]))) correct += 1.0;
    }
    d.scored += len * nref;
    d.miss += len * std::max(0.0, nref - nhyp);
    d.false_alarm += len * std::max(0.0, nhyp - nref);
    d.confusion += len * (std::min(nref, nhyp) - correct);
  }
  return d;
}

// Per reference speaker Jaccard errors under the mapping that maximizes the
// summed Jaccard index. No collar, overlap included.
std::vector<double> recording_jer(const Recording& rec, const std::vector<std::size_t>& ref_idx,
                                  const std::vector<std::size_t>& hyp_idx) {
  const auto ivs = elementary(rec, ref_idx, hyp_idx, 0.0);
  const std::size_t nr = rec.ref_speakers.size(), nh = rec.hyp_speakers.size();
  std::vector<double> ref_dur(nr, 0.0), hyp_dur(nh, 0.0), inter(nr * nh, 0.0);
  for (const auto& iv : ivs) {
    const double len = iv.end - iv.start;
    for (std::size_t r : iv.ref) ref_dur[r] += len;
    for (std::size_t h : iv.hyp) hyp_dur[h] += len;
    for (std::size_t r : iv.ref)
      for (std::size_t h : iv.hyp) inter[r * nh + h] += len;
  }
  std::vector<double> jaccard(nr * nh, 0.0);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t h = 0; h < nh; ++h) {
      const double uni = ref_dur[r] + hyp_dur[h] - inter[r * nh + h];
      jaccard[r * nh + h] = uni > 0.0 ? inter[r * nh + h] / uni : 0.0;
    }
  }
  const auto map = max_weight_assignment(jaccard, nr, nh);
  std::vector<double> errs(nr, 1.0);
  for (std::size_t r = 0; r < nr; ++r) {
    if (map[r] >= 0) errs[r] = 1.0 - jaccard[r * nh + static_cast<std::size_t>(map[r])];
  }
  return errs;
}

}  // namespace

double DerBreakdown::der() const {
  const double err = miss + false_alarm + confusion;
  if (scored > 0.0) return err / scored;
  return err > kEps ? std::numeric_limits<double>::infinity() : 0.0;
}

DiarizationReport score_diarization(const Annotation& ref, const Annotation& hyp, const DiarizationConfig& config) {
  if (!(config.collar >= 0.0) || !std::isfinite(config.collar)) {
    fail(Errc::InvalidArgument, "score_diarization: collar must be a non-negative number");
  }
  std::map<std::string, Recording> recs;
  for (const Segment& s : ref) {
    check_segment(s);
    recs[s.recording].ref.push_back(&s);
  }
  for (const Segment& s : hyp) {
    check_segment(s);
    auto it = recs.find(s.recording);
    if (it == recs.end()) {
      fail(Errc::RecordingMismatch, "score_diarization: hypothesis recording '" + s.recording +
                                        "' is absent from the reference");
    }
    it->second.hyp.push_back(&s);
  }

  DiarizationReport report;
  double jer_sum = 0.0;
  std::size_t jer_count = 0;
  for (auto& [name, rec] : recs) {
    std::vector<std::size_t> ref_idx, hyp_idx;
    for (const Segment* s : rec.ref) ref_idx.push_back(index_of(rec.ref_speakers, s->speaker));
    for (const Segment* s : rec.hyp) hyp_idx.push_back(index_of(rec.hyp_speakers, s->speaker));

    RecordingScore rs;
    rs.der = recording_der(rec, ref_idx, hyp_idx, config);
    const auto errs = recording_jer(rec, ref_idx, hyp_idx);
    rs.ref_speakers = errs.size();
    double sum = 0.0;
    for (double e : errs) sum += e;
    rs.jer = errs.empty() ? 0.0 : sum / static_cast<double>(errs.size());
    jer_sum += sum;
    jer_count += errs.size();

    report.der.scored += rs.der.scored;
    report.der.miss += rs.der.miss;
    report.der.false_alarm += rs.der.false_alarm;
    report.der.confusion += rs.der.confusion;
    report.per_recording.emplace(name, rs);
  }
  report.jer = jer_count > 0 ? jer_sum / static_cast<double>(jer_count) : 0.0;
  return report;
}

double der(const Annotation& ref, const Annotation& hyp, const DiarizationConfig& config) {
  return score_diarization(ref, hyp, config).der.der();
}

double jer(const Annotation& ref, const Annotation& hyp) { return score_diarization(ref, hyp).jer; }

}  // namespace spkr
