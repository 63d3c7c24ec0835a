#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace spkr {

// --- assignment ------------------------------------------------------------

/// Maximum-weight matching on a rows x cols weight matrix (row-major).
/// Returns, per row, the matched column or -1. Rectangular inputs allowed.
std::vector<int> max_weight_assignment(std::span<const double> weights, std::size_t rows, std::size_t cols);

// --- verification ----------------------------------------------------------

struct ScoreSet {
  std::vector<double> target;
  std::vector<double> nontarget;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

struct DcfConfig {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
};

struct DcfResult {
  double min_dcf = 0.0;
  double threshold = 0.0;
};

struct RocPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

/// Operating points of the rule "accept if score >= threshold", one per
/// distinct score plus +inf, ordered by increasing threshold.
std::vector<RocPoint> roc_points(const ScoreSet& scores);

/// Equal error rate, interpolated linearly between the two operating points
/// where miss and false-alarm rates cross.
EerResult eer(const ScoreSet& scores);

/// Minimum normalized detection cost over all thresholds.
DcfResult min_dcf(const ScoreSet& scores, const DcfConfig& config = {});

// --- clustering ------------------------------------------------------------

struct PairwiseF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Pair-counting precision/recall/F1 of a predicted partition against the truth.
PairwiseF1 pairwise_f1(std::span<const std::size_t> truth, std::span<const std::size_t> predicted);
PairwiseF1 pairwise_f1(std::span<const std::string> truth, std::span<const std::string> predicted);

// --- diarization -----------------------------------------------------------

struct Segment {
  std::string recording;
  double start = 0.0;
  double duration = 0.0;
  std::string speaker;
  double end() const { return start + duration; }
};

using Annotation = std::vector<Segment>;

struct DiarizationConfig {
  double collar = 0.25;
  bool skip_overlap = true;
};

struct DerBreakdown {
  double scored = 0.0;  // total scored reference speech, seconds
  double miss = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;
  double der() const;
};

struct RecordingScore {
  DerBreakdown der;
  double jer = 0.0;
  std::size_t ref_speakers = 0;
};

struct DiarizationReport {
  DerBreakdown der;
  double jer = 0.0;
  std::map<std::string, RecordingScore> per_recording;
};

/// Diarization error rate and Jaccard error rate. Every recording present in
/// the hypothesis must also appear in the reference.
DiarizationReport score_diarization(const Annotation& ref, const Annotation& hyp, const DiarizationConfig& config = {});

double der(const Annotation& ref, const Annotation& hyp, const DiarizationConfig& config = {});
double jer(const Annotation& ref, const Annotation& hyp);

}  // namespace spkr
