#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spkr/backends.hpp"
#include "spkr/metrics.hpp"

namespace spkr {

// --- embedding archive -----------------------------------------------------
//
// Little-endian binary layout:
//   "EMB1" | u32 d | u64 count | u8 dtype (4 = f32, 8 = f64) | u8 endianness (0 = little) | 2 reserved bytes
// followed by `count` records of
//   u32 id length | id bytes (UTF-8) | d values of the given dtype.

enum class Dtype { F32, F64 };

void write_archive(std::ostream& out, std::span<const Embedding> xs, Dtype dtype = Dtype::F64);
void write_archive(const std::filesystem::path& path, std::span<const Embedding> xs, Dtype dtype = Dtype::F64);
std::vector<Embedding> read_archive(std::istream& in);
std::vector<Embedding> read_archive(const std::filesystem::path& path);

// --- text formats ----------------------------------------------------------
// ASCII, whitespace-delimited, one record per line. Blank lines and lines
// starting with '#' are ignored. Parse errors carry the 1-based line number.

/// "<id> <speaker>" per line.
std::vector<std::pair<std::string, std::string>> read_labels(std::istream& in);
std::vector<std::pair<std::string, std::string>> read_labels(const std::filesystem::path& path);
void write_labels(std::ostream& out, std::span<const std::string> ids, std::span<const std::string> speakers);

/// "<enroll ids, comma-separated> <test ids, comma-separated> <target|impostor>".
std::vector<Trial> read_trials(std::istream& in);
std::vector<Trial> read_trials(const std::filesystem::path& path);
void write_trials(std::ostream& out, std::span<const Trial> trials);

/// "<score> <target|impostor>" per line.
struct ScoredTrial {
  double score = 0.0;
  bool target = false;
};
std::vector<ScoredTrial> read_scores(std::istream& in);
std::vector<ScoredTrial> read_scores(const std::filesystem::path& path);
void write_scores(std::ostream& out, std::span<const ScoredTrial> scores);
ScoreSet to_score_set(std::span<const ScoredTrial> scores);

/// One id per line.
std::vector<std::string> read_id_list(std::istream& in);
std::vector<std::string> read_id_list(const std::filesystem::path& path);

/// RTTM speaker lines, "SPEAKER <rec> 1 <onset> <dur> <NA> <NA> <spk> <NA> <NA>".
/// Other record types are skipped with a warning; times are written with
/// three decimals.
Annotation read_rttm(std::istream& in);
Annotation read_rttm(const std::filesystem::path& path);
void write_rttm(std::ostream& out, const Annotation& annotation);

/// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

// --- model artifacts -------------------------------------------------------

/// JSON document holding the back-end kind, its parameters and the
/// preprocessing needed to score raw embeddings.
std::string model_to_json(const BackendModel& model);
BackendModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const BackendModel& model);
BackendModel load_model(const std::filesystem::path& path);

// --- speech-region windowing -----------------------------------------------

struct Region {
  double onset = 0.0;
  double offset = 0.0;
};

struct Window {
  double onset = 0.0;
  double duration = 0.0;
};

/// Splits each region into windows of length `win` at stride `hop`. A region
/// no longer than `win` becomes one window. A trailing partial window is kept
/// if it is at least `hop` long and otherwise merged into the previous one
/// (which can only happen when win < 2 hop). Windows never cross regions.
std::vector<Window> segment_regions(std::span<const Region> regions, double win = 2.0, double hop = 1.0);

}  // namespace spkr
