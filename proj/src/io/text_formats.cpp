#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spkr/io.hpp"
#include "spkr/log.hpp"

namespace spkr {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = field.find(',', start);
    out.push_back(field.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::string_view what, std::size_t line, const std::string& msg) {
  fail(Errc::ParseError, std::string(what) + ": line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& s, std::string_view what, std::size_t line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) parse_fail(what, line, "'" + s + "' is not a number");
  if (!std::isfinite(v)) parse_fail(what, line, "non-finite value '" + s + "'");
  return v;
}

bool parse_label(const std::string& s, std::string_view what, std::size_t line) {
  if (s == "target") return true;
  if (s == "impostor" || s == "nontarget") return false;
  parse_fail(what, line, "expected 'target' or 'impostor', got '" + s + "'");
}

// Calls fn(fields, line_number) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_ws(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    fn(fields, no);
  }
  if (in.bad()) fail(Errc::IoError, "read error");
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open '" + path.string() + "'");
  return in;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i];
  }
  return s;
}

std::string fixed3(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  if (ec != std::errc()) fail(Errc::InvalidArgument, "cannot format time value");
  return {buf, ptr};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(Errc::InvalidArgument, "cannot format value");
  return {buf, ptr};
}

std::vector<std::pair<std::string, std::string>> read_labels(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  for_each_record(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f.size() != 2) parse_fail("labels", no, "expected '<id> <speaker>'");
    out.emplace_back(f[0], f[1]);
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_labels(in);
}

void write_labels(std::ostream& out, std::span<const std::string> ids, std::span<const std::string> speakers) {
  if (ids.size() != speakers.size()) fail(Errc::DimensionMismatch, "write_labels: ids and speakers differ in length");
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ' ' << speakers[i] << '\n';
}

std::vector<Trial> read_trials(std::istream& in) {
  std::vector<Trial> out;
  for_each_record(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f.size() != 3) parse_fail("trials", no, "expected '<enroll ids> <test ids> <target|impostor>'");
    Trial t;
    t.enroll = split_commas(f[0]);
    t.test = split_commas(f[1]);
    for (const auto* side : {&t.enroll, &t.test}) {
      for (const auto& id : *side) {
        if (id.empty()) parse_fail("trials", no, "empty id in list");
      }
    }
    t.target = parse_label(f[2], "trials", no);
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<Trial> read_trials(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trials(in);
}

void write_trials(std::ostream& out, std::span<const Trial> trials) {
  for (const auto& t : trials) {
    out << join(t.enroll) << ' ' << join(t.test) << ' ' << (t.target ? "target" : "impostor") << '\n';
  }
}

std::vector<ScoredTrial> read_scores(std::istream& in) {
  std::vector<ScoredTrial> out;
  for_each_record(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f.size() != 2) parse_fail("scores", no, "expected '<score> <target|impostor>'");
    out.push_back({parse_double(f[0], "scores", no), parse_label(f[1], "scores", no)});
  });
  return out;
}

std::vector<ScoredTrial> read_scores(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_scores(in);
}

void write_scores(std::ostream& out, std::span<const ScoredTrial> scores) {
  for (const auto& s : scores) out << format_double(s.score) << ' ' << (s.target ? "target" : "impostor") << '\n';
}

ScoreSet to_score_set(std::span<const ScoredTrial> scores) {
  ScoreSet s;
  for (const auto& t : scores) (t.target ? s.target : s.nontarget).push_back(t.score);
  return s;
}

std::vector<std::string> read_id_list(std::istream& in) {
  std::vector<std::string> out;
  for_each_record(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f.size() != 1) parse_fail("id list", no, "expected a single id");
    out.push_back(f[0]);
  });
  return out;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_id_list(in);
}

Annotation read_rttm(std::istream& in) {
  Annotation out;
  for_each_record(in, [&](const std::vector<std::string>& f, std::size_t no) {
    if (f[0] != "SPEAKER") {
      log::warn("rttm: line " + std::to_string(no) + ": skipping '" + f[0] + "' record");
      return;
    }
    if (f.size() != 10) parse_fail("rttm", no, "SPEAKER lines need 10 fields");
    Segment s;
    s.recording = f[1];
    s.start = parse_double(f[3], "rttm", no);
    s.duration = parse_double(f[4], "rttm", no);
    s.speaker = f[7];
    if (s.start < 0.0) parse_fail("rttm", no, "negative onset");
    if (!(s.duration > 0.0)) parse_fail("rttm", no, "duration must be positive");
    out.push_back(std::move(s));
  });
  return out;
}

Annotation read_rttm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_rttm(in);
}

void write_rttm(std::ostream& out, const Annotation& annotation) {
  for (const auto& s : annotation) {
    out << "SPEAKER " << s.recording << " 1 " << fixed3(s.start) << ' ' << fixed3(s.duration) << " <NA> <NA> "
        << s.speaker << " <NA> <NA>\n";
  }
}

}  // namespace spkr
