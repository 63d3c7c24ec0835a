#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "spkr/error.hpp"
#include "spkr/io.hpp"

using namespace spkr;

namespace {

std::vector<Embedding> random_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 3.0);
  std::vector<Embedding> xs;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(d);
    for (auto& c : v) c = g(rng);
    xs.push_back({"utt-" + std::to_string(i) + (i % 3 == 0 ? "-é" : ""), std::move(v)});
  }
  return xs;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no spkr::Error thrown");
  return Errc::IoError;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::vector<Trial> parse_trials(const std::string& text) {
  std::istringstream in(text);
  return read_trials(in);
}

Annotation parse_rttm(const std::string& text) {
  std::istringstream in(text);
  return read_rttm(in);
}

}  // namespace

TEST_CASE("f64 archives round trip bit for bit") {
  const auto xs = random_embeddings(100, 17, 1);
  std::stringstream buf;
  write_archive(buf, xs);
  const auto ys = read_archive(buf);
  REQUIRE(ys.size() == xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(ys[i].id == xs[i].id);
    for (std::size_t j = 0; j < 17; ++j) {
      CHECK(std::bit_cast<std::uint64_t>(ys[i].vec[j]) == std::bit_cast<std::uint64_t>(xs[i].vec[j]));
    }
  }
}

TEST_CASE("f32 archives round trip at single precision") {
  const auto xs = random_embeddings(20, 5, 2);
  std::stringstream buf;
  write_archive(buf, xs, Dtype::F32);
  const auto ys = read_archive(buf);
  REQUIRE(ys.size() == xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(ys[i].vec[j] == static_cast<double>(static_cast<float>(xs[i].vec[j])));
  }
}

TEST_CASE("archive header layout") {
  std::stringstream buf;
  write_archive(buf, random_embeddings(3, 4, 3));
  const std::string s = buf.str();
  CHECK(s.substr(0, 4) == "EMB1");
  std::uint32_t d = 0;
  std::uint64_t count = 0;
  std::memcpy(&d, s.data() + 4, 4);
  std::memcpy(&count, s.data() + 8, 8);
  CHECK(d == 4);
  CHECK(count == 3);
  CHECK(static_cast<int>(s[16]) == 8);
  CHECK(static_cast<int>(s[17]) == 0);
}

TEST_CASE("empty archive reads back empty") {
  std::stringstream buf;
  write_archive(buf, std::vector<Embedding>{});
  CHECK(read_archive(buf).empty());
}

TEST_CASE("damaged archives are rejected") {
  std::stringstream buf;
  write_archive(buf, random_embeddings(4, 6, 4));
  const std::string good = buf.str();

  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, good.size() - 1, good.size() - 30}) {
    std::istringstream in(good.substr(0, cut));
    CHECK(code_of([&] { read_archive(in); }) == Errc::TruncatedFile);
  }
  std::string bad = good;
  bad[0] = 'X';
  std::istringstream in(bad);
  CHECK(code_of([&] { read_archive(in); }) == Errc::BadMagic);
}

TEST_CASE("archives with non-finite values are rejected on read and write") {
  std::stringstream buf;
  const auto xs = random_embeddings(1, 2, 5);
  write_archive(buf, xs);
  std::string s = buf.str();
  const double nan = std::nan("");
  // Header (20 bytes) + id length (4) + id bytes, then the first value.
  std::memcpy(s.data() + 24 + xs[0].id.size(), &nan, 8);
  std::istringstream in(s);
  CHECK(code_of([&] { read_archive(in); }) == Errc::NonFinite);

  std::vector<Embedding> bad{{"a", {1.0, INFINITY}}};
  std::stringstream out;
  CHECK(code_of([&] { write_archive(out, bad); }) == Errc::NonFinite);
}

TEST_CASE("archives need a common dimension") {
  std::vector<Embedding> mixed{{"a", {1.0, 2.0}}, {"b", {1.0}}};
  std::stringstream out;
  CHECK(code_of([&] { write_archive(out, mixed); }) == Errc::DimensionMismatch);
}

TEST_CASE("trial lines parse into enrollment and test sets") {
  const auto t = parse_trials("# comment\na,b,c x target\n\na x,y,z impostor\n");
  REQUIRE(t.size() == 2);
  CHECK(t[0].enroll == std::vector<std::string>{"a", "b", "c"});
  CHECK(t[0].test == std::vector<std::string>{"x"});
  CHECK(t[0].target);
  CHECK(t[1].enroll == std::vector<std::string>{"a"});
  CHECK(t[1].test == std::vector<std::string>{"x", "y", "z"});
  CHECK_FALSE(t[1].target);
  CHECK(parse_trials("a b nontarget\n").front().target == false);
}

TEST_CASE("malformed trial lines report their line number") {
  for (const std::string text : {"a b target\na b\n", "a b target\na b maybe\n", "a b target\na,,b c target\n"}) {
    CHECK(code_of([&] { parse_trials(text); }) == Errc::ParseError);
    CHECK(message_of([&] { parse_trials(text); }).find("line 2") != std::string::npos);
  }
}

TEST_CASE("trials survive a write/read cycle") {
  const std::vector<Trial> t{{{"a", "b"}, {"c"}, true}, {{"d"}, {"e", "f", "g"}, false}};
  std::stringstream buf;
  write_trials(buf, t);
  const auto back = read_trials(buf);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].enroll == t[i].enroll);
    CHECK(back[i].test == t[i].test);
    CHECK(back[i].target == t[i].target);
  }
}

TEST_CASE("scores round trip exactly") {
  const std::vector<ScoredTrial> s{{0.1, true}, {-1e-300, false}, {12345.678901234567, true}, {1.0 / 3.0, false}};
  std::stringstream buf;
  write_scores(buf, s);
  const auto back = read_scores(buf);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i].score == s[i].score);
    CHECK(back[i].target == s[i].target);
  }
  const auto set = to_score_set(back);
  CHECK(set.target.size() == 2);
  CHECK(set.nontarget.size() == 2);
  std::istringstream bad("0.5 target\nnan impostor\n");
  CHECK(code_of([&] { read_scores(bad); }) == Errc::ParseError);
}

TEST_CASE("labels and id lists") {
  std::stringstream buf;
  const std::vector<std::string> ids{"u1", "u2"}, spk{"A", "B"};
  write_labels(buf, ids, spk);
  const auto back = read_labels(buf);
  REQUIRE(back.size() == 2);
  CHECK(back[1] == std::pair<std::string, std::string>{"u2", "B"});
  std::istringstream list("x\n\ny\n# z\n");
  CHECK(read_id_list(list) == std::vector<std::string>{"x", "y"});
  std::istringstream bad("u1 A extra\n");
  CHECK(code_of([&] { read_labels(bad); }) == Errc::ParseError);
}

TEST_CASE("numbers are formatted without locale") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-2.0) == "-2");
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("rttm round trip at millisecond precision") {
  const Annotation a{{"rec1", 3.25, 1.5, "spk_b"}, {"rec1", 0.1234, 2.0004, "spk_a"}, {"rec2", 7.0, 0.001, "x"}};
  std::stringstream buf;
  write_rttm(buf, a);
  CHECK(buf.str().rfind("SPEAKER rec1 1 3.250 1.500 <NA> <NA> spk_b <NA> <NA>\n", 0) == 0);
  const auto back = read_rttm(buf);
  REQUIRE(back.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(back[i].recording == a[i].recording);
    CHECK(back[i].speaker == a[i].speaker);
    CHECK(std::abs(back[i].start - a[i].start) <= 1e-3);
    CHECK(std::abs(back[i].duration - a[i].duration) <= 1e-3);
  }
  // Out-of-order onsets stay in file order.
  CHECK(back[0].start > back[1].start);
}

TEST_CASE("rttm reader skips other record types and validates speaker lines") {
  const auto a = parse_rttm(
      "SPKR-INFO r 1 <NA> <NA> <NA> unknown A <NA> <NA>\n"
      "SPEAKER r 1 0.0 1.0 <NA> <NA> A <NA> <NA>\n"
      "LEXEME r 1 0.1 0.2 hello lex A <NA> <NA>\n");
  REQUIRE(a.size() == 1);
  CHECK(a[0].speaker == "A");
  CHECK(code_of([&] { parse_rttm("SPEAKER r 1 0.0 0.0 <NA> <NA> A <NA> <NA>\n"); }) == Errc::ParseError);
  CHECK(code_of([&] { parse_rttm("SPEAKER r 1 -1 1.0 <NA> <NA> A <NA> <NA>\n"); }) == Errc::ParseError);
  CHECK(code_of([&] { parse_rttm("SPEAKER r 1 0.0 1.0 A\n"); }) == Errc::ParseError);
  CHECK(code_of([&] { parse_rttm("SPEAKER r 1 inf 1.0 <NA> <NA> A <NA> <NA>\n"); }) == Errc::ParseError);
}

TEST_CASE("region windowing fixtures") {
  const std::vector<Region> five{{0.0, 5.0}};
  const auto w = segment_regions(five);
  REQUIRE(w.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(w[i].onset == static_cast<double>(i));
    CHECK(w[i].duration == 2.0);
  }
  const std::vector<Region> two{{0.0, 2.0}};
  const auto w2 = segment_regions(two);
  REQUIRE(w2.size() == 1);
  CHECK(w2[0].duration == 2.0);
  const std::vector<Region> short_region{{0.0, 1.5}};
  const auto w3 = segment_regions(short_region);
  REQUIRE(w3.size() == 1);
  CHECK(w3[0].onset == 0.0);
  CHECK(w3[0].duration == 1.5);
}

TEST_CASE("trailing remainders are kept or merged") {
  const std::vector<Region> r{{0.0, 5.5}};
  const auto w = segment_regions(r);
  REQUIRE(w.size() == 5);
  CHECK(w.back().onset == 4.0);
  CHECK(w.back().duration == doctest::Approx(1.5));
  // With win = 3 and hop = 2 a 0.5 s remainder is shorter than hop.
  const std::vector<Region> m{{0.0, 5.5}};
  const auto wm = segment_regions(m, 3.0, 2.0);
  REQUIRE(wm.size() == 2);
  CHECK(wm.back().onset == 2.0);
  CHECK(wm.back().duration == doctest::Approx(3.5));
}

TEST_CASE("windows stay inside their regions") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Region> regions;
  double t = 0;
  for (int i = 0; i < 200; ++i) {
    const double on = t + 5 * u(rng);
    const double off = on + 0.05 + 12 * u(rng);
    regions.push_back({on, off});
    t = off;
  }
  const auto w = segment_regions(regions);
  std::size_t k = 0;
  for (const auto& r : regions) {
    const std::size_t first = k;
    while (k < w.size() && w[k].onset < r.offset - 1e-12) {
      CHECK(w[k].onset >= r.onset);
      CHECK(w[k].onset + w[k].duration <= r.offset + 1e-9);
      CHECK(w[k].duration <= 2.0 + 1e-9);
      CHECK(w[k].duration > 0.0);
      if (k > first) {
        const double overlap = w[k - 1].onset + w[k - 1].duration - w[k].onset;
        CHECK(overlap == doctest::Approx(1.0).epsilon(1e-9));
      }
      ++k;
    }
    CHECK(k > first);
    // The last window reaches the region end.
    CHECK(w[k - 1].onset + w[k - 1].duration == doctest::Approx(r.offset).epsilon(1e-12));
  }
  CHECK(k == w.size());
}

TEST_CASE("invalid regions are rejected") {
  const std::vector<Region> bad{{2.0, 1.0}};
  CHECK(code_of([&] { segment_regions(bad); }) == Errc::InvalidRegion);
  const std::vector<Region> ok{{0.0, 1.0}};
  CHECK_THROWS_AS(segment_regions(ok, 1.0, 2.0), Error);
}

TEST_CASE("model files round trip every back-end kind") {
  Eigen::MatrixXd full(2, 2);
  full << 2.0, 0.3, 0.3, 1.0;
  const std::vector<BackendModel> models{
      CosineModel{PreprocessParams{Vector{0.5, -0.25}, {PreprocessStep::Center, PreprocessStep::LengthNorm}}},
      PldaModel(Vector{0.0, 0.0}, Covariance::spherical(2, 1.0 / 3.0), Covariance::spherical(2, 0.1),
                default_plda_preprocess(Vector{0.1, 0.2})),
      PldaModel(Vector{0.1, 0.0}, Covariance::diagonal({1.0, 2.0}), Covariance::diagonal({0.1, 0.2}),
                PreprocessParams{Vector(2, 0.0), {}}),
      PldaModel(Vector{0.0, 0.3}, Covariance::full(full), Covariance::full(full * 0.1),
                PreprocessParams{Vector(2, 0.0), {PreprocessStep::LengthNorm}}),
      PsdaModel(Vector{0.6, 0.8}, 3.5, 40.0, default_psda_preprocess(2)),
  };
  for (const auto& m : models) {
    const std::string text = model_to_json(m);
    const BackendModel back = model_from_json(text);
    CHECK(kind_of(back) == kind_of(m));
    CHECK(model_to_json(back) == text);
    CHECK(preprocess_of(back).steps == preprocess_of(m).steps);
  }
  const auto& plda = std::get<PldaModel>(model_from_json(model_to_json(models[1])));
  CHECK(plda.between().scalar() == 1.0 / 3.0);
}

TEST_CASE("malformed model files are rejected") {
  CHECK(code_of([] { model_from_json("{not json"); }) == Errc::ParseError);
  CHECK(code_of([] { model_from_json(R"({"format":"other","version":1})"); }) == Errc::ParseError);
}
