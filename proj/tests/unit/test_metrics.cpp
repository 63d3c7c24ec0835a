#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "spkr/error.hpp"
#include "spkr/metrics.hpp"

using namespace spkr;

namespace {

struct Rates {
  double threshold, miss, fa;
};

// O(n^2) sweep: each candidate threshold counts every score from scratch.
std::vector<Rates> brute_sweep(const ScoreSet& s) {
  std::vector<double> cands = s.target;
  cands.insert(cands.end(), s.nontarget.begin(), s.nontarget.end());
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  cands.push_back(std::numeric_limits<double>::infinity());
  std::vector<Rates> out;
  for (double t : cands) {
    double miss = 0, fa = 0;
    for (double x : s.target) miss += x < t;
    for (double x : s.nontarget) fa += x >= t;
    out.push_back({t, miss / s.target.size(), fa / s.nontarget.size()});
  }
  return out;
}

double brute_eer(const ScoreSet& s) {
  const auto r = brute_sweep(s);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double a = r[i].fa - r[i].miss, b = r[i + 1].fa - r[i + 1].miss;
    if (a >= 0 && b <= 0) {
      if (a == b) return r[i].miss;
      // Intersection of the segment with the diagonal miss == fa.
      const double t = a / (a - b);
      return r[i].miss + t * (r[i + 1].miss - r[i].miss);
    }
  }
  return r.front().fa;
}

double brute_dcf(const ScoreSet& s, const DcfConfig& c) {
  double best = std::numeric_limits<double>::infinity();
  const double norm = std::min(c.c_miss * c.p_target, c.c_fa * (1 - c.p_target));
  for (const auto& r : brute_sweep(s)) {
    best = std::min(best, (c.c_miss * c.p_target * r.miss + c.c_fa * (1 - c.p_target) * r.fa) / norm);
  }
  return best;
}

ScoreSet random_scores(std::size_t n_tar, std::size_t n_non, std::uint64_t seed, double sep = 1.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ScoreSet s;
  for (std::size_t i = 0; i < n_tar; ++i) s.target.push_back(sep + g(rng));
  for (std::size_t i = 0; i < n_non; ++i) s.nontarget.push_back(g(rng));
  return s;
}

Segment seg(std::string spk, double start, double end, std::string rec = "r1") {
  return {std::move(rec), start, end - start, std::move(spk)};
}

DiarizationConfig no_collar(bool skip = true) { return {0.0, skip}; }

}  // namespace

TEST_CASE("eer on small fixtures") {
  CHECK(eer({{0.9, 0.8, 0.7}, {0.1, 0.2, 0.3}}).eer == 0.0);
  CHECK(eer({{0.2, 0.8}, {0.4, 0.6}}).eer == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<double> x{0.3, -1.0, 2.5, 0.7, 0.1};
  CHECK(eer({x, x}).eer == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("eer threshold separates perfectly separated scores") {
  const auto r = eer({{0.9, 0.8, 0.7}, {0.1, 0.2, 0.3}});
  CHECK(r.threshold > 0.3);
  CHECK(r.threshold <= 0.7);
}

TEST_CASE("empty or non-finite scores are rejected") {
  CHECK_THROWS_AS(eer({{}, {0.1}}), Error);
  try {
    min_dcf({{0.1}, {}});
    FAIL("expected EmptyScores");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyScores);
  }
  try {
    eer({{0.1, std::nan("")}, {0.0}});
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFinite);
  }
}

TEST_CASE("min_dcf rejects invalid cost settings") {
  const ScoreSet s{{1.0}, {0.0}};
  CHECK_THROWS_AS(min_dcf(s, {0.0, 1, 1}), Error);
  CHECK_THROWS_AS(min_dcf(s, {1.0, 1, 1}), Error);
  CHECK_THROWS_AS(min_dcf(s, {0.01, 0, 1}), Error);
}

TEST_CASE("min_dcf is zero under perfect separation") {
  CHECK(min_dcf({{0.9, 0.8, 0.7}, {0.1, 0.2, 0.3}}).min_dcf == 0.0);
}

TEST_CASE("eer and min_dcf equal an exhaustive threshold sweep") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = random_scores(1000 + 300 * seed, 4000, seed);
    CHECK(std::abs(eer(s).eer - brute_eer(s)) <= 1e-12);
    for (const DcfConfig c : {DcfConfig{}, DcfConfig{0.05, 1, 1}, DcfConfig{0.3, 2, 0.5}}) {
      CHECK(std::abs(min_dcf(s, c).min_dcf - brute_dcf(s, c)) <= 1e-12);
    }
  }
}

TEST_CASE("tied scores are handled by the sweep") {
  // Quantized scores produce many ties between and within classes.
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> q(0, 20);
  ScoreSet s;
  for (int i = 0; i < 500; ++i) s.target.push_back(q(rng) / 10.0 + 0.5);
  for (int i = 0; i < 700; ++i) s.nontarget.push_back(q(rng) / 10.0);
  CHECK(std::abs(eer(s).eer - brute_eer(s)) <= 1e-12);
  CHECK(std::abs(min_dcf(s).min_dcf - brute_dcf(s, {})) <= 1e-12);
}

TEST_CASE("metrics depend only on score order") {
  const auto s = random_scores(300, 900, 17);
  ScoreSet t;
  auto f = [](double x) { return std::exp(0.7 * x) + 3.0; };
  std::transform(s.target.begin(), s.target.end(), std::back_inserter(t.target), f);
  std::transform(s.nontarget.begin(), s.nontarget.end(), std::back_inserter(t.nontarget), f);
  CHECK(eer(t).eer == doctest::Approx(eer(s).eer).epsilon(1e-12));
  CHECK(min_dcf(t).min_dcf == doctest::Approx(min_dcf(s).min_dcf).epsilon(1e-12));
}

TEST_CASE("metric ranges") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_scores(50, 80, seed, seed % 3 == 0 ? -2.0 : 0.5);
    const double e = eer(s).eer;
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    CHECK(min_dcf(s).min_dcf <= 1.0);
  }
}

TEST_CASE("roc points run from accept-all to reject-all") {
  const auto pts = roc_points({{0.5, 1.0}, {0.0, 0.5}});
  REQUIRE(pts.size() == 4);
  CHECK(pts.front().p_miss == 0.0);
  CHECK(pts.front().p_fa == 1.0);
  CHECK(std::isinf(pts.back().threshold));
  CHECK(pts.back().p_miss == 1.0);
  CHECK(pts.back().p_fa == 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].threshold > pts[i - 1].threshold);
    CHECK(pts[i].p_miss >= pts[i - 1].p_miss);
    CHECK(pts[i].p_fa <= pts[i - 1].p_fa);
  }
}

TEST_CASE("assignment matches brute force over permutations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  for (auto [rows, cols] : {std::pair{5, 5}, std::pair{3, 6}, std::pair{6, 3}, std::pair{1, 4}}) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> w(rows * cols);
      for (auto& v : w) v = u(rng);
      const auto a = max_weight_assignment(w, rows, cols);
      double got = 0;
      std::vector<bool> used(cols, false);
      int matched = 0;
      for (int r = 0; r < rows; ++r) {
        if (a[r] < 0) continue;
        CHECK_FALSE(used[a[r]]);
        used[a[r]] = true;
        got += w[r * cols + a[r]];
        ++matched;
      }
      CHECK(matched == std::min(rows, cols));
      // Permute the larger side and match the smaller side in order.
      const int n = std::max(rows, cols), m = std::min(rows, cols);
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = -1;
      do {
        double v = 0;
        for (int i = 0; i < m; ++i) v += rows <= cols ? w[i * cols + perm[i]] : w[perm[i] * cols + i];
        best = std::max(best, v);
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("pairwise F1 fixtures") {
  const std::vector<std::size_t> truth{0, 0, 1, 1};
  const auto all_one = pairwise_f1(truth, std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(all_one.precision == doctest::Approx(1.0 / 3.0));
  CHECK(all_one.recall == 1.0);
  CHECK(all_one.f1 == doctest::Approx(0.5));
  CHECK(pairwise_f1(truth, std::vector<std::size_t>{7, 7, 3, 3}).f1 == 1.0);
  const auto singletons = pairwise_f1(truth, std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(singletons.precision == 1.0);
  CHECK(singletons.recall == 0.0);
  CHECK(singletons.f1 == 0.0);
  const std::vector<std::string> ts{"a", "b"}, ps{"x", "y"};
  CHECK(pairwise_f1(ts, ps).f1 == 1.0);
  CHECK_THROWS_AS(pairwise_f1(truth, std::vector<std::size_t>{0}), Error);
}

TEST_CASE("der fixtures") {
  const Annotation ref{seg("A", 0, 10)};
  CHECK(der(ref, ref) == 0.0);
  CHECK(der(ref, {seg("s1", 0, 5), seg("s2", 5, 10)}, no_collar()) == 0.5);
  CHECK(der(ref, {}, no_collar()) == 1.0);
}

TEST_CASE("jer fixtures") {
  const Annotation ref{seg("A", 0, 10)};
  CHECK(jer(ref, ref) == 0.0);
  CHECK(jer(ref, {}) == 1.0);
  CHECK(jer(ref, {seg("s1", 0, 5)}) == 0.5);
}

TEST_CASE("der breakdown separates error types") {
  const Annotation ref{seg("A", 0, 10), seg("B", 10, 20)};
  const Annotation hyp{seg("x", 0, 8), seg("y", 8, 20), seg("y", 20, 22)};
  const auto rep = score_diarization(ref, hyp, no_collar());
  CHECK(rep.der.scored == doctest::Approx(20.0));
  CHECK(rep.der.miss == doctest::Approx(0.0));
  CHECK(rep.der.false_alarm == doctest::Approx(2.0));
  CHECK(rep.der.confusion == doctest::Approx(2.0));
  CHECK(rep.der.der() == doctest::Approx(0.2));
}

TEST_CASE("collar forgives boundary errors") {
  const Annotation ref{seg("A", 0, 10)};
  const Annotation hyp{seg("s", 0.2, 10.1)};
  CHECK(der(ref, hyp, {0.25, true}) == 0.0);
  CHECK(der(ref, hyp, no_collar()) > 0.0);
}

TEST_CASE("overlap regions are excluded only when requested") {
  const Annotation ref{seg("A", 0, 10), seg("B", 5, 15)};
  const Annotation hyp{seg("s1", 0, 5), seg("s2", 10, 15)};
  CHECK(der(ref, hyp, no_collar(true)) == 0.0);
  CHECK(der(ref, hyp, no_collar(false)) == doctest::Approx(0.5));
}

TEST_CASE("der ignores hypothesis label names") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    Annotation ref, hyp, renamed;
    double t = 0;
    for (int i = 0; i < 12; ++i) {
      const double len = 0.5 + 3 * u(rng);
      ref.push_back(seg("spk" + std::to_string(i % 3), t, t + len));
      const double jitter = 0.3 * (u(rng) - 0.5);
      const int h = u(rng) < 0.8 ? i % 3 : (i + 1) % 3;
      hyp.push_back(seg("h" + std::to_string(h), t + std::max(0.0, jitter), t + len));
      renamed.push_back(seg("zz" + std::to_string(2 - h), t + std::max(0.0, jitter), t + len));
      t += len;
    }
    CHECK(der(ref, hyp) == doctest::Approx(der(ref, renamed)).epsilon(1e-12));
    CHECK(jer(ref, hyp) == doctest::Approx(jer(ref, renamed)).epsilon(1e-12));
    CHECK(der(ref, ref, {0.4, true}) == 0.0);
    CHECK(jer(ref, ref) == 0.0);
  }
}

TEST_CASE("hypothesis recordings must exist in the reference") {
  const Annotation ref{seg("A", 0, 10, "r1")};
  const Annotation hyp{seg("A", 0, 10, "r2")};
  try {
    der(ref, hyp);
    FAIL("expected RecordingMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RecordingMismatch);
  }
  CHECK_THROWS_AS(jer(ref, hyp), Error);
}

TEST_CASE("recordings pool numerators and denominators") {
  const Annotation ref{seg("A", 0, 10, "r1"), seg("A", 0, 30, "r2")};
  const Annotation hyp{seg("A", 0, 10, "r1")};
  const auto rep = score_diarization(ref, hyp, no_collar());
  CHECK(rep.der.der() == doctest::Approx(0.75));
  REQUIRE(rep.per_recording.size() == 2);
  CHECK(rep.per_recording.at("r1").der.der() == 0.0);
  CHECK(rep.per_recording.at("r2").der.der() == 1.0);
  CHECK(rep.per_recording.at("r2").jer == 1.0);
}

TEST_CASE("segments with non-positive duration are rejected") {
  const Annotation bad{seg("A", 5, 5)};
  CHECK_THROWS_AS(der(bad, {}), Error);
}
