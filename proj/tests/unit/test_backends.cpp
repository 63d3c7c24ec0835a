#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "spkr/backends.hpp"
#include "spkr/specfun.hpp"
#include "spkr/synth.hpp"

using namespace spkr;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Embedding emb(Vector v, std::string id = "x") { return {std::move(id), std::move(v)}; }

Vector unit(Vector v) {
  const double n = l2_norm(v);
  for (auto& x : v) x /= n;
  return v;
}

Vector gaussian(std::size_t d, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Vector v(d);
  for (auto& x : v) x = nd(rng);
  return v;
}

PldaModel spherical_model(std::size_t d, double b, double w, Vector mu = {}) {
  if (mu.empty()) mu.assign(d, 0.0);
  return PldaModel(std::move(mu), Covariance::spherical(d, b), Covariance::spherical(d, w),
                   default_plda_preprocess(Vector(d, 0.0)));
}

Eigen::MatrixXd random_spd(std::size_t d, std::mt19937_64& rng, double ridge) {
  Eigen::MatrixXd a(d, d);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = nd(rng);
  return a * a.transpose() / static_cast<double>(d) + ridge * Eigen::MatrixXd::Identity(d, d);
}

// Direct evaluation of the marginal as one Gaussian over the stacked vector:
// covariance 11' (x) B + I (x) W, mean 1 (x) mu.
double stacked_gaussian_marginal(const std::vector<Embedding>& xs, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& b, const Eigen::MatrixXd& w) {
  const auto d = mu.size();
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd cov(n * d, n * d);
  Eigen::VectorXd r(n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cov.block(i * d, j * d, d, d) = i == j ? Eigen::MatrixXd(b + w) : b;
    r.segment(i * d, d) = Eigen::Map<const Eigen::VectorXd>(xs[static_cast<std::size_t>(i)].vec.data(), d) - mu;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n * d) * kLog2Pi + log_det + r.dot(llt.solve(r)));
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  double s = 0.0;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * s / (n * (n * n - 1.0));
}

template <typename Fn>
Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("cosine scoring examples") {
  const auto x = emb({0.3, -2, 5});
  CHECK(cosine_score(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_score(emb({1, 0}), emb({0, 1})) == 0.0);
  CHECK(cosine_score(emb({1, 0}), emb({-1, 0})) == -1.0);
  CHECK(error_of([] { cosine_score(emb({0, 0}), emb({1, 0})); }) == Errc::ZeroVector);
  CHECK(error_of([] { cosine_score(emb({1, 0, 0}), emb({1, 0})); }) == Errc::DimensionMismatch);

  const std::vector<Embedding> e{emb({1, 2})}, t{emb({-3, 1})};
  const double c = cosine_score(e[0], t[0]);
  CHECK(cosine_multi(e, t, CosineMode::Csea) == c);
  CHECK(cosine_multi(e, t, CosineMode::Cssa) == c);
  const std::vector<Embedding> ee{emb({1, 2}), emb({1, 2})};
  CHECK(cosine_multi(ee, t, CosineMode::Csea) == doctest::Approx(c).epsilon(1e-15));
  const std::vector<Embedding> two{emb({1, 0}), emb({0, 1})}, one{emb({1, 0})};
  CHECK(cosine_multi(two, one, CosineMode::Cssa) == 0.5);
  CHECK(cosine_multi(two, one, CosineMode::Csea) != doctest::Approx(0.5));
  CHECK(error_of([&] { cosine_multi({}, one, CosineMode::Csea); }) == Errc::EmptySet);
  const std::vector<Embedding> opp{emb({1, 0}), emb({-1, 0})};
  CHECK(error_of([&] { cosine_multi(opp, one, CosineMode::Csea); }) == Errc::ZeroVector);
}

TEST_CASE("PLDA marginal: empty set, singleton and the stacked Gaussian oracle") {
  const auto m = spherical_model(3, 1.5, 0.4, {0.1, -0.2, 0.3});
  CHECK(plda_log_marginal({}, m) == 0.0);

  const std::vector<Embedding> one{emb({0.5, 0.1, -0.7})};
  double q = 0.0;
  for (std::size_t i = 0; i < 3; ++i) q += std::pow(one[0].vec[i] - m.mu()[i], 2);
  const double want = -0.5 * (3 * kLog2Pi + 3 * std::log(1.9) + q / 1.9);
  CHECK(std::abs(plda_log_marginal(one, m) - want) < 1e-12);

  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 2u, 3u, 7u}) {
    std::vector<Embedding> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(emb(gaussian(3, rng)));
    const Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(m.mu().data(), 3);
    const double oracle = stacked_gaussian_marginal(xs, mu, m.between().dense(), m.within().dense());
    CHECK(std::abs(plda_log_marginal(xs, m) - oracle) < 1e-10);
  }
}

TEST_CASE("PLDA marginal for diagonal and full covariances against the stacked oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t d = 4;
    const Vector mu = gaussian(d, rng, 0.3);
    const Eigen::MatrixXd b = random_spd(d, rng, 0.2);
    const Eigen::MatrixXd w = random_spd(d, rng, 0.1);
    const PldaModel full(mu, Covariance::full(b), Covariance::full(w), default_plda_preprocess(Vector(d, 0.0)));
    Vector bd(d), wd(d);
    for (std::size_t i = 0; i < d; ++i) {
      bd[i] = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      wd[i] = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    const PldaModel diag(mu, Covariance::diagonal(bd), Covariance::diagonal(wd), default_plda_preprocess(Vector(d, 0.0)));
    std::vector<Embedding> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(emb(gaussian(d, rng)));
    const Eigen::VectorXd me = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(d));
    CHECK(std::abs(plda_log_marginal(xs, full) - stacked_gaussian_marginal(xs, me, b, w)) < 1e-9);
    CHECK(std::abs(plda_log_marginal(xs, diag) -
                   stacked_gaussian_marginal(xs, me, Eigen::MatrixXd(b.diagonal().asDiagonal()),
                                             Eigen::MatrixXd(w.diagonal().asDiagonal()))) < 1e-9);
  }
}

TEST_CASE("PLDA marginal in one dimension matches adaptive quadrature") {
  const PldaModel m(Vector{0.0}, Covariance::spherical(1, 1.0), Covariance::spherical(1, 1.0),
                    PreprocessParams{{0.0}, {}});
  const std::vector<Embedding> xs{emb({0.5}), emb({-0.5})};
  auto integrand = [&](double y) {
    double log_p = -0.5 * (kLog2Pi + y * y);
    for (const auto& x : xs) log_p += -0.5 * (kLog2Pi + (x.vec[0] - y) * (x.vec[0] - y));
    return std::exp(log_p);
  };
  const double inf = std::numeric_limits<double>::infinity();
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 15, 1e-14);
  CHECK(std::abs(plda_log_marginal(xs, m) - std::log(value)) < 1e-8);
}

TEST_CASE("PLDA LLR: degenerate sets, symmetry and exchangeability") {
  std::mt19937_64 rng(23);
  const auto m = spherical_model(5, 2.0, 0.5);
  std::vector<Embedding> e, t;
  for (int i = 0; i < 3; ++i) e.push_back(emb(gaussian(5, rng)));
  for (int i = 0; i < 2; ++i) t.push_back(emb(gaussian(5, rng)));
  CHECK(plda_llr({}, t, m) == 0.0);
  CHECK(plda_llr(e, {}, m) == 0.0);
  CHECK(plda_llr(e, t, m) == plda_llr(t, e, m));
  auto e2 = e;
  std::reverse(e2.begin(), e2.end());
  auto t2 = t;
  std::swap(t2[0], t2[1]);
  CHECK(std::abs(plda_llr(e, t, m) - plda_llr(e2, t2, m)) < 1e-12);
}

TEST_CASE("spherical PLDA 1-vs-1 scores are an affine map of cosine on unit vectors") {
  std::mt19937_64 rng(29);
  const std::size_t d = 24;
  const auto m = spherical_model(d, 0.7, 0.3);
  std::vector<double> cos, llr;
  for (int i = 0; i < 1000; ++i) {
    const Embedding a = emb(unit(gaussian(d, rng)));
    const Embedding b = emb(unit(gaussian(d, rng)));
    cos.push_back(cosine_score(a, b));
    llr.push_back(plda_llr(std::span(&a, 1), std::span(&b, 1), m));
  }
  CHECK(spearman(cos, llr) == 1.0);
  // Least-squares line and its worst residual.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < cos.size(); ++i) {
    mx += cos[i];
    my += llr[i];
  }
  mx /= cos.size();
  my /= llr.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < cos.size(); ++i) {
    sxy += (cos[i] - mx) * (llr[i] - my);
    sxx += (cos[i] - mx) * (cos[i] - mx);
  }
  const double slope = sxy / sxx;
  double worst = 0;
  for (std::size_t i = 0; i < cos.size(); ++i) worst = std::max(worst, std::abs(llr[i] - (my + slope * (cos[i] - mx))));
  CHECK(slope > 0.0);
  CHECK(worst < 1e-6);
}

TEST_CASE("spherical, diagonal and full forms of the same model agree") {
  std::mt19937_64 rng(31);
  const std::size_t d = 6;
  const Vector mu = gaussian(d, rng, 0.2);
  const auto pre = default_plda_preprocess(Vector(d, 0.0));
  const PldaModel sph(mu, Covariance::spherical(d, 1.3), Covariance::spherical(d, 0.2), pre);
  const PldaModel diag(mu, Covariance::diagonal(Vector(d, 1.3)), Covariance::diagonal(Vector(d, 0.2)), pre);
  const PldaModel full(mu, Covariance::full(1.3 * Eigen::MatrixXd::Identity(d, d)),
                       Covariance::full(0.2 * Eigen::MatrixXd::Identity(d, d)), pre);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Embedding> e, t;
    for (int i = 0; i < 1 + trial % 4; ++i) e.push_back(emb(gaussian(d, rng)));
    for (int i = 0; i < 1 + trial % 3; ++i) t.push_back(emb(gaussian(d, rng)));
    const double s = plda_llr(e, t, sph);
    CHECK(std::abs(plda_llr(e, t, diag) - s) < 1e-9);
    CHECK(std::abs(plda_llr(e, t, full) - s) < 1e-9);
  }
}

TEST_CASE("PLDA model validation") {
  const auto pre = default_plda_preprocess({0, 0});
  CHECK(error_of([&] { PldaModel({0, 0}, Covariance::spherical(2, 0.0), Covariance::spherical(2, 1.0), pre); }) ==
        Errc::SingularCovariance);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK(error_of([&] { PldaModel({0, 0}, Covariance::full(bad), Covariance::full(bad), pre); }) ==
        Errc::SingularCovariance);
  CHECK(error_of([&] { PldaModel({0, 0}, Covariance::spherical(2, 1), Covariance::diagonal({1, 1}), pre); }) ==
        Errc::InvalidArgument);
}

TEST_CASE("PSDA marginal: empty set and the d = 3 closed form") {
  const PsdaModel m({0, 0, 1}, 1.0, 1.0, default_psda_preprocess(3));
  CHECK(psda_log_marginal({}, m) == 0.0);
  auto c3 = [](double k) { return std::log(k / (4 * std::numbers::pi * std::sinh(k))); };
  const std::vector<Embedding> one{emb({0, 0, 1})};
  CHECK(std::abs(psda_log_marginal(one, m) - (c3(1) + c3(1) - c3(2))) < 1e-13);
  CHECK(error_of([&] { psda_log_marginal(std::vector<Embedding>{emb({1, 0})}, m); }) == Errc::DimensionMismatch);
}

TEST_CASE("PSDA marginal agrees with a Monte-Carlo estimate") {
  std::mt19937_64 rng(37);
  const PsdaModel m(unit({0.3, -0.5, 0.8}), 4.0, 9.0, default_psda_preprocess(3));
  const std::vector<Embedding> xs{emb(unit(gaussian(3, rng))), emb(unit(gaussian(3, rng)))};
  const auto mc = mc_log_marginal(xs, OnlineModel(m), 200000, 99);
  CHECK(std::abs(psda_log_marginal(xs, m) - mc.estimate) < 3.0 * mc.std_error + 1e-12);
}

TEST_CASE("PSDA LLR: symmetry, exchangeability and monotone along a geodesic") {
  std::mt19937_64 rng(41);
  const std::size_t d = 8;
  const PsdaModel m(unit(gaussian(d, rng)), 3.0, 20.0, default_psda_preprocess(d));
  std::vector<Embedding> e, t;
  for (int i = 0; i < 3; ++i) e.push_back(emb(unit(gaussian(d, rng))));
  for (int i = 0; i < 2; ++i) t.push_back(emb(unit(gaussian(d, rng))));
  CHECK(psda_llr({}, t, m) == 0.0);
  CHECK(psda_llr(e, t, m) == psda_llr(t, e, m));
  auto e2 = e;
  std::rotate(e2.begin(), e2.begin() + 1, e2.end());
  CHECK(std::abs(psda_llr(e, t, m) - psda_llr(e2, t, m)) < 1e-12);

  // Walk from a point towards the enrollment mean direction.
  Vector target(d, 0.0);
  for (const auto& x : e)
    for (std::size_t i = 0; i < d; ++i) target[i] += x.vec[i];
  target = unit(target);
  Vector start = unit(gaussian(d, rng));
  double prev = -std::numeric_limits<double>::infinity();
  for (double s : {0.0, 0.5, 1.0}) {
    Vector p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = (1 - s) * start[i] + s * target[i];
    const Embedding x = emb(unit(p));
    const double v = psda_llr(e, std::span(&x, 1), m);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("PSDA with a very concentrated prior prefers tests at the mean direction") {
  const std::size_t d = 5;
  Vector mu(d, 0.0);
  mu[0] = 1.0;
  const PsdaModel m(mu, 1e4, 10.0, default_psda_preprocess(d));
  const Embedding at_mu = emb(mu);
  const double best = psda_log_marginal(std::span(&at_mu, 1), m);
  std::mt19937_64 rng(43);
  for (int i = 0; i < 200; ++i) {
    const Embedding x = emb(unit(gaussian(d, rng)));
    if (x.vec[0] < 1.0) CHECK(psda_log_marginal(std::span(&x, 1), m) < best);
  }
}

TEST_CASE("PSDA model validation") {
  CHECK(error_of([] { PsdaModel({1, 1}, 1, 1, default_psda_preprocess(2)); }) == Errc::InvalidArgument);
  CHECK(error_of([] { PsdaModel({1, 0}, 0, 1, default_psda_preprocess(2)); }) == Errc::InvalidArgument);
}

TEST_CASE("score_trial dispatch") {
  const std::vector<Embedding> e{emb({1, 0}), emb({0.6, 0.8})}, t{emb({0.8, 0.6})};
  const BackendModel cosine = CosineModel{default_plda_preprocess({0, 0})};
  CHECK(score_trial(cosine, ScoreMode::Csea, e, t) == cosine_multi(e, t, CosineMode::Csea));
  CHECK(score_trial(cosine, ScoreMode::Cssa, e, t) == cosine_multi(e, t, CosineMode::Cssa));
  CHECK(error_of([&] { score_trial(cosine, ScoreMode::ByTheBook, e, t); }) == Errc::ModeMismatch);
  const BackendModel plda = spherical_model(2, 1.0, 0.5);
  CHECK(score_trial(plda, ScoreMode::ByTheBook, e, t) == plda_llr(e, t, std::get<PldaModel>(plda)));
  CHECK(parse_score_mode("cssa") == ScoreMode::Cssa);
  CHECK(to_string(ScoreMode::ByTheBook) == "bythebook");
}
