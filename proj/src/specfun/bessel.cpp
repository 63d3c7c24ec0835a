#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "spkr/error.hpp"
#include "spkr/specfun.hpp"

namespace spkr::specfun {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Orders at or above this use the uniform (Debye) expansion for every x.
constexpr double kDebyeMinOrder = 25.0;
constexpr int kDebyeTerms = 10;

// Hankel's large-argument expansion is used for x above this bound when the
// order is below kDebyeMinOrder.
double hankel_min_argument(double nu) { return std::max(50.0, 2.0 * nu * nu + 50.0); }

using Poly = std::vector<double>;

double eval_poly(const Poly& p, double t) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * t + p[i];
  return acc;
}

// Debye polynomials u_k(t) from
//   u_{k+1}(t) = t^2 (1 - t^2) u_k'(t) / 2 + (1/8) \int_0^t (1 - 5 s^2) u_k(s) ds.
const std::array<Poly, kDebyeTerms>& debye_polys() {
  static const std::array<Poly, kDebyeTerms> polys = [] {
    std::array<Poly, kDebyeTerms> u;
    u[0] = {1.0};
    for (int k = 0; k + 1 < kDebyeTerms; ++k) {
      const Poly& p = u[k];
      Poly next(p.size() + 3, 0.0);
      // t^2 (1 - t^2) p'(t) / 2
      for (std::size_t i = 1; i < p.size(); ++i) {
        const double c = 0.5 * static_cast<double>(i) * p[i];
        next[i + 1] += c;
        next[i + 3] -= c;
      }
      // (1/8) \int_0^t (1 - 5 s^2) p(s) ds
      for (std::size_t i = 0; i < p.size(); ++i) {
        next[i + 1] += p[i] / (8.0 * static_cast<double>(i + 1));
        next[i + 3] -= 5.0 * p[i] / (8.0 * static_cast<double>(i + 3));
      }
      u[k + 1] = std::move(next);
    }
    return u;
  }();
  return polys;
}

void check_args(double nu, double x, const char* fn) {
  if (!(nu >= 0.0) || !(x >= 0.0)) {
    fail(Errc::DomainError, std::string(fn) + ": arguments must be non-negative (nu=" + std::to_string(nu) +
                                ", x=" + std::to_string(x) + ")");
  }
}

void check_dim(int d, double kappa, const char* fn) {
  if (d < 2) fail(Errc::DomainError, std::string(fn) + ": dimension must be >= 2");
  if (!(kappa >= 0.0)) fail(Errc::DomainError, std::string(fn) + ": concentration must be >= 0");
}

// Partial sums of Hankel's expansion sum_k (-1)^k a_k(nu) / x^k, stopped at
// the smallest term.
double hankel_sum(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (next == 0.0) break;
    if (std::abs(next) >= std::abs(term)) break;
    sum += next;
    term = next;
    if (std::abs(term) < kEps * 1e-2 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

namespace detail {

Branch select_branch(double nu, double x) {
  if (nu >= kDebyeMinOrder) return Branch::Debye;
  if (x > hankel_min_argument(nu)) return Branch::Hankel;
  return Branch::Series;
}

double log_scaled_series(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  double log_offset = 0.0;
  constexpr double kRescale = 1e280;
  const double log_rescale = std::log(kRescale);
  for (long k = 0;; ++k) {
    const double kk = static_cast<double>(k);
    const double ratio = q / ((kk + 1.0) * (kk + nu + 1.0));
    term *= ratio;
    sum += term;
    if (sum > kRescale) {
      sum /= kRescale;
      term /= kRescale;
      log_offset += log_rescale;
    }
    if (ratio < 1.0 && term <= kEps * 1e-2 * sum) break;
    if (term == 0.0) break;
  }
  return std::log(sum) + log_offset;
}

double log_bessel_i_series(double nu, double x) {
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_scaled_series(nu, x);
}

double log_bessel_i_hankel(double nu, double x) {
  return x - 0.5 * (kLog2Pi + std::log(x)) + std::log(hankel_sum(nu, x));
}

namespace {

double debye_correction(double nu, double t) {
  const auto& u = debye_polys();
  double corr = 1.0;
  double inv_pow = 1.0;
  for (int k = 1; k < kDebyeTerms; ++k) {
    inv_pow /= nu;
    corr += eval_poly(u[k], t) * inv_pow;
  }
  return corr;
}

// log I_{nu+1}(x) - log I_nu(x) from the uniform expansion, with the large
// leading terms differenced analytically.
double log_ratio_debye(double nu, double x) {
  const double nu1 = nu + 1.0;
  const double h0 = std::hypot(nu, x);
  const double h1 = std::hypot(nu1, x);
  const double dh = (2.0 * nu + 1.0) / (h0 + h1);
  return dh + std::log(x) - std::log(nu1 + h1) - nu * std::log1p((1.0 + dh) / (nu + h0)) -
         0.5 * std::log1p(dh / h0) + std::log(debye_correction(nu1, nu1 / h1) / debye_correction(nu, nu / h0));
}

}  // namespace

double log_bessel_i_debye(double nu, double x) {
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double h = std::hypot(nu, x);
  const double t = nu / h;
  const double nu_eta = h + nu * std::log(x / (nu + h));
  const double corr = debye_correction(nu, t);
  // sqrt(1 + z^2) = h / nu with z = x / nu.
  return nu_eta - 0.5 * (kLog2Pi + std::log(nu)) - 0.5 * std::log(h / nu) + std::log(corr);
}

}  // namespace detail

double log_bessel_i(double nu, double x) {
  check_args(nu, x, "log_bessel_i");
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  switch (detail::select_branch(nu, x)) {
    case detail::Branch::Series:
      return detail::log_bessel_i_series(nu, x);
    case detail::Branch::Hankel:
      return detail::log_bessel_i_hankel(nu, x);
    case detail::Branch::Debye:
      return detail::log_bessel_i_debye(nu, x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double vmf_log_norm(int d, double kappa) {
  check_dim(d, kappa, "vmf_log_norm");
  const double half_d = 0.5 * d;
  const double nu = half_d - 1.0;
  // Written around the scaled series wherever that branch applies, so the
  // kappa -> 0 limit is exact: nu log 2 + lgamma(nu + 1) - (d/2) log(2 pi).
  if (kappa == 0.0 || detail::select_branch(nu, kappa) == detail::Branch::Series) {
    const double log_s = kappa == 0.0 ? 0.0 : detail::log_scaled_series(nu, kappa);
    return nu * std::numbers::ln2 + std::lgamma(nu + 1.0) - half_d * kLog2Pi - log_s;
  }
  return nu * std::log(kappa) - half_d * kLog2Pi - log_bessel_i(nu, kappa);
}

double vmf_mean_resultant(int d, double kappa) {
  check_dim(d, kappa, "vmf_mean_resultant");
  if (kappa == 0.0) return 0.0;
  const double nu = 0.5 * d - 1.0;
  double rho;
  if (detail::select_branch(nu, kappa) == detail::Branch::Hankel &&
      detail::select_branch(nu + 1.0, kappa) == detail::Branch::Hankel) {
    // Asymptotic ratio: the e^x / sqrt(2 pi x) prefactors cancel exactly.
    rho = hankel_sum(nu + 1.0, kappa) / hankel_sum(nu, kappa);
  } else if (detail::select_branch(nu, kappa) == detail::Branch::Series &&
             detail::select_branch(nu + 1.0, kappa) == detail::Branch::Series) {
    rho = 0.5 * kappa / (nu + 1.0) *
          std::exp(detail::log_scaled_series(nu + 1.0, kappa) - detail::log_scaled_series(nu, kappa));
  } else if (nu >= kDebyeMinOrder - 1.0) {
    rho = std::exp(detail::log_ratio_debye(nu, kappa));
  } else {
    rho = std::exp(log_bessel_i(nu + 1.0, kappa) - log_bessel_i(nu, kappa));
  }
  return std::min(rho, std::nextafter(1.0, 0.0));
}

double vmf_concentration_approx(int d, double rho) {
  return rho * (static_cast<double>(d) - rho * rho) / (1.0 - rho * rho);
}

double vmf_concentration_from_resultant(int d, double rho) {
  if (d < 2) fail(Errc::DomainError, "vmf_concentration_from_resultant: dimension must be >= 2");
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    fail(Errc::ConcentrationOverflow,
         "vmf_concentration_from_resultant: mean resultant length " + std::to_string(rho) + " outside [0, 1)");
  }
  if (rho == 0.0) return 0.0;
  // Bracket the root, then safeguarded Newton on rho(kappa) - target.
  double lo = 0.0;
  double hi = std::max(vmf_concentration_approx(d, rho), 1e-300);
  while (vmf_mean_resultant(d, hi) < rho) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) fail(Errc::ConcentrationOverflow, "vmf_concentration_from_resultant: no bracket");
  }
  double kappa = 0.5 * (lo + hi);
  const double approx = vmf_concentration_approx(d, rho);
  if (approx > lo && approx < hi) kappa = approx;
  for (int iter = 0; iter < 200; ++iter) {
    const double r = vmf_mean_resultant(d, kappa);
    const double f = r - rho;
    if (f < 0.0) {
      lo = kappa;
    } else {
      hi = kappa;
    }
    const double deriv = 1.0 - r * r - (d - 1.0) * r / kappa;
    double next = kappa - f / deriv;
    if (!(deriv > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - kappa) <= 1e-14 * kappa || hi - lo <= 1e-14 * hi) return next;
    kappa = next;
  }
  return kappa;
}

}  // namespace spkr::specfun
