#pragma once

// Special functions for von Mises-Fisher densities, evaluated in the log
// domain so that large concentrations and dimensions stay finite.

namespace spkr::specfun {

/// log I_nu(x), the modified Bessel function of the first kind.
/// Finite for nu up to several thousand and x up to 1e300; log I_nu(0) is 0
/// for nu == 0 and -inf otherwise. Throws DomainError on negative or NaN input.
double log_bessel_i(double nu, double x);

/// log of the VMF normalizer C_d(kappa) = kappa^(d/2-1) / ((2 pi)^(d/2) I_{d/2-1}(kappa)).
/// kappa == 0 gives the log of the uniform density on S^(d-1).
double vmf_log_norm(int d, double kappa);

/// Mean resultant length rho = I_{d/2}(kappa) / I_{d/2-1}(kappa), in [0, 1).
double vmf_mean_resultant(int d, double kappa);

/// Inverse of vmf_mean_resultant in kappa. rho must lie in [0, 1).
double vmf_concentration_from_resultant(int d, double rho);

/// Closed-form approximation kappa ~ rho (d - rho^2) / (1 - rho^2).
double vmf_concentration_approx(int d, double rho);

namespace detail {

enum class Branch { Series, Hankel, Debye };

Branch select_branch(double nu, double x);

// Individual evaluation strategies, exposed for crossover tests. Each is only
// accurate inside (and somewhat beyond) the region select_branch assigns it.
double log_bessel_i_series(double nu, double x);
double log_bessel_i_hankel(double nu, double x);
double log_bessel_i_debye(double nu, double x);

// log of sum_k (x^2/4)^k Gamma(nu+1) / (k! Gamma(nu+k+1)), so that
// I_nu(x) = (x/2)^nu / Gamma(nu+1) * exp(result).
double log_scaled_series(double nu, double x);

}  // namespace detail

}  // namespace spkr::specfun
