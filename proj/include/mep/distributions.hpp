#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <variant>

#include "mep/errors.hpp"

namespace mep {

/// Spot level, continuously-compounded rate and horizon shared by all
/// valuation calls. t = 0 is allowed (degenerate "now" valuation).
struct MarketTerms {
    double x0;  ///< spot price, > 0
    double r;   ///< risk-free rate per annum
    double t;   ///< time to expiry in years, >= 0

    MarketTerms(double x0_, double r_, double t_);

    double forward() const { return x0 * std::exp(r * t); }
    double discount() const { return std::exp(-r * t); }
};

double std_normal_pdf(double x);

/// Standard normal CDF via erfc; |error| < 1e-15 on finite inputs.
double std_normal_cdf(double x);

/// Log-normal price distribution: ln x ~ N(nu, sigma_hat^2).
struct LogNormalDist {
    double nu;
    double sigma_hat;

    LogNormalDist(double nu_, double sigma_hat_);

    /// First moment of the price, e^{nu + sigma_hat^2/2}.
    double mean() const { return std::exp(nu + 0.5 * sigma_hat * sigma_hat); }
};

double lognormal_pdf(const LogNormalDist& d, double x);

/// P(X <= K) = N([ln K - nu] / sigma_hat).
double partial_zeroth(const LogNormalDist& d, double K);

/// E[X 1{X <= K}] = m1 N([ln K - nu] / sigma_hat - sigma_hat).
double partial_first(const LogNormalDist& d, double K);

/// Log-normal whose mean equals the forward x0 e^{rt}:
/// sigma_hat = sigma sqrt(t), nu = ln x0 + r t - sigma_hat^2 / 2.
LogNormalDist from_expected_return(const MarketTerms& terms, double sigma);

/// Moment targets for the four-moment fit. The mean constraint is on the
/// terminal price; the shape constraints are central moments of the
/// log-return y = ln(x/x0).
struct MomentSpec {
    double m1_target;  ///< expected terminal price, > 0
    double variance;   ///< Var[y], > 0
    double third;      ///< E[(y - E y)^3]
    double fourth;     ///< E[(y - E y)^4], >= variance^2

    MomentSpec(double m1_target_, double variance_, double third_, double fourth_);
};

/// Quartic exponential-family density on the log-return y = ln(x/x0):
///   q(y) = exp(l1 y + l2 y^2 + l3 y^3 + l4 y^4 - log_norm),  y in [y_lo, y_hi].
/// l4 <= 0 keeps the family normalizable beyond the truncation interval;
/// with l3 = l4 = 0 the density is Gaussian in y.
struct MaxEntDist {
    Eigen::Vector4d lambda;
    double log_norm;
    double y_lo, y_hi;
    double x0;

    MaxEntDist(const Eigen::Vector4d& lambda_, double log_norm_, double y_lo_, double y_hi_,
               double x0_);

    double support_lower() const { return x0 * std::exp(y_lo); }
    double support_upper() const { return x0 * std::exp(y_hi); }
};

struct MaxEntFitOptions {
    int nodes = 240;          ///< Gauss-Legendre resolution over [y_lo, y_hi]
    int max_iterations = 80;
    double tolerance = 1e-11;  ///< max-norm of the scaled moment residuals
};

/// Fits the four multipliers so the density reproduces the mean price and the
/// 2nd-4th central log-moments. Damped Newton from the Gaussian two-moment
/// solution; moments and the Jacobian (covariance identities) are evaluated
/// on a fixed Gauss-Legendre grid over mean +- 10 standard deviations in y.
/// Throws InvalidParameterError when the moments are inadmissible and
/// NumericalError (with final residuals) when the iteration stalls or the
/// solution would need l4 > 0.
MaxEntDist maxent_fit(const MomentSpec& spec, double x0, const MaxEntFitOptions& options = {});

/// Density over the price; domain error outside the truncation interval.
double maxent_pdf(const MaxEntDist& d, double x);

/// Log of the y-space density lambda . (y, y^2, y^3, y^4) - log_norm.
/// No domain check; quadrature drives it straight on the y axis.
double maxent_log_density(const MaxEntDist& d, double y);

/// Recomputes the fitted moments by quadrature (at twice the fit resolution);
/// the verification oracle for maxent_fit.
MomentSpec maxent_moments(const MaxEntDist& d);

double partial_zeroth(const MaxEntDist& d, double K);
double partial_first(const MaxEntDist& d, double K);

/// A terminal price density: every pricing and risk routine accepts either.
using Density = std::variant<LogNormalDist, MaxEntDist>;

double pdf(const Density& d, double x);
double partial_zeroth(const Density& d, double K);
double partial_first(const Density& d, double K);
double density_mean(const Density& d);
double support_lower(const Density& d);
double support_upper(const Density& d);

}  // namespace mep
