#pragma once

#include "mep/uncertain_vol.hpp"

namespace mep {

/// One point of an implied-vol curve; repricing at (strike, implied_sigma)
/// reproduces `price` within 1e-9.
struct SkewPoint {
    double strike;
    double implied_sigma;
    double price;
};

/// Largest vol the inversion searches; prices above bs_price at this sigma
/// are rejected as out of band.
inline constexpr double kMaxImpliedVol = 10.0;

/// Inverts a vanilla call/put price to the constant sigma that reprices it,
/// to 1e-10 absolute in price. Safeguarded Newton on the analytic vega with
/// a bisection fallback on the bracket (1e-8, 10]. Throws
/// InvalidParameterError when the target leaves the no-arbitrage band and
/// NumericalError past the iteration cap.
double implied_vol(const MarketTerms& terms, const PayoffSpec& payoff, double target_price);

/// Implied-vol curve generated by the vol belief. Prices are marginalized
/// per strike and inverted; for conditioning the inversion uses the put for
/// strikes at or below the forward and the call above it (parity makes the
/// two vols identical), while `price` reports the requested payoff kind.
std::vector<SkewPoint> skew_curve(const MarketTerms& terms, const VolBelief& belief,
                                  const Eigen::ArrayXd& strikes, PayoffKind kind);

}  // namespace mep
