#include "mep/implied_vol.hpp"

#include <algorithm>

namespace mep {

namespace {

// Tighter than the 1e-10 contract so wing strikes, where vega is small,
// still resolve the vol itself to ~1e-9.
constexpr double kPriceTol = 1e-12;
constexpr int kMaxIterations = 200;

double vega(const MarketTerms& terms, double sigma, double K) {
    return terms.x0 * std_normal_pdf(d1_d2(terms, sigma, K).d1) * std::sqrt(terms.t);
}

}  // namespace

double implied_vol(const MarketTerms& terms, const PayoffSpec& payoff, double target_price) {
    if (payoff.kind != PayoffKind::EuropeanCall && payoff.kind != PayoffKind::EuropeanPut)
        throw InvalidParameterError("implied_vol: defined for vanilla calls and puts only");
    if (terms.t <= 0.0) throw InvalidParameterError("implied_vol: t must be > 0");
    if (!std::isfinite(target_price)) throw InvalidParameterError("implied_vol: bad target");

    // Vanilla prices are strictly increasing in sigma: the band is the
    // deterministic forward limit below and the sigma-cap price above.
    const double lower = bs_price(terms, 0.0, payoff);
    const double upper = bs_price(terms, kMaxImpliedVol, payoff);
    if (!(target_price > lower) || !(target_price <= upper))
        throw InvalidParameterError("implied_vol: target price outside the no-arbitrage band");

    double lo = 1e-8;
    double hi = kMaxImpliedVol;
    double sigma = std::clamp(0.25, lo, hi);
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        const double diff = bs_price(terms, sigma, payoff) - target_price;
        if (std::abs(diff) <= kPriceTol) return sigma;
        if (diff > 0.0)
            hi = sigma;
        else
            lo = sigma;

        const double v = vega(terms, sigma, payoff.strike);
        double next = sigma - diff / v;  // Newton
        if (!(v > 1e-14) || !(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        sigma = next;
    }
    throw NumericalError("implied_vol: no convergence after " + std::to_string(kMaxIterations) +
                         " iterations");
}

std::vector<SkewPoint> skew_curve(const MarketTerms& terms, const VolBelief& belief,
                                  const Eigen::ArrayXd& strikes, PayoffKind kind) {
    if (kind != PayoffKind::EuropeanCall && kind != PayoffKind::EuropeanPut)
        throw InvalidParameterError("skew_curve: defined for vanilla calls and puts only");
    const double forward = terms.forward();
    std::vector<SkewPoint> points;
    points.reserve(static_cast<std::size_t>(strikes.size()));
    for (Eigen::Index i = 0; i < strikes.size(); ++i) {
        const double K = strikes[i];
        const PayoffKind inversion_kind =
            K <= forward ? PayoffKind::EuropeanPut : PayoffKind::EuropeanCall;
        const PayoffSpec inversion_payoff(inversion_kind, K);
        const double sigma =
            implied_vol(terms, inversion_payoff, marginal_price(terms, inversion_payoff, belief));
        points.push_back({K, sigma, marginal_price(terms, PayoffSpec(kind, K), belief)});
    }
    return points;
}

}  // namespace mep
