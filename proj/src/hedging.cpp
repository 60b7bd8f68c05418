#include "mep/hedging.hpp"

#include <algorithm>

namespace mep {

namespace {

/// Deterministic-limit dV/dS: the terminal price is the forward, so the
/// payoff slope at the forward (times the growth factor, discounted back)
/// is the sensitivity. At the kink itself the flat side is reported.
double deterministic_delta(const MarketTerms& terms, const PayoffSpec& payoff) {
    const double forward = terms.forward();
    switch (payoff.kind) {
        case PayoffKind::EuropeanCall: return forward > payoff.strike ? 1.0 : 0.0;
        case PayoffKind::EuropeanPut: return forward < payoff.strike ? -1.0 : 0.0;
        case PayoffKind::BinaryCall:
        case PayoffKind::BinaryPut: return 0.0;
    }
    throw InvalidParameterError("bs_delta: unknown payoff kind");
}

}  // namespace

double bs_delta(const MarketTerms& terms, double sigma, const PayoffSpec& payoff) {
    if (!std::isfinite(sigma) || sigma < 0.0)
        throw InvalidParameterError("bs_delta: sigma must be >= 0");
    if (terms.t == 0.0 || sigma == 0.0) return deterministic_delta(terms, payoff);

    const auto [d1, d2] = d1_d2(terms, sigma, payoff.strike);
    const double sigma_hat = sigma * std::sqrt(terms.t);
    switch (payoff.kind) {
        case PayoffKind::EuropeanCall: return std_normal_cdf(d1);
        case PayoffKind::EuropeanPut: return std_normal_cdf(d1) - 1.0;
        case PayoffKind::BinaryCall:
            return terms.discount() * std_normal_pdf(d2) / (terms.x0 * sigma_hat);
        case PayoffKind::BinaryPut:
            return -terms.discount() * std_normal_pdf(d2) / (terms.x0 * sigma_hat);
    }
    throw InvalidParameterError("bs_delta: unknown payoff kind");
}

double marginal_delta(const MarketTerms& terms, const PayoffSpec& payoff,
                      const VolBelief& belief) {
    double delta = 0.0;
    for (const VolNode& node : vol_quadrature(belief))
        delta += node.weight * bs_delta(terms, node.sigma, payoff);
    return delta;
}

std::pair<double, double> belief_greeks(const MarketTerms& terms, const PayoffSpec& payoff,
                                        const VolBelief& belief) {
    if (!(belief.s_ln > 0.0)) throw InvalidParameterError("belief_greeks: s_ln must be > 0");

    const auto bump_mu = [&](double h) {
        return marginal_price(terms, payoff,
                              VolBelief(belief.mu_ln + h, belief.s_ln, belief.n_nodes));
    };
    const auto bump_s = [&](double h) {
        return marginal_price(terms, payoff,
                              VolBelief(belief.mu_ln, belief.s_ln + h, belief.n_nodes));
    };

    const double h_mu = 1e-5 * std::max(1.0, std::abs(belief.mu_ln));
    // keep the bumped s_ln positive
    const double h_s = std::min(1e-5 * std::max(1.0, belief.s_ln), 0.5 * belief.s_ln);
    const double d_mu = (bump_mu(h_mu) - bump_mu(-h_mu)) / (2.0 * h_mu);
    const double d_s = (bump_s(h_s) - bump_s(-h_s)) / (2.0 * h_s);
    return {d_mu, d_s};
}

HedgeReport hedge_report(const MarketTerms& terms, double sigma, const PayoffSpec& payoff) {
    const double value = bs_price(terms, sigma, payoff);
    const double dvds = bs_delta(terms, sigma, payoff);
    return {value, dvds, -dvds, std::nullopt};
}

HedgeReport hedge_report(const MarketTerms& terms, const PayoffSpec& payoff,
                         const VolBelief& belief) {
    const double value = marginal_price(terms, payoff, belief);
    const double dvds = marginal_delta(terms, payoff, belief);
    HedgeReport report{value, dvds, -dvds, std::nullopt};
    if (belief.s_ln > 0.0) report.belief_sensitivities = belief_greeks(terms, payoff, belief);
    return report;
}

}  // namespace mep
