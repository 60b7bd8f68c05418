#pragma once

#include <optional>
#include <utility>

#include "mep/uncertain_vol.hpp"

namespace mep {

/// Value, spot sensitivity and the hedge holding that neutralizes it.
/// The hedge holding is the negated derivative: hedge_units = -dvds.
struct HedgeReport {
    double value;
    double dvds;
    double hedge_units;
    /// (dV/d mu_ln, dV/d s_ln) when priced against a belief with s_ln > 0.
    std::optional<std::pair<double, double>> belief_sensitivities;
};

/// Analytic dV/dS. Calls: N(d1); puts: N(d1) - 1; binaries:
/// +- e^{-rt} phi(d2) / (x0 sigma_hat). sigma = 0 and t = 0 take the
/// deterministic limit (0 at the kink itself counts as flat).
double bs_delta(const MarketTerms& terms, double sigma, const PayoffSpec& payoff);

/// Belief-weighted mixture of bs_delta over the same quadrature nodes as
/// marginal_price.
double marginal_delta(const MarketTerms& terms, const PayoffSpec& payoff,
                      const VolBelief& belief);

/// Central finite differences of marginal_price in (mu_ln, s_ln).
/// Requires s_ln > 0.
std::pair<double, double> belief_greeks(const MarketTerms& terms, const PayoffSpec& payoff,
                                        const VolBelief& belief);

HedgeReport hedge_report(const MarketTerms& terms, double sigma, const PayoffSpec& payoff);
HedgeReport hedge_report(const MarketTerms& terms, const PayoffSpec& payoff,
                         const VolBelief& belief);

}  // namespace mep
