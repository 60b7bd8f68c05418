#include "mep/pricing.hpp"

#include <algorithm>

#include "mep/quadrature.hpp"

namespace mep {

PayoffSpec::PayoffSpec(PayoffKind kind_, double strike_) : kind(kind_), strike(strike_) {
    if (!std::isfinite(strike) || strike <= 0.0)
        throw InvalidParameterError("PayoffSpec.strike must be > 0");
}

double payoff_value(const PayoffSpec& payoff, double x) {
    switch (payoff.kind) {
        case PayoffKind::EuropeanCall: return std::max(x - payoff.strike, 0.0);
        case PayoffKind::EuropeanPut: return std::max(payoff.strike - x, 0.0);
        case PayoffKind::BinaryCall: return x >= payoff.strike ? 1.0 : 0.0;
        case PayoffKind::BinaryPut: return x <= payoff.strike ? 1.0 : 0.0;
    }
    throw InvalidParameterError("payoff_value: unknown payoff kind");
}

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

void check_pricing_inputs(const MarketTerms& terms, double sigma, double K) {
    if (!std::isfinite(sigma) || sigma < 0.0)
        throw InvalidParameterError("sigma must be >= 0");
    if (!std::isfinite(K) || K <= 0.0) throw InvalidParameterError("K must be > 0");
    (void)terms;  // validated on construction
}

/// Deterministic limit: the terminal price is the forward with certainty.
double deterministic_price(const MarketTerms& terms, const PayoffSpec& payoff) {
    return terms.discount() * payoff_value(payoff, terms.forward());
}

}  // namespace

D1D2 d1_d2(const MarketTerms& terms, double sigma, double K) {
    check_pricing_inputs(terms, sigma, K);
    if (sigma <= 0.0) throw InvalidParameterError("d1_d2: sigma must be > 0");
    if (terms.t <= 0.0) throw InvalidParameterError("d1_d2: t must be > 0");
    const double sigma_hat = sigma * std::sqrt(terms.t);
    const double d2 =
        -(std::log(K / terms.x0) - terms.r * terms.t + 0.5 * sigma_hat * sigma_hat) / sigma_hat;
    return {d2 + sigma_hat, d2};
}

double bs_put(const MarketTerms& terms, double sigma, double K) {
    return bs_price(terms, sigma, PayoffSpec(PayoffKind::EuropeanPut, K));
}

double bs_call(const MarketTerms& terms, double sigma, double K) {
    return bs_price(terms, sigma, PayoffSpec(PayoffKind::EuropeanCall, K));
}

double binary_call(const MarketTerms& terms, double sigma, double K) {
    return bs_price(terms, sigma, PayoffSpec(PayoffKind::BinaryCall, K));
}

double binary_put(const MarketTerms& terms, double sigma, double K) {
    return bs_price(terms, sigma, PayoffSpec(PayoffKind::BinaryPut, K));
}

double bs_price(const MarketTerms& terms, double sigma, const PayoffSpec& payoff) {
    check_pricing_inputs(terms, sigma, payoff.strike);
    if (terms.t == 0.0) return payoff_value(payoff, terms.x0);
    if (sigma == 0.0) return deterministic_price(terms, payoff);

    const auto [d1, d2] = d1_d2(terms, sigma, payoff.strike);
    const double disc = terms.discount();
    switch (payoff.kind) {
        case PayoffKind::EuropeanPut:
            return disc * payoff.strike * std_normal_cdf(-d2) - terms.x0 * std_normal_cdf(-d1);
        case PayoffKind::EuropeanCall:
            return terms.x0 * std_normal_cdf(d1) - disc * payoff.strike * std_normal_cdf(d2);
        case PayoffKind::BinaryCall: return disc * std_normal_cdf(d2);
        case PayoffKind::BinaryPut: return disc * std_normal_cdf(-d2);
    }
    throw InvalidParameterError("bs_price: unknown payoff kind");
}

double expected_payoff_price(const Density& density, const PayoffSpec& payoff,
                             const MarketTerms& terms, const QuadratureControl& control) {
    double expected = 0.0;
    if (const auto* ln = std::get_if<LogNormalDist>(&density)) {
        // Integrate on y = ln x. The upper end covers the e^y tilt of call
        // payoffs (the first-moment Gaussian is centred at nu + sigma_hat^2).
        // The payoff is folded into log space: e^y alone overflows for large
        // sigma_hat while y + log q stays bounded by ln m1 - ln(sigma_hat).
        const double lo = ln->nu - 14.0 * ln->sigma_hat;
        const double hi = ln->nu + ln->sigma_hat * ln->sigma_hat + 14.0 * ln->sigma_hat;
        const double log_k = std::log(payoff.strike);
        const double log_scale = -std::log(ln->sigma_hat) + std::log(kInvSqrt2Pi);
        const double kinks[] = {log_k};
        auto integrand = [&](double y) {
            const double z = (y - ln->nu) / ln->sigma_hat;
            const double logq = -0.5 * z * z + log_scale;
            switch (payoff.kind) {
                case PayoffKind::EuropeanCall:
                    return y > log_k ? std::exp(y + logq) - payoff.strike * std::exp(logq) : 0.0;
                case PayoffKind::EuropeanPut:
                    return y < log_k ? payoff.strike * std::exp(logq) - std::exp(y + logq) : 0.0;
                case PayoffKind::BinaryCall: return y >= log_k ? std::exp(logq) : 0.0;
                case PayoffKind::BinaryPut: return y <= log_k ? std::exp(logq) : 0.0;
            }
            return 0.0;
        };
        expected = integrate_adaptive(integrand, lo, hi, kinks, control.abs_tol, control.rel_tol);
    } else {
        const auto& me = std::get<MaxEntDist>(density);
        const double kink = std::log(payoff.strike / me.x0);
        const double kinks[] = {kink};
        expected = integrate_adaptive(
            [&](double y) {
                const double x = me.x0 * std::exp(y);
                return payoff_value(payoff, x) * std::exp(maxent_log_density(me, y));
            },
            me.y_lo, me.y_hi, kinks, control.abs_tol, control.rel_tol);
    }
    return terms.discount() * expected;
}

}  // namespace mep
