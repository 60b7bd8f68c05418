#pragma once

#include "mep/distributions.hpp"

namespace mep {

enum class PayoffKind { EuropeanCall, EuropeanPut, BinaryCall, BinaryPut };

/// European payoff with a single strike. Binaries pay one unit of currency;
/// the binary call pays on x >= K, the binary put on x <= K.
struct PayoffSpec {
    PayoffKind kind;
    double strike;

    PayoffSpec(PayoffKind kind_, double strike_);
};

/// Terminal cash-flow f(x).
double payoff_value(const PayoffSpec& payoff, double x);

struct D1D2 {
    double d1;
    double d2;
};

/// -d2 = [ln(K/x0) - r t + sigma_hat^2/2] / sigma_hat, d1 = d2 + sigma_hat,
/// with sigma_hat = sigma sqrt(t).
D1D2 d1_d2(const MarketTerms& terms, double sigma, double K);

double bs_put(const MarketTerms& terms, double sigma, double K);
double bs_call(const MarketTerms& terms, double sigma, double K);
double binary_call(const MarketTerms& terms, double sigma, double K);
double binary_put(const MarketTerms& terms, double sigma, double K);

/// Closed-form price for any payoff kind. sigma = 0 and t = 0 are served by
/// the deterministic limit (discounted payoff of the forward) rather than
/// errors.
double bs_price(const MarketTerms& terms, double sigma, const PayoffSpec& payoff);

struct QuadratureControl {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
};

/// Discounted expected payoff e^{-rt} E[f(x)] under the given density,
/// integrated adaptively on the log-price axis with a panel split at the
/// strike kink.
double expected_payoff_price(const Density& density, const PayoffSpec& payoff,
                             const MarketTerms& terms, const QuadratureControl& control = {});

}  // namespace mep
