#pragma once

#include <vector>

#include "mep/pricing.hpp"

namespace mep {

/// Log-normal belief over the annualized standard deviation:
/// ln sigma ~ N(mu_ln, s_ln^2). s_ln = 0 is the certain-vol point mass.
struct VolBelief {
    double mu_ln;
    double s_ln;
    int n_nodes = 32;

    VolBelief(double mu_ln_, double s_ln_, int n_nodes_ = 32);

    /// First moment of sigma, e^{mu_ln + s_ln^2/2}.
    double mean_sigma() const { return std::exp(mu_ln + 0.5 * s_ln * s_ln); }
};

struct VolNode {
    double sigma;
    double weight;
};

/// Gauss-Hermite discretization of the sigma-integral in ln sigma. Weights
/// are positive and normalized to sum to one; nodes are strictly positive.
std::vector<VolNode> vol_quadrature(const VolBelief& belief);

/// Price marginalized over the vol belief: sum of node-weighted closed-form
/// prices. Lies between the minimum and maximum node price.
double marginal_price(const MarketTerms& terms, const PayoffSpec& payoff, const VolBelief& belief);

struct PriceCurvePoint {
    double strike;
    double certain_price;   ///< at the belief's mean sigma
    double marginal_price;  ///< marginalized over the belief
};

/// One row per strike, comparing the certain-vol price (at the belief's mean
/// sigma) with the marginalized price.
std::vector<PriceCurvePoint> price_curve(const MarketTerms& terms, const VolBelief& belief,
                                         const Eigen::ArrayXd& strikes, PayoffKind kind);

}  // namespace mep
