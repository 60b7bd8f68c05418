#include "mep/uncertain_vol.hpp"

#include "mep/quadrature.hpp"

namespace mep {

VolBelief::VolBelief(double mu_ln_, double s_ln_, int n_nodes_)
    : mu_ln(mu_ln_), s_ln(s_ln_), n_nodes(n_nodes_) {
    if (!std::isfinite(mu_ln)) throw InvalidParameterError("VolBelief.mu_ln must be finite");
    if (!std::isfinite(s_ln) || s_ln < 0.0)
        throw InvalidParameterError("VolBelief.s_ln must be >= 0");
    if (n_nodes < 1) throw InvalidParameterError("VolBelief.n_nodes must be >= 1");
}

std::vector<VolNode> vol_quadrature(const VolBelief& belief) {
    if (belief.s_ln == 0.0) return {{std::exp(belief.mu_ln), 1.0}};

    const QuadratureRule rule = gauss_hermite(belief.n_nodes);
    const double wsum = rule.weights.sum();  // sqrt(pi) up to roundoff
    std::vector<VolNode> nodes(belief.n_nodes);
    for (int i = 0; i < belief.n_nodes; ++i) {
        nodes[i].sigma = std::exp(belief.mu_ln + M_SQRT2 * belief.s_ln * rule.nodes[i]);
        nodes[i].weight = rule.weights[i] / wsum;
    }
    return nodes;
}

double marginal_price(const MarketTerms& terms, const PayoffSpec& payoff,
                      const VolBelief& belief) {
    double value = 0.0;
    for (const VolNode& node : vol_quadrature(belief))
        value += node.weight * bs_price(terms, node.sigma, payoff);
    return value;
}

std::vector<PriceCurvePoint> price_curve(const MarketTerms& terms, const VolBelief& belief,
                                         const Eigen::ArrayXd& strikes, PayoffKind kind) {
    const double sigma_bar = belief.mean_sigma();
    std::vector<PriceCurvePoint> rows;
    rows.reserve(static_cast<std::size_t>(strikes.size()));
    for (Eigen::Index i = 0; i < strikes.size(); ++i) {
        const PayoffSpec payoff(kind, strikes[i]);
        rows.push_back({strikes[i], bs_price(terms, sigma_bar, payoff),
                        marginal_price(terms, payoff, belief)});
    }
    return rows;
}

}  // namespace mep
