#include "mep/portfolio.hpp"

#include <algorithm>
#include <limits>

namespace mep {

Instrument::Instrument(PayoffSpec payoff_, double market_value_, double subjective_value_)
    : payoff(payoff_), market_value(market_value_), subjective_value(subjective_value_) {
    if (!std::isfinite(market_value) || market_value < 0.0)
        throw InvalidParameterError("Instrument.market_value must be >= 0");
    if (!std::isfinite(subjective_value))
        throw InvalidParameterError("Instrument.subjective_value must be finite");
}

RiskLimits::RiskLimits(double y_, double z_) : y(y_), z(z_) {
    if (!std::isfinite(y) || y <= 0.0 || y > 1.0)
        throw InvalidParameterError("RiskLimits.y must be in (0, 1]");
    if (!std::isfinite(z) || z <= 0.0) throw InvalidParameterError("RiskLimits.z must be > 0");
}

namespace {

void check_dimensions(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments) {
    if (static_cast<std::size_t>(n.size()) != instruments.size())
        throw InvalidParameterError("contract counts and instruments differ in length");
}

}  // namespace

PortfolioValues portfolio_values(const Eigen::VectorXd& n,
                                 const std::vector<Instrument>& instruments) {
    check_dimensions(n, instruments);
    double market = 0.0;
    double subjective = 0.0;
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        market += n[i] * instruments[static_cast<std::size_t>(i)].market_value;
        subjective += n[i] * instruments[static_cast<std::size_t>(i)].subjective_value;
    }
    return {market, subjective, subjective - market};
}

PnlProfile::PnlProfile(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                       const MarketTerms& terms, LossBenchmark benchmark)
    : counts_(n), instruments_(instruments) {
    check_dimensions(n, instruments);

    const double growth = benchmark == LossBenchmark::FinancedCost ? std::exp(terms.r * terms.t) : 1.0;
    financed_cost_ = growth * portfolio_values(n, instruments).market;

    for (const Instrument& inst : instruments) kinks_.push_back(inst.payoff.strike);
    std::sort(kinks_.begin(), kinks_.end());
    kinks_.erase(std::unique(kinks_.begin(), kinks_.end()), kinks_.end());

    // Affine pieces between adjacent strikes, accumulated per instrument.
    std::vector<double> edges = kinks_;
    edges.insert(edges.begin(), 0.0);
    edges.push_back(std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        Segment seg{edges[s], edges[s + 1], -financed_cost_, 0.0};
        for (std::size_t i = 0; i < instruments.size(); ++i) {
            const PayoffSpec& p = instruments[i].payoff;
            const double c = n[static_cast<Eigen::Index>(i)];
            switch (p.kind) {
                case PayoffKind::EuropeanCall:
                    if (seg.lo >= p.strike) {
                        seg.slope += c;
                        seg.intercept -= c * p.strike;
                    }
                    break;
                case PayoffKind::EuropeanPut:
                    if (seg.hi <= p.strike) {
                        seg.slope -= c;
                        seg.intercept += c * p.strike;
                    }
                    break;
                case PayoffKind::BinaryCall:
                    if (seg.lo >= p.strike) seg.intercept += c;
                    break;
                case PayoffKind::BinaryPut:
                    if (seg.hi <= p.strike) seg.intercept += c;
                    break;
            }
        }
        segments_.push_back(seg);
    }
}

double PnlProfile::operator()(double x) const {
    double pnl = -financed_cost_;
    for (std::size_t i = 0; i < instruments_.size(); ++i)
        pnl += counts_[static_cast<Eigen::Index>(i)] * payoff_value(instruments_[i].payoff, x);
    return pnl;
}

PnlProfile pnl_profile(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                       const MarketTerms& terms, LossBenchmark benchmark) {
    return PnlProfile(n, instruments, terms, benchmark);
}

namespace {

struct RiskMeasures {
    double loss_prob;
    double shortfall;
};

/// Integrates the loss indicator and the loss magnitude against the density,
/// segment by segment; within a segment the PnL is affine so the loss region
/// is a single sub-interval found from the crossing point.
RiskMeasures risk_measures(const PnlProfile& profile, const Density& subjective) {
    const double support_lo = support_lower(subjective);
    const double support_hi = support_upper(subjective);

    double prob = 0.0;
    double magnitude = 0.0;  // E[-PnL 1{PnL < 0}]
    for (const PnlProfile::Segment& seg : profile.segments()) {
        double lo = std::max(seg.lo, support_lo);
        double hi = std::min(seg.hi, support_hi);
        if (!(lo < hi)) continue;

        // restrict to the loss part of the segment
        if (seg.slope == 0.0) {
            if (seg.intercept >= 0.0) continue;
        } else {
            const double crossing = -seg.intercept / seg.slope;
            if (seg.slope > 0.0)
                hi = std::min(hi, std::max(crossing, lo));
            else
                lo = std::max(lo, std::min(crossing, hi));
        }
        if (!(lo < hi)) continue;

        const double p_lo = lo > support_lo ? partial_zeroth(subjective, lo) : 0.0;
        const double p_hi = hi < support_hi ? partial_zeroth(subjective, hi) : 1.0;
        const double m_lo = lo > support_lo ? partial_first(subjective, lo) : 0.0;
        const double m_hi = hi < support_hi ? partial_first(subjective, hi) : density_mean(subjective);
        prob += p_hi - p_lo;
        magnitude -= seg.intercept * (p_hi - p_lo) + seg.slope * (m_hi - m_lo);
    }
    return {prob, prob > 0.0 ? magnitude / prob : 0.0};
}

}  // namespace

double loss_probability(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                        const Density& subjective, const MarketTerms& terms,
                        LossBenchmark benchmark) {
    return risk_measures(PnlProfile(n, instruments, terms, benchmark), subjective).loss_prob;
}

double expected_shortfall(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                          const Density& subjective, const MarketTerms& terms,
                          LossBenchmark benchmark) {
    return risk_measures(PnlProfile(n, instruments, terms, benchmark), subjective).shortfall;
}

namespace {

struct Candidate {
    Eigen::VectorXd n;
    double objective = -std::numeric_limits<double>::infinity();
    double loss_prob = 0.0;
    double shortfall = 0.0;
    bool valid = false;
};

/// Deterministic preference: higher objective, then smaller norm, then
/// lexicographically smaller counts.
bool better(const Candidate& a, const Candidate& b) {
    if (!b.valid) return true;
    if (a.objective != b.objective) return a.objective > b.objective;
    const double na = a.n.squaredNorm();
    const double nb = b.n.squaredNorm();
    if (na != nb) return na < nb;
    for (Eigen::Index i = 0; i < a.n.size(); ++i)
        if (a.n[i] != b.n[i]) return a.n[i] < b.n[i];
    return false;
}

Candidate grid_search(const std::vector<Instrument>& instruments, const Density& subjective,
                      const MarketTerms& terms, const RiskLimits& limits,
                      const std::vector<std::pair<double, double>>& bounds, int resolution,
                      LossBenchmark benchmark) {
    const std::size_t dim = bounds.size();
    std::vector<int> index(dim, 0);
    Eigen::VectorXd n(static_cast<Eigen::Index>(dim));
    Candidate best;
    while (true) {
        for (std::size_t i = 0; i < dim; ++i) {
            const auto& [lo, hi] = bounds[i];
            n[static_cast<Eigen::Index>(i)] =
                lo + (hi - lo) * index[i] / static_cast<double>(resolution - 1);
        }
        const RiskMeasures risk = risk_measures(PnlProfile(n, instruments, terms, benchmark),
                                                subjective);
        if (risk.loss_prob <= limits.y && risk.shortfall <= limits.z) {
            Candidate cand{n, portfolio_values(n, instruments).objective, risk.loss_prob,
                           risk.shortfall, true};
            if (better(cand, best)) best = cand;
        }

        std::size_t axis = 0;
        while (axis < dim && ++index[axis] == resolution) {
            index[axis] = 0;
            ++axis;
        }
        if (axis == dim) break;
    }
    return best;
}

}  // namespace

Allocation optimize(const std::vector<Instrument>& instruments, const Density& subjective,
                    const MarketTerms& terms, const RiskLimits& limits,
                    const std::vector<std::pair<double, double>>& bounds, int resolution,
                    const OptimizeOptions& options) {
    if (instruments.empty()) throw InvalidParameterError("optimize: no instruments");
    if (bounds.size() != instruments.size())
        throw InvalidParameterError("optimize: bounds and instruments differ in length");
    if (instruments.size() > 4)
        throw InvalidParameterError("optimize: exhaustive mode supports at most 4 instruments");
    if (resolution < 2) throw InvalidParameterError("optimize: resolution must be >= 2");
    double grid_points = 1.0;
    for (const auto& [lo, hi] : bounds) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi))
            throw InvalidParameterError("optimize: bounds must be finite with lo <= hi");
        grid_points *= resolution;
    }
    if (grid_points > 1e7) throw InvalidParameterError("optimize: grid too large");
    if (options.refine_rounds < 0)
        throw InvalidParameterError("optimize: refine_rounds must be >= 0");

    Candidate best = grid_search(instruments, subjective, terms, limits, bounds, resolution,
                                 options.benchmark);
    if (!best.valid)
        throw InfeasibleError(
            "optimize: no feasible grid point (the box excludes n = 0 or the limits cut the "
            "whole grid)");

    // Optional coordinate-wise refinement around the incumbent: per axis, a
    // line grid of `resolution` points spanning one parent grid step, the
    // span halving each round. Only strictly better feasible points replace
    // the incumbent, so refinement never worsens the grid optimum.
    std::vector<double> span(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i)
        span[i] = (bounds[i].second - bounds[i].first) / static_cast<double>(resolution - 1);
    for (int round = 0; round < options.refine_rounds; ++round) {
        for (std::size_t axis = 0; axis < bounds.size(); ++axis) {
            const Eigen::Index a = static_cast<Eigen::Index>(axis);
            const double lo = std::max(bounds[axis].first, best.n[a] - span[axis]);
            const double hi = std::min(bounds[axis].second, best.n[a] + span[axis]);
            for (int k = 0; k < resolution; ++k) {
                Eigen::VectorXd n = best.n;
                n[a] = lo + (hi - lo) * k / static_cast<double>(resolution - 1);
                const RiskMeasures risk = risk_measures(
                    PnlProfile(n, instruments, terms, options.benchmark), subjective);
                if (risk.loss_prob > limits.y || risk.shortfall > limits.z) continue;
                Candidate cand{n, portfolio_values(n, instruments).objective, risk.loss_prob,
                               risk.shortfall, true};
                if (better(cand, best)) best = cand;
            }
            span[axis] *= 0.5;
        }
    }

    return {best.n, best.objective, best.loss_prob, best.shortfall};
}

}  // namespace mep
