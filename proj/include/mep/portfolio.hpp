#pragma once

#include <vector>

#include "mep/pricing.hpp"

namespace mep {

/// A tradable payoff together with its market value and the value under the
/// holder's subjective distribution.
struct Instrument {
    PayoffSpec payoff;
    double market_value;
    double subjective_value;

    Instrument(PayoffSpec payoff_, double market_value_, double subjective_value_);
};

/// Loss-probability cap y and conditional-expected-loss cap z.
struct RiskLimits {
    double y;
    double z;

    RiskLimits(double y_, double z_);
};

/// What "loss" is measured against: the initial cost financed at the
/// risk-free rate to expiry (underperforming cash), or the raw initial cost
/// with no compounding.
enum class LossBenchmark { FinancedCost, RawCost };

struct PortfolioValues {
    double market;      ///< Pi^m
    double subjective;  ///< Pi
    double objective;   ///< xi = Pi - Pi^m
};

PortfolioValues portfolio_values(const Eigen::VectorXd& n,
                                 const std::vector<Instrument>& instruments);

/// Terminal P&L as a function of the terminal price: piecewise linear with
/// kinks (or jumps, for binaries) only at instrument strikes.
class PnlProfile {
public:
    struct Segment {
        double lo, hi;         ///< open interval between adjacent strikes
        double intercept, slope;  ///< PnL(x) = intercept + slope x on (lo, hi)
    };

    PnlProfile(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
               const MarketTerms& terms, LossBenchmark benchmark = LossBenchmark::FinancedCost);

    double operator()(double x) const;
    const std::vector<double>& kinks() const { return kinks_; }
    const std::vector<Segment>& segments() const { return segments_; }
    /// Initial cost compounded to expiry (uncompounded under RawCost).
    double financed_cost() const { return financed_cost_; }

private:
    Eigen::VectorXd counts_;
    std::vector<Instrument> instruments_;
    std::vector<double> kinks_;
    std::vector<Segment> segments_;
    double financed_cost_;
};

PnlProfile pnl_profile(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                       const MarketTerms& terms,
                       LossBenchmark benchmark = LossBenchmark::FinancedCost);

/// P(PnL < 0) under the subjective density, by kink-aware integration.
double loss_probability(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                        const Density& subjective, const MarketTerms& terms,
                        LossBenchmark benchmark = LossBenchmark::FinancedCost);

/// E[-PnL | PnL < 0]; zero when the loss probability is zero.
double expected_shortfall(const Eigen::VectorXd& n, const std::vector<Instrument>& instruments,
                          const Density& subjective, const MarketTerms& terms,
                          LossBenchmark benchmark = LossBenchmark::FinancedCost);

/// Feasible allocation with its objective and risk measures, all recomputed
/// at the reported point.
struct Allocation {
    Eigen::VectorXd n;
    double objective;
    double loss_prob;
    double exp_shortfall;
};

struct OptimizeOptions {
    /// Rounds of grid refinement around the incumbent (0 = pure grid search).
    int refine_rounds = 0;
    LossBenchmark benchmark = LossBenchmark::FinancedCost;
};

/// Deterministic exhaustive grid search over the box: `resolution` points
/// per axis, feasibility = both risk limits hold, objective = xi. Ties are
/// broken by the smaller Euclidean norm, then lexicographically, so the
/// result does not depend on evaluation order. Throws InfeasibleError when
/// no grid point is feasible (possible only when the box excludes n = 0).
Allocation optimize(const std::vector<Instrument>& instruments, const Density& subjective,
                    const MarketTerms& terms, const RiskLimits& limits,
                    const std::vector<std::pair<double, double>>& bounds, int resolution,
                    const OptimizeOptions& options = {});

}  // namespace mep
