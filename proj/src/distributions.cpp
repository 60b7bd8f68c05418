#include "mep/distributions.hpp"

#include <limits>
#include <sstream>

#include "mep/quadrature.hpp"

namespace mep {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw InvalidParameterError(std::string(name) + " must be finite");
}
}  // namespace

MarketTerms::MarketTerms(double x0_, double r_, double t_) : x0(x0_), r(r_), t(t_) {
    require_finite(x0, "MarketTerms.x0");
    require_finite(r, "MarketTerms.r");
    require_finite(t, "MarketTerms.t");
    if (x0 <= 0.0) throw InvalidParameterError("MarketTerms.x0 must be > 0");
    if (t < 0.0) throw InvalidParameterError("MarketTerms.t must be >= 0");
}

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

LogNormalDist::LogNormalDist(double nu_, double sigma_hat_) : nu(nu_), sigma_hat(sigma_hat_) {
    require_finite(nu, "LogNormalDist.nu");
    require_finite(sigma_hat, "LogNormalDist.sigma_hat");
    if (sigma_hat <= 0.0) throw InvalidParameterError("LogNormalDist.sigma_hat must be > 0");
}

double lognormal_pdf(const LogNormalDist& d, double x) {
    if (!(x > 0.0)) throw InvalidParameterError("lognormal_pdf: x must be > 0");
    const double z = (std::log(x) - d.nu) / d.sigma_hat;
    return kInvSqrt2Pi / (x * d.sigma_hat) * std::exp(-0.5 * z * z);
}

double partial_zeroth(const LogNormalDist& d, double K) {
    if (!(K > 0.0)) throw InvalidParameterError("partial_zeroth: K must be > 0");
    return std_normal_cdf((std::log(K) - d.nu) / d.sigma_hat);
}

double partial_first(const LogNormalDist& d, double K) {
    if (!(K > 0.0)) throw InvalidParameterError("partial_first: K must be > 0");
    return d.mean() * std_normal_cdf((std::log(K) - d.nu) / d.sigma_hat - d.sigma_hat);
}

LogNormalDist from_expected_return(const MarketTerms& terms, double sigma) {
    require_finite(sigma, "sigma");
    if (sigma <= 0.0) throw InvalidParameterError("from_expected_return: sigma must be > 0");
    if (terms.t <= 0.0) throw InvalidParameterError("from_expected_return: t must be > 0");
    const double sigma_hat = sigma * std::sqrt(terms.t);
    const double nu = std::log(terms.x0) + terms.r * terms.t - 0.5 * sigma_hat * sigma_hat;
    return LogNormalDist(nu, sigma_hat);
}

MomentSpec::MomentSpec(double m1_target_, double variance_, double third_, double fourth_)
    : m1_target(m1_target_), variance(variance_), third(third_), fourth(fourth_) {
    require_finite(m1_target, "MomentSpec.m1_target");
    require_finite(variance, "MomentSpec.variance");
    require_finite(third, "MomentSpec.third");
    require_finite(fourth, "MomentSpec.fourth");
    if (m1_target <= 0.0) throw InvalidParameterError("MomentSpec.m1_target must be > 0");
    if (variance <= 0.0) throw InvalidParameterError("MomentSpec.variance must be > 0");
    // Cauchy-Schwarz, with roundoff slack for moments recomputed by quadrature.
    if (fourth < variance * variance * (1.0 - 1e-12))
        throw InvalidParameterError("MomentSpec.fourth must be >= variance^2");
}

MaxEntDist::MaxEntDist(const Eigen::Vector4d& lambda_, double log_norm_, double y_lo_,
                       double y_hi_, double x0_)
    : lambda(lambda_), log_norm(log_norm_), y_lo(y_lo_), y_hi(y_hi_), x0(x0_) {
    for (int i = 0; i < 4; ++i) require_finite(lambda[i], "MaxEntDist.lambda");
    require_finite(log_norm, "MaxEntDist.log_norm");
    require_finite(y_lo, "MaxEntDist.y_lo");
    require_finite(y_hi, "MaxEntDist.y_hi");
    require_finite(x0, "MaxEntDist.x0");
    if (lambda[3] > 0.0) throw InvalidParameterError("MaxEntDist.lambda[3] must be <= 0");
    if (!(y_lo < y_hi)) throw InvalidParameterError("MaxEntDist: empty domain");
    if (x0 <= 0.0) throw InvalidParameterError("MaxEntDist.x0 must be > 0");
}

namespace {

// Fixed evaluation grid over the truncation interval, with node powers and
// e^y cached for the repeated moment evaluations of the Newton iteration.
struct MaxEntGrid {
    Eigen::ArrayXd y, w, y2, y3, y4, ey;

    MaxEntGrid(double y_lo, double y_hi, int n) {
        QuadratureRule rule = gauss_legendre(n, y_lo, y_hi);
        y = rule.nodes;
        w = rule.weights;
        y2 = y.square();
        y3 = y2 * y;
        y4 = y2.square();
        ey = y.exp();
    }
};

struct GridMoments {
    double log_norm = 0.0;
    double raw[9] = {};   // raw y-moments m0..m8
    double mean_price = 0.0;
    double price_y[5] = {};  // E[x y^k]
    double mu2 = 0.0, mu3 = 0.0, mu4 = 0.0;
};

GridMoments evaluate_moments(const MaxEntGrid& g, const Eigen::Vector4d& lam, double x0) {
    Eigen::ArrayXd logq = lam[0] * g.y + lam[1] * g.y2 + lam[2] * g.y3 + lam[3] * g.y4;
    const double shift = logq.maxCoeff();
    const Eigen::ArrayXd qraw = (logq - shift).exp();
    const double z = (g.w * qraw).sum();

    GridMoments m;
    m.log_norm = shift + std::log(z);
    const Eigen::ArrayXd wq = g.w * qraw / z;  // quadrature weights times density

    m.raw[0] = wq.sum();
    Eigen::ArrayXd pow = Eigen::ArrayXd::Ones(g.y.size());
    for (int k = 1; k <= 8; ++k) {
        pow *= g.y;
        m.raw[k] = (wq * pow).sum();
    }
    const Eigen::ArrayXd wqe = wq * g.ey;
    m.mean_price = x0 * wqe.sum();
    pow.setOnes();
    m.price_y[0] = m.mean_price;
    for (int k = 1; k <= 4; ++k) {
        pow *= g.y;
        m.price_y[k] = x0 * (wqe * pow).sum();
    }

    const double m1 = m.raw[1];
    m.mu2 = m.raw[2] - m1 * m1;
    m.mu3 = m.raw[3] - 3.0 * m1 * m.raw[2] + 2.0 * m1 * m1 * m1;
    m.mu4 = m.raw[4] - 4.0 * m1 * m.raw[3] + 6.0 * m1 * m1 * m.raw[2] - 3.0 * m1 * m1 * m1 * m1;
    return m;
}

Eigen::Vector4d scaled_residual(const GridMoments& m, const MomentSpec& spec,
                                const Eigen::Vector4d& scale) {
    return {(m.mean_price - spec.m1_target) / scale[0], (m.mu2 - spec.variance) / scale[1],
            (m.mu3 - spec.third) / scale[2], (m.mu4 - spec.fourth) / scale[3]};
}

std::string residual_string(const Eigen::Vector4d& r) {
    std::ostringstream os;
    os << "[" << r[0] << ", " << r[1] << ", " << r[2] << ", " << r[3] << "]";
    return os.str();
}

}  // namespace

MaxEntDist maxent_fit(const MomentSpec& spec, double x0, const MaxEntFitOptions& options) {
    require_finite(x0, "x0");
    if (x0 <= 0.0) throw InvalidParameterError("maxent_fit: x0 must be > 0");
    if (options.nodes < 200) throw InvalidParameterError("maxent_fit: nodes must be >= 200");
    // Hankel admissibility: the moment matrix of (1, y, y^2) must be PSD,
    // i.e. mu4 >= mu2^2 + mu3^2 / mu2, strictly for an interior solution.
    const double hankel = spec.fourth - spec.variance * spec.variance -
                          spec.third * spec.third / spec.variance;
    if (hankel <= 0.0)
        throw InvalidParameterError("maxent_fit: infeasible moments (Hankel condition fails)");

    const double sd = std::sqrt(spec.variance);
    const double mean_y = std::log(spec.m1_target / x0) - 0.5 * spec.variance;
    const double y_lo = mean_y - 10.0 * sd;
    const double y_hi = mean_y + 10.0 * sd;
    const MaxEntGrid grid(y_lo, y_hi, options.nodes);

    // Gaussian two-moment solution as the starting point.
    Eigen::Vector4d lam(mean_y / spec.variance, -0.5 / spec.variance, 0.0, 0.0);
    const Eigen::Vector4d scale(spec.m1_target, spec.variance,
                                std::max(std::abs(spec.third), sd * sd * sd),
                                std::max(spec.fourth, spec.variance * spec.variance));

    GridMoments m = evaluate_moments(grid, lam, x0);
    Eigen::Vector4d res = scaled_residual(m, spec, scale);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (res.cwiseAbs().maxCoeff() < options.tolerance) break;

        // Jacobian of the residuals in lambda from the exponential-family
        // covariance identities, chain-ruled through the central moments.
        const double m1 = m.raw[1];
        Eigen::Matrix4d jac;
        for (int j = 1; j <= 4; ++j) {
            double draw[5];
            for (int k = 0; k <= 4; ++k) draw[k] = m.raw[k + j] - m.raw[k] * m.raw[j];
            const double dmean = m.price_y[j] - m.mean_price * m.raw[j];
            const double dmu2 = draw[2] - 2.0 * m1 * draw[1];
            const double dmu3 =
                draw[3] - 3.0 * (draw[1] * m.raw[2] + m1 * draw[2]) + 6.0 * m1 * m1 * draw[1];
            const double dmu4 = draw[4] - 4.0 * (draw[1] * m.raw[3] + m1 * draw[3]) +
                                6.0 * (2.0 * m1 * draw[1] * m.raw[2] + m1 * m1 * draw[2]) -
                                12.0 * m1 * m1 * m1 * draw[1];
            jac.col(j - 1) =
                Eigen::Vector4d(dmean / scale[0], dmu2 / scale[1], dmu3 / scale[2], dmu4 / scale[3]);
        }

        const Eigen::Vector4d step = jac.fullPivLu().solve(-res);
        if (!step.allFinite())
            throw NumericalError("maxent_fit: singular Jacobian, residuals " +
                                 residual_string(res));

        // Backtracking on the residual norm. lambda[3] may roam positive
        // during the iteration (the truncated family stays proper); only the
        // converged result must satisfy lambda[3] <= 0.
        const double base_norm = res.norm();
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-6) {
            const Eigen::Vector4d trial = lam + alpha * step;
            const GridMoments mt = evaluate_moments(grid, trial, x0);
            const Eigen::Vector4d rt = scaled_residual(mt, spec, scale);
            if (rt.norm() < (1.0 - 1e-4 * alpha) * base_norm) {
                lam = trial;
                m = mt;
                res = rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw NumericalError("maxent_fit: line search stalled, residuals " +
                                 residual_string(res));
    }

    if (res.cwiseAbs().maxCoeff() >= options.tolerance)
        throw NumericalError("maxent_fit: no convergence after " +
                             std::to_string(options.max_iterations) + " iterations, residuals " +
                             residual_string(res));
    if (lam[3] > 0.0) {
        if (lam[3] > 1e-12)
            throw NumericalError(
                "maxent_fit: target moments require lambda4 > 0 (not normalizable); residuals " +
                residual_string(res));
        lam[3] = 0.0;  // roundoff-scale positive tail coefficient
        m = evaluate_moments(grid, lam, x0);
    }
    return MaxEntDist(lam, m.log_norm, y_lo, y_hi, x0);
}

double maxent_log_density(const MaxEntDist& d, double y) {
    return d.lambda[0] * y + d.lambda[1] * y * y + d.lambda[2] * y * y * y +
           d.lambda[3] * y * y * y * y - d.log_norm;
}

double maxent_pdf(const MaxEntDist& d, double x) {
    if (!(x > 0.0)) throw InvalidParameterError("maxent_pdf: x must be > 0");
    const double y = std::log(x / d.x0);
    if (y < d.y_lo || y > d.y_hi)
        throw InvalidParameterError("maxent_pdf: x outside the truncation interval");
    // Jacobian 1/x maps the y-density to the price axis.
    return std::exp(maxent_log_density(d, y)) / x;
}

MomentSpec maxent_moments(const MaxEntDist& d) {
    const MaxEntGrid grid(d.y_lo, d.y_hi, 480);
    const GridMoments m = evaluate_moments(grid, d.lambda, d.x0);
    return MomentSpec(m.mean_price, m.mu2, m.mu3, m.mu4);
}

double partial_zeroth(const MaxEntDist& d, double K) {
    if (!(K > 0.0)) throw InvalidParameterError("partial_zeroth: K must be > 0");
    const double yk = std::log(K / d.x0);
    if (yk <= d.y_lo) return 0.0;
    if (yk >= d.y_hi) return 1.0;
    return integrate_adaptive([&](double y) { return std::exp(maxent_log_density(d, y)); },
                              d.y_lo, yk, {}, 1e-12, 1e-12);
}

double partial_first(const MaxEntDist& d, double K) {
    if (!(K > 0.0)) throw InvalidParameterError("partial_first: K must be > 0");
    const double yk = std::min(std::log(K / d.x0), d.y_hi);
    if (yk <= d.y_lo) return 0.0;
    return d.x0 * integrate_adaptive(
                      [&](double y) { return std::exp(y + maxent_log_density(d, y)); }, d.y_lo,
                      yk, {}, 1e-12, 1e-12);
}

double pdf(const Density& d, double x) {
    if (const auto* ln = std::get_if<LogNormalDist>(&d)) return lognormal_pdf(*ln, x);
    return maxent_pdf(std::get<MaxEntDist>(d), x);
}

double partial_zeroth(const Density& d, double K) {
    return std::visit([K](const auto& dist) { return partial_zeroth(dist, K); }, d);
}

double partial_first(const Density& d, double K) {
    return std::visit([K](const auto& dist) { return partial_first(dist, K); }, d);
}

double density_mean(const Density& d) {
    if (const auto* ln = std::get_if<LogNormalDist>(&d)) return ln->mean();
    return maxent_moments(std::get<MaxEntDist>(d)).m1_target;
}

double support_lower(const Density& d) {
    if (std::holds_alternative<LogNormalDist>(d)) return 0.0;
    return std::get<MaxEntDist>(d).support_lower();
}

double support_upper(const Density& d) {
    if (std::holds_alternative<LogNormalDist>(d)) return std::numeric_limits<double>::infinity();
    return std::get<MaxEntDist>(d).support_upper();
}

}  // namespace mep
