#include "ccr/oracle.hpp"

#include <cmath>

namespace ccr {

namespace {

void require_zero_correlation(const ModelConfig& config) {
    if (config.rho_BC != 0.0 || config.rho_MB != 0.0 || config.rho_MC != 0.0) {
        throw DomainError("quadrature oracle requires zero correlations");
    }
}

// Mean of the defaulting party's mark at t; the loss integrand is the
// expected negative part of it, i.e. the positive part of the negated mean.
double defaulter_mean(const ModelConfig& config, Direction dir, double t) {
    const double m = config.a(t) * config.m0;
    return dir == Direction::BtoC ? -m : m; // M_t(C) = -M_t(B)
}

double protection_quadrature(const ModelConfig& config, Direction dir, double extra_decay,
                             const QuadratureOptions& opt) {
    require_zero_correlation(config);
    const double lambda = config.hazard(dir);
    const double lgd = config.lgd(dir);
    if (lambda <= 0.0 || lgd <= 0.0) return 0.0;
    const double v = integrate_sqrt_time(
        [&](double t) {
            const double disp = config.a(t) * config.sigma * std::sqrt(t);
            return std::exp(-(config.r + lambda + extra_decay) * t) * lambda *
                   expected_positive_part(-defaulter_mean(config, dir, t), disp);
        },
        config.T, opt);
    return lgd * v;
}

} // namespace

double ucva_quadrature(const ModelConfig& config, Direction dir,
                       const QuadratureOptions& opt) {
    return protection_quadrature(config, dir, 0.0, opt);
}

double ftdcva_quadrature(const ModelConfig& config, Direction dir,
                         const QuadratureOptions& opt) {
    const double survivor_hazard = config.hazard(flipped(dir));
    return protection_quadrature(config, dir, survivor_hazard, opt);
}

double gamma_quadrature(const ModelConfig& config, CloseoutRule rule, Direction dir) {
    require_zero_correlation(config);
    // Survivor's initial mark: B holds m0, C holds -m0.
    const double m_survivor0 = dir == Direction::CtoB ? -config.m0 : config.m0;
    return conditional_gamma(config, rule, dir, m_survivor0, 0.0);
}

} // namespace ccr
