#include "ccr/structures.hpp"

#include "ccr/margin.hpp"

#include <cmath>

#include "ccr/bachelier.hpp"
#include "ccr/quadrature.hpp"

namespace ccr {

const char* to_string(CloseoutRule rule) {
    switch (rule) {
    case CloseoutRule::RiskFree: return "risk-free";
    case CloseoutRule::Replacement: return "replacement";
    case CloseoutRule::RiskFreeWithLiquidity: return "risk-free+liquidity";
    case CloseoutRule::ReplacementWithLiquidity: return "replacement+liquidity";
    }
    return "?";
}

double closeout_value(const CloseoutInputs& in, CloseoutRule rule) {
    const bool replacement = rule == CloseoutRule::Replacement ||
                             rule == CloseoutRule::ReplacementWithLiquidity;
    const bool with_liquidity = rule == CloseoutRule::RiskFreeWithLiquidity ||
                                rule == CloseoutRule::ReplacementWithLiquidity;
    const double x = replacement ? in.m_survivor + in.udva_survivor : in.m_survivor;
    const double l = with_liquidity ? in.liquidity_L : 0.0;
    return -neg(x) + in.recovery_defaulted * pos(x) - l;
}

namespace {

// Mark to the party whose default `dir` prices, at sample index i.
// BtoC prices C's default, so this is M(C) = -M(B).
double mark_of_defaulter(const ScenarioPath& path, Direction dir, std::size_t i) {
    return dir == Direction::BtoC ? path.m_C(i) : path.m_B(i);
}

double tau_of(const ScenarioPath& path, Direction dir) {
    return dir == Direction::BtoC ? path.tau_C : path.tau_B;
}

std::ptrdiff_t idx_of(const ScenarioPath& path, Direction dir) {
    return dir == Direction::BtoC ? path.idx_tau_C : path.idx_tau_B;
}

} // namespace

double conditional_ucva(const ModelConfig& config, Direction dir, double m, double t) {
    const double lambda = config.hazard(dir);
    const double lgd = config.lgd(dir);
    const double horizon = config.T - t;
    if (lambda <= 0.0 || lgd <= 0.0 || horizon <= 0.0) return 0.0;
    const double a_t = config.a(t);
    if (a_t <= 0.0) return 0.0;

    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_floor = 1e-15;
    const double v = integrate_sqrt_time(
        [&](double u) {
            const double a_u = config.a(t + u);
            const double ratio = a_u / a_t;
            return lambda * std::exp(-(lambda + config.r) * u) *
                   expected_positive_part(-m * ratio, a_u * config.sigma * std::sqrt(u));
        },
        horizon, opt);
    // The integrand is pointwise nonnegative; never let the Richardson
    // correction push the value below zero.
    return std::max(lgd * v, 0.0);
}

double conditional_ftdcva(const ModelConfig& config, Direction dir, double m, double t) {
    const double lambda = config.hazard(dir);
    const double lgd = config.lgd(dir);
    const double horizon = config.T - t;
    if (lambda <= 0.0 || lgd <= 0.0 || horizon <= 0.0) return 0.0;
    const double a_t = config.a(t);
    if (a_t <= 0.0) return 0.0;
    const double decay = config.lambda_B + config.lambda_C + config.r;

    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_floor = 1e-15;
    const double v = integrate_sqrt_time(
        [&](double u) {
            const double a_u = config.a(t + u);
            return lambda * std::exp(-decay * u) *
                   expected_positive_part(-m * (a_u / a_t),
                                          a_u * config.sigma * std::sqrt(u));
        },
        horizon, opt);
    return std::max(lgd * v, 0.0);
}

double conditional_gamma(const ModelConfig& config, CloseoutRule rule, Direction dir,
                         double m, double t) {
    const double lambda_trigger = config.hazard(dir);
    const double horizon = config.T - t;
    if (lambda_trigger <= 0.0 || horizon <= 0.0) return 0.0;
    const double a_t = config.a(t);
    if (a_t <= 0.0) return 0.0;
    const Direction inner_dir = flipped(dir);
    if (config.hazard(inner_dir) <= 0.0) return 0.0;
    const double decay = config.lambda_B + config.lambda_C + config.r;
    const double lgd_trigger = config.lgd(dir);

    QuadratureOptions outer;
    outer.rel_tol = 1e-8;
    // The Gaussian middle layer integrates values far below the outer scale
    // (and the replacement branch has a positive-part kink); an absolute
    // floor keeps its refinement from chasing noise.
    QuadratureOptions mid;
    mid.rel_tol = 1e-9;
    mid.abs_floor = 1e-14;

    return integrate_sqrt_time(
        [&](double v) {
            const double a_v = config.a(t + v);
            const double mean = m * (a_v / a_t);
            const double disp = a_v * config.sigma * std::sqrt(v);
            const double ez = gauss_expectation(
                [&](double z) {
                    const double ms = mean + disp * z; // survivor's mark at t+v
                    const double u = conditional_ucva(config, inner_dir, ms, t + v);
                    if (rule == CloseoutRule::RiskFree) return u;
                    return lgd_trigger * (pos(ms + u) - pos(ms));
                },
                mid);
            return lambda_trigger * std::exp(-decay * v) * ez;
        },
        horizon, outer);
}

Payoff ucva_payoff(const ModelConfig& config, Direction dir) {
    const double lgd = config.lgd(dir);
    const double T = config.T;
    return [&config, dir, lgd, T](const ScenarioPath& path) {
        const double tau = tau_of(path, dir);
        if (!(tau <= T)) return 0.0;
        const std::size_t i = static_cast<std::size_t>(idx_of(path, dir));
        return path.discount(tau) * lgd * neg(mark_of_defaulter(path, dir, i));
    };
}

Payoff ftdcva_payoff(const ModelConfig& config, Direction dir) {
    const double lgd = config.lgd(dir);
    const double T = config.T;
    return [&config, dir, lgd, T](const ScenarioPath& path) {
        const double tau = tau_of(path, dir);
        const double tau_other = tau_of(path, flipped(dir));
        if (!(tau <= T) || !(tau < tau_other)) return 0.0;
        const std::size_t i = static_cast<std::size_t>(idx_of(path, dir));
        return path.discount(tau) * lgd * neg(mark_of_defaulter(path, dir, i));
    };
}

Payoff pcva_gamma_payoff(const ModelConfig& config, CloseoutRule rule, Direction dir) {
    return pcva_gamma_payoff(config, rule, dir,
                             [](const ModelConfig& c, Direction d, double m, double t) {
                                 return conditional_ucva(c, d, m, t);
                             });
}

Payoff pcva_gamma_payoff(const ModelConfig& config, CloseoutRule rule, Direction dir,
                         InnerValuation inner) {
    const double lgd = config.lgd(dir);
    const double T = config.T;
    const Direction inner_dir = flipped(dir);
    return [&config, rule, dir, inner_dir, lgd, T,
            inner = std::move(inner)](const ScenarioPath& path) {
        const double tau = tau_of(path, dir);
        const double tau_other = tau_of(path, flipped(dir));
        if (!(tau <= T) || !(tau < tau_other)) return 0.0;
        const std::size_t i = static_cast<std::size_t>(idx_of(path, dir));
        // Mark to the survivor at the trigger time.
        const double ms = mark_of_defaulter(path, inner_dir, i);
        const double u = inner(config, inner_dir, ms, tau);
        const double val = rule == CloseoutRule::RiskFree
                               ? u
                               : lgd * (pos(ms + u) - pos(ms));
        return path.discount(tau) * val;
    };
}

namespace {

// Direction is realized by role-swapping the configuration: the CtoB
// estimator is the BtoC estimator of swapped(config), so role-swapped
// quantities share one code path (bit-identical for symmetric parameters).
ModelConfig oriented(const ModelConfig& config, Direction dir) {
    return dir == Direction::BtoC ? config : swapped(config);
}

} // namespace

EstimatorStats ucva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, Direction dir) {
    const ModelConfig c = oriented(config, dir);
    return mc_estimate(ucva_payoff(c, Direction::BtoC), c, grid, settings);
}

EstimatorStats udva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, Direction dir) {
    return ucva(config, grid, settings, flipped(dir));
}

EstimatorStats bcva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, Direction dir) {
    const ModelConfig c1 = oriented(config, dir);
    const ModelConfig c2 = swapped(c1);
    Payoff protection = ucva_payoff(c1, Direction::BtoC);
    Payoff mirror = ucva_payoff(c2, Direction::BtoC);
    McResult r = mc_run(settings, 1, false, [&](std::uint64_t, Workspace& ws, double* out) {
        generate_path(c1, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate, ws.path);
        ws.members.resize(1);
        generate_path(c2, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate,
                      ws.members[0]);
        out[0] = protection(ws.path) - mirror(ws.members[0]);
    });
    return r.stats[0];
}

EstimatorStats ftdcva(const ModelConfig& config, const TimeGrid& grid,
                      const SimSettings& settings, Direction dir) {
    const ModelConfig c = oriented(config, dir);
    return mc_estimate(ftdcva_payoff(c, Direction::BtoC), c, grid, settings);
}

EstimatorStats pcva_gamma(const ModelConfig& config, const TimeGrid& grid,
                          const SimSettings& settings, CloseoutRule rule, Direction dir) {
    // Gamma(C,B) triggers at tau_B, which is the counterparty-default clock
    // of the swapped configuration.
    const ModelConfig c = oriented(config, dir);
    return mc_estimate(pcva_gamma_payoff(c, rule, Direction::BtoC), c, grid, settings);
}

EstimatorStats pcva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, CloseoutRule rule, Direction dir) {
    const ModelConfig c = oriented(config, dir);
    Payoff u = ucva_payoff(c, Direction::BtoC);
    Payoff g = pcva_gamma_payoff(c, rule, Direction::BtoC);
    return mc_estimate(
        [u = std::move(u), g = std::move(g)](const ScenarioPath& p) { return u(p) + g(p); },
        c, grid, settings);
}

EstimatorStats closeout_mismatch(const ModelConfig& config, const TimeGrid& grid,
                                 const SimSettings& settings, StructuringStyle style,
                                 MismatchSide side) {
    if (style != StructuringStyle::BcvaRiskFreeCloseout &&
        style != StructuringStyle::BcvaReplacementCloseout) {
        // Consistent styles cancel the mismatch by construction.
        return mc_estimate([](const ScenarioPath&) { return 0.0; }, config, grid, settings);
    }
    const CloseoutRule rule = style == StructuringStyle::BcvaRiskFreeCloseout
                                  ? CloseoutRule::RiskFree
                                  : CloseoutRule::Replacement;
    // Survivor C loses its DVA at tau_B: the Gamma integrand of the swapped
    // configuration, triggered at its counterparty default.
    const ModelConfig sw = swapped(config);
    Payoff c_side = pcva_gamma_payoff(sw, rule, Direction::BtoC);
    Payoff b_side = pcva_gamma_payoff(config, rule, Direction::BtoC);
    switch (side) {
    case MismatchSide::SurvivorC:
        return mc_estimate(c_side, sw, grid, settings);
    case MismatchSide::SurvivorB:
        return mc_estimate(b_side, config, grid, settings);
    case MismatchSide::Both: {
        McResult r =
            mc_run(settings, 1, false, [&](std::uint64_t, Workspace& ws, double* out) {
                generate_path(sw, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate,
                              ws.path);
                ws.members.resize(1);
                generate_path(config, grid, ws.path_index, ws.seed, 0,
                              ws.antithetic_negate, ws.members[0]);
                out[0] = c_side(ws.path) + b_side(ws.members[0]);
            });
        return r.stats[0];
    }
    }
    throw DomainError("bad mismatch side");
}

CloseoutRule style_closeout_rule(StructuringStyle style) {
    switch (style) {
    case StructuringStyle::BcvaReplacementCloseout:
    case StructuringStyle::PortableCvaC2:
        return CloseoutRule::Replacement;
    default:
        return CloseoutRule::RiskFree;
    }
}

ValuationResult fair_value(const ModelConfig& config, const TimeGrid& grid,
                           const SimSettings& settings, StructuringStyle style) {
    return fair_value(config, grid, settings, style, LiquiditySpec::none());
}

} // namespace ccr
