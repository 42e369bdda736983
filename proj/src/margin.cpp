#include "ccr/margin.hpp"

#include <algorithm>
#include <cmath>

#include "ccr/bachelier.hpp"
#include "ccr/quadrature.hpp"

namespace ccr {

TrancheSpec validate(TrancheSpec tranche) {
    if (!(tranche.attachment >= 0.0)) throw DomainError("tranche attachment must be >= 0");
    if (!(tranche.notional > 0.0)) throw DomainError("tranche notional must be > 0");
    return tranche;
}

LiquiditySpec LiquiditySpec::constant_fraction(double kappa) {
    LiquiditySpec l;
    l.kind = Kind::ConstantFraction;
    l.kappa = kappa;
    return l;
}

LiquiditySpec LiquiditySpec::lognormal(double mu, double s) {
    LiquiditySpec l;
    l.kind = Kind::Lognormal;
    l.mu = mu;
    l.s = s;
    return l;
}

LiquiditySpec validate(LiquiditySpec liquidity) {
    if (liquidity.kind == LiquiditySpec::Kind::ConstantFraction && liquidity.kappa < 0.0) {
        throw DomainError("liquidity fraction kappa must be >= 0");
    }
    if (liquidity.kind == LiquiditySpec::Kind::Lognormal && liquidity.s < 0.0) {
        throw DomainError("lognormal liquidity needs s >= 0");
    }
    if (!(liquidity.haircut >= 0.0)) throw DomainError("haircut must be >= 0");
    return liquidity;
}

PoolConfig validate(PoolConfig pool) {
    if (pool.counterparties.empty()) throw DomainError("pool must have counterparties");
    const double r = pool.counterparties.front().r;
    const double T = pool.counterparties.front().T;
    for (auto& c : pool.counterparties) {
        if (c.r != r || c.T != T) throw DomainError("pool members must share r and T");
        if (!c.validated) c = validate(c);
    }
    pool.grid = validate(pool.grid);
    if (pool.grid.maturity() != T) throw DomainError("pool grid maturity must equal T");
    return pool;
}

std::size_t NettingSet::n_legs() const {
    std::size_t n = 0;
    for (const auto& t : trades) n = std::max(n, t.leg + 1);
    return n;
}

double liquidity_draw(const LiquiditySpec& liquidity, double abs_m, double z) {
    switch (liquidity.kind) {
    case LiquiditySpec::Kind::None: return 0.0;
    case LiquiditySpec::Kind::ConstantFraction: return liquidity.kappa * abs_m;
    case LiquiditySpec::Kind::Lognormal: return std::exp(liquidity.mu + liquidity.s * z);
    }
    return 0.0;
}

double expected_lender_liquidity(const LiquiditySpec& liquidity, double mean_m,
                                 double disp) {
    const double h = liquidity.haircut;
    switch (liquidity.kind) {
    case LiquiditySpec::Kind::None:
        return 0.0;
    case LiquiditySpec::Kind::ConstantFraction: {
        const double k = liquidity.kappa;
        if (k <= 0.0) return 0.0;
        if (!std::isfinite(h)) return k * expected_abs(mean_m, disp);
        return k * (expected_abs(mean_m, disp) - expected_abs_excess(mean_m, disp, h / k));
    }
    case LiquiditySpec::Kind::Lognormal: {
        const double mean = std::exp(liquidity.mu + 0.5 * liquidity.s * liquidity.s);
        if (!std::isfinite(h)) return mean;
        if (liquidity.s <= 0.0) return std::min(std::exp(liquidity.mu), h);
        const double d = (std::log(h) - liquidity.mu) / liquidity.s;
        return mean * norm_cdf(d - liquidity.s) + h * (1.0 - norm_cdf(d));
    }
    }
    return 0.0;
}

double lender_payout_at_default(const ModelConfig& config, const LiquiditySpec& liquidity,
                                const ScenarioPath& path, Direction dir) {
    const bool to_c = dir == Direction::BtoC; // protection on C's default
    const std::ptrdiff_t idx = to_c ? path.idx_tau_C : path.idx_tau_B;
    const std::size_t i = static_cast<std::size_t>(idx);
    const double m_def = to_c ? path.m_C(i) : path.m_B(i);
    const double z = to_c ? path.z_liq_C : path.z_liq_B;
    const double draw = liquidity_draw(liquidity, std::abs(m_def), z);
    return config.lgd(dir) * (neg(m_def) + lender_liquidity_share(liquidity, draw));
}

std::vector<EstimatorStats> highfreq_premium(const ModelConfig& config,
                                             const TimeGrid& grid,
                                             const SimSettings& settings, LenderSide side,
                                             const LiquiditySpec& liquidity) {
    const Direction dir = side == LenderSide::A ? Direction::BtoC : Direction::CtoB;
    const std::size_t k = grid.n_steps();
    McResult r = mc_run(settings, k, false, [&](std::uint64_t, Workspace& ws, double* out) {
        generate_path(config, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate,
                      ws.path);
        std::fill(out, out + k, 0.0);
        const double tau = dir == Direction::BtoC ? ws.path.tau_C : ws.path.tau_B;
        if (!(tau <= grid.maturity())) return;
        // Step (t_j, t_{j+1}] containing the default.
        auto it = std::lower_bound(grid.times.begin(), grid.times.end(), tau);
        std::size_t j = static_cast<std::size_t>(it - grid.times.begin());
        if (j > 0) --j;
        if (j >= k) j = k - 1;
        out[j] = ws.path.discount(tau) * lender_payout_at_default(config, liquidity, ws.path, dir);
    });
    return r.stats;
}

double periodic_window_cva(const ModelConfig& config, double t0, double t1, double m,
                           LenderSide side, const LiquiditySpec& liquidity) {
    const Direction dir = side == LenderSide::A ? Direction::BtoC : Direction::CtoB;
    const double lambda = config.hazard(dir);
    const double lgd = config.lgd(dir);
    const double horizon = std::min(t1, config.T) - t0;
    if (lambda <= 0.0 || horizon <= 0.0) return 0.0;
    const double a_t = config.a(t0);
    if (a_t <= 0.0) return 0.0;
    const double decay = config.lambda_B + config.lambda_C + config.r;

    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_floor = 1e-15;
    const double v = integrate_sqrt_time(
        [&](double u) {
            const double a_u = config.a(t0 + u);
            const double mean = m * (a_u / a_t);
            const double disp = a_u * config.sigma * std::sqrt(u);
            const double loss = expected_positive_part(-mean, disp) +
                                expected_lender_liquidity(liquidity, mean, disp);
            return lambda * std::exp(-decay * u) * loss;
        },
        horizon, opt);
    return std::max(lgd * v, 0.0);
}

namespace {

// Window premium as a function of the insured party's mark at the reset,
// tabulated once per window on a dense lattice (linear interpolation with
// slope-preserving extrapolation; the premium is asymptotically linear in m).
struct PremiumCurve {
    double lo = 0.0, step = 0.0;
    std::vector<double> vals;
    double flat = 0.0;

    static PremiumCurve build(const ModelConfig& config, double t0, double t1,
                              LenderSide side, const LiquiditySpec& liquidity,
                              double center, double disp) {
        PremiumCurve c;
        if (disp <= 0.0) {
            c.flat = periodic_window_cva(config, t0, t1, center, side, liquidity);
            return c;
        }
        const int n = 1025;
        const double span = 10.0 * disp;
        c.lo = center - span;
        c.step = 2.0 * span / (n - 1);
        c.vals.resize(n);
        for (int i = 0; i < n; ++i) {
            c.vals[static_cast<std::size_t>(i)] = periodic_window_cva(
                config, t0, t1, c.lo + c.step * i, side, liquidity);
        }
        return c;
    }

    double eval(double m) const {
        if (vals.empty()) return flat;
        const double x = (m - lo) / step;
        const auto n = static_cast<std::ptrdiff_t>(vals.size());
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(std::floor(x));
        i = std::clamp<std::ptrdiff_t>(i, 0, n - 2);
        const double w = x - static_cast<double>(i);
        const std::size_t u = static_cast<std::size_t>(i);
        return vals[u] + (vals[u + 1] - vals[u]) * w;
    }
};

} // namespace

std::vector<EstimatorStats> lender_fairness(const ModelConfig& config,
                                            const TimeGrid& grid,
                                            const SimSettings& settings, PoolSide structure,
                                            const LiquiditySpec& liquidity,
                                            double premium_scale) {
    (void)structure; // the insured leg has the same form tri- and quadri-partite
    const std::size_t n_windows = grid.resets.size() - 1;
    std::vector<PremiumCurve> premia(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        const double t0 = grid.resets[w];
        const double center = -config.m0 * config.a(t0); // E[M_{t0}(C)]
        const double disp = config.a(t0) * config.sigma * std::sqrt(t0);
        premia[w] = PremiumCurve::build(config, t0, grid.resets[w + 1], LenderSide::A,
                                        liquidity, center, disp);
    }

    McResult r = mc_run(
        settings, n_windows, false, [&](std::uint64_t, Workspace& ws, double* out) {
            generate_path(config, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate,
                          ws.path);
            const ScenarioPath& p = ws.path;
            for (std::size_t w = 0; w < n_windows; ++w) {
                const double t0 = grid.resets[w];
                const double t1 = grid.resets[w + 1];
                if (!(p.tau_B > t0 && p.tau_C > t0)) {
                    out[w] = 0.0;
                    continue;
                }
                const double m_at_reset = -p.m_B(p.index_of(t0));
                double v = p.discount(t0) * premium_scale * premia[w].eval(m_at_reset);
                if (p.tau_C <= t1 && p.tau_C < p.tau_B) {
                    v -= p.discount(p.tau_C) *
                         lender_payout_at_default(config, liquidity, p, Direction::BtoC);
                }
                out[w] = v;
            }
        });
    return r.stats;
}

double pool_loss(const PoolConfig& pool, std::span<const ScenarioPath> members, double t) {
    double loss = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const ScenarioPath& p = members[i];
        if (!(p.tau_C <= t)) continue;
        const ModelConfig& cfg = pool.counterparties[i];
        const std::size_t idx = static_cast<std::size_t>(p.idx_tau_C);
        if (pool.side == PoolSide::Quadri) {
            loss += cfg.lgd_C() * neg(p.m_C(idx));
        } else {
            // Tri-partite claim includes the bank's unilateral DVA.
            const double udva_b = conditional_ucva(cfg, Direction::CtoB, p.m_B(idx),
                                                   p.tau_C);
            loss += cfg.lgd_C() * pos(p.m_B(idx) + udva_b);
        }
    }
    return loss;
}

double tranche_loss(const PoolConfig& pool, const TrancheSpec& tranche,
                    std::span<const ScenarioPath> members, double t) {
    const double loss = pool_loss(pool, members, t);
    return pos(std::min(loss, tranche.attachment + tranche.notional) - tranche.attachment);
}

namespace {

void generate_members(const PoolConfig& pool, Workspace& ws) {
    ws.members.resize(pool.counterparties.size());
    for (std::size_t j = 0; j < pool.counterparties.size(); ++j) {
        generate_path(pool.counterparties[j], pool.grid, ws.path_index, ws.seed, j,
                      ws.antithetic_negate, ws.members[j]);
    }
}

} // namespace

TrancheSpreadResult tranche_spread(const PoolConfig& pool, const TrancheSpec& tranche,
                                   const SimSettings& settings) {
    validate(tranche);
    const auto& resets = pool.grid.resets;
    const double r = pool.counterparties.front().r;
    McResult res =
        mc_run(settings, 2, false, [&](std::uint64_t, Workspace& ws, double* out) {
            generate_members(pool, ws);
            double protection = 0.0;
            double premium = 0.0;
            double x_prev = tranche_loss(pool, tranche, ws.members, resets.front());
            for (std::size_t i = 0; i + 1 < resets.size(); ++i) {
                const double t_next = resets[i + 1];
                const double x_next = tranche_loss(pool, tranche, ws.members, t_next);
                const double df = std::exp(-r * t_next);
                protection += df * (x_next - x_prev);
                premium += df * (t_next - resets[i]) * (tranche.notional - x_next);
                x_prev = x_next;
            }
            out[0] = protection;
            out[1] = premium;
        });

    TrancheSpreadResult out;
    out.protection_leg = res.stats[0];
    out.premium_leg = res.stats[1];
    if (!(out.premium_leg.mean > 0.0)) {
        throw DegeneratePool("tranche premium leg is not positive (wiped out a.s.)");
    }
    out.spread = out.protection_leg.mean / out.premium_leg.mean;
    return out;
}

StackReport tranche_stack_consistency(const PoolConfig& pool,
                                      std::span<const TrancheSpec> stack,
                                      const SimSettings& settings) {
    StackReport report;
    if (stack.empty()) return report;
    double total_notional = 0.0;
    for (std::size_t k = 0; k < stack.size(); ++k) {
        validate(stack[k]);
        total_notional += stack[k].notional;
        if (k > 0 &&
            stack[k].attachment != stack[k - 1].attachment + stack[k - 1].notional) {
            report.contiguous = false;
            return report;
        }
    }
    const double base = stack.front().attachment;

    Workspace ws;
    ws.seed = settings.seed;
    for (std::uint64_t p = 0; p < settings.n_paths; ++p) {
        ws.path_index = p;
        ws.antithetic_negate = false;
        generate_members(pool, ws);
        for (double t : pool.grid.resets) {
            const double loss = pool_loss(pool, ws.members, t);
            double summed = 0.0;
            for (const auto& tr : stack) summed += tranche_loss(pool, tr, ws.members, t);
            const double target = pos(std::min(loss, base + total_notional) - base);
            report.max_abs_gap = std::max(report.max_abs_gap, std::abs(summed - target));
        }
        ++report.n_paths;
    }
    return report;
}

double netting_exposure(const NettingSet& set, std::span<const ScenarioPath> legs,
                        std::size_t sample_index) {
    double x = 0.0;
    for (const auto& t : set.trades) x += t.weight * legs[t.leg].m_B(sample_index);
    return x;
}

namespace {

// Net weight per leg; exact offsets cancel before any multiplication.
std::vector<double> net_weights(const NettingSet& set) {
    std::vector<double> w(set.n_legs(), 0.0);
    for (const auto& t : set.trades) w[t.leg] += t.weight;
    return w;
}

} // namespace

NettingValuation netting_valuation(const ModelConfig& config, const TimeGrid& grid,
                                   const SimSettings& settings, const NettingSet& set,
                                   const LiquiditySpec& liquidity) {
    const std::vector<double> w = net_weights(set);
    const std::size_t n_legs = w.size();
    const double T = grid.maturity();

    McResult r = mc_run(settings, 3, false, [&](std::uint64_t, Workspace& ws, double* out) {
        ws.members.resize(n_legs);
        for (std::size_t leg = 0; leg < n_legs; ++leg) {
            // Shared default clock (stream 0), leg-specific exposure stream.
            generate_path(config, grid, ws.path_index, ws.seed, 0, (1u << 20) + leg,
                          ws.antithetic_negate, ws.members[leg]);
        }
        auto net_m = [&](std::size_t i) {
            double x = 0.0;
            for (std::size_t leg = 0; leg < n_legs; ++leg) x += w[leg] * ws.members[leg].m_B(i);
            return x;
        };
        const ScenarioPath& clock = ws.members.front();

        double cva = 0.0, carry = 0.0;
        if (clock.tau_C <= T) {
            const std::size_t i = static_cast<std::size_t>(clock.idx_tau_C);
            const double m = net_m(i);
            cva = clock.discount(clock.tau_C) * config.lgd_C() * pos(m);
            if (clock.tau_C < clock.tau_B) {
                const double draw = liquidity_draw(liquidity, std::abs(m), clock.z_liq_C);
                carry = clock.discount(clock.tau_C) * config.lgd_C() *
                        lender_liquidity_share(liquidity, draw);
            }
        }
        // Discounted collateral balance covering B's positive exposure,
        // sampled on the grid.
        double collateral = 0.0;
        for (std::size_t k = 0; k + 1 < grid.times.size(); ++k) {
            const std::size_t i = clock.index_of(grid.times[k]);
            collateral += clock.discount(grid.times[k]) * pos(net_m(i)) *
                          (grid.times[k + 1] - grid.times[k]);
        }
        out[0] = cva;
        out[1] = collateral;
        out[2] = carry;
    });

    NettingValuation out;
    out.ucva = r.stats[0];
    out.collateral_cost = r.stats[1];
    out.carry = r.stats[2];
    return out;
}

Payoff secured_protection_payoff(const ModelConfig& config, Direction dir,
                                 bool first_to_default, const LiquiditySpec& liquidity) {
    const double T = config.T;
    return [&config, dir, first_to_default, liquidity, T](const ScenarioPath& p) {
        const double tau = dir == Direction::BtoC ? p.tau_C : p.tau_B;
        const double other = dir == Direction::BtoC ? p.tau_B : p.tau_C;
        if (!(tau <= T)) return 0.0;
        if (first_to_default && !(tau < other)) return 0.0;
        return p.discount(tau) * lender_payout_at_default(config, liquidity, p, dir);
    };
}

Payoff residual_liquidity_payoff(const ModelConfig& config, Direction dir,
                                 bool first_to_default, const LiquiditySpec& liquidity) {
    const double T = config.T;
    return [&config, dir, first_to_default, liquidity, T](const ScenarioPath& p) {
        const double tau = dir == Direction::BtoC ? p.tau_C : p.tau_B;
        const double other = dir == Direction::BtoC ? p.tau_B : p.tau_C;
        if (!(tau <= T)) return 0.0;
        if (first_to_default && !(tau < other)) return 0.0;
        const bool to_c = dir == Direction::BtoC;
        const std::size_t i =
            static_cast<std::size_t>(to_c ? p.idx_tau_C : p.idx_tau_B);
        const double m_def = to_c ? p.m_C(i) : p.m_B(i);
        const double z = to_c ? p.z_liq_C : p.z_liq_B;
        const double draw = liquidity_draw(liquidity, std::abs(m_def), z);
        return p.discount(tau) * config.lgd(dir) * excess_liquidity(liquidity, draw);
    };
}

Payoff repo_carry_payoff(const ModelConfig& config, const LiquiditySpec& liquidity) {
    const double T = config.T;
    return [&config, liquidity, T](const ScenarioPath& p) {
        if (!(p.tau_C <= T) || !(p.tau_C < p.tau_B)) return 0.0;
        const std::size_t i = static_cast<std::size_t>(p.idx_tau_C);
        const double draw =
            liquidity_draw(liquidity, std::abs(p.m_C(i)), p.z_liq_C);
        return p.discount(p.tau_C) * config.lgd_C() * draw;
    };
}

EstimatorStats repo_carry_cost(const ModelConfig& config, const SimSettings& settings,
                               const LiquiditySpec& liquidity) {
    // M is only read at the default time; the bridge makes a two-point grid exact.
    TimeGrid grid = TimeGrid::uniform(config.T, 1);
    return mc_estimate(repo_carry_payoff(config, liquidity), config, grid, settings);
}

ValuationResult fair_value(const ModelConfig& config, const TimeGrid& grid,
                           const SimSettings& settings, StructuringStyle style,
                           const LiquiditySpec& liquidity) {
    const double m0 = config.m0;
    const ModelConfig sw = swapped(config);
    ValuationResult out;
    out.style = style;
    out.money_conserving = style != StructuringStyle::UcvaOnly;

    // Protection leg on C's default (evaluated on the main paths) and its
    // role-swapped mirror (evaluated on the swapped-config paths). DVA(B,C)
    // and CVA(C,B) are the same mirror estimator, so conservation is exact.
    Payoff leg;
    Payoff mirror;
    Payoff gamma_leg; // nonzero for the portable styles
    bool dva_booked = true;
    switch (style) {
    case StructuringStyle::UcvaOnly:
        leg = ucva_payoff(config, Direction::BtoC);
        mirror = ucva_payoff(sw, Direction::BtoC);
        dva_booked = false;
        break;
    case StructuringStyle::BcvaRiskFreeCloseout:
    case StructuringStyle::BcvaReplacementCloseout:
        leg = ucva_payoff(config, Direction::BtoC);
        mirror = ucva_payoff(sw, Direction::BtoC);
        break;
    case StructuringStyle::FtdCva:
        leg = ftdcva_payoff(config, Direction::BtoC);
        mirror = ftdcva_payoff(sw, Direction::BtoC);
        break;
    case StructuringStyle::PortableCvaC1:
    case StructuringStyle::PortableCvaC2: {
        const CloseoutRule rule = style_closeout_rule(style);
        Payoff u = ucva_payoff(config, Direction::BtoC);
        gamma_leg = pcva_gamma_payoff(config, rule, Direction::BtoC);
        Payoff g = gamma_leg;
        leg = [u, g](const ScenarioPath& p) { return u(p) + g(p); };
        Payoff u2 = ucva_payoff(sw, Direction::BtoC);
        Payoff g2 = pcva_gamma_payoff(sw, rule, Direction::BtoC);
        mirror = [u2, g2](const ScenarioPath& p) { return u2(p) + g2(p); };
        break;
    }
    case StructuringStyle::QuadripartiteHighFreq:
    case StructuringStyle::QuadripartitePeriodic:
    case StructuringStyle::PentapartiteCcp: {
        const bool ftd = style != StructuringStyle::QuadripartiteHighFreq;
        leg = secured_protection_payoff(config, Direction::BtoC, ftd, liquidity);
        mirror = secured_protection_payoff(sw, Direction::BtoC, ftd, liquidity);
        break;
    }
    case StructuringStyle::TripartitePeriodic:
        leg = secured_protection_payoff(config, Direction::BtoC, true, liquidity);
        mirror = ucva_payoff(sw, Direction::BtoC); // B's persistent DVA leg
        break;
    }

    const bool collateral_net = style == StructuringStyle::QuadripartiteHighFreq ||
                                style == StructuringStyle::QuadripartitePeriodic ||
                                style == StructuringStyle::PentapartiteCcp;
    const bool tri = style == StructuringStyle::TripartitePeriodic;
    const bool has_gamma = static_cast<bool>(gamma_leg);

    McResult r = mc_run(settings, 5, false, [&](std::uint64_t, Workspace& ws, double* out5) {
        generate_path(config, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate,
                      ws.path);
        ws.members.resize(1);
        generate_path(sw, grid, ws.path_index, ws.seed, 0, ws.antithetic_negate,
                      ws.members[0]);
        const double a = leg(ws.path);
        const double b = mirror(ws.members[0]);
        out5[0] = a;
        out5[1] = b;
        out5[2] = has_gamma ? gamma_leg(ws.path) : 0.0;
        if (collateral_net) {
            out5[3] = m0;
            out5[4] = -m0;
        } else if (tri) {
            out5[3] = m0 + b;
            out5[4] = -m0 - b;
        } else if (!dva_booked) {
            out5[3] = m0 - a;
            out5[4] = -m0 - b;
        } else {
            out5[3] = m0 - a + b;
            out5[4] = -m0 - b + a;
        }
    });

    out.cva = r.stats[0];
    out.dva = dva_booked ? r.stats[1] : EstimatorStats{0.0, 0.0, r.n_paths};
    out.gamma = r.stats[2];
    out.v_B = r.stats[3];
    out.v_C = r.stats[4];
    out.conservation_gap = out.v_B.mean + out.v_C.mean;
    return out;
}

double repo_carry_quadrature(const ModelConfig& config, const LiquiditySpec& liquidity) {
    if (config.rho_BC != 0.0 || config.rho_MB != 0.0 || config.rho_MC != 0.0) {
        throw DomainError("quadrature oracle requires zero correlations");
    }
    if (liquidity.kind == LiquiditySpec::Kind::None || config.lambda_C <= 0.0) return 0.0;
    const double decay = config.lambda_B + config.lambda_C + config.r;

    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    const double v = integrate_sqrt_time(
        [&](double t) {
            const double mean = -config.m0 * config.a(t); // E[M_t(C)]
            const double disp = config.a(t) * config.sigma * std::sqrt(t);
            double el = 0.0;
            if (liquidity.kind == LiquiditySpec::Kind::ConstantFraction) {
                el = liquidity.kappa * expected_abs(mean, disp);
            } else {
                el = std::exp(liquidity.mu + 0.5 * liquidity.s * liquidity.s);
            }
            return config.lambda_C * std::exp(-decay * t) * el;
        },
        config.T, opt);
    return config.lgd_C() * v;
}

} // namespace ccr
