#ifndef CCR_MARGIN_HPP
#define CCR_MARGIN_HPP

#include <span>
#include <vector>

#include "ccr/model.hpp"
#include "ccr/sim.hpp"
#include "ccr/structures.hpp"

namespace ccr {

// Slice of the pool's cumulative default loss absorbing (attachment,
// attachment + notional].
struct TrancheSpec {
    double attachment = 0.0; // >= 0
    double notional = 0.0;   // > 0
};

TrancheSpec validate(TrancheSpec tranche);

// Novation price correction L_tau >= 0 at default, plus the haircut level
// above which losses stop being absorbed by the margin lender.
struct LiquiditySpec {
    enum class Kind { None, ConstantFraction, Lognormal };
    Kind kind = Kind::None;
    double kappa = 0.0; // L = kappa * |M| for ConstantFraction
    double mu = 0.0;    // L = exp(mu + s Z) for Lognormal
    double s = 0.0;
    double haircut = kNever; // lender absorbs min(L, haircut)

    static LiquiditySpec none() { return {}; }
    static LiquiditySpec constant_fraction(double kappa);
    static LiquiditySpec lognormal(double mu, double s);
};

LiquiditySpec validate(LiquiditySpec liquidity);

// Pool loss convention: the quadri-partite X process sums plain exposure
// losses; the tri-partite Y process adds the bank's unilateral DVA to each
// member's claim.
enum class PoolSide { Quadri, Tri };

// The set of counterparties served by one margin lender.
struct PoolConfig {
    std::vector<ModelConfig> counterparties;
    TimeGrid grid; // shared clock; resets drive the tranche legs
    PoolSide side = PoolSide::Quadri;
};

PoolConfig validate(PoolConfig pool);

// Trades referencing exposure legs by index with signed weights; legs share
// the counterparty default clock.
struct NettingSet {
    struct Trade {
        std::size_t leg = 0;
        double weight = 0.0;
    };
    std::vector<Trade> trades;

    std::size_t n_legs() const;
};

// Which lender's book an operation prices: A insures C's default, D insures
// B's.
enum class LenderSide { A, D };

// --- liquidity evaluation ---------------------------------------------------

// Pathwise draw of L_tau given the defaulted trade's mark magnitude and the
// path's reserved normal.
double liquidity_draw(const LiquiditySpec& liquidity, double abs_m, double z);

inline double lender_liquidity_share(const LiquiditySpec& liquidity, double draw) {
    return draw < liquidity.haircut ? draw : liquidity.haircut;
}

inline double excess_liquidity(const LiquiditySpec& liquidity, double draw) {
    return draw > liquidity.haircut ? draw - liquidity.haircut : 0.0;
}

// E[min(L, haircut)] for a mark distributed N(mean_m, disp^2).
double expected_lender_liquidity(const LiquiditySpec& liquidity, double mean_m,
                                 double disp);

// Loss-given-default payout the lender covers at the dir-party's default
// (exposure negative part plus capped novation cost), undiscounted.
double lender_payout_at_default(const ModelConfig& config, const LiquiditySpec& liquidity,
                                const ScenarioPath& path, Direction dir);

// --- reset premia -----------------------------------------------------------

// Per-step fair premium of the high-frequency quadri-partite structure: the
// t = 0 unconditional stream of
//   E[ 1_{t_k < tau < t_{k+1}} e^{-r tau} (1-R) ((M_tau)^- + L_tau) ]
// (discounting kept at finite step width; the step sums then telescope to the
// unilateral protection value exactly).
std::vector<EstimatorStats> highfreq_premium(const ModelConfig& config,
                                             const TimeGrid& grid,
                                             const SimSettings& settings, LenderSide side,
                                             const LiquiditySpec& liquidity);

// Windowed conditional CVA of the periodic structures,
//   CVA_{t0}(A,C) = E[ e^{-r(tau_C-t0)} 1_{tau_C<tau_B} 1_{tau_C<t1}
//                      (1-R_C) ((M_{tau_C}(C))^- + L_{tau_C}) | M_{t0} = m ],
// evaluated semi-analytically in the zero-correlation reference model. The
// reset premium is set equal to it. `m` is the insured party's mark at t0.
double periodic_window_cva(const ModelConfig& config, double t0, double t1, double m,
                           LenderSide side, const LiquiditySpec& liquidity);

// Expected discounted lender P&L per reset window (premium received minus
// protection paid); zero in the mean when premia are fair. premium_scale
// deliberately mis-sizes the premium for detection tests.
std::vector<EstimatorStats> lender_fairness(const ModelConfig& config,
                                            const TimeGrid& grid,
                                            const SimSettings& settings, PoolSide structure,
                                            const LiquiditySpec& liquidity,
                                            double premium_scale = 1.0);

// --- tranches ----------------------------------------------------------------

// Cumulative pool loss at t over one simulated member bundle.
double pool_loss(const PoolConfig& pool, std::span<const ScenarioPath> members, double t);

// X_{[L, L+N]}(t) = (min{pool loss, L+N} - L)^+ (Y for the tri-partite side).
double tranche_loss(const PoolConfig& pool, const TrancheSpec& tranche,
                    std::span<const ScenarioPath> members, double t);

struct TrancheSpreadResult {
    double spread = 0.0;            // 1/year
    EstimatorStats protection_leg;  // E[sum df (X_{i+1} - X_i)]
    EstimatorStats premium_leg;     // E[sum df dt (N - X_{i+1})]
};

// Fair CVA tranche spread over the pool's reset dates. Throws DegeneratePool
// when the premium leg estimate is <= 0.
TrancheSpreadResult tranche_spread(const PoolConfig& pool, const TrancheSpec& tranche,
                                   const SimSettings& settings);

struct StackReport {
    double max_abs_gap = 0.0;
    std::uint64_t n_paths = 0;
    bool contiguous = true;
};

// Pathwise telescoping check: a contiguous stack of tranches reproduces
// min(pool loss, total stack notional) exactly at every reset date.
StackReport tranche_stack_consistency(const PoolConfig& pool,
                                      std::span<const TrancheSpec> stack,
                                      const SimSettings& settings);

// --- netting (penta-partite demonstration) -----------------------------------

// Signed aggregate exposure of the set at sample index i, legs sharing the
// default clock of leg 0's counterparty.
double netting_exposure(const NettingSet& set, std::span<const ScenarioPath> legs,
                        std::size_t sample_index);

struct NettingValuation {
    EstimatorStats ucva;            // protection on C for the netted exposure
    EstimatorStats collateral_cost; // expected discounted collateral balance
    EstimatorStats carry;           // liquidity carry at default
};

NettingValuation netting_valuation(const ModelConfig& config, const TimeGrid& grid,
                                   const SimSettings& settings, const NettingSet& set,
                                   const LiquiditySpec& liquidity);

// --- finite-liquidity carry ---------------------------------------------------

// E[ e^{-r tau_C} 1_{tau_C<tau_B, tau_C<=T} (1-R_C) L_{tau_C} ] >= 0.
EstimatorStats repo_carry_cost(const ModelConfig& config, const SimSettings& settings,
                               const LiquiditySpec& liquidity);

// Zero-correlation quadrature for the same quantity.
double repo_carry_quadrature(const ModelConfig& config, const LiquiditySpec& liquidity);

// Protection payoff of the collateralized styles including the liquidity
// add-on; exposed for pathwise liquidity-monotonicity comparisons.
Payoff secured_protection_payoff(const ModelConfig& config, Direction dir,
                                 bool first_to_default, const LiquiditySpec& liquidity);

// Residual credit exposure above the lender's haircut: the novation losses a
// finite haircut routes back to the surviving party.
Payoff residual_liquidity_payoff(const ModelConfig& config, Direction dir,
                                 bool first_to_default, const LiquiditySpec& liquidity);

Payoff repo_carry_payoff(const ModelConfig& config, const LiquiditySpec& liquidity);

// fair_value with the novation add-on threaded through the secured styles'
// protection legs (the bipartite styles trade under the unprimed close-outs
// and ignore it).
ValuationResult fair_value(const ModelConfig& config, const TimeGrid& grid,
                           const SimSettings& settings, StructuringStyle style,
                           const LiquiditySpec& liquidity);

} // namespace ccr

#endif
