#ifndef CCR_STRUCTURES_HPP
#define CCR_STRUCTURES_HPP

#include "ccr/model.hpp"
#include "ccr/sim.hpp"

namespace ccr {

// Close-out conventions at first default. The liquidity-adjusted variants
// subtract the novation price correction L from the survivor's claim.
enum class CloseoutRule {
    RiskFree,
    Replacement,
    RiskFreeWithLiquidity,
    ReplacementWithLiquidity,
};

const char* to_string(CloseoutRule rule);

// Arguments of a close-out evaluation, from the survivor's viewpoint.
struct CloseoutInputs {
    double m_survivor = 0.0;          // mark to the survivor at default
    double udva_survivor = 0.0;       // survivor's unilateral DVA at default
    double recovery_defaulted = 0.0;  // recovery rate of the defaulted party
    double liquidity_L = 0.0;         // novation price correction, >= 0
};

// Survivor's claim under the given rule:
//   risk-free:   -(m)^- + R (m)^+ [- L]
//   replacement: -(m+udva)^- + R (m+udva)^+ [- L]
double closeout_value(const CloseoutInputs& inputs, CloseoutRule rule);

// Point estimates with Monte Carlo errors for one structuring style.
struct ValuationResult {
    StructuringStyle style{};
    EstimatorStats cva;   // CVA booked by B against C (style's definition)
    EstimatorStats dva;   // DVA booked by B (style's definition)
    EstimatorStats gamma; // portable-CVA correction, 0 for other styles
    EstimatorStats v_B;
    EstimatorStats v_C;
    bool money_conserving = true;
    double conservation_gap = 0.0; // v_B.mean + v_C.mean
};

// --- conditional (semi-analytic) valuations in the reference model ---------

// Unilateral CVA seen at time t conditional on the assessed party's mark.
// For direction BtoC this is UCVA_t(B,C) = UDVA_t(C,B) given M_t(C) = m:
//   (1-R_C) * Int_0^{T-t} lambda_C e^{-(lambda_C+r)u}
//             E[(M_{t+u}(C))^- | M_t(C)=m] du,
// with the Bachelier positive-part formula supplying the inner expectation.
// Exact under zero market/credit correlation. Throws QuadratureFailure if the
// adaptive refinement cannot reach its tolerance.
double conditional_ucva(const ModelConfig& config, Direction dir, double m, double t);

// Spec form of the above with the counterparty-C direction fixed.
inline double inner_udva(const ModelConfig& config, double m_C, double t) {
    return conditional_ucva(config, Direction::BtoC, m_C, t);
}

// Conditional first-to-default CVA (both parties alive at t, mark of the
// assessed party = m); zero-correlation reference model.
double conditional_ftdcva(const ModelConfig& config, Direction dir, double m, double t);

// Conditional portable-CVA correction Gamma_t given the assessed party's
// mark; 2-D quadrature, zero-correlation reference model.
double conditional_gamma(const ModelConfig& config, CloseoutRule rule, Direction dir,
                         double m, double t);

// --- pathwise payoffs (exposed for common-random-number composition) -------

// Which side's close-out inconsistency to price.
enum class MismatchSide { SurvivorC, SurvivorB, Both };

Payoff ucva_payoff(const ModelConfig& config, Direction dir);
Payoff ftdcva_payoff(const ModelConfig& config, Direction dir);
Payoff pcva_gamma_payoff(const ModelConfig& config, CloseoutRule rule, Direction dir);

// Valuation of the survivor's remaining unilateral leg at a default event:
// (config, direction of the leg, survivor's mark, event time) -> value.
// conditional_ucva is the semi-analytic reference-model route; an inner
// Monte Carlo (or any other model's conditional valuation) can be plugged in
// for non-reference exposure dynamics.
using InnerValuation = std::function<double(const ModelConfig&, Direction, double, double)>;

Payoff pcva_gamma_payoff(const ModelConfig& config, CloseoutRule rule, Direction dir,
                         InnerValuation inner);

// --- t = 0 estimators -------------------------------------------------------

// Unilateral CVA, direction BtoC = UCVA(B,C) (B pricing C's default).
EstimatorStats ucva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, Direction dir = Direction::BtoC);

// UDVA(B,C) = UCVA(C,B): identical estimator with roles swapped, so money
// conservation holds bit-exactly by construction.
EstimatorStats udva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, Direction dir = Direction::BtoC);

// BCVA = UCVA - UDVA on common random numbers.
EstimatorStats bcva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, Direction dir = Direction::BtoC);

EstimatorStats ftdcva(const ModelConfig& config, const TimeGrid& grid,
                      const SimSettings& settings, Direction dir = Direction::BtoC);

// Portable-CVA correction Gamma; integrand nonnegative pathwise under both
// close-out rules.
EstimatorStats pcva_gamma(const ModelConfig& config, const TimeGrid& grid,
                          const SimSettings& settings, CloseoutRule rule,
                          Direction dir = Direction::CtoB);

// PCVA = UCVA + Gamma on common random numbers.
EstimatorStats pcva(const ModelConfig& config, const TimeGrid& grid,
                    const SimSettings& settings, CloseoutRule rule,
                    Direction dir = Direction::BtoC);

// Expected discounted close-out inconsistency at first default for the
// heritage styles (zero for the consistent ones). SurvivorC prices the
// mismatch on C's books when B defaults first.
EstimatorStats closeout_mismatch(const ModelConfig& config, const TimeGrid& grid,
                                 const SimSettings& settings, StructuringStyle style,
                                 MismatchSide side = MismatchSide::SurvivorC);

// Assembles V(B) = m0 - CVA + DVA and the mirror using the style's CVA/DVA
// definitions, sharing estimators so that money conservation is exact where
// the style provides it. (margin.hpp adds an overload threading the
// liquidity add-on through the secured styles' protection legs.)
ValuationResult fair_value(const ModelConfig& config, const TimeGrid& grid,
                           const SimSettings& settings, StructuringStyle style);

// Close-out rule a style is contracted under.
CloseoutRule style_closeout_rule(StructuringStyle style);

} // namespace ccr

#endif
