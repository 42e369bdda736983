#ifndef CCR_AXIOMS_HPP
#define CCR_AXIOMS_HPP

#include <string>
#include <vector>

#include "ccr/margin.hpp"
#include "ccr/model.hpp"
#include "ccr/sim.hpp"
#include "ccr/structures.hpp"

namespace ccr {

// The four executable axiom families: valuation martingale until default,
// money conservation between the two books, close-out consistency at first
// default, and reset equilibrium of the collateralized styles.
enum class AxiomKind { Martingale, MoneyConservation, Closeout, ResetEquilibrium };

const char* to_string(AxiomKind kind);

struct AxiomVerdict {
    AxiomKind kind{};
    StructuringStyle style{};
    enum class Outcome { Pass, Fail, StatisticalPass } outcome = Outcome::Pass;
    double p_value = 1.0;      // meaningful for statistical verdicts
    double discrepancy = 0.0;  // measured violation, currency
    std::string detail;

    bool passed() const { return outcome != Outcome::Fail; }
};

const char* to_string(AxiomVerdict::Outcome outcome);

// Compares E[e^{-r (t ^ tau)} CVA_{t ^ tau}] (conditional marks on surviving
// paths, contractual settlement at first default) against CVA_0 at each
// checkpoint; statistical-pass iff all |z| < 3. The two post-FAS styles fail
// by construction with the close-out mismatch as discrepancy. Conditional
// marks are semi-analytic, so the statistical checks assume the
// zero-correlation reference model.
AxiomVerdict check_martingale(StructuringStyle style, const ModelConfig& config,
                              const TimeGrid& grid, const SimSettings& settings,
                              const std::vector<double>& checkpoints,
                              const LiquiditySpec& liquidity = {});

// Exact check: the role-swapped estimators must produce bit-equal outputs.
// UcvaOnly fails with the unpriced DVA as discrepancy.
AxiomVerdict check_money_conservation(StructuringStyle style, const ModelConfig& config,
                                      const TimeGrid& grid, const SimSettings& settings);

// Evaluates both sides of the close-out equation on every simulated
// first-default event; pass iff the largest residual is below
// 1e-10 * (1 + |M|) pointwise.
AxiomVerdict check_closeout(StructuringStyle style, CloseoutRule rule,
                            const ModelConfig& config, const TimeGrid& grid,
                            const SimSettings& settings);

// Per-window lender P&L within 3 standard errors of zero (styles 7-10);
// vacuous pass for the bipartite styles.
AxiomVerdict check_reset_equilibrium(StructuringStyle style, const ModelConfig& config,
                                     const TimeGrid& grid, const SimSettings& settings,
                                     const LiquiditySpec& liquidity = {});

struct VerdictMatrix {
    std::vector<AxiomVerdict> cells; // 10 styles x 4 axioms, row-major by style

    const AxiomVerdict& at(StructuringStyle style, AxiomKind kind) const;
};

// The full verdict matrix; every style x axiom pair gets a defined verdict.
// The liquidity spec turns the secured styles' checks into their
// novation-cost-adjusted variants.
VerdictMatrix verdict_matrix(const ModelConfig& config, const TimeGrid& grid,
                             const SimSettings& settings,
                             const std::vector<double>& checkpoints = {},
                             const LiquiditySpec& liquidity = {});

} // namespace ccr

#endif
