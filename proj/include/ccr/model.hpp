#ifndef CCR_MODEL_HPP
#define CCR_MODEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ccr/errors.hpp"

namespace ccr {

// Distinguished "never defaults" time; compares greater than any finite time.
inline constexpr double kNever = std::numeric_limits<double>::infinity();

// The ten contractual designs the engine prices. Each maps to exactly one
// pricing routine.
enum class StructuringStyle {
    UcvaOnly,
    BcvaRiskFreeCloseout,
    BcvaReplacementCloseout,
    FtdCva,
    PortableCvaC1,
    PortableCvaC2,
    QuadripartiteHighFreq,
    TripartitePeriodic,
    QuadripartitePeriodic,
    PentapartiteCcp,
};

inline constexpr std::array<StructuringStyle, 10> kAllStyles = {
    StructuringStyle::UcvaOnly,
    StructuringStyle::BcvaRiskFreeCloseout,
    StructuringStyle::BcvaReplacementCloseout,
    StructuringStyle::FtdCva,
    StructuringStyle::PortableCvaC1,
    StructuringStyle::PortableCvaC2,
    StructuringStyle::QuadripartiteHighFreq,
    StructuringStyle::TripartitePeriodic,
    StructuringStyle::QuadripartitePeriodic,
    StructuringStyle::PentapartiteCcp,
};

const char* to_string(StructuringStyle s);
StructuringStyle style_from_string(const std::string& name);

// Valuation direction: which party assesses the other's default.
// BtoC = party B pricing protection on C's default (CVA(B,C)).
enum class Direction { BtoC, CtoB };

inline Direction flipped(Direction d) {
    return d == Direction::BtoC ? Direction::CtoB : Direction::BtoC;
}

// Market and credit parameters of the reference model.
//
// Exposure follows an arithmetic Brownian mark-to-market
//   M_t(B) = a(t) * (m0 + sigma * W_t),   a(t) = 1 or (T-t)/T when amortizing,
// and default times come from exponential triggers fed by a Gaussian copula
// over (exposure terminal driver, trigger_C, trigger_B).
struct ModelConfig {
    double r = 0.0;        // risk-free short rate, 1/year
    double lambda_B = 0.0; // hazard of B, 1/year
    double lambda_C = 0.0; // hazard of C, 1/year
    double R_B = 0.0;      // recovery on B default, in [0,1]
    double R_C = 0.0;      // recovery on C default, in [0,1]
    double sigma = 0.0;    // exposure volatility, currency/sqrt(year)
    double m0 = 0.0;       // initial mark-to-market to B, currency
    double T = 0.0;        // final maturity, years
    double rho_BC = 0.0;   // correlation of default triggers
    double rho_MB = 0.0;   // exposure driver vs trigger_B (wrong-way risk)
    double rho_MC = 0.0;   // exposure driver vs trigger_C (wrong-way risk)
    bool amortizing = false;

    // Cached lower-triangular Cholesky factor of the correlation matrix in
    // driver order (exposure, trigger_C, trigger_B). Populated by validate();
    // the ordering keeps the tau_C substream independent of anything B-side.
    std::array<double, 6> chol = {1, 0, 1, 0, 0, 1};
    bool validated = false;

    // Amortization factor a(t).
    double a(double t) const {
        if (!amortizing) return 1.0;
        double f = (T - t) / T;
        return f > 0.0 ? f : 0.0;
    }

    double discount(double t) const { return std::exp(-r * t); }

    double lgd_B() const { return 1.0 - R_B; }
    double lgd_C() const { return 1.0 - R_C; }

    double hazard(Direction d) const { return d == Direction::BtoC ? lambda_C : lambda_B; }
    double recovery(Direction d) const { return d == Direction::BtoC ? R_C : R_B; }
    double lgd(Direction d) const { return 1.0 - recovery(d); }
};

// Validates parameters, factorizes the correlation matrix and caches the
// factor. Throws DomainError / NonPsdCorrelation. Idempotent.
ModelConfig validate(ModelConfig config);

// The same market with the roles of B and C exchanged: hazards, recoveries
// and trigger correlations swap, the initial mark flips sign. Every
// CtoB-direction estimator is the BtoC estimator of the swapped config, so
// role-swapped quantities come from literally the same code path (and are
// bit-identical for symmetric parameters).
ModelConfig swapped(const ModelConfig& config);

// Simulation clock: strictly increasing times 0 = t_0 < ... < t_n = T plus a
// subsequence of reset dates including 0 and T.
struct TimeGrid {
    std::vector<double> times;
    std::vector<double> resets;

    static TimeGrid uniform(double T, int n_steps, int n_reset_periods = 1);

    std::size_t n_steps() const { return times.size() - 1; }
    double maturity() const { return times.back(); }
};

// Throws DomainError when monotonicity / containment invariants fail.
TimeGrid validate(TimeGrid grid);

// One simulated world: default times, the exposure M_t(B) sampled at the
// union of grid times and in-horizon default times, and discounting.
// M_t(C) = -M_t(B) is not stored; sign-flip on access.
struct ScenarioPath {
    double tau_B = kNever;
    double tau_C = kNever;
    std::vector<double> times;  // sorted sample times, first 0, last T
    std::vector<double> m;      // M_t(B) at each sample time
    std::ptrdiff_t idx_tau_B = -1; // index of tau_B in times, -1 if not sampled
    std::ptrdiff_t idx_tau_C = -1;
    double rate = 0.0;
    // Standard normals reserved for lognormal novation-cost draws at default.
    double z_liq_B = 0.0;
    double z_liq_C = 0.0;
    int tie_redraws = 0;

    double discount(double t) const { return std::exp(-rate * t); }

    double m_B(std::size_t i) const { return m[i]; }
    double m_C(std::size_t i) const { return -m[i]; }

    // M at a default time; only valid when the corresponding index is set.
    double m_B_at_tau_B() const { return m[static_cast<std::size_t>(idx_tau_B)]; }
    double m_B_at_tau_C() const { return m[static_cast<std::size_t>(idx_tau_C)]; }

    // Exact-match lookup of a grid time (binary search).
    std::size_t index_of(double t) const;

    double first_default() const { return tau_B < tau_C ? tau_B : tau_C; }
    bool b_defaults_first() const { return tau_B < tau_C; }
};

inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double neg(double x) { return x < 0.0 ? -x : 0.0; }

} // namespace ccr

#endif
