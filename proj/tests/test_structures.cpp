#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccr/oracle.hpp"
#include "ccr/structures.hpp"

using namespace ccr;

namespace {

ModelConfig reference_config() {
    ModelConfig m;
    m.r = 0.03;
    m.lambda_B = 0.05;
    m.lambda_C = 0.02;
    m.R_B = 0.5;
    m.R_C = 0.4;
    m.sigma = 0.1;
    m.m0 = 0.0;
    m.T = 5.0;
    return validate(m);
}

ModelConfig symmetric_config() {
    ModelConfig m = reference_config();
    m.lambda_B = m.lambda_C = 0.03;
    m.R_B = m.R_C = 0.45;
    return validate(m);
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

const TimeGrid kGrid = TimeGrid::uniform(5.0, 10);

SimSettings quick(std::uint64_t n = 100000, std::uint64_t seed = 11) {
    SimSettings s;
    s.n_paths = n;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("close-out value arithmetic") {
    CloseoutInputs in;
    in.m_survivor = 10.0;
    in.recovery_defaulted = 0.4;
    CHECK(closeout_value(in, CloseoutRule::RiskFree) == 4.0);

    in.m_survivor = -3.0;
    in.udva_survivor = 2.0;
    CHECK(closeout_value(in, CloseoutRule::Replacement) == -1.0);

    in.m_survivor = 10.0;
    in.udva_survivor = 0.0;
    in.liquidity_L = 1.0;
    CHECK(closeout_value(in, CloseoutRule::RiskFreeWithLiquidity) == 3.0);
    // unprimed rules ignore the liquidity input
    CHECK(closeout_value(in, CloseoutRule::RiskFree) == 4.0);
}

TEST_CASE("conditional unilateral value: degenerate cases and the oracle knot") {
    ModelConfig m = reference_config();
    ModelConfig z = m;
    z.lambda_C = 0.0;
    CHECK(inner_udva(validate(z), 0.1, 1.0) == 0.0);
    CHECK(inner_udva(m, 0.1, m.T) == 0.0);
    // At t=0 and m=0 the conditional value is the unconditional UCVA.
    CHECK(close_rel(inner_udva(m, 0.0, 0.0), ucva_quadrature(m, Direction::BtoC), 1e-10));
    // Deep in-the-money for the counterparty: no expected loss left.
    CHECK(inner_udva(m, 5.0, 1.0) < 1e-12);
    CHECK(inner_udva(m, -5.0, 1.0) > 0.0);
}

TEST_CASE("UCVA estimator hits its trivial zeros exactly") {
    ModelConfig m = reference_config();
    SimSettings s = quick(20000);

    ModelConfig full_recovery = m;
    full_recovery.R_C = 1.0;
    CHECK(ucva(validate(full_recovery), kGrid, s).mean == 0.0);

    ModelConfig no_hazard = m;
    no_hazard.lambda_C = 0.0;
    EstimatorStats est = ucva(validate(no_hazard), kGrid, s);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("UCVA matches the quadrature oracle within 3 standard errors") {
    ModelConfig m = reference_config();
    SimSettings s = quick(200000, 404);
    EstimatorStats est = ucva(m, kGrid, s);
    const double oracle = ucva_quadrature(m, Direction::BtoC);
    CHECK(std::abs(est.mean - oracle) < 3.0 * est.std_error);
    CHECK(est.std_error < 0.02 * oracle);

    EstimatorStats dva_est = udva(m, kGrid, s);
    const double dva_oracle = ucva_quadrature(m, Direction::CtoB);
    CHECK(std::abs(dva_est.mean - dva_oracle) < 3.0 * dva_est.std_error);
}

TEST_CASE("UDVA is the bit-identical role-swapped estimator") {
    ModelConfig sym = symmetric_config();
    SimSettings s = quick(50000, 7);
    EstimatorStats u = ucva(sym, kGrid, s);
    EstimatorStats d = udva(sym, kGrid, s);
    CHECK(u.mean == d.mean);
    CHECK(u.std_error == d.std_error);

    // Asymmetric configs: UDVA(B,C) == UCVA(C,B) by construction.
    ModelConfig m = reference_config();
    EstimatorStats a = udva(m, kGrid, s);
    EstimatorStats b = ucva(m, kGrid, s, Direction::CtoB);
    CHECK(a.mean == b.mean);
}

TEST_CASE("BCVA vanishes for symmetric books and collapses when B is riskless") {
    ModelConfig sym = symmetric_config();
    SimSettings s = quick(50000, 3);
    EstimatorStats b = bcva(sym, kGrid, s);
    CHECK(std::abs(b.mean) < 1e-12);
    CHECK(b.std_error < 1e-12);

    ModelConfig no_b = reference_config();
    no_b.lambda_B = 0.0;
    no_b = validate(no_b);
    EstimatorStats bc = bcva(no_b, kGrid, s);
    EstimatorStats uc = ucva(no_b, kGrid, s);
    CHECK(bc.mean == uc.mean);

    ModelConfig m = reference_config();
    EstimatorStats ref = bcva(m, kGrid, quick(200000, 404));
    const double oracle =
        ucva_quadrature(m, Direction::BtoC) - ucva_quadrature(m, Direction::CtoB);
    CHECK(std::abs(ref.mean - oracle) < 3.0 * ref.std_error);
}

TEST_CASE("FTDCVA: indicator limits and oracle agreement") {
    ModelConfig m = reference_config();
    SimSettings s = quick(200000, 21);

    ModelConfig tiny_b = m;
    tiny_b.lambda_B = 1e-9;
    tiny_b = validate(tiny_b);
    EstimatorStats f = ftdcva(tiny_b, kGrid, s);
    EstimatorStats u = ucva(tiny_b, kGrid, s);
    CHECK(std::abs(f.mean - u.mean) / u.mean < 1e-6);

    ModelConfig no_c = m;
    no_c.lambda_C = 0.0;
    CHECK(ftdcva(validate(no_c), kGrid, s).mean == 0.0);

    EstimatorStats est = ftdcva(m, kGrid, s);
    const double oracle = ftdcva_quadrature(m, Direction::BtoC);
    CHECK(std::abs(est.mean - oracle) < 3.0 * est.std_error);
}

TEST_CASE("portable correction is nonnegative pathwise and oracle-consistent") {
    ModelConfig m = reference_config();
    SimSettings s = quick(100000, 31);

    ModelConfig no_b = m;
    no_b.lambda_B = 0.0;
    CHECK(pcva_gamma(validate(no_b), kGrid, s, CloseoutRule::RiskFree).mean == 0.0);
    ModelConfig no_c = m;
    no_c.lambda_C = 0.0;
    CHECK(pcva_gamma(validate(no_c), kGrid, s, CloseoutRule::RiskFree).mean == 0.0);

    for (CloseoutRule rule : {CloseoutRule::RiskFree, CloseoutRule::Replacement}) {
        EstimatorStats g = pcva_gamma(m, kGrid, s, rule, Direction::CtoB);
        const double oracle = gamma_quadrature(m, rule, Direction::CtoB);
        CHECK(std::abs(g.mean - oracle) < 3.0 * g.std_error);
        CHECK(g.mean > 0.0);
    }
}

TEST_CASE("PCVA >= UCVA pathwise under common random numbers") {
    ModelConfig m = reference_config();
    m.rho_BC = 0.5; // ordering must hold with wrong-way correlation too
    m = validate(m);
    SimSettings s = quick(50000, 17);
    for (CloseoutRule rule : {CloseoutRule::RiskFree, CloseoutRule::Replacement}) {
        Payoff u = ucva_payoff(m, Direction::BtoC);
        Payoff g = pcva_gamma_payoff(m, rule, Direction::BtoC);
        Payoff p = [u, g](const ScenarioPath& path) { return u(path) + g(path); };
        McResult r = mc_estimate_crn({u, p}, m, kGrid, s);
        CHECK(r.violations(0, 1) == 0);
    }
}

TEST_CASE("PCVA collapses to UCVA when B is effectively riskless") {
    ModelConfig m = reference_config();
    m.lambda_B = 1e-9;
    m = validate(m);
    SimSettings s = quick(100000, 5);
    EstimatorStats p = pcva(m, kGrid, s, CloseoutRule::RiskFree);
    EstimatorStats u = ucva(m, kGrid, s);
    CHECK(std::abs(p.mean - u.mean) / u.mean < 1e-6);

    ModelConfig zero_b = reference_config();
    zero_b.lambda_B = 0.0;
    zero_b = validate(zero_b);
    CHECK(pcva(zero_b, kGrid, s, CloseoutRule::RiskFree).mean ==
          ucva(zero_b, kGrid, s).mean);
}

TEST_CASE("close-out mismatch: zero for consistent styles, Gamma for heritage") {
    ModelConfig m = reference_config();
    SimSettings s = quick(100000, 23);

    CHECK(closeout_mismatch(m, kGrid, s, StructuringStyle::FtdCva).mean == 0.0);
    CHECK(closeout_mismatch(m, kGrid, s, StructuringStyle::PortableCvaC1).mean == 0.0);

    EstimatorStats rf =
        closeout_mismatch(m, kGrid, s, StructuringStyle::BcvaRiskFreeCloseout);
    CHECK(std::abs(rf.mean - gamma_quadrature(m, CloseoutRule::RiskFree, Direction::CtoB)) <
          3.0 * rf.std_error);

    EstimatorStats repl =
        closeout_mismatch(m, kGrid, s, StructuringStyle::BcvaReplacementCloseout);
    CHECK(std::abs(repl.mean -
                   gamma_quadrature(m, CloseoutRule::Replacement, Direction::CtoB)) <
          3.0 * repl.std_error);
    CHECK(repl.mean < rf.mean);
}

TEST_CASE("fair value: money conservation exact where the style provides it") {
    ModelConfig m = reference_config();
    SimSettings s = quick(40000, 13);

    ValuationResult ucva_only = fair_value(m, kGrid, s, StructuringStyle::UcvaOnly);
    CHECK(!ucva_only.money_conserving);
    CHECK(ucva_only.conservation_gap < 0.0);
    CHECK(ucva_only.dva.mean == 0.0);

    ModelConfig sym = symmetric_config();
    ValuationResult sym_res = fair_value(sym, kGrid, s, StructuringStyle::UcvaOnly);
    // v_B + v_C = -2 UCVA for the symmetric uncompensated style.
    CHECK(sym_res.conservation_gap ==
          doctest::Approx(-2.0 * sym_res.cva.mean).epsilon(1e-12));

    for (StructuringStyle style :
         {StructuringStyle::BcvaRiskFreeCloseout, StructuringStyle::FtdCva,
          StructuringStyle::PortableCvaC1, StructuringStyle::PortableCvaC2,
          StructuringStyle::QuadripartiteHighFreq, StructuringStyle::TripartitePeriodic,
          StructuringStyle::QuadripartitePeriodic, StructuringStyle::PentapartiteCcp}) {
        ValuationResult vr = fair_value(m, kGrid, s, style);
        CHECK(vr.money_conserving);
        CHECK(std::abs(vr.conservation_gap) < 1e-12);
    }
}

TEST_CASE("fair value components match the oracle for the portable style") {
    ModelConfig m = reference_config();
    SimSettings s = quick(200000, 77);
    ValuationResult vr = fair_value(m, kGrid, s, StructuringStyle::PortableCvaC2);
    const double cva_oracle =
        ucva_quadrature(m, Direction::BtoC) +
        gamma_quadrature(m, CloseoutRule::Replacement, Direction::BtoC);
    const double dva_oracle =
        ucva_quadrature(m, Direction::CtoB) +
        gamma_quadrature(m, CloseoutRule::Replacement, Direction::CtoB);
    CHECK(std::abs(vr.cva.mean - cva_oracle) < 3.0 * vr.cva.std_error);
    CHECK(std::abs(vr.dva.mean - dva_oracle) < 3.0 * vr.dva.std_error);
    const double vb_oracle = m.m0 - cva_oracle + dva_oracle;
    CHECK(std::abs(vr.v_B.mean - vb_oracle) < 3.0 * vr.v_B.std_error);
}

TEST_CASE("custom inner valuations plug into the Gamma payoff") {
    ModelConfig m = reference_config();
    SimSettings s = quick(20000, 41);
    Payoff built_in = pcva_gamma_payoff(m, CloseoutRule::RiskFree, Direction::CtoB);
    Payoff plugged = pcva_gamma_payoff(
        m, CloseoutRule::RiskFree, Direction::CtoB,
        [](const ModelConfig& c, Direction d, double mark, double t) {
            return conditional_ucva(c, d, mark, t);
        });
    McResult r = mc_estimate_crn({built_in, plugged}, m, kGrid, s);
    CHECK(r.stats[0].mean == r.stats[1].mean);

    // A deliberately doubled inner valuation must move the estimate.
    Payoff doubled = pcva_gamma_payoff(
        m, CloseoutRule::RiskFree, Direction::CtoB,
        [](const ModelConfig& c, Direction d, double mark, double t) {
            return 2.0 * conditional_ucva(c, d, mark, t);
        });
    EstimatorStats twice = mc_estimate(doubled, m, kGrid, s);
    CHECK(twice.mean == doctest::Approx(2.0 * r.stats[0].mean).epsilon(1e-12));
}

TEST_CASE("Gamma stays under the product-of-marginals ballpark bound") {
    // Loose sanity bound at the reference configuration: the correction is
    // dominated by UDVA times the default probability (with headroom).
    ModelConfig m = reference_config();
    const double gamma = gamma_quadrature(m, CloseoutRule::RiskFree, Direction::CtoB);
    const double udva0 = ucva_quadrature(m, Direction::CtoB);
    const double p_default = 1.0 - std::exp(-m.lambda_B * m.T);
    CHECK(gamma <= 1.25 * udva0 * p_default);
    CHECK(gamma > 0.0);
}

TEST_CASE("UDVA vanishes when the assessed party cannot default") {
    ModelConfig m = reference_config();
    m.lambda_B = 0.0;
    m = validate(m);
    SimSettings s = quick(20000, 6);
    EstimatorStats d = udva(m, kGrid, s); // prices B's default
    CHECK(d.mean == 0.0);
    CHECK(d.std_error == 0.0);
}

TEST_CASE("amortizing exposure: estimator and quadrature stay in lockstep") {
    ModelConfig m = reference_config();
    m.amortizing = true;
    m.m0 = 0.5;
    m = validate(m);
    SimSettings s = quick(200000, 55);
    EstimatorStats est = ucva(m, kGrid, s);
    const double oracle = ucva_quadrature(m, Direction::BtoC);
    CHECK(oracle > 0.0);
    CHECK(std::abs(est.mean - oracle) < 3.0 * est.std_error);
    // Amortization can only shrink the protection value.
    ModelConfig flat = reference_config();
    flat.m0 = 0.5;
    CHECK(oracle < ucva_quadrature(validate(flat), Direction::BtoC));
}

TEST_CASE("UCVA estimate is bit-identical when the B-side hazard moves") {
    ModelConfig m1 = reference_config();
    ModelConfig m2 = reference_config();
    m2.lambda_B = 0.4;
    m2 = validate(m2);
    SimSettings s = quick(30000, 2);
    EstimatorStats a = ucva(m1, kGrid, s);
    EstimatorStats b = ucva(m2, kGrid, s);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}
