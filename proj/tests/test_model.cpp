#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccr/model.hpp"
#include "ccr/sim.hpp"

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
    return m;
}

} // namespace

TEST_CASE("validate accepts the identity-correlation reference parameters") {
    ModelConfig m = reference_config();
    m.lambda_B = 0.02;
    m.lambda_C = 0.02;
    m.R_B = 0.4;
    m.R_C = 0.4;
    ModelConfig v = validate(m);
    CHECK(v.validated);
    CHECK(v.chol[0] == 1.0);
    CHECK(v.chol[2] == 1.0);
    CHECK(v.chol[5] == 1.0);
}

TEST_CASE("validate rejects a non-PSD correlation matrix") {
    ModelConfig m = reference_config();
    m.rho_BC = 0.99;
    m.rho_MB = 0.99;
    m.rho_MC = -0.99;
    CHECK_THROWS_AS(validate(m), NonPsdCorrelation);
}

TEST_CASE("validate rejects out-of-range parameters") {
    ModelConfig m = reference_config();
    m.R_C = 1.2;
    CHECK_THROWS_AS(validate(m), DomainError);

    m = reference_config();
    m.lambda_B = -0.1;
    CHECK_THROWS_AS(validate(m), DomainError);

    m = reference_config();
    m.T = 0.0;
    CHECK_THROWS_AS(validate(m), DomainError);
}

TEST_CASE("validate is idempotent") {
    ModelConfig m = reference_config();
    m.rho_BC = 0.3;
    m.rho_MB = -0.2;
    m.rho_MC = 0.1;
    ModelConfig v1 = validate(m);
    ModelConfig v2 = validate(v1);
    CHECK(v1.chol == v2.chol);
    CHECK(v1.m0 == v2.m0);
    CHECK(v1.lambda_B == v2.lambda_B);
}

TEST_CASE("a singular but PSD correlation matrix is accepted") {
    ModelConfig m = reference_config();
    m.rho_MC = 0.5;
    m.rho_MB = 0.5;
    m.rho_BC = -0.5;
    CHECK_NOTHROW(validate(m));
}

TEST_CASE("swapped exchanges the roles and flips the initial mark") {
    ModelConfig m = reference_config();
    m.m0 = 2.0;
    m.rho_MB = 0.3;
    m.rho_MC = -0.1;
    ModelConfig s = swapped(validate(m));
    CHECK(s.lambda_B == m.lambda_C);
    CHECK(s.lambda_C == m.lambda_B);
    CHECK(s.R_B == m.R_C);
    CHECK(s.rho_MB == -0.1);
    CHECK(s.rho_MC == 0.3);
    CHECK(s.m0 == -2.0);
    CHECK(s.rho_BC == m.rho_BC);
    // Involution up to the sign of zero.
    ModelConfig ss = swapped(s);
    CHECK(ss.lambda_B == m.lambda_B);
    CHECK(ss.m0 == 2.0);
}

TEST_CASE("uniform grid carries resets as exact grid times") {
    TimeGrid g = TimeGrid::uniform(5.0, 20, 10);
    CHECK(g.times.size() == 21);
    CHECK(g.resets.size() == 11);
    CHECK(g.times.front() == 0.0);
    CHECK(g.times.back() == 5.0);
    for (double r : g.resets) {
        bool found = false;
        for (double t : g.times) found = found || t == r;
        CHECK(found);
    }
    CHECK_THROWS_AS(TimeGrid::uniform(5.0, 10, 3), DomainError); // 3 does not divide 10
}

TEST_CASE("grid validation rejects broken clocks") {
    TimeGrid g;
    g.times = {0.0, 1.0, 1.0, 2.0};
    g.resets = {0.0, 2.0};
    CHECK_THROWS_AS(validate(g), DomainError);

    g.times = {0.1, 1.0, 2.0};
    g.resets = {0.1, 2.0};
    CHECK_THROWS_AS(validate(g), DomainError);

    g.times = {0.0, 1.0, 2.0};
    g.resets = {0.0, 1.5, 2.0}; // 1.5 is not a grid time
    CHECK_THROWS_AS(validate(g), DomainError);
}

TEST_CASE("exposure sign symmetry holds at every sample point") {
    ModelConfig m = validate(reference_config());
    TimeGrid g = TimeGrid::uniform(5.0, 10);
    SimSettings s;
    s.seed = 7;
    for (std::uint64_t p = 0; p < 200; ++p) {
        ScenarioPath path = generate_path(m, g, p, s);
        for (std::size_t i = 0; i < path.times.size(); ++i) {
            CHECK(path.m_B(i) + path.m_C(i) == 0.0);
        }
    }
}

TEST_CASE("path index lookup is exact-match only") {
    ModelConfig m = validate(reference_config());
    TimeGrid g = TimeGrid::uniform(5.0, 5);
    SimSettings s;
    ScenarioPath path = generate_path(m, g, 0, s);
    CHECK(path.index_of(0.0) == 0);
    CHECK(path.times[path.index_of(1.0)] == 1.0);
    CHECK_THROWS_AS(path.index_of(0.123456), DomainError);
}
