#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ccr/report.hpp"

using namespace ccr;

namespace {

std::string base_config_json(const std::string& extra = "") {
    return R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.02, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "m0": 0.0, "T": 5.0},
      "grid": {"steps": 10, "reset_periods": 5},
      "sim": {"paths": 4000, "seed": 9, "batch_size": 512},
      "styles": ["FtdCva"])" +
           extra + "\n}";
}

} // namespace

TEST_CASE("config parsing reports the offending field") {
    CHECK_THROWS_WITH_AS(parse_run_spec(R"({"grid": {}})", RunMode::Price),
                         "missing section: model", ConfigParseError);

    const std::string bad_r = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.02, "R_B": 0.5, "R_C": 1.5,
                "sigma": 0.1, "T": 5.0},
      "styles": ["FtdCva"]})";
    CHECK_THROWS_WITH_AS(parse_run_spec(bad_r, RunMode::Price), "R_C must be in [0,1]",
                         DomainError);

    CHECK_THROWS_AS(parse_run_spec("not json at all", RunMode::Price), ConfigParseError);

    const std::string no_styles = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.02, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "T": 5.0}})";
    CHECK_THROWS_AS(parse_run_spec(no_styles, RunMode::Price), ConfigParseError);
}

TEST_CASE("shortest round-trip formatting keeps golden files stable") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    const double v = 3.077854523666e-03;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("price mode emits one row per style and quantity with metadata") {
    RunSpec spec = parse_run_spec(base_config_json(), RunMode::Price);
    int code = -1;
    const std::string text = render_report(spec, code);
    CHECK(code == 0);

    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line == "style,quantity,estimate,std_error,n_paths,seed,oracle_value,z_vs_oracle");
    int rows = 0;
    bool saw_cva = false;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(line.find("FtdCva,") == 0);
        CHECK(line.find(",9,") != std::string::npos); // seed column
        if (line.find("FtdCva,cva,") == 0) {
            saw_cva = true;
            // zero-correlation run: oracle column must be filled
            CHECK(line.rfind(',') > line.find(",cva,"));
        }
    }
    CHECK(rows == 5);
    CHECK(saw_cva);
}

TEST_CASE("a style with no counterparty hazard prices to an exact zero row") {
    const std::string cfg = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.0, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "m0": 0.0, "T": 5.0},
      "grid": {"steps": 10, "reset_periods": 5},
      "sim": {"paths": 2000, "seed": 21},
      "styles": ["FtdCva"]})";
    RunSpec spec = parse_run_spec(cfg, RunMode::Price);
    int code = -1;
    const std::string text = render_report(spec, code);
    CHECK(code == 0);
    CHECK(text.find("FtdCva,cva,0,0,2000,21,0,0") != std::string::npos);
}

TEST_CASE("compare mode UCVA row sits within three standard errors of its oracle") {
    RunSpec spec = parse_run_spec(base_config_json(), RunMode::Compare);
    spec.sim.n_paths = 20000;
    spec.styles = {StructuringStyle::UcvaOnly};
    int code = -1;
    const std::string text = render_report(spec, code);
    std::istringstream is(text);
    std::string line;
    bool found = false;
    while (std::getline(is, line)) {
        if (line.rfind("UcvaOnly,cva,", 0) == 0) {
            const std::size_t z_pos = line.rfind(',');
            const double z = std::stod(line.substr(z_pos + 1));
            CHECK(std::abs(z) < 3.0);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("reports are byte-identical across worker counts") {
    RunSpec spec = parse_run_spec(base_config_json(), RunMode::Compare);
    spec.sim.n_paths = 2000;
    spec.sim.workers = 1;
    int code1 = -1, code8 = -1;
    const std::string one = render_report(spec, code1);
    spec.sim.workers = 8;
    const std::string eight = render_report(spec, code8);
    CHECK(one == eight);
    CHECK(code1 == 0);
    CHECK(code8 == 0);
}

TEST_CASE("json format carries the same rows") {
    RunSpec spec = parse_run_spec(base_config_json(), RunMode::Price);
    spec.format = ReportFormat::Json;
    int code = -1;
    const std::string text = render_report(spec, code);
    CHECK(text.find("\"style\": \"FtdCva\"") != std::string::npos);
    CHECK(text.find("\"oracle_value\"") != std::string::npos);
}

TEST_CASE("tranche mode prices the requested slices") {
    const std::string cfg = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.1, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "m0": 0.0, "T": 5.0},
      "grid": {"steps": 10, "reset_periods": 10},
      "sim": {"paths": 3000, "seed": 12},
      "pool": {"names": 2, "side": "quadri"},
      "tranches": [{"attachment": 0.0, "notional": 0.05},
                   {"attachment": 0.05, "notional": 0.05}]})";
    RunSpec spec = parse_run_spec(cfg, RunMode::Tranche);
    int code = -1;
    const std::string text = render_report(spec, code);
    CHECK(code == 0);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line.find("tranche,attachment,notional,spread") == 0);
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("check mode writes the 10x4 verdict matrix and honours require_pass") {
    const std::string cfg = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.02, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "m0": 0.0, "T": 5.0},
      "grid": {"steps": 10, "reset_periods": 5},
      "sim": {"paths": 2000, "seed": 3},
      "check": {"checkpoints": [1.0, 2.5], "require_pass": ["UcvaOnly"]}})";
    RunSpec spec = parse_run_spec(cfg, RunMode::Check);
    int code = -1;
    const std::string text = render_report(spec, code);
    CHECK(code == 3); // UcvaOnly fails money conservation by construction
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line.find("style,axiom,verdict") == 0);
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 40);
}

TEST_CASE("explicit grid times are honoured and validated") {
    const std::string cfg = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.02, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "m0": 0.0, "T": 5.0},
      "grid": {"times": [0.0, 0.5, 1.0, 2.0, 3.5, 5.0], "resets": [0.0, 1.0, 5.0]},
      "sim": {"paths": 500, "seed": 5},
      "styles": ["FtdCva"]})";
    RunSpec spec = parse_run_spec(cfg, RunMode::Price);
    CHECK(spec.grid.times.size() == 6);
    CHECK(spec.grid.resets.size() == 3);

    const std::string short_grid = R"({
      "model": {"r": 0.03, "lambda_B": 0.05, "lambda_C": 0.02, "R_B": 0.5, "R_C": 0.4,
                "sigma": 0.1, "m0": 0.0, "T": 5.0},
      "grid": {"times": [0.0, 1.0, 4.0]},
      "styles": ["FtdCva"]})";
    CHECK_THROWS_AS(parse_run_spec(short_grid, RunMode::Price), ConfigParseError);
}

TEST_CASE("run writes the report file and returns the exit code") {
    RunSpec spec = parse_run_spec(base_config_json(), RunMode::Price);
    spec.out_path = "test_report_out.csv";
    CHECK(run(spec) == 0);
    std::ifstream in(spec.out_path);
    CHECK(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header.find("style,quantity") == 0);
    in.close();
    std::remove(spec.out_path.c_str());
}
