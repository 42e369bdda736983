#ifndef CCR_REPORT_HPP
#define CCR_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "ccr/margin.hpp"
#include "ccr/model.hpp"
#include "ccr/sim.hpp"

namespace ccr {

enum class RunMode { Price, Compare, Check, Tranche };
enum class ReportFormat { Csv, Json };

// One batch job: model, clock, simulation controls, what to price and where
// to put the rows.
struct RunSpec {
    RunMode mode = RunMode::Price;
    ModelConfig model;
    TimeGrid grid;
    SimSettings sim;
    std::vector<StructuringStyle> styles;
    std::vector<TrancheSpec> tranches;
    std::size_t pool_names = 1;
    PoolSide pool_side = PoolSide::Quadri;
    LiquiditySpec liquidity;
    std::vector<double> checkpoints;            // axiom-check mode
    std::vector<StructuringStyle> require_pass; // exit 3 if any of these fail
    std::string out_path = "report.csv";
    ReportFormat format = ReportFormat::Csv;
};

// Parses the JSON-shaped config file; throws ConfigParseError / DomainError
// with the offending field named.
RunSpec parse_run_spec(const std::string& json_text, RunMode mode);
RunSpec load_run_spec(const std::string& path, RunMode mode);

// Executes the job and writes the report. Returns the process exit code:
// 0 success, 2 validation error, 3 a required-pass axiom check failed.
int run(const RunSpec& spec);

// Rendered report text (what run() writes); exposed for byte-identity tests.
std::string render_report(const RunSpec& spec, int& exit_code);

// Shortest round-trip decimal representation; keeps golden files stable.
std::string format_double(double value);

} // namespace ccr

#endif
