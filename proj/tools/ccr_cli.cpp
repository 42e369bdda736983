// Batch front door: price/compare/check/tranche jobs from a JSON config,
// machine-readable CSV or JSON reports.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "ccr/errors.hpp"
#include "ccr/report.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t paths = 0;
    bool paths_set = false;
    int workers = -1;
};

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", ov.out_path, "output report path (overrides config)");
    cmd->add_option("--format", ov.format, "csv or json (overrides config)");
    cmd->add_option("--seed", ov.seed, "seed override")->each([&ov](const std::string&) {
        ov.seed_set = true;
    });
    cmd->add_option("--paths", ov.paths, "path-count override")
        ->each([&ov](const std::string&) { ov.paths_set = true; });
    cmd->add_option("--workers", ov.workers, "worker threads (0 = hardware)");
}

int run_mode(ccr::RunMode mode, const Overrides& ov) {
    ccr::RunSpec spec = ccr::load_run_spec(ov.config_path, mode);
    if (!ov.out_path.empty()) spec.out_path = ov.out_path;
    if (!ov.format.empty()) {
        if (ov.format == "csv") {
            spec.format = ccr::ReportFormat::Csv;
        } else if (ov.format == "json") {
            spec.format = ccr::ReportFormat::Json;
        } else {
            throw ccr::ConfigParseError("--format must be csv or json");
        }
    }
    if (ov.seed_set) spec.sim.seed = ov.seed;
    if (ov.paths_set) spec.sim.n_paths = ov.paths;
    if (ov.workers >= 0) spec.sim.workers = ov.workers;
    return ccr::run(spec);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterparty credit risk structuring engine"};
    app.require_subcommand(1);

    Overrides ov;
    CLI::App* price = app.add_subcommand("price", "price the requested styles");
    CLI::App* compare = app.add_subcommand("compare", "price all ten styles side by side");
    CLI::App* check = app.add_subcommand("check", "run the style x axiom verdict matrix");
    CLI::App* tranche = app.add_subcommand("tranche", "margin-lending tranche spreads");
    for (CLI::App* cmd : {price, compare, check, tranche}) add_common(cmd, ov);

    CLI11_PARSE(app, argc, argv);

    ccr::RunMode mode = ccr::RunMode::Price;
    if (compare->parsed()) mode = ccr::RunMode::Compare;
    if (check->parsed()) mode = ccr::RunMode::Check;
    if (tranche->parsed()) mode = ccr::RunMode::Tranche;

    try {
        return run_mode(mode, ov);
    } catch (const ccr::ConfigParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ccr::DomainError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const ccr::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
