#ifndef CCR_SIM_HPP
#define CCR_SIM_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "ccr/model.hpp"

namespace ccr {

struct SimSettings {
    std::uint64_t n_paths = 100000;
    std::uint64_t seed = 12345;
    std::uint64_t batch_size = 8192;
    bool antithetic = false;
    // Worker threads; 0 means hardware concurrency. Results are bit-identical
    // for any worker count (fixed-partition pairwise summation).
    int workers = 0;
};

struct EstimatorStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

// Generates one scenario under the reference model.
//
// Default times come from exponential triggers fed by the Gaussian copula in
// driver order (exposure, trigger_C, trigger_B); the exposure Brownian is
// sampled exactly on the grid via terminal-conditioned increments, and
// in-horizon default times are inserted with bridge-exact conditional draws
// against their enclosing grid points. Every variate is keyed by
// (seed, stream, path_index, dimension), so a path depends only on its
// coordinates. tau_B == tau_C at machine precision triggers a redraw of the
// trigger_B substream (count recorded on the path).
void generate_path(const ModelConfig& config, const TimeGrid& grid,
                   std::uint64_t path_index, std::uint64_t seed, std::uint64_t stream,
                   bool antithetic_negate, ScenarioPath& out);

// Variant with a separate exposure substream: default triggers come from
// `stream` while the Brownian exposure (terminal driver, bridge fills,
// insertions) comes from `exposure_stream`. Used by netting sets whose trades
// share one counterparty clock but carry distinct exposure processes.
void generate_path(const ModelConfig& config, const TimeGrid& grid,
                   std::uint64_t path_index, std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t exposure_stream, bool antithetic_negate,
                   ScenarioPath& out);

ScenarioPath generate_path(const ModelConfig& config, const TimeGrid& grid,
                           std::uint64_t path_index, const SimSettings& settings,
                           std::uint64_t stream = 0);

// Per-thread scratch space handed to evaluation callbacks.
struct Workspace {
    ScenarioPath path;
    std::vector<ScenarioPath> members; // for pool evaluations
    std::uint64_t seed = 0;
    bool antithetic_negate = false;
    std::uint64_t path_index = 0;
};

struct McResult {
    std::vector<EstimatorStats> stats;
    // Row-major K x K pathwise comparison counts: greater[i*K+j] counts paths
    // with value_i > value_j. Empty when tracking is off.
    std::vector<std::uint64_t> greater;
    std::uint64_t n_paths = 0;
    std::uint64_t tie_redraws = 0;

    std::uint64_t violations(std::size_t i, std::size_t j) const {
        return greater[i * stats.size() + j];
    }
};

// Core deterministic Monte Carlo loop. Evaluates `eval` for every path index
// in [0, n_paths); `eval` writes K values per path. Accumulation is batched
// on the fixed partition given by batch_size and combined by a fixed-shape
// pairwise tree, so the result does not depend on the worker count.
// Throws NonFinitePayoff if any value is not finite.
McResult mc_run(const SimSettings& settings, std::size_t k_values, bool track_order,
                const std::function<void(std::uint64_t, Workspace&, double*)>& eval);

using Payoff = std::function<double(const ScenarioPath&)>;

// Sample mean and standard error of a scalar payoff over the path stream.
EstimatorStats mc_estimate(const Payoff& payoff, const ModelConfig& config,
                           const TimeGrid& grid, const SimSettings& settings);

// Evaluates several payoffs on the identical path stream; returns per-payoff
// stats plus pathwise comparison counts.
McResult mc_estimate_crn(const std::vector<Payoff>& payoffs, const ModelConfig& config,
                         const TimeGrid& grid, const SimSettings& settings);

} // namespace ccr

#endif
