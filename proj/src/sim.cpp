#include "ccr/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ccr/rng.hpp"

namespace ccr {

namespace {

// Per-path dimension layout. Interior grid times take one dimension each;
// default-time insertions, liquidity draws and tie retries have dedicated
// slots so that changing one substream never shifts another.
struct DimLayout {
    static constexpr std::uint64_t exposure_terminal = 0;
    static constexpr std::uint64_t trigger_C = 1;
    static constexpr std::uint64_t trigger_B = 2;
    static constexpr std::uint64_t bridge_base = 3;
    std::uint64_t n_interior;

    std::uint64_t insert_tau_B() const { return bridge_base + n_interior; }
    std::uint64_t insert_tau_C() const { return bridge_base + n_interior + 1; }
    std::uint64_t liq_tau_B() const { return bridge_base + n_interior + 2; }
    std::uint64_t liq_tau_C() const { return bridge_base + n_interior + 3; }
    std::uint64_t tie_retry(int k) const {
        return bridge_base + n_interior + 4 + static_cast<std::uint64_t>(k);
    }
};

struct PathRng {
    std::uint64_t seed, stream, path;
    bool negate;
    double normal(std::uint64_t dim) const {
        double z = rng::normal(seed, stream, path, dim);
        return negate ? -z : z;
    }
};

// Exponential trigger: tau = -ln(Phi(z)) / lambda, clamped away from the
// degenerate endpoints of the uniform.
double trigger_time(double z, double lambda) {
    if (lambda <= 0.0) return kNever;
    double u = norm_cdf(z);
    u = std::min(std::max(u, 1e-300), 1.0 - 1e-16);
    return -std::log(u) / lambda;
}

// Brownian bridge draw at time t between (ta, wa) and (tb, wb).
double bridge_value(double t, double ta, double wa, double tb, double wb, double z) {
    const double span = tb - ta;
    const double mean = wa + (t - ta) / span * (wb - wa);
    const double var = (t - ta) * (tb - t) / span;
    return mean + std::sqrt(std::max(var, 0.0)) * z;
}

} // namespace

void generate_path(const ModelConfig& config, const TimeGrid& grid,
                   std::uint64_t path_index, std::uint64_t seed, std::uint64_t stream,
                   bool antithetic_negate, ScenarioPath& out) {
    generate_path(config, grid, path_index, seed, stream, stream, antithetic_negate, out);
}

void generate_path(const ModelConfig& config, const TimeGrid& grid,
                   std::uint64_t path_index, std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t exposure_stream, bool antithetic_negate,
                   ScenarioPath& out) {
    const std::size_t n = grid.times.size();
    const DimLayout dims{n - 2};
    const PathRng prng{seed, stream, path_index, antithetic_negate};
    const PathRng xrng{seed, exposure_stream, path_index, antithetic_negate};
    const double T = grid.maturity();

    const double z_m = xrng.normal(DimLayout::exposure_terminal);
    const double z_c = prng.normal(DimLayout::trigger_C);
    double z_b = prng.normal(DimLayout::trigger_B);

    const auto& L = config.chol;
    const double y_m = L[0] * z_m;
    const double y_c = L[1] * z_m + L[2] * z_c;
    double y_b = L[3] * z_m + L[4] * z_c + L[5] * z_b;

    out.tau_C = trigger_time(y_c, config.lambda_C);
    out.tau_B = trigger_time(y_b, config.lambda_B);
    out.tie_redraws = 0;

    // Simultaneous defaults are excluded: redraw the trigger_B substream only,
    // keeping tau_C (and the exposure) bit-identical.
    while (out.tau_B == out.tau_C && std::isfinite(out.tau_B)) {
        z_b = prng.normal(dims.tie_retry(out.tie_redraws));
        y_b = L[3] * z_m + L[4] * z_c + L[5] * z_b;
        out.tau_B = trigger_time(y_b, config.lambda_B);
        ++out.tie_redraws;
        if (out.tie_redraws > 64) {
            out.tau_B = std::nextafter(out.tau_B, kNever);
            break;
        }
    }

    // Brownian values on the fixed grid, conditioned on the correlated
    // terminal driver W_T = sqrt(T) * y_m and filled left to right.
    const bool flat = config.sigma <= 0.0;
    static thread_local std::vector<double> w;
    w.assign(n, 0.0);
    if (!flat) {
        w[n - 1] = std::sqrt(T) * y_m;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            w[k] = bridge_value(grid.times[k], grid.times[k - 1], w[k - 1], T, w[n - 1],
                                xrng.normal(DimLayout::bridge_base + (k - 1)));
        }
    }

    // Insert in-horizon default times. Each insertion conditions only on its
    // enclosing fixed grid points and owns a dedicated dimension, keeping the
    // sampled exposure at one default time independent of the other's clock.
    struct Insert {
        double t = kNever;
        double w = 0.0;
        bool active = false;
    };
    Insert ins_b, ins_c;
    auto prepare = [&](double tau, std::uint64_t dim, Insert& ins) {
        if (!(tau > 0.0) || tau >= T) return;
        auto it = std::lower_bound(grid.times.begin(), grid.times.end(), tau);
        if (it != grid.times.end() && *it == tau) return; // grid point reused
        const std::size_t hi = static_cast<std::size_t>(it - grid.times.begin());
        ins.t = tau;
        ins.w = flat ? 0.0
                     : bridge_value(tau, grid.times[hi - 1], w[hi - 1], grid.times[hi],
                                    w[hi], xrng.normal(dim));
        ins.active = true;
    };
    prepare(out.tau_B, dims.insert_tau_B(), ins_b);
    prepare(out.tau_C, dims.insert_tau_C(), ins_c);

    out.z_liq_B = prng.normal(dims.liq_tau_B());
    out.z_liq_C = prng.normal(dims.liq_tau_C());
    out.rate = config.r;
    out.times.clear();
    out.m.clear();
    out.times.reserve(n + 2);
    out.m.reserve(n + 2);
    out.idx_tau_B = -1;
    out.idx_tau_C = -1;

    auto push = [&](double t, double wt) {
        out.times.push_back(t);
        out.m.push_back(config.a(t) * (config.m0 + config.sigma * wt));
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(out.times.size()) - 1;
        if (t == out.tau_B) out.idx_tau_B = idx;
        if (t == out.tau_C) out.idx_tau_C = idx;
    };

    std::size_t gi = 0;
    while (gi < n || ins_b.active || ins_c.active) {
        const double tg = gi < n ? grid.times[gi] : kNever;
        const double tb = ins_b.active ? ins_b.t : kNever;
        const double tc = ins_c.active ? ins_c.t : kNever;
        if (tg <= tb && tg <= tc) {
            push(tg, w[gi]);
            ++gi;
        } else if (tb <= tc) {
            push(tb, ins_b.w);
            ins_b.active = false;
        } else {
            push(tc, ins_c.w);
            ins_c.active = false;
        }
    }
}

ScenarioPath generate_path(const ModelConfig& config, const TimeGrid& grid,
                           std::uint64_t path_index, const SimSettings& settings,
                           std::uint64_t stream) {
    ScenarioPath p;
    const bool neg = settings.antithetic && (path_index & 1u);
    const std::uint64_t idx = settings.antithetic ? path_index / 2 : path_index;
    generate_path(config, grid, idx, settings.seed, stream, neg, p);
    return p;
}

namespace {

struct BatchPartial {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::vector<std::uint64_t> greater;
    std::uint64_t n = 0;
    std::uint64_t tie_redraws = 0;
    bool nonfinite = false;
};

void combine(BatchPartial& into, const BatchPartial& from) {
    for (std::size_t i = 0; i < into.sum.size(); ++i) {
        into.sum[i] += from.sum[i];
        into.sumsq[i] += from.sumsq[i];
    }
    for (std::size_t i = 0; i < into.greater.size(); ++i) into.greater[i] += from.greater[i];
    into.n += from.n;
    into.tie_redraws += from.tie_redraws;
    into.nonfinite = into.nonfinite || from.nonfinite;
}

// Fixed-shape pairwise tree over the batch array; identical for any worker count.
BatchPartial reduce_tree(std::vector<BatchPartial>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::move(parts[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    BatchPartial left = reduce_tree(parts, lo, mid);
    BatchPartial right = reduce_tree(parts, mid, hi);
    combine(left, right);
    return left;
}

} // namespace

McResult mc_run(const SimSettings& settings, std::size_t k_values, bool track_order,
                const std::function<void(std::uint64_t, Workspace&, double*)>& eval) {
    if (settings.n_paths < 1) throw DomainError("n_paths must be >= 1");
    if (settings.batch_size < 1) throw DomainError("batch_size must be >= 1");
    const std::uint64_t n = settings.n_paths;
    const std::uint64_t bs = settings.batch_size;
    const std::size_t n_batches = static_cast<std::size_t>((n + bs - 1) / bs);
    const std::size_t kk = track_order ? k_values * k_values : 0;

    std::vector<BatchPartial> partials(n_batches);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<bool> failed{false};

    auto work = [&]() {
        Workspace ws;
        ws.seed = settings.seed;
        std::vector<double> vals(k_values);
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_batches) break;
            if (failed.load(std::memory_order_relaxed)) break;
            BatchPartial part;
            part.sum.assign(k_values, 0.0);
            part.sumsq.assign(k_values, 0.0);
            part.greater.assign(kk, 0);
            const std::uint64_t lo = static_cast<std::uint64_t>(b) * bs;
            const std::uint64_t hi = std::min(n, lo + bs);
            try {
                for (std::uint64_t p = lo; p < hi; ++p) {
                    ws.antithetic_negate = settings.antithetic && (p & 1u);
                    ws.path_index = settings.antithetic ? p / 2 : p;
                    eval(p, ws, vals.data());
                    for (std::size_t i = 0; i < k_values; ++i) {
                        const double v = vals[i];
                        if (!std::isfinite(v)) part.nonfinite = true;
                        part.sum[i] += v;
                        part.sumsq[i] += v * v;
                    }
                    if (track_order) {
                        for (std::size_t i = 0; i < k_values; ++i)
                            for (std::size_t j = 0; j < k_values; ++j)
                                if (vals[i] > vals[j]) ++part.greater[i * k_values + j];
                    }
                    part.tie_redraws += static_cast<std::uint64_t>(ws.path.tie_redraws);
                    ++part.n;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                break;
            }
            partials[b] = std::move(part);
        }
    };

    int n_workers = settings.workers > 0
                        ? settings.workers
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    if (first_error) std::rethrow_exception(first_error);
    BatchPartial total = reduce_tree(partials, 0, n_batches);
    if (total.nonfinite) throw NonFinitePayoff("payoff evaluated non-finite on some path");

    McResult result;
    result.n_paths = total.n;
    result.tie_redraws = total.tie_redraws;
    result.stats.resize(k_values);
    for (std::size_t i = 0; i < k_values; ++i) {
        const double mean = total.sum[i] / static_cast<double>(total.n);
        double var = 0.0;
        if (total.n > 1) {
            var = (total.sumsq[i] - total.sum[i] * mean) / static_cast<double>(total.n - 1);
            var = std::max(var, 0.0);
        }
        result.stats[i] = {mean, std::sqrt(var / static_cast<double>(total.n)), total.n};
    }
    result.greater = std::move(total.greater);
    return result;
}

EstimatorStats mc_estimate(const Payoff& payoff, const ModelConfig& config,
                           const TimeGrid& grid, const SimSettings& settings) {
    McResult r = mc_run(settings, 1, false,
                        [&](std::uint64_t, Workspace& ws, double* out) {
                            generate_path(config, grid, ws.path_index, ws.seed, 0,
                                          ws.antithetic_negate, ws.path);
                            out[0] = payoff(ws.path);
                        });
    return r.stats[0];
}

McResult mc_estimate_crn(const std::vector<Payoff>& payoffs, const ModelConfig& config,
                         const TimeGrid& grid, const SimSettings& settings) {
    return mc_run(settings, payoffs.size(), true,
                  [&](std::uint64_t, Workspace& ws, double* out) {
                      generate_path(config, grid, ws.path_index, ws.seed, 0,
                                    ws.antithetic_negate, ws.path);
                      for (std::size_t i = 0; i < payoffs.size(); ++i)
                          out[i] = payoffs[i](ws.path);
                  });
}

} // namespace ccr
