#include "ccr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ccr {

const char* to_string(StructuringStyle s) {
    switch (s) {
    case StructuringStyle::UcvaOnly: return "UcvaOnly";
    case StructuringStyle::BcvaRiskFreeCloseout: return "BcvaRiskFreeCloseout";
    case StructuringStyle::BcvaReplacementCloseout: return "BcvaReplacementCloseout";
    case StructuringStyle::FtdCva: return "FtdCva";
    case StructuringStyle::PortableCvaC1: return "PortableCvaC1";
    case StructuringStyle::PortableCvaC2: return "PortableCvaC2";
    case StructuringStyle::QuadripartiteHighFreq: return "QuadripartiteHighFreq";
    case StructuringStyle::TripartitePeriodic: return "TripartitePeriodic";
    case StructuringStyle::QuadripartitePeriodic: return "QuadripartitePeriodic";
    case StructuringStyle::PentapartiteCcp: return "PentapartiteCcp";
    }
    return "?";
}

StructuringStyle style_from_string(const std::string& name) {
    for (StructuringStyle s : kAllStyles) {
        if (name == to_string(s)) return s;
    }
    throw DomainError("unknown structuring style: " + name);
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

} // namespace

ModelConfig validate(ModelConfig config) {
    require(std::isfinite(config.r), "r must be finite");
    require(config.lambda_B >= 0.0 && std::isfinite(config.lambda_B), "lambda_B must be >= 0");
    require(config.lambda_C >= 0.0 && std::isfinite(config.lambda_C), "lambda_C must be >= 0");
    require(config.R_B >= 0.0 && config.R_B <= 1.0, "R_B must be in [0,1]");
    require(config.R_C >= 0.0 && config.R_C <= 1.0, "R_C must be in [0,1]");
    require(config.sigma >= 0.0 && std::isfinite(config.sigma), "sigma must be >= 0");
    require(std::isfinite(config.m0), "m0 must be finite");
    require(config.T > 0.0 && std::isfinite(config.T), "T must be > 0");
    for (double rho : {config.rho_BC, config.rho_MB, config.rho_MC}) {
        require(rho >= -1.0 && rho <= 1.0, "correlations must be in [-1,1]");
    }

    // Correlation matrix in driver order (exposure M, trigger_C, trigger_B):
    //   [ 1       rho_MC  rho_MB ]
    //   [ rho_MC  1       rho_BC ]
    //   [ rho_MB  rho_BC  1      ]
    // Cholesky with a small nonnegative pivot tolerance; a negative pivot
    // beyond rounding noise means the matrix is not PSD.
    const double a21 = config.rho_MC, a31 = config.rho_MB, a32 = config.rho_BC;
    const double tol = 1e-12;

    double l11 = 1.0;
    double l21 = a21 / l11;
    double d2 = 1.0 - l21 * l21;
    if (d2 < -tol) throw NonPsdCorrelation("correlation matrix is not positive semi-definite");
    double l22 = std::sqrt(std::max(d2, 0.0));
    double l31 = a31 / l11;
    double l32 = l22 > tol ? (a32 - l31 * l21) / l22 : 0.0;
    if (l22 <= tol && std::abs(a32 - l31 * l21) > 1e-10) {
        throw NonPsdCorrelation("correlation matrix is not positive semi-definite");
    }
    double d3 = 1.0 - l31 * l31 - l32 * l32;
    if (d3 < -tol) throw NonPsdCorrelation("correlation matrix is not positive semi-definite");
    double l33 = std::sqrt(std::max(d3, 0.0));

    config.chol = {l11, l21, l22, l31, l32, l33};
    config.validated = true;
    return config;
}

ModelConfig swapped(const ModelConfig& config) {
    ModelConfig s = config;
    std::swap(s.lambda_B, s.lambda_C);
    std::swap(s.R_B, s.R_C);
    std::swap(s.rho_MB, s.rho_MC);
    s.m0 = -config.m0;
    return validate(s);
}

TimeGrid TimeGrid::uniform(double T, int n_steps, int n_reset_periods) {
    TimeGrid g;
    if (n_steps < 1) throw DomainError("grid needs at least one step");
    if (n_reset_periods < 1 || n_steps % n_reset_periods != 0) {
        throw DomainError("reset periods must evenly divide the step count");
    }
    g.times.resize(static_cast<std::size_t>(n_steps) + 1);
    for (int i = 0; i <= n_steps; ++i) {
        g.times[static_cast<std::size_t>(i)] = T * static_cast<double>(i) / n_steps;
    }
    g.times.back() = T;
    const int stride = n_steps / n_reset_periods;
    for (int i = 0; i <= n_steps; i += stride) {
        g.resets.push_back(g.times[static_cast<std::size_t>(i)]);
    }
    return validate(g);
}

TimeGrid validate(TimeGrid grid) {
    require(grid.times.size() >= 2, "grid needs at least two times");
    require(grid.times.front() == 0.0, "grid must start at exactly 0");
    for (std::size_t i = 1; i < grid.times.size(); ++i) {
        require(grid.times[i] > grid.times[i - 1], "grid times must be strictly increasing");
    }
    require(!grid.resets.empty(), "reset set must not be empty");
    require(grid.resets.front() == 0.0, "first reset must be 0");
    require(grid.resets.back() == grid.times.back(), "last reset must be T");
    std::size_t j = 0;
    for (std::size_t i = 0; i < grid.resets.size(); ++i) {
        if (i > 0) require(grid.resets[i] > grid.resets[i - 1], "resets must be strictly increasing");
        while (j < grid.times.size() && grid.times[j] != grid.resets[i]) ++j;
        require(j < grid.times.size(), "every reset must be a grid time");
    }
    return grid;
}

std::size_t ScenarioPath::index_of(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) {
        std::ostringstream os;
        os << "time " << t << " is not a sample point of this path";
        throw DomainError(os.str());
    }
    return static_cast<std::size_t>(it - times.begin());
}

} // namespace ccr
