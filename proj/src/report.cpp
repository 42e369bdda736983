#include "ccr/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ccr/axioms.hpp"
#include "ccr/oracle.hpp"
#include "ccr/structures.hpp"

namespace ccr {

using nlohmann::json;

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

double get_num(const json& j, const char* field, std::optional<double> fallback = {}) {
    if (!j.contains(field)) {
        if (fallback) return *fallback;
        throw ConfigParseError(std::string("missing field: ") + field);
    }
    if (!j[field].is_number()) {
        throw ConfigParseError(std::string("field is not a number: ") + field);
    }
    return j[field].get<double>();
}

ModelConfig parse_model(const json& j) {
    ModelConfig m;
    m.r = get_num(j, "r");
    m.lambda_B = get_num(j, "lambda_B");
    m.lambda_C = get_num(j, "lambda_C");
    m.R_B = get_num(j, "R_B");
    m.R_C = get_num(j, "R_C");
    m.sigma = get_num(j, "sigma");
    m.m0 = get_num(j, "m0", 0.0);
    m.T = get_num(j, "T");
    m.rho_BC = get_num(j, "rho_BC", 0.0);
    m.rho_MB = get_num(j, "rho_MB", 0.0);
    m.rho_MC = get_num(j, "rho_MC", 0.0);
    m.amortizing = j.value("amortizing", false);
    return validate(m);
}

LiquiditySpec parse_liquidity(const json& j) {
    LiquiditySpec l;
    const std::string kind = j.value("kind", "none");
    if (kind == "none") {
        l = LiquiditySpec::none();
    } else if (kind == "constant_fraction") {
        l = LiquiditySpec::constant_fraction(get_num(j, "kappa"));
    } else if (kind == "lognormal") {
        l = LiquiditySpec::lognormal(get_num(j, "mu"), get_num(j, "s"));
    } else {
        throw ConfigParseError("liquidity.kind must be none|constant_fraction|lognormal");
    }
    if (j.contains("haircut")) l.haircut = get_num(j, "haircut");
    return validate(l);
}

} // namespace

RunSpec parse_run_spec(const std::string& json_text, RunMode mode) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
    }
    RunSpec spec;
    spec.mode = mode;
    if (!j.contains("model")) throw ConfigParseError("missing section: model");
    spec.model = parse_model(j["model"]);

    const json jg = j.value("grid", json::object());
    if (jg.contains("times")) {
        TimeGrid g;
        for (const auto& t : jg["times"]) g.times.push_back(t.get<double>());
        if (jg.contains("resets")) {
            for (const auto& t : jg["resets"]) g.resets.push_back(t.get<double>());
        } else {
            g.resets = {g.times.empty() ? 0.0 : g.times.front(),
                        g.times.empty() ? 0.0 : g.times.back()};
        }
        spec.grid = validate(g);
    } else {
        const int steps = static_cast<int>(get_num(jg, "steps", 20.0));
        const int resets = static_cast<int>(get_num(jg, "reset_periods", 1.0));
        spec.grid = TimeGrid::uniform(spec.model.T, steps, resets);
    }
    if (spec.grid.maturity() != spec.model.T) {
        throw ConfigParseError("grid must end exactly at the model maturity T");
    }

    const json js = j.value("sim", json::object());
    spec.sim.n_paths = static_cast<std::uint64_t>(get_num(js, "paths", 100000.0));
    spec.sim.seed = static_cast<std::uint64_t>(get_num(js, "seed", 12345.0));
    spec.sim.batch_size = static_cast<std::uint64_t>(get_num(js, "batch_size", 8192.0));
    spec.sim.antithetic = js.value("antithetic", false);
    spec.sim.workers = static_cast<int>(get_num(js, "workers", 0.0));

    if (j.contains("styles")) {
        for (const auto& s : j["styles"]) {
            spec.styles.push_back(style_from_string(s.get<std::string>()));
        }
    }
    if (mode == RunMode::Compare || mode == RunMode::Check) {
        if (spec.styles.empty()) {
            spec.styles.assign(kAllStyles.begin(), kAllStyles.end());
        }
    }
    if (j.contains("tranches")) {
        for (const auto& t : j["tranches"]) {
            spec.tranches.push_back(
                validate(TrancheSpec{get_num(t, "attachment"), get_num(t, "notional")}));
        }
    }
    if (j.contains("pool")) {
        spec.pool_names = static_cast<std::size_t>(get_num(j["pool"], "names", 1.0));
        const std::string side = j["pool"].value("side", "quadri");
        if (side == "quadri") {
            spec.pool_side = PoolSide::Quadri;
        } else if (side == "tri") {
            spec.pool_side = PoolSide::Tri;
        } else {
            throw ConfigParseError("pool.side must be quadri|tri");
        }
    }
    if (j.contains("liquidity")) spec.liquidity = parse_liquidity(j["liquidity"]);
    if (j.contains("check")) {
        const json& jc = j["check"];
        if (jc.contains("checkpoints")) {
            for (const auto& t : jc["checkpoints"]) spec.checkpoints.push_back(t.get<double>());
        }
        if (jc.contains("require_pass")) {
            for (const auto& s : jc["require_pass"]) {
                spec.require_pass.push_back(style_from_string(s.get<std::string>()));
            }
        }
    }
    if (j.contains("output")) {
        const json& jo = j["output"];
        spec.out_path = jo.value("path", spec.out_path);
        const std::string fmt = jo.value("format", "csv");
        if (fmt == "csv") {
            spec.format = ReportFormat::Csv;
        } else if (fmt == "json") {
            spec.format = ReportFormat::Json;
        } else {
            throw ConfigParseError("output.format must be csv|json");
        }
    }
    if (spec.mode != RunMode::Tranche && spec.styles.empty()) {
        throw ConfigParseError("at least one style (or tranche job) must be requested");
    }
    if (spec.mode == RunMode::Tranche && spec.tranches.empty()) {
        throw ConfigParseError("tranche mode needs a tranches section");
    }
    return spec;
}

RunSpec load_run_spec(const std::string& path, RunMode mode) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_spec(ss.str(), mode);
}

namespace {

bool oracle_available(const RunSpec& spec) {
    const ModelConfig& m = spec.model;
    return m.rho_BC == 0.0 && m.rho_MB == 0.0 && m.rho_MC == 0.0 &&
           spec.liquidity.kind == LiquiditySpec::Kind::None;
}

struct Row {
    std::string style;
    std::string quantity;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;
    std::uint64_t seed = 0;
    std::optional<double> oracle;

    std::optional<double> z_vs_oracle() const {
        if (!oracle) return std::nullopt;
        if (std_error <= 0.0) return estimate == *oracle ? std::optional<double>(0.0)
                                                         : std::nullopt;
        return (estimate - *oracle) / std_error;
    }
};

// Oracle values for one style's report rows, each quadrature evaluated once.
struct StyleOracles {
    bool available = false;
    std::optional<double> cva, dva, gamma, v_B, v_C;

    std::optional<double> get(const std::string& quantity) const {
        if (!available) return std::nullopt;
        if (quantity == "cva") return cva;
        if (quantity == "dva") return dva;
        if (quantity == "gamma") return gamma;
        if (quantity == "v_B") return v_B;
        if (quantity == "v_C") return v_C;
        return std::nullopt;
    }
};

StyleOracles style_oracles(const RunSpec& spec, StructuringStyle style) {
    StyleOracles o;
    if (!oracle_available(spec)) return o;
    o.available = true;
    const ModelConfig& m = spec.model;
    const double u_bc = ucva_quadrature(m, Direction::BtoC);
    const double u_cb = ucva_quadrature(m, Direction::CtoB);

    o.gamma = 0.0;
    switch (style) {
    case StructuringStyle::UcvaOnly:
        o.cva = u_bc;
        o.dva = 0.0;
        o.v_B = m.m0 - u_bc;
        o.v_C = -m.m0 - u_cb;
        return o;
    case StructuringStyle::BcvaRiskFreeCloseout:
    case StructuringStyle::BcvaReplacementCloseout:
    case StructuringStyle::QuadripartiteHighFreq:
        o.cva = u_bc;
        o.dva = u_cb;
        break;
    case StructuringStyle::FtdCva:
    case StructuringStyle::QuadripartitePeriodic:
    case StructuringStyle::PentapartiteCcp:
        o.cva = ftdcva_quadrature(m, Direction::BtoC);
        o.dva = ftdcva_quadrature(m, Direction::CtoB);
        break;
    case StructuringStyle::PortableCvaC1:
    case StructuringStyle::PortableCvaC2: {
        const CloseoutRule rule = style_closeout_rule(style);
        o.gamma = gamma_quadrature(m, rule, Direction::BtoC);
        o.cva = u_bc + *o.gamma;
        o.dva = u_cb + gamma_quadrature(m, rule, Direction::CtoB);
        break;
    }
    case StructuringStyle::TripartitePeriodic:
        o.cva = ftdcva_quadrature(m, Direction::BtoC);
        o.dva = u_cb;
        break;
    }

    switch (style) {
    case StructuringStyle::QuadripartiteHighFreq:
    case StructuringStyle::QuadripartitePeriodic:
    case StructuringStyle::PentapartiteCcp:
        o.v_B = m.m0;
        o.v_C = -m.m0;
        break;
    case StructuringStyle::TripartitePeriodic:
        o.v_B = m.m0 + *o.dva;
        o.v_C = -m.m0 - *o.dva;
        break;
    default:
        o.v_B = m.m0 - *o.cva + *o.dva;
        o.v_C = -m.m0 - *o.dva + *o.cva;
        break;
    }
    return o;
}

void price_rows(const RunSpec& spec, std::vector<Row>& rows) {
    for (StructuringStyle style : spec.styles) {
        ValuationResult vr =
            fair_value(spec.model, spec.grid, spec.sim, style, spec.liquidity);
        const StyleOracles oracles = style_oracles(spec, style);
        const std::pair<const char*, EstimatorStats> quantities[] = {
            {"cva", vr.cva}, {"dva", vr.dva}, {"gamma", vr.gamma},
            {"v_B", vr.v_B}, {"v_C", vr.v_C}};
        for (const auto& [name, stats] : quantities) {
            Row row;
            row.style = to_string(style);
            row.quantity = name;
            row.estimate = stats.mean;
            row.std_error = stats.std_error;
            row.n_paths = stats.n;
            row.seed = spec.sim.seed;
            row.oracle = oracles.get(name);
            rows.push_back(std::move(row));
        }
    }
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string render_price_report(const RunSpec& spec, const std::vector<Row>& rows) {
    if (spec.format == ReportFormat::Csv) {
        std::ostringstream os;
        os << "style,quantity,estimate,std_error,n_paths,seed,oracle_value,z_vs_oracle\n";
        for (const Row& r : rows) {
            os << r.style << ',' << r.quantity << ',' << format_double(r.estimate) << ','
               << format_double(r.std_error) << ',' << r.n_paths << ',' << r.seed << ',';
            if (r.oracle) os << format_double(*r.oracle);
            os << ',';
            if (auto z = r.z_vs_oracle()) os << format_double(*z);
            os << '\n';
        }
        return os.str();
    }
    json arr = json::array();
    for (const Row& r : rows) {
        json o;
        o["style"] = r.style;
        o["quantity"] = r.quantity;
        o["estimate"] = r.estimate;
        o["std_error"] = r.std_error;
        o["n_paths"] = r.n_paths;
        o["seed"] = r.seed;
        if (r.oracle) {
            o["oracle_value"] = *r.oracle;
            if (auto z = r.z_vs_oracle()) o["z_vs_oracle"] = *z;
        }
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

std::string render_check_report(const RunSpec& spec, const VerdictMatrix& matrix) {
    if (spec.format == ReportFormat::Csv) {
        std::ostringstream os;
        os << "style,axiom,verdict,p_value,discrepancy,seed,n_paths,detail\n";
        for (const auto& c : matrix.cells) {
            os << to_string(c.style) << ',' << to_string(c.kind) << ','
               << to_string(c.outcome) << ',' << format_double(c.p_value) << ','
               << format_double(c.discrepancy) << ',' << spec.sim.seed << ','
               << spec.sim.n_paths << ',' << csv_escape(c.detail) << '\n';
        }
        return os.str();
    }
    json arr = json::array();
    for (const auto& c : matrix.cells) {
        json o;
        o["style"] = to_string(c.style);
        o["axiom"] = to_string(c.kind);
        o["verdict"] = to_string(c.outcome);
        o["p_value"] = c.p_value;
        o["discrepancy"] = c.discrepancy;
        o["seed"] = spec.sim.seed;
        o["n_paths"] = spec.sim.n_paths;
        o["detail"] = c.detail;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

std::string render_tranche_report(const RunSpec& spec) {
    PoolConfig pool;
    pool.side = spec.pool_side;
    pool.grid = spec.grid;
    for (std::size_t i = 0; i < spec.pool_names; ++i) pool.counterparties.push_back(spec.model);
    pool = validate(pool);

    std::ostringstream os;
    json arr = json::array();
    if (spec.format == ReportFormat::Csv) {
        os << "tranche,attachment,notional,spread,protection_mean,protection_se,"
              "premium_mean,premium_se,n_paths,seed\n";
    }
    for (std::size_t i = 0; i < spec.tranches.size(); ++i) {
        const TrancheSpec& t = spec.tranches[i];
        TrancheSpreadResult r = tranche_spread(pool, t, spec.sim);
        if (spec.format == ReportFormat::Csv) {
            os << i << ',' << format_double(t.attachment) << ','
               << format_double(t.notional) << ',' << format_double(r.spread) << ','
               << format_double(r.protection_leg.mean) << ','
               << format_double(r.protection_leg.std_error) << ','
               << format_double(r.premium_leg.mean) << ','
               << format_double(r.premium_leg.std_error) << ',' << spec.sim.n_paths << ','
               << spec.sim.seed << '\n';
        } else {
            json o;
            o["tranche"] = i;
            o["attachment"] = t.attachment;
            o["notional"] = t.notional;
            o["spread"] = r.spread;
            o["protection_mean"] = r.protection_leg.mean;
            o["protection_se"] = r.protection_leg.std_error;
            o["premium_mean"] = r.premium_leg.mean;
            o["premium_se"] = r.premium_leg.std_error;
            o["n_paths"] = spec.sim.n_paths;
            o["seed"] = spec.sim.seed;
            arr.push_back(std::move(o));
        }
    }
    return spec.format == ReportFormat::Csv ? os.str() : arr.dump(2) + "\n";
}

} // namespace

std::string render_report(const RunSpec& spec, int& exit_code) {
    exit_code = 0;
    switch (spec.mode) {
    case RunMode::Price:
    case RunMode::Compare: {
        std::vector<Row> rows;
        price_rows(spec, rows);
        return render_price_report(spec, rows);
    }
    case RunMode::Check: {
        VerdictMatrix matrix = verdict_matrix(spec.model, spec.grid, spec.sim,
                                              spec.checkpoints, spec.liquidity);
        for (StructuringStyle s : spec.require_pass) {
            for (AxiomKind k :
                 {AxiomKind::Martingale, AxiomKind::MoneyConservation, AxiomKind::Closeout,
                  AxiomKind::ResetEquilibrium}) {
                if (!matrix.at(s, k).passed()) exit_code = 3;
            }
        }
        return render_check_report(spec, matrix);
    }
    case RunMode::Tranche:
        return render_tranche_report(spec);
    }
    throw DomainError("bad run mode");
}

int run(const RunSpec& spec) {
    int exit_code = 0;
    const std::string text = render_report(spec, exit_code);
    std::ofstream out(spec.out_path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + spec.out_path);
    out << text;
    if (!out) throw IoError("failed writing output file: " + spec.out_path);
    return exit_code;
}

} // namespace ccr
