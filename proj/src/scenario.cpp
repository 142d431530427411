#include "atrp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "atrp/error.hpp"
#include "atrp/reserving.hpp"

namespace atrp {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::chrono::sys_days> parse_iso_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

std::string fmt(double v, int digits = 10) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ingestion

double days_from_origin(const std::string& date, const std::string& origin) {
    const auto o = parse_iso_date(origin);
    require(o.has_value(), ErrorCode::Parse, "origin '" + origin + "' is not a valid YYYY-MM-DD date");
    const auto d = parse_iso_date(date);
    require(d.has_value(), ErrorCode::Parse, "'" + date + "' is not a valid YYYY-MM-DD date");
    return static_cast<double>((*d - *o).count());
}

IngestResult parse_claims(std::istream& in, const IngestOptions& opts) {
    const auto split = [&](const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, opts.delimiter)) out.push_back(trim(cell));
        if (!line.empty() && line.back() == opts.delimiter) out.emplace_back();
        return out;
    };
    if (opts.time_format == TimeFormat::IsoDate)
        require(parse_iso_date(opts.origin).has_value(), ErrorCode::Parse,
                "origin '" + opts.origin + "' is not a valid YYYY-MM-DD date");

    IngestResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) return result;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    std::vector<std::string> names;
    for (auto h : header) {
        std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
        names.push_back(h);
    }
    const auto column = [&](const std::string& name, bool required) -> int {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            require(!required, ErrorCode::Parse, "claims file is missing column '" + name + "'");
            return -1;
        }
        return static_cast<int>(it - names.begin());
    };
    const int c_occ = column("occurrence_date", true);
    const int c_rep = column("report_date", true);
    const int c_set = column("settlement_date", true);
    const int c_ind = column("indemnity", true);
    const int c_exp = column("expense", true);
    const int c_cls = column("injury_class", false);

    const auto to_years = [&](const std::string& s) -> std::optional<double> {
        if (opts.time_format == TimeFormat::Years) return parse_number(s);
        const auto d = parse_iso_date(s);
        if (!d) return std::nullopt;
        return static_cast<double>((*d - *parse_iso_date(opts.origin)).count()) / kDaysPerYear;
    };

    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++rows;
        const auto f = split(line);
        const auto reject = [&](const std::string& why) { result.rejects.push_back({line_no, why}); };
        if (f.size() != names.size()) {
            reject("expected " + std::to_string(names.size()) + " fields, found " + std::to_string(f.size()));
            continue;
        }
        const auto occ = to_years(f[c_occ]);
        const auto rep = to_years(f[c_rep]);
        if (!occ || !rep) {
            reject("malformed occurrence or report date");
            continue;
        }
        std::optional<double> set;
        if (!f[c_set].empty()) {
            set = to_years(f[c_set]);
            if (!set) {
                reject("malformed settlement date");
                continue;
            }
        }
        const auto ind = parse_number(f[c_ind]);
        const auto exp = parse_number(f[c_exp]);
        if (!ind || !exp) {
            reject("malformed amount");
            continue;
        }
        if (*rep < *occ) {
            reject("report date before occurrence date");
            continue;
        }
        if (set && *set < *rep) {
            reject("settlement date before report date");
            continue;
        }
        if (*ind < 0 || *exp < 0) {
            reject("negative amount");
            continue;
        }
        std::optional<int> cls;
        if (c_cls >= 0 && !f[c_cls].empty()) {
            const auto v = parse_number(f[c_cls]);
            if (!v || *v != std::floor(*v) || *v < 0 || *v >= kInjuryClasses) {
                reject("injury class must be an integer in 0..8");
                continue;
            }
            cls = static_cast<int>(*v);
        }
        result.claims.push_back({*occ, *rep, set, *ind, *exp, cls});
    }
    if (rows > 0 && static_cast<double>(result.rejects.size()) > opts.max_reject_fraction * static_cast<double>(rows)) {
        std::ostringstream msg;
        msg << result.rejects.size() << " of " << rows << " rows rejected (limit "
            << 100.0 * opts.max_reject_fraction << "%)";
        for (std::size_t k = 0; k < std::min<std::size_t>(result.rejects.size(), 10); ++k)
            msg << "\n  line " << result.rejects[k].line << ": " << result.rejects[k].reason;
        fail(ErrorCode::Parse, msg.str());
    }
    return result;
}

IngestResult ingest_claims(const std::string& path, const IngestOptions& opts) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open claims file '" + path + "'");
    return parse_claims(in, opts);
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
    require(j.is_object(), ErrorCode::Parse, ctx + " must be an object");
    for (const auto& [k, v] : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
        require(ok, ErrorCode::Parse, "unknown key '" + k + "' in " + ctx);
    }
}

double number(const json& j, const std::string& ctx) {
    require(j.is_number(), ErrorCode::Parse, ctx + " must be a number");
    const double v = j.get<double>();
    require(std::isfinite(v), ErrorCode::Parse, ctx + " must be finite");
    return v;
}

double rate_value(const json& j, const std::string& ctx) {
    check_keys(j, {"value", "unit"}, ctx);
    require(j.contains("value") && j.contains("unit"), ErrorCode::Parse, ctx + " needs 'value' and 'unit'");
    const double v = number(j["value"], ctx + ".value");
    const std::string unit = j["unit"].get<std::string>();
    if (unit == "percent") return v / 100.0;
    if (unit == "per_year") return v;
    fail(ErrorCode::Parse, ctx + ".unit must be 'percent' or 'per_year'");
}

double time_value(const json& j, const std::string& ctx) {
    check_keys(j, {"value", "unit"}, ctx);
    require(j.contains("value") && j.contains("unit"), ErrorCode::Parse, ctx + " needs 'value' and 'unit'");
    const double v = number(j["value"], ctx + ".value");
    const std::string unit = j["unit"].get<std::string>();
    if (unit == "years") return v;
    if (unit == "days") return v / kDaysPerYear;
    fail(ErrorCode::Parse, ctx + ".unit must be 'years' or 'days'");
}

json rate_json(double v) { return {{"value", v}, {"unit", "per_year"}}; }
json time_json(double v) { return {{"value", v}, {"unit", "years"}}; }

TimeUnit parse_unit(const json& j, const std::string& ctx) {
    require(j.is_string(), ErrorCode::Parse, ctx + " must be 'years' or 'days'");
    const auto s = j.get<std::string>();
    if (s == "years") return TimeUnit::Years;
    if (s == "days") return TimeUnit::Days;
    fail(ErrorCode::Parse, ctx + " must be 'years' or 'days'");
}

const char* unit_name(TimeUnit u) { return u == TimeUnit::Years ? "years" : "days"; }

TrendSpec parse_trend(const json& j, const std::string& ctx) {
    require(j.is_object() && j.contains("family") && j.contains("unit"), ErrorCode::Parse,
            ctx + " needs 'family' and 'unit'");
    const TrendFamily f = parse_trend_family(j["family"].get<std::string>());
    const TimeUnit u = parse_unit(j["unit"], ctx + ".unit");
    TrendSpec s;
    switch (f) {
        case TrendFamily::Constant:
            check_keys(j, {"family", "unit", "lambda"}, ctx);
            s = TrendSpec::constant(number(j.at("lambda"), ctx + ".lambda"), u);
            break;
        case TrendFamily::Power:
            check_keys(j, {"family", "unit", "gamma"}, ctx);
            s = TrendSpec::power(number(j.at("gamma"), ctx + ".gamma"), u);
            break;
        case TrendFamily::GammaMixture:
            check_keys(j, {"family", "unit", "p1", "alpha1", "lambda1", "p2", "alpha2", "lambda2"}, ctx);
            s = TrendSpec::gamma_mixture(number(j.at("p1"), ctx), number(j.at("alpha1"), ctx),
                                         number(j.at("lambda1"), ctx), number(j.at("p2"), ctx),
                                         number(j.at("alpha2"), ctx), number(j.at("lambda2"), ctx), u);
            break;
    }
    s.validate();
    return s;
}

json trend_json(const TrendSpec& s) {
    json j{{"family", trend_family_name(s.family)}, {"unit", unit_name(s.unit)}};
    switch (s.family) {
        case TrendFamily::Constant: j["lambda"] = s.lambda; break;
        case TrendFamily::Power: j["gamma"] = s.gamma; break;
        case TrendFamily::GammaMixture:
            j["p1"] = s.p1;
            j["alpha1"] = s.alpha1;
            j["lambda1"] = s.lambda1;
            j["p2"] = s.p2;
            j["alpha2"] = s.alpha2;
            j["lambda2"] = s.lambda2;
            break;
    }
    return j;
}

RenewalDistribution parse_renewal(const json& j, const std::string& ctx) {
    require(j.is_object() && j.contains("family"), ErrorCode::Parse, ctx + " needs 'family'");
    const auto fam = j["family"].get<std::string>();
    if (fam == "exponential") {
        check_keys(j, {"family", "rate"}, ctx);
        return RenewalDistribution::exponential(j.contains("rate") ? number(j["rate"], ctx + ".rate") : 1.0);
    }
    if (fam == "generalized_gamma") {
        check_keys(j, {"family", "a", "b", "c"}, ctx);
        GeneralizedGammaDelay g{number(j.at("a"), ctx), number(j.at("b"), ctx), number(j.at("c"), ctx)};
        g.validate();
        return RenewalDistribution::generalized_gamma(g);
    }
    fail(ErrorCode::Parse, ctx + ".family must be 'exponential' or 'generalized_gamma'");
}

json renewal_json(const RenewalDistribution& r) {
    if (const auto* g = r.generalized_gamma_params())
        return {{"family", "generalized_gamma"}, {"a", g->a}, {"b", g->b}, {"c", g->c}};
    return {{"family", "exponential"}, {"rate", r.exponential_rate()}};
}

json delay_json(const SettlementDelay& d) {
    if (const auto* pm = d.point_mass()) return {{"family", "point_mass"}, {"at", pm->at}};
    const auto* g = d.generalized_gamma();
    return {{"family", "generalized_gamma"}, {"a", g->a}, {"b", g->b}, {"c", g->c}};
}

SettlementDelay parse_delay(const json& j, const std::string& ctx) {
    require(j.is_object() && j.contains("family"), ErrorCode::Parse, ctx + " needs 'family'");
    const auto fam = j["family"].get<std::string>();
    if (fam == "point_mass") {
        check_keys(j, {"family", "at"}, ctx);
        return PointMassDelay{number(j.at("at"), ctx + ".at")};
    }
    require(fam == "generalized_gamma", ErrorCode::Parse, ctx + ".family must be 'generalized_gamma' or 'point_mass'");
    check_keys(j, {"family", "a", "b", "c"}, ctx);
    GeneralizedGammaDelay g{number(j.at("a"), ctx), number(j.at("b"), ctx), number(j.at("c"), ctx)};
    g.validate();
    return g;
}

json severity_json(const SeverityModel& m) {
    json j{{"p0", m.p0}, {"weights", m.weights}, {"mu", m.mu}, {"sigma", m.sigma}, {"kappa", m.kappa}};
    if (m.phi) j["phi"] = *m.phi;
    return j;
}

SeverityModel parse_severity(const json& j, const std::string& ctx) {
    check_keys(j, {"p0", "weights", "mu", "sigma", "kappa", "phi"}, ctx);
    SeverityModel m;
    try {
        m.p0 = j.at("p0").get<double>();
        m.weights = j.at("weights").get<std::array<double, 2>>();
        m.mu = j.at("mu").get<std::array<double, 2>>();
        m.sigma = j.at("sigma").get<std::array<double, 2>>();
        m.kappa = j.value("kappa", 0.0);
        if (j.contains("phi") && !j["phi"].is_null()) m.phi = j["phi"].get<std::array<double, kInjuryClasses>>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, ctx + ": " + e.what());
    }
    m.validate();
    return m;
}

template <class F>
auto with_json_errors(const std::string& ctx, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, ctx + ": " + e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::size_t ScenarioGrid::size() const {
    std::size_t n = 1;
    for (std::size_t k : {beta.size(), inflation_shock.size(), settlement_multiplier.size(),
                          reporting_multiplier.size(), trend_gamma.size(), dependence.size()})
        n *= std::max<std::size_t>(k, 1);
    return n;
}

ScenarioConfig parse_config(const json& j) {
    return with_json_errors("config", [&] {
        check_keys(j, {"valuation", "rates", "dependence", "covariates", "estimate_kappa", "delay_multipliers",
                       "trend", "renewal", "zeta_trend", "horizon", "simulation", "risk_levels",
                       "mixture_components", "bootstrap", "grid", "data"},
                   "config");
        ScenarioConfig c;
        require(j.contains("valuation"), ErrorCode::Parse, "config needs 'valuation'");
        const double t = time_value(j["valuation"], "valuation");
        require(t >= 1 && std::abs(t - std::round(t)) < 1e-9, ErrorCode::Parse,
                "valuation must be a whole number of years");
        c.valuation = static_cast<int>(std::lround(t));
        if (j.contains("rates")) {
            const auto& r = j["rates"];
            check_keys(r, {"alpha1", "alpha2", "beta1", "beta2"}, "rates");
            if (r.contains("alpha1")) c.alpha1 = rate_value(r["alpha1"], "rates.alpha1");
            if (r.contains("alpha2")) c.alpha2 = rate_value(r["alpha2"], "rates.alpha2");
            if (r.contains("beta1")) c.beta1 = rate_value(r["beta1"], "rates.beta1");
            if (r.contains("beta2")) c.beta2 = rate_value(r["beta2"], "rates.beta2");
        }
        if (j.contains("dependence")) c.dependence = parse_dependence_mode(j["dependence"].get<std::string>());
        c.covariates = j.value("covariates", false);
        c.estimate_kappa = j.value("estimate_kappa", true);
        if (j.contains("delay_multipliers")) {
            const auto& m = j["delay_multipliers"];
            check_keys(m, {"reporting", "settlement"}, "delay_multipliers");
            c.reporting_multiplier = m.value("reporting", 1.0);
            c.settlement_multiplier = m.value("settlement", 1.0);
        }
        if (j.contains("trend")) c.trend = parse_trend(j["trend"], "trend");
        if (j.contains("renewal")) c.renewal = parse_renewal(j["renewal"], "renewal");
        if (j.contains("zeta_trend")) c.zeta_trend = parse_trend(j["zeta_trend"], "zeta_trend");
        if (j.contains("horizon")) {
            const auto& h = j["horizon"];
            check_keys(h, {"t", "h"}, "horizon");
            if (h.contains("t")) c.horizon_t = time_value(h["t"], "horizon.t");
            if (h.contains("h")) c.horizon_h = time_value(h["h"], "horizon.h");
        }
        if (j.contains("simulation")) {
            const auto& s = j["simulation"];
            check_keys(s, {"sims", "seed", "workers", "common_random_numbers"}, "simulation");
            c.sims = s.value("sims", c.sims);
            c.seed = s.value("seed", c.seed);
            c.workers = s.value("workers", 0u);
            c.common_random_numbers = s.value("common_random_numbers", true);
        }
        if (j.contains("risk_levels")) c.risk_levels = j["risk_levels"].get<std::vector<double>>();
        c.mixture_components = j.value("mixture_components", 2);
        require(c.mixture_components == 1 || c.mixture_components == 2, ErrorCode::Parse,
                "mixture_components must be 1 or 2");
        if (j.contains("bootstrap")) {
            const auto& b = j["bootstrap"];
            check_keys(b, {"scenarios", "resample", "delay_covariance_scale", "inflation_variance_scale"}, "bootstrap");
            c.bootstrap.scenarios = b.value("scenarios", c.bootstrap.scenarios);
            c.bootstrap.resample = b.value("resample", true);
            c.bootstrap.delay_covariance_scale = b.value("delay_covariance_scale", 1.0);
            c.bootstrap.inflation_variance_scale = b.value("inflation_variance_scale", 1.0);
        }
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            check_keys(g,
                       {"beta", "inflation_shock", "settlement_multiplier", "reporting_multiplier", "trend_gamma",
                        "dependence"},
                       "grid");
            const auto rates = [&](const char* key, std::vector<double>& out) {
                if (!g.contains(key)) return;
                for (const auto& v : g[key]) out.push_back(rate_value(v, std::string("grid.") + key));
            };
            rates("beta", c.grid.beta);
            rates("inflation_shock", c.grid.inflation_shock);
            if (g.contains("settlement_multiplier"))
                c.grid.settlement_multiplier = g["settlement_multiplier"].get<std::vector<double>>();
            if (g.contains("reporting_multiplier"))
                c.grid.reporting_multiplier = g["reporting_multiplier"].get<std::vector<double>>();
            if (g.contains("trend_gamma")) c.grid.trend_gamma = g["trend_gamma"].get<std::vector<double>>();
            if (g.contains("dependence"))
                for (const auto& d : g["dependence"]) c.grid.dependence.push_back(parse_dependence_mode(d.get<std::string>()));
        }
        if (j.contains("data")) {
            const auto& d = j["data"];
            check_keys(d, {"origin", "time_format", "delimiter"}, "data");
            c.ingest.origin = d.value("origin", c.ingest.origin);
            const auto tf = d.value("time_format", std::string("iso_date"));
            require(tf == "iso_date" || tf == "years", ErrorCode::Parse, "data.time_format must be 'iso_date' or 'years'");
            c.ingest.time_format = tf == "years" ? TimeFormat::Years : TimeFormat::IsoDate;
            const auto delim = d.value("delimiter", std::string(","));
            require(delim.size() == 1, ErrorCode::Parse, "data.delimiter must be one character");
            c.ingest.delimiter = delim[0];
        }
        require(c.sims >= 1, ErrorCode::Parse, "simulation.sims must be at least 1");
        for (double p : c.risk_levels) require(p > 0 && p < 1, ErrorCode::Parse, "risk levels must lie in (0, 1)");
        if (!c.grid.trend_gamma.empty())
            require(c.trend && c.trend->family == TrendFamily::Power, ErrorCode::Parse,
                    "grid.trend_gamma needs a power trend");
        return c;
    });
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, "config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

json ScenarioConfig::to_json() const {
    json j;
    j["valuation"] = time_json(valuation);
    json rates{{"beta1", rate_json(beta1)}, {"beta2", rate_json(beta2)}};
    if (alpha1) rates["alpha1"] = rate_json(*alpha1);
    if (alpha2) rates["alpha2"] = rate_json(*alpha2);
    j["rates"] = rates;
    j["dependence"] = dependence_mode_name(dependence);
    j["covariates"] = covariates;
    j["estimate_kappa"] = estimate_kappa;
    j["delay_multipliers"] = {{"reporting", reporting_multiplier}, {"settlement", settlement_multiplier}};
    if (trend) j["trend"] = trend_json(*trend);
    j["renewal"] = renewal_json(renewal);
    if (zeta_trend) j["zeta_trend"] = trend_json(*zeta_trend);
    j["horizon"] = {{"t", time_json(horizon_t)}, {"h", time_json(horizon_h)}};
    j["simulation"] = {{"sims", sims}, {"seed", seed}, {"common_random_numbers", common_random_numbers}};
    j["risk_levels"] = risk_levels;
    j["mixture_components"] = mixture_components;
    j["bootstrap"] = {{"scenarios", bootstrap.scenarios},
                      {"resample", bootstrap.resample},
                      {"delay_covariance_scale", bootstrap.delay_covariance_scale},
                      {"inflation_variance_scale", bootstrap.inflation_variance_scale}};
    json g = json::object();
    const auto rates_list = [](const std::vector<double>& v) {
        json a = json::array();
        for (double x : v) a.push_back(rate_json(x));
        return a;
    };
    if (!grid.beta.empty()) g["beta"] = rates_list(grid.beta);
    if (!grid.inflation_shock.empty()) g["inflation_shock"] = rates_list(grid.inflation_shock);
    if (!grid.settlement_multiplier.empty()) g["settlement_multiplier"] = grid.settlement_multiplier;
    if (!grid.reporting_multiplier.empty()) g["reporting_multiplier"] = grid.reporting_multiplier;
    if (!grid.trend_gamma.empty()) g["trend_gamma"] = grid.trend_gamma;
    if (!grid.dependence.empty()) {
        g["dependence"] = json::array();
        for (auto d : grid.dependence) g["dependence"].push_back(dependence_mode_name(d));
    }
    j["grid"] = g;
    j["data"] = {{"origin", ingest.origin},
                 {"time_format", ingest.time_format == TimeFormat::Years ? "years" : "iso_date"},
                 {"delimiter", std::string(1, ingest.delimiter)}};
    return j;
}

// ---------------------------------------------------------------------------
// Model bundle

json ModelBundle::to_json() const {
    json cov = json::array();
    for (int r = 0; r < 3; ++r) cov.push_back({settlement_log_covariance(r, 0), settlement_log_covariance(r, 1),
                                               settlement_log_covariance(r, 2)});
    json j{{"format", "atrp-model-bundle"},
           {"version", kBundleVersion},
           {"settlement", delay_json(settlement)},
           {"reporting", reporting ? delay_json(*reporting) : json(nullptr)},
           {"indemnity", severity_json(indemnity)},
           {"expense", severity_json(expense)},
           {"copula_theta", copula_theta ? json(*copula_theta) : json(nullptr)},
           {"inflation",
            {{"alpha1", alpha1}, {"alpha2", alpha2}, {"alpha1_variance", alpha1_variance},
             {"alpha2_variance", alpha2_variance}}},
           {"settlement_log_covariance", cov},
           {"diagnostics", diagnostics}};
    return j;
}

ModelBundle ModelBundle::from_json(const json& j) {
    return with_json_errors("model bundle", [&] {
        check_keys(j, {"format", "version", "settlement", "reporting", "indemnity", "expense", "copula_theta",
                       "inflation", "settlement_log_covariance", "diagnostics"},
                   "model bundle");
        require(j.value("format", std::string()) == "atrp-model-bundle", ErrorCode::Parse,
                "not a model bundle (format tag missing)");
        const int version = j.at("version").get<int>();
        require(version == kBundleVersion, ErrorCode::Parse,
                "model bundle version " + std::to_string(version) + " is not supported");
        ModelBundle b;
        b.settlement = parse_delay(j.at("settlement"), "settlement");
        if (j.contains("reporting") && !j["reporting"].is_null()) b.reporting = parse_delay(j["reporting"], "reporting");
        b.indemnity = parse_severity(j.at("indemnity"), "indemnity");
        b.expense = parse_severity(j.at("expense"), "expense");
        if (j.contains("copula_theta") && !j["copula_theta"].is_null()) b.copula_theta = j["copula_theta"].get<double>();
        if (j.contains("inflation")) {
            const auto& f = j["inflation"];
            check_keys(f, {"alpha1", "alpha2", "alpha1_variance", "alpha2_variance"}, "inflation");
            b.alpha1 = f.value("alpha1", 0.0);
            b.alpha2 = f.value("alpha2", 0.0);
            b.alpha1_variance = f.value("alpha1_variance", 0.0);
            b.alpha2_variance = f.value("alpha2_variance", 0.0);
        }
        if (j.contains("settlement_log_covariance")) {
            const auto rows = j["settlement_log_covariance"].get<std::vector<std::vector<double>>>();
            require(rows.size() == 3 && rows[0].size() == 3 && rows[1].size() == 3 && rows[2].size() == 3,
                    ErrorCode::Parse, "settlement_log_covariance must be 3x3");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) b.settlement_log_covariance(r, c) = rows[r][c];
        }
        if (j.contains("diagnostics")) b.diagnostics = j["diagnostics"];
        return b;
    });
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open model bundle '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, "model bundle '" + path + "': " + e.what());
    }
    return ModelBundle::from_json(j);
}

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::Io, "cannot write '" + path + "'");
    out << text;
    out.flush();
    require(out.good(), ErrorCode::Io, "failed writing '" + path + "'");
}

json fit_json(const FitDiagnostics& d) {
    json se = json::object();
    for (std::size_t k = 0; k < d.parameter_names.size(); ++k) se[d.parameter_names[k]] = d.standard_error(k);
    return {{"n", d.n}, {"log_likelihood", d.log_likelihood}, {"aic", d.aic}, {"bic", d.bic},
            {"converged", d.converged}, {"iterations", d.iterations}, {"standard_errors", se}};
}

}  // namespace

void save_bundle(const ModelBundle& b, const std::string& path) { write_file(path, b.to_json().dump(2) + "\n"); }

ModelBundle calibrate_bundle(const ClaimSet& claims, const ScenarioConfig& cfg) {
    const double t = cfg.valuation;
    std::vector<const ClaimRecord*> known, closed;
    for (const auto& c : claims) {
        if (c.report > t) continue;
        known.push_back(&c);
        if (c.settlement && *c.settlement <= t) closed.push_back(&c);
    }
    ModelBundle b;
    json warnings = json::array();

    // a claim closed by t is only seen when its delay fits before t
    std::vector<double> zetas, zeta_bounds;
    for (const auto* c : closed)
        if (*c->settlement > c->report) {
            zetas.push_back(*c->settlement - c->report);
            zeta_bounds.push_back(t - c->report);
        }
    const auto sfit = fit_generalized_gamma(zetas, zeta_bounds);
    b.settlement = sfit.params;
    b.settlement_log_covariance = sfit.log_covariance;
    b.diagnostics["settlement"] = fit_json(sfit.diagnostics);
    if (zetas.size() < closed.size())
        warnings.push_back(std::to_string(closed.size() - zetas.size()) +
                           " closed claims with zero settlement delay left out of the delay fit");

    std::vector<double> xis, xi_bounds;
    for (const auto* c : known)
        if (c->reporting_delay() > 0) {
            xis.push_back(c->reporting_delay());
            xi_bounds.push_back(t - c->occurrence);
        }
    if (xis.size() >= 30) {
        const auto rfit = fit_generalized_gamma(xis, xi_bounds);
        b.reporting = rfit.params;
        b.diagnostics["reporting"] = fit_json(rfit.diagnostics);
    } else {
        warnings.push_back("fewer than 30 positive reporting delays; no reporting-delay model fitted");
    }

    std::vector<double> ind, exp, when;
    for (const auto* c : closed) {
        ind.push_back(c->indemnity);
        exp.push_back(c->expense);
        when.push_back(*c->settlement);
    }
    const auto f1 = fit_inflation(ind, when);
    const auto f2 = fit_inflation(exp, when);
    b.alpha1 = f1.alpha;
    b.alpha2 = f2.alpha;
    b.alpha1_variance = f1.variance;
    b.alpha2_variance = f2.variance;
    b.diagnostics["inflation"] = {{"alpha1", f1.alpha}, {"alpha1_se", std::sqrt(f1.variance)},
                                  {"alpha1_dispersion", f1.dispersion}, {"alpha2", f2.alpha},
                                  {"alpha2_se", std::sqrt(f2.variance)}, {"alpha2_dispersion", f2.dispersion}};

    std::vector<SeverityObservation> ox, oy;
    for (const auto* c : closed) {
        const double zeta = *c->settlement - c->report;
        ox.push_back({c->indemnity * std::exp(-b.alpha1 * *c->settlement), zeta, c->injury_class});
        oy.push_back({c->expense * std::exp(-b.alpha2 * *c->settlement), zeta, c->injury_class});
    }
    SeverityFitOptions o;
    o.estimate_kappa = cfg.estimate_kappa;
    o.covariates = cfg.covariates;
    const auto sx = fit_severity_em(ox, o);
    const auto sy = fit_severity_em(oy, o);
    b.indemnity = sx.model;
    b.expense = sy.model;
    const auto sev_json = [&](const SeverityFit& s) {
        json d = fit_json(s.diagnostics);
        d["monotone"] = s.monotone;
        d["restarts"] = s.restarts;
        d["mixture_defined"] = s.mixture_defined;
        return d;
    };
    b.diagnostics["indemnity"] = sev_json(sx);
    b.diagnostics["expense"] = sev_json(sy);

    // Frank copula between the delay-adjusted severities
    std::vector<double> u, v;
    for (std::size_t k = 0; k < ox.size(); ++k) {
        u.push_back(ox[k].amount * std::exp(-b.indemnity.log_shift(ox[k].zeta, o.covariates ? ox[k].injury_class : std::nullopt)));
        v.push_back(oy[k].amount * std::exp(-b.expense.log_shift(oy[k].zeta, o.covariates ? oy[k].injury_class : std::nullopt)));
    }
    try {
        const auto cf = fit_frank_itau(u, v);
        if (cf.theta != 0.0) b.copula_theta = cf.theta;
        b.diagnostics["copula"] = {{"tau", cf.tau.tau}, {"tau_se", cf.tau.se}, {"theta", cf.theta},
                                   {"theta_se", cf.theta_se}, {"near_independence", cf.near_independence}};
        if (cf.near_independence) warnings.push_back("Kendall tau is within two standard errors of zero");
    } catch (const Error& e) {
        warnings.push_back(std::string("copula not fitted: ") + e.what());
    }
    b.diagnostics["counts"] = {{"claims", claims.size()}, {"known_at_valuation", known.size()},
                               {"closed_at_valuation", closed.size()}};
    b.diagnostics["warnings"] = warnings;
    return b;
}

// ---------------------------------------------------------------------------
// Scenario runs

namespace {

const char* task_name(unsigned bit) {
    switch (bit) {
        case kTaskReserve: return "reserve";
        case kTaskSimulate: return "simulate";
        case kTaskIbnr: return "ibnr";
        case kTaskUpr: return "upr";
        case kTaskBootstrap: return "bootstrap";
        case kTaskTrpSettlement: return "trp_settlement";
        default: return "unknown";
    }
}

unsigned task_bit(const std::string& name) {
    for (unsigned bit = 1; bit <= kTaskTrpSettlement; bit <<= 1)
        if (name == task_name(bit)) return bit;
    fail(ErrorCode::Parse, "unknown task '" + name + "'");
}

json summary_json(const RiskSummary& s) {
    json j{{"n", s.n},         {"mean", s.mean},   {"sd", s.sd},
           {"cv", s.cv},       {"mean_se", s.n > 0 ? s.sd / std::sqrt(double(s.n)) : 0.0},
           {"levels", s.levels}, {"var", s.var}, {"tvar", s.tvar}};
    const bool rc = std::any_of(s.levels.begin(), s.levels.end(), [](double p) { return std::abs(p - 0.95) < 1e-12; }) &&
                    std::any_of(s.levels.begin(), s.levels.end(), [](double p) { return std::abs(p - 0.60) < 1e-12; });
    if (rc) j["risk_capital"] = risk_capital(s);
    return j;
}

struct GridPoint {
    std::vector<std::pair<std::string, double>> coords;
    FinancialAssumptions fa;
    double settlement_multiplier = 1.0;
    double reporting_multiplier = 1.0;
    std::optional<TrendSpec> trend;
    DependenceMode dependence = DependenceMode::KappaCoupled;
};

std::vector<GridPoint> expand_grid(const ScenarioConfig& cfg, const ModelBundle* bundle) {
    GridPoint base;
    base.fa.alpha1 = cfg.alpha1 ? *cfg.alpha1 : (bundle ? bundle->alpha1 : 0.0);
    base.fa.alpha2 = cfg.alpha2 ? *cfg.alpha2 : (bundle ? bundle->alpha2 : 0.0);
    base.fa.beta1 = cfg.beta1;
    base.fa.beta2 = cfg.beta2;
    base.settlement_multiplier = cfg.settlement_multiplier;
    base.reporting_multiplier = cfg.reporting_multiplier;
    base.trend = cfg.trend;
    base.dependence = cfg.dependence;

    const auto& g = cfg.grid;
    std::vector<GridPoint> points{base};
    const auto axis = [&](const std::vector<double>& values, const char* name, auto apply) {
        if (values.empty()) return;
        std::vector<GridPoint> next;
        for (const auto& p : points)
            for (double v : values) {
                GridPoint q = p;
                q.coords.emplace_back(name, v);
                apply(q, v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    };
    axis(g.beta, "beta", [](GridPoint& q, double v) { q.fa.beta1 = q.fa.beta2 = v; });
    axis(g.inflation_shock, "inflation_shock", [&](GridPoint& q, double v) {
        q.fa.alpha1 = base.fa.alpha1 + v;
        q.fa.alpha2 = base.fa.alpha2 + v;
    });
    axis(g.settlement_multiplier, "settlement_multiplier",
         [](GridPoint& q, double v) { q.settlement_multiplier = v; });
    axis(g.reporting_multiplier, "reporting_multiplier", [](GridPoint& q, double v) { q.reporting_multiplier = v; });
    axis(g.trend_gamma, "trend_gamma", [](GridPoint& q, double v) { q.trend->gamma = v; });
    if (!g.dependence.empty()) {
        std::vector<double> idx;
        for (std::size_t k = 0; k < g.dependence.size(); ++k) idx.push_back(double(k));
        axis(idx, "dependence", [&](GridPoint& q, double v) { q.dependence = g.dependence[std::size_t(v)]; });
    }
    return points;
}

std::string describe(const GridPoint& p) {
    if (p.coords.empty()) return "scenario";
    std::string s = "scenario {";
    for (std::size_t k = 0; k < p.coords.size(); ++k) {
        if (k) s += ", ";
        s += p.coords[k].first + "=" + (p.coords[k].first == "dependence" ? dependence_mode_name(p.dependence)
                                                                          : fmt(p.coords[k].second));
    }
    return s + "}";
}

ReserveModels models_for(const ModelBundle& b, const GridPoint& p, const ScenarioConfig& cfg) {
    ReserveModels m;
    m.settlement = b.settlement;
    m.indemnity = b.indemnity;
    m.expense = b.expense;
    m.dependence = p.dependence;
    m.use_covariates = cfg.covariates;
    if (b.copula_theta) m.copula = FrankCopula{*b.copula_theta};
    if (m.dependence == DependenceMode::FrankCopula)
        require(m.copula.has_value(), ErrorCode::InvalidArgument,
                "frank_copula mode needs a copula parameter in the model bundle");
    return m;
}

json portfolio_json(const RbnsInfoSet& info) {
    json years = json::array();
    for (int i = 2; i <= info.valuation; ++i) years.push_back({{"year", i}, {"open_claims", info.count(i)}});
    return {{"valuation", info.valuation},
            {"open_claims", info.total()},
            {"by_year", years},
            {"reported_after_valuation", info.diagnostics.reported_after_valuation},
            {"settled_by_valuation", info.diagnostics.settled_by_valuation},
            {"first_year_open", info.diagnostics.first_year_open}};
}

}  // namespace

ReserveReport run_scenario(const ScenarioConfig& cfg, const ScenarioInputs& in, unsigned tasks) {
    require(tasks != 0, ErrorCode::InvalidArgument, "no tasks requested");
    std::optional<ModelBundle> fitted;
    const ModelBundle* bundle = in.bundle;
    if (!bundle) {
        require(in.claims != nullptr, ErrorCode::InvalidArgument, "a model bundle or a claims file is required");
        fitted = calibrate_bundle(*in.claims, cfg);
        bundle = &*fitted;
    }
    const bool needs_claims = tasks & (kTaskReserve | kTaskSimulate | kTaskBootstrap | kTaskTrpSettlement);
    require(!needs_claims || in.claims, ErrorCode::InvalidArgument, "reserve tasks need a claims file");

    ReserveReport report;
    report.seed = cfg.seed;
    report.sims = cfg.sims;
    report.tasks = tasks;
    report.config = cfg.to_json();
    std::optional<RbnsInfoSet> info;
    std::vector<ClaimRecord> closed;
    if (in.claims) {
        info = build_info_sets(*in.claims, cfg.valuation);
        report.portfolio = portfolio_json(*info);
        for (const auto& c : *in.claims)
            if (c.report <= cfg.valuation && c.settlement && *c.settlement <= cfg.valuation) closed.push_back(c);
    }

    const auto points = expand_grid(cfg, bundle);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        ScenarioResult r;
        r.coordinates = p.coords;
        r.dependence = dependence_mode_name(p.dependence);
        std::uint64_t key = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (k + 1));
        SimConfig sim;
        sim.n_sims = cfg.sims;
        sim.seed = cfg.common_random_numbers ? cfg.seed : splitmix64(key);
        sim.workers = cfg.workers;
        sim.reporting_multiplier = p.reporting_multiplier;
        sim.settlement_multiplier = p.settlement_multiplier;
        try {
            p.fa.validate();
            const ReserveModels models = needs_claims || (tasks & (kTaskIbnr | kTaskUpr)) ? models_for(*bundle, p, cfg)
                                                                                         : ReserveModels{};
            if (tasks & kTaskReserve) {
                ReserveModels m = models;
                m.settlement = models.settlement.scaled(p.settlement_multiplier);
                const RbnsMoments mom(*info, m, p.fa);
                json cells = json::array();
                for (const auto& c : mom.cells()) cells.push_back({{"i", c.i}, {"j", c.j}, {"mean", c.mean}, {"sd", c.sd}});
                r.reserve = {{"valuation", info->valuation},
                             {"cells", cells},
                             {"total_mean", mom.total_mean()},
                             {"total_sd", mom.total_sd()},
                             {"total_mean_whole_window", mom.total_mean_whole_window()},
                             {"variance_by_claim", mom.total_variance_by_claim()}};
                for (const auto& w : mom.warnings()) r.warnings.push_back(w);
            }
            std::optional<double> simulated_sd;
            if (tasks & kTaskSimulate) {
                const auto s = simulate_rbns(*info, models, p.fa, sim);
                const auto rs = risk_measures(s.totals, cfg.risk_levels);
                simulated_sd = rs.sd;
                r.simulated = summary_json(rs);
                if (s.totals.size() >= 1000) {
                    const auto mix = fit_normal_mixture(s.totals, cfg.mixture_components);
                    json var = json::array(), tvar = json::array();
                    for (double lv : cfg.risk_levels) {
                        var.push_back(mix.value_at_risk(lv));
                        tvar.push_back(mix.tail_value_at_risk(lv));
                    }
                    r.simulated["mixture"] = {{"weights", mix.weights}, {"means", mix.means}, {"sds", mix.sds},
                                              {"mean", mix.mean()}, {"sd", mix.sd()},
                                              {"mean_rel_diff", std::abs(mix.mean() - rs.mean) / std::abs(rs.mean)},
                                              {"sd_rel_diff", std::abs(mix.sd() - rs.sd) / rs.sd},
                                              {"var", var}, {"tvar", tvar},
                                              {"log_likelihood", mix.diagnostics.log_likelihood},
                                              {"converged", mix.diagnostics.converged}};
                }
                for (const auto& w : s.warnings)
                    if (!(tasks & kTaskReserve)) r.warnings.push_back(w);
            }
            if (tasks & (kTaskIbnr | kTaskUpr)) {
                require(p.trend.has_value(), ErrorCode::InvalidArgument, "IBNR/UPR need an occurrence trend in the config");
                require(bundle->reporting.has_value(), ErrorCode::InvalidArgument,
                        "IBNR/UPR need a reporting-delay model in the bundle");
                require(cfg.horizon_t > 0, ErrorCode::InvalidArgument, "IBNR/UPR need horizon.t > 0");
                ExposureModels em;
                em.trend = *p.trend;
                em.renewal = cfg.renewal;
                em.reporting = *bundle->reporting;
                em.settlement = bundle->settlement;
                em.indemnity = bundle->indemnity;
                em.expense = bundle->expense;
                em.dependence = p.dependence;
                em.copula = models.copula;
                FinancialAssumptions efa = p.fa;
                efa.valuation_time = 0.0;
                SimConfig es = sim;
                es.horizon = cfg.horizon_t;
                const auto at_t = simulate_exposure(em, efa, es);
                const auto mean = [](const std::vector<double>& v) {
                    double s = 0.0;
                    for (double x : v) s += x;
                    return s / double(v.size());
                };
                if (tasks & kTaskIbnr) {
                    const auto pr = ibnr_proportions(at_t);
                    r.ibnr = {{"horizon", cfg.horizon_t}, {"count_based", pr.count_based},
                              {"cost_based", pr.cost_based}, {"mean_n_occ", mean(at_t.n_occ)},
                              {"mean_n_tc", mean(at_t.n_tc)}, {"mean_z_occ", mean(at_t.z_occ)},
                              {"mean_z_cm", mean(at_t.z_cm)}, {"mean_z_tc", mean(at_t.z_tc)},
                              {"saturated_paths", at_t.saturated_paths}};
                }
                if (tasks & kTaskUpr) {
                    require(cfg.horizon_h > 0, ErrorCode::InvalidArgument, "UPR needs horizon.h > 0");
                    SimConfig later = es;
                    later.horizon = cfg.horizon_t + cfg.horizon_h;
                    const auto at_th = simulate_exposure(em, efa, later);
                    const auto pr = upr_proportions(at_t, at_th);
                    r.upr = {{"t", cfg.horizon_t}, {"h", cfg.horizon_h}, {"count_based", pr.count_based},
                             {"cost_based", pr.cost_based}, {"mean_n_occ_t", mean(at_t.n_occ)},
                             {"mean_n_occ_t_plus_h", mean(at_th.n_occ)}, {"saturated_paths", at_th.saturated_paths}};
                }
            }
            if (tasks & kTaskTrpSettlement) {
                require(cfg.zeta_trend.has_value(), ErrorCode::InvalidArgument,
                        "dependent settlement delays need zeta_trend in the config");
                const auto* gg = models.settlement.generalized_gamma();
                require(gg != nullptr, ErrorCode::Unsupported, "dependent settlement delays need a generalized gamma law");
                const auto s = simulate_trp_settlement(*info, models, p.fa, *cfg.zeta_trend,
                                                       RenewalDistribution::generalized_gamma(*gg), sim);
                r.trp_settlement = summary_json(risk_measures(s.totals, cfg.risk_levels));
            }
            if (tasks & kTaskBootstrap) {
                BootstrapInputs bi;
                bi.closed_claims = closed;
                bi.base = models;
                bi.fa = p.fa;
                bi.delay_log_covariance = bundle->settlement_log_covariance;
                bi.alpha1_variance = bundle->alpha1_variance;
                bi.alpha2_variance = bundle->alpha2_variance;
                BootstrapOptions bo;
                bo.scenarios = cfg.bootstrap.scenarios;
                bo.resample = cfg.bootstrap.resample;
                bo.delay_covariance_scale = cfg.bootstrap.delay_covariance_scale;
                bo.inflation_variance_scale = cfg.bootstrap.inflation_variance_scale;
                const auto br = bootstrap_parameter_uncertainty(*info, bi, bo, sim);
                const auto rs = risk_measures(br.totals, cfg.risk_levels);
                r.bootstrap = summary_json(rs);
                r.bootstrap["requested"] = br.requested;
                r.bootstrap["failures"] = br.failures;
                if (simulated_sd && *simulated_sd > 0) r.bootstrap["sd_increase"] = rs.sd / *simulated_sd - 1.0;
                for (std::size_t w = 0; w < br.warnings.size(); ++w)
                    if (br.warnings[w].rfind("scenario ", 0) == 0) r.warnings.push_back(br.warnings[w]);
            }
        } catch (const Error& e) {
            fail(e.code(), describe(p) + ": " + e.what());
        }
        report.scenarios.push_back(std::move(r));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Reports

json ReserveReport::to_json() const {
    json tasks_json = json::array();
    for (unsigned bit = 1; bit <= kTaskTrpSettlement; bit <<= 1)
        if (tasks & bit) tasks_json.push_back(task_name(bit));
    json sc = json::array();
    for (const auto& s : scenarios) {
        json coords = json::array();
        for (const auto& [k, v] : s.coordinates) coords.push_back({k, v});
        json j{{"coordinates", coords}, {"dependence", s.dependence}, {"warnings", s.warnings}};
        if (!s.reserve.is_null()) j["reserve"] = s.reserve;
        if (!s.simulated.is_null()) j["simulated"] = s.simulated;
        if (!s.ibnr.is_null()) j["ibnr"] = s.ibnr;
        if (!s.upr.is_null()) j["upr"] = s.upr;
        if (!s.trp_settlement.is_null()) j["trp_settlement"] = s.trp_settlement;
        if (!s.bootstrap.is_null()) j["bootstrap"] = s.bootstrap;
        sc.push_back(j);
    }
    return {{"format", "atrp-reserve-report"}, {"format_version", format_version}, {"seed", seed},
            {"sims", sims}, {"tasks", tasks_json}, {"config", config}, {"portfolio", portfolio},
            {"scenarios", sc}};
}

ReserveReport ReserveReport::from_json(const json& j) {
    return with_json_errors("report", [&] {
        require(j.value("format", std::string()) == "atrp-reserve-report", ErrorCode::Parse,
                "not a reserve report (format tag missing)");
        ReserveReport r;
        r.format_version = j.at("format_version").get<int>();
        require(r.format_version == 1, ErrorCode::Parse, "unsupported report version");
        r.seed = j.at("seed").get<std::uint64_t>();
        r.sims = j.at("sims").get<std::size_t>();
        for (const auto& t : j.at("tasks")) r.tasks |= task_bit(t.get<std::string>());
        r.config = j.at("config");
        r.portfolio = j.value("portfolio", json());
        for (const auto& s : j.at("scenarios")) {
            ScenarioResult out;
            for (const auto& c : s.at("coordinates"))
                out.coordinates.emplace_back(c.at(0).get<std::string>(), c.at(1).get<double>());
            out.dependence = s.at("dependence").get<std::string>();
            out.warnings = s.at("warnings").get<std::vector<std::string>>();
            out.reserve = s.value("reserve", json());
            out.simulated = s.value("simulated", json());
            out.ibnr = s.value("ibnr", json());
            out.upr = s.value("upr", json());
            out.trp_settlement = s.value("trp_settlement", json());
            out.bootstrap = s.value("bootstrap", json());
            r.scenarios.push_back(std::move(out));
        }
        return r;
    });
}

ReserveReport load_report(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open report '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, "report '" + path + "': " + e.what());
    }
    return ReserveReport::from_json(j);
}

ReportFormat parse_report_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "text") return ReportFormat::Text;
    fail(ErrorCode::InvalidArgument, "report format must be json, csv or text");
}

namespace {

std::string coords_label(const ScenarioResult& s) {
    std::string out;
    for (const auto& [k, v] : s.coordinates) {
        if (!out.empty()) out += " ";
        out += k + "=" + (k == "dependence" ? s.dependence : fmt(v));
    }
    return out.empty() ? "base" : out;
}

double jnum(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_number()) return std::nan("");
    return j[key].get<double>();
}

// Lower-triangle table: rows i = 1..t, columns j = 1..t, blank where i + j <= t + 1.
std::string triangle_csv(const json& reserve, const char* field) {
    const int t = reserve.at("valuation").get<int>();
    std::vector<std::vector<std::string>> grid(t + 1, std::vector<std::string>(t + 1));
    for (const auto& c : reserve.at("cells")) grid[c.at("i").get<int>()][c.at("j").get<int>()] = fmt(c.at(field).get<double>(), 17);
    std::ostringstream out;
    out << "i";
    for (int j = 1; j <= t; ++j) out << ",j" << j;
    out << "\n";
    for (int i = 1; i <= t; ++i) {
        out << i;
        for (int j = 1; j <= t; ++j) out << "," << (i + j <= t + 1 ? "" : grid[i][j]);
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string render_text(const ReserveReport& r) {
    std::ostringstream out;
    out << "ATRP reserve report\n";
    out << "seed " << r.seed << ", simulations " << r.sims << "\n";
    if (r.portfolio.is_object())
        out << "valuation t = " << r.portfolio.value("valuation", 0) << ", open claims "
            << r.portfolio.value("open_claims", 0) << "\n";
    for (std::size_t k = 0; k < r.scenarios.size(); ++k) {
        const auto& s = r.scenarios[k];
        out << "\n[" << k << "] " << coords_label(s) << "  (" << s.dependence << ")\n";
        if (s.reserve.is_object()) {
            const int t = s.reserve.at("valuation").get<int>();
            out << "  cell means (rows i, columns j)\n";
            for (const char* field : {"mean", "sd"}) {
                if (std::string(field) == "sd") out << "  cell standard deviations\n";
                std::vector<std::vector<double>> g(t + 1, std::vector<double>(t + 1, std::nan("")));
                for (const auto& c : s.reserve["cells"]) g[c["i"].get<int>()][c["j"].get<int>()] = c[field].get<double>();
                out << "  " << std::setw(4) << "i";
                for (int j = 1; j <= t; ++j) out << std::setw(16) << ("j=" + std::to_string(j));
                out << "\n";
                for (int i = 2; i <= t; ++i) {
                    out << "  " << std::setw(4) << i;
                    for (int j = 1; j <= t; ++j)
                        out << std::setw(16) << (i + j <= t + 1 ? std::string() : fmt(g[i][j], 10));
                    out << "\n";
                }
            }
            out << "  total mean " << fmt(jnum(s.reserve, "total_mean")) << ", total sd "
                << fmt(jnum(s.reserve, "total_sd")) << "\n";
        }
        const auto summary = [&](const char* title, const json& j) {
            if (!j.is_object()) return;
            out << "  " << title << ": n " << j.value("n", 0) << ", mean " << fmt(jnum(j, "mean")) << ", sd "
                << fmt(jnum(j, "sd")) << ", cv " << fmt(jnum(j, "cv"), 6) << "\n";
            const auto levels = j["levels"].get<std::vector<double>>();
            for (std::size_t l = 0; l < levels.size(); ++l)
                out << "    level " << std::setw(5) << fmt(levels[l], 4) << "  VaR " << std::setw(16)
                    << fmt(j["var"][l].get<double>()) << "  TVaR " << std::setw(16) << fmt(j["tvar"][l].get<double>())
                    << "\n";
            if (j.contains("risk_capital")) out << "    risk capital " << fmt(jnum(j, "risk_capital")) << "\n";
        };
        summary("simulated", s.simulated);
        if (s.simulated.is_object() && s.simulated.contains("mixture")) {
            const auto& m = s.simulated["mixture"];
            out << "  normal mixture: mean " << fmt(jnum(m, "mean")) << " (rel diff " << fmt(jnum(m, "mean_rel_diff"), 4)
                << "), sd " << fmt(jnum(m, "sd")) << " (rel diff " << fmt(jnum(m, "sd_rel_diff"), 4) << ")\n";
        }
        summary("dependent settlement delays", s.trp_settlement);
        summary("bootstrap", s.bootstrap);
        if (s.ibnr.is_object())
            out << "  IBNR proportion: count " << fmt(jnum(s.ibnr, "count_based"), 8) << ", cost "
                << fmt(jnum(s.ibnr, "cost_based"), 8) << "\n";
        if (s.upr.is_object())
            out << "  UPR proportion: count " << fmt(jnum(s.upr, "count_based"), 8) << ", cost "
                << fmt(jnum(s.upr, "cost_based"), 8) << "\n";
        for (const auto& w : s.warnings) out << "  warning: " << w << "\n";
    }
    return out.str();
}

void emit_report(const ReserveReport& r, ReportFormat format, const std::string& path) {
    switch (format) {
        case ReportFormat::Json: write_file(path, r.to_json().dump(2) + "\n"); return;
        case ReportFormat::Text: write_file(path, render_text(r)); return;
        case ReportFormat::Csv: break;
    }
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    require(!ec, ErrorCode::Io, "cannot create directory '" + path + "': " + ec.message());
    std::ostringstream summary;
    summary << "scenario,coordinates,dependence,total_mean,total_sd,sim_mean,sim_sd,risk_capital,"
               "ibnr_count,ibnr_cost,upr_count,upr_cost,bootstrap_sd\n";
    for (std::size_t k = 0; k < r.scenarios.size(); ++k) {
        const auto& s = r.scenarios[k];
        const auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt(v, 17); };
        summary << k << "," << coords_label(s) << "," << s.dependence << "," << cell(jnum(s.reserve, "total_mean"))
                << "," << cell(jnum(s.reserve, "total_sd")) << "," << cell(jnum(s.simulated, "mean")) << ","
                << cell(jnum(s.simulated, "sd")) << "," << cell(jnum(s.simulated, "risk_capital")) << ","
                << cell(jnum(s.ibnr, "count_based")) << "," << cell(jnum(s.ibnr, "cost_based")) << ","
                << cell(jnum(s.upr, "count_based")) << "," << cell(jnum(s.upr, "cost_based")) << ","
                << cell(jnum(s.bootstrap, "sd")) << "\n";
        if (s.reserve.is_object()) {
            write_file(path + "/cell_mean_" + std::to_string(k) + ".csv", triangle_csv(s.reserve, "mean"));
            write_file(path + "/cell_sd_" + std::to_string(k) + ".csv", triangle_csv(s.reserve, "sd"));
        }
    }
    write_file(path + "/summary.csv", summary.str());
}

}  // namespace atrp
