// Acceptance run: one PASS/FAIL line per criterion.
//
//   atrp_acceptance            all criteria
//   atrp_acceptance 3 8 9      a subset
//
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atrp/calibration.hpp"
#include "atrp/montecarlo.hpp"
#include "atrp/reserving.hpp"
#include "atrp/riskmetrics.hpp"
#include "atrp/scenario.hpp"
#include "support.hpp"

using namespace atrp;
using namespace atrp::testing;
using nlohmann::json;

namespace {

const std::string kSource = ATRP_SOURCE_DIR;
const std::string kCli = ATRP_CLI_PATH;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Asymptotic Kolmogorov survival P(K > x).
double kolmogorov_q(double x) {
    if (x < 1e-3) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
        p += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

struct Reference {
    ScenarioConfig cfg;
    ClaimSet claims;
    ModelBundle given;
    ModelBundle calibrated;
};

const Reference& reference() {
    static const Reference r = [] {
        Reference x;
        x.cfg = load_config(kSource + "/configs/reference.json");
        x.claims = ingest_claims(kSource + "/data/reference_claims.csv", x.cfg.ingest).claims;
        x.given = load_bundle(kSource + "/configs/reference_bundle.json");
        x.calibrated = load_bundle(kSource + "/configs/reference_calibrated_bundle.json");
        return x;
    }();
    return r;
}

ReserveReport run(const ScenarioConfig& cfg, const ClaimSet& claims, const ModelBundle& bundle, unsigned tasks) {
    ScenarioInputs in;
    in.claims = &claims;
    in.bundle = &bundle;
    return run_scenario(cfg, in, tasks);
}

// ---------------------------------------------------------------------------

void criterion1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load_config(kSource + "/configs/synthetic_portfolio.json");
    const auto data = ingest_claims(kSource + "/data/synthetic_portfolio.csv", cfg.ingest);
    const auto info = build_info_sets(data.claims, cfg.valuation);
    int years = 0;
    for (int i = 0; i <= info.valuation; ++i) years += info.count(i) > 0;
    o.expect(years == 3 && info.total() <= 10 && info.total() > 0, "portfolio shape");

    const auto models = reference_models();
    const auto fa = reference_rates(cfg.valuation, 0.06);
    const RbnsMoments mom(info, models, fa);
    SimConfig sim;
    sim.n_sims = 1000000;
    sim.seed = cfg.seed;
    const auto s = simulate_rbns(info, models, fa, sim);
    const auto mc = sample_moments(s.totals);
    const double se = mc.sd / std::sqrt(double(sim.n_sims));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double z = std::abs(mom.total_mean() - mc.mean) / se;
    const double sd_rel = rel_diff(mom.total_sd(), mc.sd);
    o.expect(z <= 3.0, "mean within 3 MC se");
    o.expect(sd_rel <= 0.05, "sd within 5%");
    o.expect(secs < 120.0, "runtime under 2 minutes");
    o.detail << info.total() << " open claims in " << years << " years; quadrature mean " << fmt(mom.total_mean(), 9)
             << " vs MC " << fmt(mc.mean, 9) << " (" << fmt(z, 3) << " se); sd " << fmt(mom.total_sd(), 9) << " vs "
             << fmt(mc.sd, 9) << " (" << fmt(100 * sd_rel, 3) << "%); " << fmt(secs, 3) << " s";
}

void criterion2(Outcome& o) {
    const double zetas[] = {0.0, 0.5, 2.0};
    const double ex[] = {5932.29846202704, 27611.2570141977, 41513.8656744116};
    const double ex2[] = {323373599.925556, 7005367654.1256, 15835979366.1922};
    const double ey[] = {2.43773029635588, 1497.22576266089, 8216.78269200368};
    const double ey2[] = {14.7151194811907, 5550946.81012874, 167184528.9684};
    const double frank_xy = 19109.843331;
    const auto x = ref_indemnity(), y = ref_expense();
    const FrankCopula cop{kTheta};
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double z = zetas[k];
        const double shift = std::pow(1 + kDaysPerYear * z, x.kappa + y.kappa);
        const double got[] = {conditional_severity_moment(x, z, std::nullopt, 1),
                              conditional_severity_moment(x, z, std::nullopt, 2),
                              conditional_severity_moment(y, z, std::nullopt, 1),
                              conditional_severity_moment(y, z, std::nullopt, 2),
                              conditional_cross_moment(x, y, z, std::nullopt),
                              conditional_cross_moment(x, y, z, std::nullopt, cop)};
        const double want[] = {ex[k], ex2[k], ey[k], ey2[k], ex[k] * ey[k], frank_xy * shift};
        for (int q = 0; q < 6; ++q) worst = std::max(worst, rel_diff(got[q], want[q]));
    }
    o.expect(worst <= 1e-6, "relative error 1e-6");
    o.detail << "orders 1-2 and cross moments (independent and Frank) at zeta 0, 0.5, 2; worst relative error "
             << fmt(worst, 3);
}

void criterion3(Outcome& o) {
    const auto& ref = reference();
    ExposureModels em;
    em.trend = *ref.cfg.trend;
    em.renewal = ref.cfg.renewal;
    em.reporting = *ref.given.reporting;
    em.settlement = ref.given.settlement;
    em.indemnity = ref.given.indemnity;
    em.expense = ref.given.expense;
    FinancialAssumptions fa = reference_rates(0.0);
    SimConfig base;
    base.n_sims = 20000;
    base.seed = ref.cfg.seed;
    base.horizon = 1.0;
    base.extension = 1.0;

    const auto at = [&](const FinancialAssumptions& f, SimConfig c, double horizon) {
        c.horizon = horizon;
        return simulate_exposure(em, f, c);
    };
    const auto b_t = at(fa, base, 1.0), b_th = at(fa, base, 2.0);
    const auto ibnr0 = ibnr_proportions(b_t).count_based;
    const auto upr0 = upr_proportions(b_t, b_th).count_based;
    int checks = 0;

    for (double shock : {-0.05, -0.01, 0.01, 0.05}) {
        FinancialAssumptions f = fa;
        f.alpha1 += shock;
        f.alpha2 += shock;
        const auto s_t = at(f, base, 1.0), s_th = at(f, base, 2.0);
        o.expect(ibnr_proportions(s_t).count_based == ibnr0, "IBNR under inflation " + fmt(shock));
        o.expect(s_t.n_tc == b_t.n_tc && s_t.n_occ == b_t.n_occ, "IBNR counts under inflation " + fmt(shock));
        o.expect(upr_proportions(s_t, s_th).count_based == upr0, "UPR under inflation " + fmt(shock));
        checks += 3;
    }
    for (double m : {0.5, 2.0}) {
        SimConfig c = base;
        c.settlement_multiplier = m;
        const auto s_t = at(fa, c, 1.0), s_th = at(fa, c, 2.0);
        o.expect(ibnr_proportions(s_t).count_based == ibnr0, "IBNR under settlement x" + fmt(m));
        o.expect(s_t.n_tc == b_t.n_tc, "IBNR counts under settlement x" + fmt(m));
        o.expect(upr_proportions(s_t, s_th).count_based == upr0, "UPR under settlement x" + fmt(m));
        SimConfig r = base;
        r.reporting_multiplier = m;
        const auto r_t = at(fa, r, 1.0), r_th = at(fa, r, 2.0);
        o.expect(upr_proportions(r_t, r_th).count_based == upr0, "UPR under reporting x" + fmt(m));
        o.expect(r_th.n_occ == b_th.n_occ, "occurrence counts under reporting x" + fmt(m));
        checks += 5;
    }
    o.detail << checks << " bit-equality checks at 20000 paths; count IBNR " << fmt(ibnr0) << ", count UPR "
             << fmt(upr0);
}

const ReserveReport& beta_grid() {
    static const ReserveReport r = [] {
        const auto& ref = reference();
        const auto cfg = load_config(kSource + "/configs/reference_beta_grid.json");
        return run(cfg, ref.claims, ref.given, kTaskReserve | kTaskSimulate);
    }();
    return r;
}

void criterion4(Outcome& o) {
    const auto& ref = reference();
    const auto& g = beta_grid();
    std::vector<double> means;
    for (const auto& s : g.scenarios) means.push_back(s.simulated["mean"].get<double>());
    bool dec = means.size() == 4;
    for (std::size_t k = 1; k < means.size(); ++k) dec = dec && means[k] < means[k - 1];
    o.expect(dec, "simulated mean strictly decreasing in beta");
    o.detail << "beta 0/2/4/6%: mean";
    for (double m : means) o.detail << " " << fmt(m, 8);

    const auto icfg = load_config(kSource + "/configs/ibnr_trend_grid.json");
    const auto ir = run(icfg, ref.claims, ref.given, kTaskIbnr);
    std::vector<double> props;
    for (const auto& s : ir.scenarios) props.push_back(s.ibnr["count_based"].get<double>());
    bool inc = props.size() == 3;
    for (std::size_t k = 1; k < props.size(); ++k) inc = inc && props[k] > props[k - 1];
    o.expect(inc, "count IBNR strictly increasing in gamma");
    o.detail << "; gamma 0.5/1/1.5: count IBNR";
    for (double p : props) o.detail << " " << fmt(p, 4);
    o.detail << " (exact 0.6583/0.7330/0.7801)";

    const auto info = build_info_sets(ref.claims, ref.cfg.valuation);
    ReserveModels models;
    models.settlement = ref.given.settlement;
    models.indemnity = ref.given.indemnity;
    models.expense = ref.given.expense;
    FinancialAssumptions fa = reference_rates(ref.cfg.valuation, 0.06);
    fa.alpha1 = ref.given.alpha1;
    fa.alpha2 = ref.given.alpha2;
    SimConfig sim;
    sim.n_sims = ref.cfg.sims;
    sim.seed = ref.cfg.seed;
    const auto renewal = RenewalDistribution::generalized_gamma(*ref.given.settlement.generalized_gamma());
    const auto flat = simulate_trp_settlement(info, models, fa, TrendSpec::constant(1.0), renewal, sim);
    const auto fast = simulate_trp_settlement(info, models, fa, *ref.cfg.zeta_trend, renewal, sim);
    const double m0 = sample_moments(flat.totals).mean, m1 = sample_moments(fast.totals).mean;
    o.expect(m1 < m0, "accelerated delays lower the mean");
    o.detail << "; delay trend 1.2 t^0.2 mean " << fmt(m1, 8) << " vs constant " << fmt(m0, 8);
}

void criterion5(Outcome& o) {
    const auto exp1 = RenewalDistribution::exponential(1.0);
    const double t = 4.0;
    const std::size_t paths = 100000;
    for (double gamma : {0.5, 1.5}) {
        const auto spec = TrendSpec::power(gamma);
        double s = 0.0, s2 = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            auto rng = make_stream(515, p, 0, StreamRole::Occurrence);
            const double n = double(sample_trp(spec, exp1, t, rng).times.size());
            s += n;
            s2 += n * n;
        }
        const double mean = s / paths;
        const double se = std::sqrt((s2 / paths - mean * mean) / paths);
        const double z = std::abs(mean - cumulative_trend(spec, t)) / se;
        o.expect(z <= 3.0, "count mean for gamma " + fmt(gamma));
        o.detail << "gamma " << gamma << ": mean count " << fmt(mean) << " vs " << fmt(cumulative_trend(spec, t)) << " ("
                 << fmt(z, 3) << " se); ";
    }

    const double lambda = 2.0;
    const auto renewal = RenewalDistribution::generalized_gamma(ref_settlement());
    auto rng = make_stream(516, 0, 0, StreamRole::Occurrence);
    const std::size_t n = 100000;
    const auto h = sample_trp(TrendSpec::constant(lambda), renewal, 1.1 * double(n) * renewal.mean() / lambda, rng);
    std::vector<double> gaps;
    double prev = 0.0;
    for (std::size_t k = 0; k < std::min(n, h.times.size()); ++k) {
        gaps.push_back(h.times[k] - prev);
        prev = h.times[k];
    }
    o.expect(gaps.size() == n, "enough events");
    std::sort(gaps.begin(), gaps.end());
    double d = 0.0;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        const double f = renewal.cdf(lambda * gaps[k]);
        d = std::max({d, double(k + 1) / double(gaps.size()) - f, f - double(k) / double(gaps.size())});
    }
    const double sn = std::sqrt(double(gaps.size()));
    const double p = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    o.expect(p > 0.01, "inter-arrival KS at 0.01");
    o.detail << "constant rate 2 with generalized gamma renewal: KS D " << fmt(d, 4) << ", p " << fmt(p, 4)
             << " over " << gaps.size() << " gaps";
}

void criterion6(Outcome& o) {
    const std::size_t n = 100000;
    {
        const auto truth = ref_settlement();
        auto rng = make_stream(601, 0, 0, StreamRole::SettlementDelay);
        std::vector<double> x(n);
        for (auto& v : x) v = gg_sample(truth, rng);
        const auto fit = fit_generalized_gamma(x);
        const double z[] = {std::abs(fit.params.a - truth.a) / fit.diagnostics.standard_error(0),
                            std::abs(fit.params.b - truth.b) / fit.diagnostics.standard_error(1),
                            std::abs(fit.params.c - truth.c) / fit.diagnostics.standard_error(2)};
        const double worst = *std::max_element(std::begin(z), std::end(z));
        o.expect(worst <= 3.0, "generalized gamma within 3 se");
        o.detail << "gg max |z| " << fmt(worst, 3) << "; ";
    }
    {
        const auto truth = ref_indemnity();
        auto rz = make_stream(602, 0, 0, StreamRole::SettlementDelay);
        auto rx = make_stream(602, 0, 0, StreamRole::Indemnity);
        std::vector<SeverityObservation> data(n);
        for (auto& d : data) {
            d.zeta = gg_sample(ref_settlement(), rz);
            d.amount = severity_sample(truth, d.zeta, std::nullopt, rx);
        }
        SeverityFitOptions opts;
        opts.estimate_kappa = true;
        const auto fit = fit_severity_em(data, opts);
        const auto& m = fit.model;
        const auto& diag = fit.diagnostics;
        const std::vector<std::pair<std::string, std::pair<double, double>>> pars{
            {"p0", {m.p0, truth.p0}},         {"w1", {m.weights[0], truth.weights[0]}},
            {"mu1", {m.mu[0], truth.mu[0]}},   {"mu2", {m.mu[1], truth.mu[1]}},
            {"sigma1", {m.sigma[0], truth.sigma[0]}}, {"sigma2", {m.sigma[1], truth.sigma[1]}},
            {"kappa", {m.kappa, truth.kappa}}};
        double worst = 0.0;
        std::string worst_name;
        for (const auto& [name, v] : pars) {
            const auto it = std::find(diag.parameter_names.begin(), diag.parameter_names.end(), name);
            if (it == diag.parameter_names.end()) {
                o.expect(false, "missing standard error for " + name);
                continue;
            }
            const double z = std::abs(v.first - v.second) / diag.standard_error(std::size_t(it - diag.parameter_names.begin()));
            if (z > worst) {
                worst = z;
                worst_name = name;
            }
        }
        o.expect(worst <= 3.0, "severity EM within 3 se");
        o.expect(fit.monotone, "EM log-likelihood monotone");
        o.detail << "severity max |z| " << fmt(worst, 3) << " (" << worst_name << "), EM monotone over "
                 << fit.trace.size() << " iterations; ";
    }
    {
        auto rng = make_stream(603, 0, 0, StreamRole::Auxiliary);
        std::vector<double> times(n), amounts(n);
        for (std::size_t k = 0; k < n; ++k) {
            times[k] = 10.0 * rng.uniform();
            amounts[k] = 5000.0 * std::exp(kAlpha1 * times[k]) * std::exp(0.8 * rng.normal() - 0.32);
        }
        const auto fit = fit_inflation(amounts, times);
        const double z = std::abs(fit.alpha - kAlpha1) / std::sqrt(fit.variance);
        o.expect(z <= 3.0, "inflation within 3 se");
        o.detail << "inflation |z| " << fmt(z, 3) << "; ";
    }
    {
        std::vector<double> u(n), v(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto rc = make_stream(604, k, 0, StreamRole::Copula);
            const auto p = frank_sample(FrankCopula{kTheta}, rc);
            u[k] = p[0];
            v[k] = p[1];
        }
        const auto fit = fit_frank_itau(u, v);
        const double z = std::abs(fit.theta - kTheta) / fit.theta_se;
        o.expect(z <= 3.0, "Frank itau within 3 se");
        o.detail << "Frank theta " << fmt(fit.theta) << " |z| " << fmt(z, 3);
    }
}

void criterion7(Outcome& o) {
    const auto& g = beta_grid();
    const auto& s = g.scenarios.back();  // beta 6%
    const auto& mix = s.simulated["mixture"];
    const double dm = mix["mean_rel_diff"].get<double>(), ds = mix["sd_rel_diff"].get<double>();
    o.expect(dm <= 0.02 && ds <= 0.02, "mixture mean and sd within 2%");
    o.detail << "reference fixture at 6%, " << s.simulated["n"].get<std::size_t>() << " paths: mixture mean off by "
             << fmt(100 * dm, 3) << "%, sd off by " << fmt(100 * ds, 3) << "%";
}

void criterion8(Outcome& o) {
    std::vector<double> x(100);
    for (int k = 0; k < 100; ++k) x[k] = k + 1;
    const auto r = risk_measures(x);
    o.expect(r.value_at_risk(0.95) == 95.0, "VaR95");
    o.expect(r.tail_value_at_risk(0.95) == 98.0, "TVaR95");
    o.expect(risk_capital(r) == 17.5, "RC");

    auto rng = make_stream(801, 0, 0, StreamRole::Auxiliary);
    std::vector<double> y(20000);
    for (auto& v : y) v = std::floor(1000.0 * std::exp(rng.normal()));
    std::vector<double> shifted(y), scaled(y);
    for (auto& v : shifted) v += 12345.0;
    for (auto& v : scaled) v *= 8.0;
    const auto ry = risk_measures(y), rs = risk_measures(shifted), rk = risk_measures(scaled);
    bool exact = true;
    for (double p : kDefaultRiskLevels) {
        exact = exact && rs.value_at_risk(p) == ry.value_at_risk(p) + 12345.0;
        exact = exact && rs.tail_value_at_risk(p) == ry.tail_value_at_risk(p) + 12345.0;
        exact = exact && rk.value_at_risk(p) == 8.0 * ry.value_at_risk(p);
        exact = exact && rk.tail_value_at_risk(p) == 8.0 * ry.tail_value_at_risk(p);
    }
    o.expect(exact, "translation and positive homogeneity");
    o.expect(138059327.0 - 110341323.0 == 27718004.0, "published RC identity");
    o.detail << "VaR95 " << r.value_at_risk(0.95) << ", TVaR95 " << r.tail_value_at_risk(0.95) << ", RC "
             << risk_capital(r) << "; shift and scale identities exact; 138,059,327 - 110,341,323 = "
             << fmt(138059327.0 - 110341323.0, 10);
}

void criterion9(Outcome& o) {
    const auto a = chain_ladder_mack(RunoffTriangle::from_cumulative({{10, 15}, {12}}));
    o.expect(a.reserve == 6.0, "2x2 reserve 6");
    const auto full = chain_ladder_mack(RunoffTriangle::from_cumulative({{10, 10, 10}, {20, 20}, {30}}));
    o.expect(full.reserve == 0.0, "developed triangle reserve 0");
    const std::vector<std::vector<double>> c{{100, 150, 165}, {110, 168}, {120}};
    auto k = c;
    for (auto& row : k)
        for (auto& v : row) v *= 8.0;
    const auto m1 = chain_ladder_mack(RunoffTriangle::from_cumulative(c));
    const auto m8 = chain_ladder_mack(RunoffTriangle::from_cumulative(k));
    o.expect(m8.factors == m1.factors && m8.reserve == 8.0 * m1.reserve, "scaling invariance");
    o.detail << "2x2 reserve " << a.reserve << ", developed " << full.reserve << ", 3x3 reserve " << fmt(m1.reserve, 10)
             << " scales exactly by 8";
}

void criterion10(Outcome& o) {
    const auto& ref = reference();
    const auto info = build_info_sets(ref.claims, ref.cfg.valuation);
    const auto& b = ref.calibrated;
    ReserveModels models;
    models.settlement = b.settlement;
    models.indemnity = b.indemnity;
    models.expense = b.expense;
    FinancialAssumptions fa = reference_rates(ref.cfg.valuation, 0.06);
    fa.alpha1 = b.alpha1;
    fa.alpha2 = b.alpha2;
    std::vector<ClaimRecord> closed;
    for (const auto& c : ref.claims)
        if (c.settlement && *c.settlement <= ref.cfg.valuation) closed.push_back(c);

    BootstrapInputs in;
    in.closed_claims = closed;
    in.base = models;
    in.fa = fa;
    in.delay_log_covariance = b.settlement_log_covariance;
    in.alpha1_variance = b.alpha1_variance;
    in.alpha2_variance = b.alpha2_variance;
    SimConfig sim;
    sim.seed = ref.cfg.seed;
    sim.n_sims = 10000;

    BootstrapOptions zero;
    zero.scenarios = 10000;
    zero.delay_covariance_scale = 0.0;
    zero.inflation_variance_scale = 0.0;
    zero.resample = false;
    const auto bz = bootstrap_parameter_uncertainty(info, in, zero, sim);
    SimConfig other = sim;
    other.seed = ref.cfg.seed + 1;
    const auto plain = simulate_rbns(info, models, fa, other);
    const auto ks = ks_two_sample(bz.totals, plain.totals);
    o.expect(ks.p_value > 0.01, "zero covariance matches simulate_rbns");

    BootstrapOptions full;
    full.scenarios = 10000;
    full.resample = true;
    const auto bf = bootstrap_parameter_uncertainty(info, in, full, sim);
    SimConfig big = sim;
    big.n_sims = ref.cfg.sims;
    const auto base = simulate_rbns(info, models, fa, big);
    const double sd_u = sample_moments(bf.totals).sd, sd_0 = sample_moments(base.totals).sd;
    o.expect(sd_u > sd_0, "sd with parameter uncertainty exceeds sd without");
    o.detail << "zero covariance vs independent simulate_rbns: KS D " << fmt(ks.statistic, 4) << ", p "
             << fmt(ks.p_value, 4) << "; estimated covariance: sd " << fmt(sd_u, 8) << " vs " << fmt(sd_0, 8)
             << " over " << bf.totals.size() << " of " << bf.requested << " scenarios";
}

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

void criterion11(Outcome& o) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "atrp_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto cfg = json::parse(slurp(kSource + "/configs/reference.json"));
    cfg["simulation"]["sims"] = 4000;
    cfg["bootstrap"]["scenarios"] = 300;
    const std::string config = (dir / "config.json").string();
    std::ofstream(config) << cfg.dump(2) << "\n";
    const std::string claims = kSource + "/data/reference_claims.csv";

    const auto q = [](const std::string& s) { return "'" + s + "'"; };
    std::vector<std::string> files;
    bool ok = true;
    for (int workers : {1, 3}) {
        const std::string w = std::to_string(workers);
        const std::string bundle = (dir / ("bundle_" + w + ".json")).string();
        ok = ok && shell(q(kCli) + " calibrate --config " + q(config) + " --claims " + q(claims) + " --out " + q(bundle)) == 0;
        const auto step = [&](const std::string& sub, const std::string& extra) {
            const std::string out = (dir / (sub + "_" + w + ".json")).string();
            ok = ok && shell(q(kCli) + " " + sub + " --config " + q(config) + " --claims " + q(claims) + " --bundle " +
                             q(bundle) + " --workers " + w + " --format json --out " + q(out) + extra) == 0;
        };
        step("simulate", " --trp-settlement");
        step("ibnr", "");
        step("upr", "");
        step("bootstrap", "");
        const std::string text = (dir / ("simulate_" + w + ".txt")).string();
        ok = ok && shell(q(kCli) + " report --in " + q((dir / ("simulate_" + w + ".json")).string()) +
                         " --format text --out " + q(text)) == 0;
    }
    o.expect(ok, "every CLI step exits 0");
    int compared = 0;
    for (const std::string stem : {"bundle", "simulate", "ibnr", "upr", "bootstrap"}) {
        const std::string a = slurp((dir / (stem + "_1.json")).string()), b = slurp((dir / (stem + "_3.json")).string());
        o.expect(!a.empty() && a == b, stem + " output identical for 1 and 3 workers");
        ++compared;
    }
    const std::string ta = slurp((dir / "simulate_1.txt").string()), tb = slurp((dir / "simulate_3.txt").string());
    o.expect(!ta.empty() && ta == tb, "text report identical");
    o.detail << "calibrate, simulate (with dependent delays), ibnr, upr, bootstrap and report: " << compared + 1
             << " outputs byte-identical for 1 and 3 workers";
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"quadrature vs Monte Carlo on the synthetic portfolio", criterion1},
        {"closed-form severity moments vs quadrature oracle", criterion2},
        {"exact count invariances under common random numbers", criterion3},
        {"direction regressions on the reference fixture", criterion4},
        {"trend renewal special cases", criterion5},
        {"calibration recovery at n = 100000", criterion6},
        {"normal-mixture reserve fit", criterion7},
        {"risk-measure analytics", criterion8},
        {"chain ladder", criterion9},
        {"parameter-uncertainty bootstrap", criterion10},
        {"CLI determinism across worker counts", criterion11},
    };
    std::set<int> wanted;
    for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = int(k) + 1;
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[k].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %2d: %s | %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed;
}
