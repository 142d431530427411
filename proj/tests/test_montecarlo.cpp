#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "atrp/error.hpp"
#include "atrp/montecarlo.hpp"
#include "atrp/riskmetrics.hpp"
#include "atrp/scenario.hpp"
#include "support.hpp"

using namespace atrp;
using namespace atrp::testing;

namespace {

OpenClaim open(double t_occ, double xi) {
    OpenClaim c;
    c.t_occ = t_occ;
    c.xi = xi;
    return c;
}

RbnsInfoSet portfolio() {
    const std::vector<OpenClaim> claims{open(1.1, 0.6), open(2.3, 0.4), open(2.0, 1.5), open(3.4, 0.3),
                                        open(0.7, 3.1), open(2.6, 0.9)};
    return make_info_set(4, claims);
}

ExposureModels exposure(SettlementDelay reporting) {
    ExposureModels m;
    m.trend = TrendSpec::power(1.0);
    m.renewal = RenewalDistribution::exponential(1.0);
    m.reporting = reporting;
    m.settlement = ref_settlement();
    m.indemnity = ref_indemnity();
    m.expense = ref_expense();
    return m;
}

SimConfig config(std::size_t n, std::uint64_t seed = 101) {
    SimConfig c;
    c.n_sims = n;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("zero severities give zero paths") {
    ReserveModels m = reference_models();
    m.indemnity.p0 = 1.0;
    m.expense.p0 = 1.0;
    const auto s = simulate_rbns(portfolio(), m, reference_rates(4), config(2000));
    CHECK(std::all_of(s.totals.begin(), s.totals.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("same seed gives identical samples for any worker count") {
    auto cfg = config(5000);
    cfg.workers = 1;
    cfg.keep_cells = true;
    const auto a = simulate_rbns(portfolio(), reference_models(), reference_rates(4), cfg);
    cfg.workers = 3;
    cfg.block = 97;
    const auto b = simulate_rbns(portfolio(), reference_models(), reference_rates(4), cfg);
    CHECK(a.totals == b.totals);
    CHECK(a.cells == b.cells);
}

TEST_CASE("cells add up to the total on every path") {
    auto cfg = config(2000);
    cfg.keep_cells = true;
    const auto s = simulate_rbns(portfolio(), reference_models(), reference_rates(4), cfg);
    for (std::size_t p = 0; p < s.totals.size(); p += 97) {
        double sum = 0.0;
        for (const auto& c : s.cells) sum += c[p];
        CHECK(sum == doctest::Approx(s.totals[p]).epsilon(1e-12));
    }
}

TEST_CASE("common random numbers across discount rates") {
    const auto a = simulate_rbns(portfolio(), reference_models(), reference_rates(4, 0.0), config(3000));
    const auto b = simulate_rbns(portfolio(), reference_models(), reference_rates(4, 0.06), config(3000));
    for (std::size_t p = 0; p < a.totals.size(); ++p) CHECK(b.totals[p] <= a.totals[p]);
}

TEST_CASE("immediate reporting leaves nothing unreported") {
    auto cfg = config(2000);
    cfg.horizon = 2.0;
    const auto s = simulate_exposure(exposure(PointMassDelay{0.0}), reference_rates(2), cfg);
    CHECK(std::all_of(s.z_tc.begin(), s.z_tc.end(), [](double v) { return v == 0.0; }));
    const auto p = ibnr_proportions(s);
    CHECK(p.count_based == 0.0);
    CHECK(p.cost_based == 0.0);
}

TEST_CASE("occurrence exposure splits into claims-made and tail") {
    auto cfg = config(3000);
    cfg.horizon = 2.0;
    const auto s = simulate_exposure(exposure(GeneralizedGammaDelay{1.0, 1.0, 1.5219104}), reference_rates(2), cfg);
    for (std::size_t p = 0; p < s.size(); ++p) {
        CHECK(s.z_occ[p] == doctest::Approx(s.z_cm[p] + s.z_tc[p]).epsilon(1e-12));
        CHECK(s.n_occ[p] == s.n_cm[p] + s.n_tc[p]);
    }
}

TEST_CASE("very late reporting leaves everything unreported") {
    auto cfg = config(2000);
    cfg.horizon = 2.0;
    const auto p = ibnr_proportions(simulate_exposure(exposure(PointMassDelay{1000.0}), reference_rates(2), cfg));
    CHECK(p.count_based == 1.0);
    CHECK(p.cost_based == 1.0);
}

TEST_CASE("no occurrences is an undefined ratio") {
    ExposureSample s;
    s.horizon = 1.0;
    s.z_occ = s.z_cm = s.z_tc = s.n_occ = s.n_cm = s.n_tc = std::vector<double>(10, 0.0);
    try {
        ibnr_proportions(s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UndefinedRatio);
    }
}

TEST_CASE("homogeneous upr proportion is one half when h equals t") {
    auto m = exposure(GeneralizedGammaDelay{1.0, 1.0, 1.5219104});
    m.trend = TrendSpec::constant(3.0);
    auto cfg = config(40000);
    cfg.horizon = 1.0;
    cfg.extension = 1.0;
    const auto p = simulate_upr(m, reference_rates(1), cfg);
    // N(2) ~ Poisson(6); the ratio of means has standard error about sqrt(6)/(2*6*sqrt(n))
    CHECK(std::abs(p.count_based - 0.5) < 3 * std::sqrt(6.0) / 12.0 / std::sqrt(40000.0));

    cfg.extension = 1e-9;
    const auto z = simulate_upr(m, reference_rates(1), cfg);
    CHECK(z.count_based < 1e-6);
    CHECK(z.cost_based < 1e-6);
}

TEST_CASE("trp settlement with a constant trend matches iid delays") {
    const auto info = portfolio();
    auto cfg = config(20000);
    const auto iid = simulate_rbns(info, reference_models(), reference_rates(4), cfg);
    cfg.seed = 202;
    const auto trp = simulate_trp_settlement(info, reference_models(), reference_rates(4), TrendSpec::constant(1.0),
                                             RenewalDistribution::generalized_gamma(ref_settlement()), cfg);
    CHECK(ks_two_sample(iid.totals, trp.totals).p_value > 0.01);
}

TEST_CASE("accelerating delay trend lowers the reserve") {
    const auto info = portfolio();
    const auto cfg = config(20000);
    const auto renewal = RenewalDistribution::generalized_gamma(ref_settlement());
    const auto base = simulate_trp_settlement(info, reference_models(), reference_rates(4), TrendSpec::constant(1.0), renewal, cfg);
    const auto fast = simulate_trp_settlement(info, reference_models(), reference_rates(4), TrendSpec::power(1.2), renewal, cfg);
    CHECK(sample_moments(fast.totals).mean < sample_moments(base.totals).mean);
}

TEST_CASE("no open claims") {
    const auto info = make_info_set(4, {});
    const auto s = simulate_trp_settlement(info, reference_models(), reference_rates(4), TrendSpec::power(1.2),
                                           RenewalDistribution::generalized_gamma(ref_settlement()), config(100));
    CHECK(s.open_claims == 0);
    CHECK(std::all_of(s.totals.begin(), s.totals.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("bootstrap without parameter uncertainty reproduces simulate_rbns") {
    const auto info = portfolio();
    BootstrapInputs in;
    in.base = reference_models();
    in.fa = reference_rates(4);
    BootstrapOptions opts;
    opts.scenarios = 5000;
    opts.delay_covariance_scale = 0.0;
    opts.inflation_variance_scale = 0.0;
    opts.resample = false;
    const auto cfg = config(5000);
    const auto boot = bootstrap_parameter_uncertainty(info, in, opts, cfg);
    const auto sim = simulate_rbns(info, reference_models(), reference_rates(4), cfg);
    CHECK(boot.totals == sim.totals);
    const auto other = simulate_rbns(info, reference_models(), reference_rates(4), config(5000, 999));
    CHECK(ks_two_sample(boot.totals, other.totals).p_value > 0.01);
}

TEST_CASE("bootstrap scenario accounting") {
    IngestOptions io;
    const auto data = ingest_claims(ATRP_SOURCE_DIR "/data/reference_claims.csv", io);
    const auto info = build_info_sets(data.claims, 8);
    BootstrapInputs in;
    in.closed_claims = data.claims;
    in.base = reference_models();
    in.fa = reference_rates(8);
    in.delay_log_covariance = Eigen::Matrix3d::Identity() * 0.01;
    in.alpha1_variance = 1e-4;
    in.alpha2_variance = 1e-4;
    BootstrapOptions opts;
    opts.scenarios = 40;
    opts.max_failure_fraction = 1.0;
    opts.em.standard_errors = false;
    const auto r = bootstrap_parameter_uncertainty(info, in, opts, config(40));
    CHECK(r.requested == 40);
    CHECK(r.totals.size() == r.requested - r.failures);
}

}  // TEST_SUITE
