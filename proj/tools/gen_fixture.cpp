// Writes the synthetic reference claims file used by the fixtures.
//
//   gen_fixture <out.csv> [seed] [rate_per_year] [valuation_years]
//
// Occurrences are homogeneous Poisson; reporting delays are exponential with
// mean 1.5219104 years; settlement delays and severities follow the published
// calibration, and payments carry inflation to their settlement date. Claims
// reported after the valuation are left out; claims still open at the
// valuation have an empty settlement date and zero amounts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <string>

#include "atrp/distributions.hpp"
#include "atrp/rng.hpp"
#include "atrp/trend.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: gen_fixture <out.csv> [seed] [rate_per_year] [valuation_years]\n");
        return 64;
    }
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 424242;
    const double rate = argc > 3 ? std::atof(argv[3]) : 60.0;
    const double t = argc > 4 ? std::atof(argv[4]) : 8.0;

    using namespace atrp;
    const GeneralizedGammaDelay reporting{1.0, 1.0, 1.5219104};
    const GeneralizedGammaDelay settlement{3.33246873, 0.67977335, 0.3645056};
    SeverityModel x;
    x.p0 = 0.5605836;
    x.weights = {0.7193306, 0.2806694};
    x.mu = {8.590078, 9.603317};
    x.sigma = {1.316284, 0.2598194};
    x.kappa = 0.29504;
    SeverityModel y;
    y.p0 = 0.1683231;
    y.weights = {0.3142661, 0.6857334};
    y.mu = {-0.05958437, 0.9696933};
    y.sigma = {1.1458589, 0.7298423};
    y.kappa = 1.23178;
    const double alpha1 = 0.045692, alpha2 = 0.041744;

    auto occ = make_stream(seed, 0, 0, StreamRole::Occurrence);
    const auto hist = sample_trp(TrendSpec::constant(rate), RenewalDistribution::exponential(1.0), t, occ);

    FILE* out = std::fopen(argv[1], "w");
    if (!out) {
        std::perror(argv[1]);
        return 1;
    }
    // whole days from the origin, so the ISO dates carry the exact values
    const auto day = [](double years) { return static_cast<long>(std::floor(years * kDaysPerYear)); };
    const auto date = [](long d) {
        // origin 1989-11-22 is day 0
        const std::time_t base = 627696000;  // 1989-11-22T00:00:00Z
        const std::time_t s = base + d * 86400L;
        std::tm tm{};
        gmtime_r(&s, &tm);
        char buf[16];
        std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
        return std::string(buf);
    };
    std::fprintf(out, "occurrence_date,report_date,settlement_date,indemnity,expense,injury_class\n");
    for (std::size_t k = 0; k < hist.times.size(); ++k) {
        auto rr = make_stream(seed, 0, k, StreamRole::ReportingDelay);
        auto rs = make_stream(seed, 0, k, StreamRole::SettlementDelay);
        auto rx = make_stream(seed, 0, k, StreamRole::Indemnity);
        auto ry = make_stream(seed, 0, k, StreamRole::Expense);
        auto rc = make_stream(seed, 0, k, StreamRole::Auxiliary);
        const long d_occ = day(hist.times[k]);
        const long d_rep = day(hist.times[k] + gg_sample(reporting, rr));
        if (d_rep > day(t)) continue;
        const long d_set = d_rep + std::max(1L, day(gg_sample(settlement, rs)));
        const int cls = static_cast<int>(rc.uniform() * kInjuryClasses);
        if (d_set > day(t)) {
            std::fprintf(out, "%s,%s,,0,0,%d\n", date(d_occ).c_str(), date(d_rep).c_str(), cls);
            continue;
        }
        const double zeta = double(d_set - d_rep) / kDaysPerYear;
        const double when = double(d_set) / kDaysPerYear;
        const double ind = severity_sample(x, zeta, std::nullopt, rx) * std::exp(alpha1 * when);
        const double exp = severity_sample(y, zeta, std::nullopt, ry) * std::exp(alpha2 * when);
        std::fprintf(out, "%s,%s,%s,%.2f,%.2f,%d\n", date(d_occ).c_str(), date(d_rep).c_str(), date(d_set).c_str(),
                     ind, exp, cls);
    }
    std::fclose(out);
    return 0;
}
