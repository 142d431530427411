#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "atrp/calibration.hpp"
#include "atrp/distributions.hpp"
#include "atrp/error.hpp"
#include "atrp/numerics.hpp"
#include "support.hpp"

using namespace atrp;
using namespace atrp::testing;

TEST_SUITE("stochastic_models") {

TEST_CASE("generalized gamma density and cdf against scipy") {
    const auto d = ref_settlement();
    const double xs[] = {0.25, 1.0, 2.5, 6.0};
    const double pdf[] = {0.192303134176526, 0.330709964831582, 0.189492969534361, 0.0282573911902922};
    const double cdf[] = {0.0256385513000451, 0.24838993986203, 0.647137512207985, 0.94725665925777};
    for (int k = 0; k < 4; ++k) {
        CHECK(gg_density(d, xs[k]) == doctest::Approx(pdf[k]).epsilon(1e-10));
        CHECK(gg_cdf(d, xs[k]) == doctest::Approx(cdf[k]).epsilon(1e-10));
        CHECK(gg_survival(d, xs[k]) == doctest::Approx(1 - cdf[k]).epsilon(1e-9));
    }
    CHECK(gg_quantile(d, 0.5) == doctest::Approx(1.83994087239432).epsilon(1e-10));
    CHECK(gg_quantile(d, 0.99) == doctest::Approx(9.17833846880045).epsilon(1e-10));
    CHECK(gg_raw_moment(d, 1.0) == doctest::Approx(2.35469176852994).epsilon(1e-12));
}

TEST_CASE("exponential special case") {
    const GeneralizedGammaDelay e{1, 1, 1};
    CHECK(gg_density(e, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(gg_cdf(e, 1.0) == doctest::Approx(1 - std::exp(-1.0)));
    CHECK(gg_cdf(e, 0.0) == 0.0);
}

TEST_CASE("density integrates to one and mean matches the closed form") {
    const auto d = ref_settlement();
    const auto f = [&](double x) { return gg_density(d, x); };
    CHECK(numerics::integrate(f, 0.0, INFINITY).value == doctest::Approx(1.0).epsilon(1e-6));
    const auto xf = [&](double x) { return x * gg_density(d, x); };
    const double closed = d.c * std::tgamma(d.a + 1 / d.b) / std::tgamma(d.a);
    CHECK(numerics::integrate(xf, 0.0, INFINITY).value == doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("survival quantile inverts the survival function") {
    for (const auto& d : {ref_settlement(), GeneralizedGammaDelay{0.05, 2.0, 1.0}, GeneralizedGammaDelay{40.0, 0.5, 0.01}}) {
        for (double s : {1e-300, 1e-12, 1e-4, 0.3, 0.5, 0.9, 1 - 1e-9}) {
            const double x = gg_survival_quantile(d, s);
            CHECK(gg_survival(d, x) == doctest::Approx(s).epsilon(1e-8));
        }
    }
}

TEST_CASE("sampled cdf agrees with gg_cdf") {
    const auto d = ref_settlement();
    const int n = 1000000;
    auto rng = make_stream(5, 0, 0, StreamRole::SettlementDelay);
    int c05 = 0, c1 = 0, c2 = 0;
    for (int k = 0; k < n; ++k) {
        const double x = gg_sample(d, rng);
        c05 += x <= 0.5;
        c1 += x <= 1.0;
        c2 += x <= 2.0;
    }
    for (auto [cnt, x] : {std::pair{c05, 0.5}, {c1, 1.0}, {c2, 2.0}}) {
        const double p = gg_cdf(d, x);
        CHECK(std::abs(double(cnt) / n - p) < 3 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("truncated delay") {
    const TruncatedDelay td(SettlementDelay(ref_settlement()), 1.0, 3.0);
    CHECK(td.cdf(3.0) == doctest::Approx(1.0));
    CHECK(td.cdf(1.0 + 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(td.cdf(2.0) == doctest::Approx(0.604332085603251).epsilon(1e-10));
    for (double u : {0.01, 0.4, 0.99}) {
        const double v = td.sample_from_uniform(u);
        CHECK(v > 1.0);
        CHECK(v <= 3.0);
        CHECK(td.cdf(v) == doctest::Approx(u).epsilon(1e-9));
    }
    CHECK_THROWS_AS(TruncatedDelay(SettlementDelay(PointMassDelay{0.5}), 1.0, 2.0), Error);
}

TEST_CASE("severity cdf") {
    const auto x = ref_indemnity();
    CHECK(severity_cdf(x, 0.0, 0.7) == doctest::Approx(x.p0));
    SeverityModel flat = x;
    flat.kappa = 0.0;
    for (double v : {100.0, 5000.0, 40000.0})
        CHECK(severity_cdf(flat, v, 0.0) == severity_cdf(flat, v, 3.0));
    const double at = std::exp(x.mu[0] + x.kappa * std::log(366.0));
    CHECK(severity_cdf(x, at, 1.0) == doctest::Approx(0.718632368433661).epsilon(1e-10));
}

TEST_CASE("severity sampling") {
    SeverityModel zero = ref_indemnity();
    zero.p0 = 1.0;
    auto rng = make_stream(9, 0, 0, StreamRole::Indemnity);
    for (int k = 0; k < 100; ++k) CHECK(severity_sample(zero, 0.4, std::nullopt, rng) == 0.0);

    SeverityModel point;
    point.p0 = 0.0;
    point.mu = {2.0, 2.0};
    point.sigma = {1e-12, 1e-12};
    point.kappa = 0.3;
    const double expect = std::exp(2.0 + 0.3 * std::log(1 + 365 * 0.25));
    CHECK(severity_sample(point, 0.25, std::nullopt, rng) == doctest::Approx(expect).epsilon(1e-9));

    const auto y = ref_expense();
    const int n = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = severity_sample(y, 0.5, std::nullopt, rng);
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - conditional_severity_moment(y, 0.5, std::nullopt, 1)) < 3 * se);
}

TEST_CASE("severity quantile inverts the cdf") {
    const auto x = ref_indemnity();
    CHECK(severity_quantile(x, 0.3, 0.5) == 0.0);
    for (double u : {0.6, 0.8, 0.99}) {
        const double q = severity_quantile(x, u, 0.5);
        CHECK(severity_cdf(x, q, 0.5) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("conditional moments against quadrature of the survival function") {
    const double zetas[] = {0.0, 0.5, 2.0};
    const double ex[] = {5932.29846202704, 27611.2570141977, 41513.8656744116};
    const double ex2[] = {323373599.925556, 7005367654.1256, 15835979366.1922};
    const double ey[] = {2.43773029635588, 1497.22576266089, 8216.78269200368};
    const double ey2[] = {14.7151194811907, 5550946.81012874, 167184528.9684};
    for (int k = 0; k < 3; ++k) {
        CHECK(conditional_severity_moment(ref_indemnity(), zetas[k], std::nullopt, 1) == doctest::Approx(ex[k]).epsilon(1e-6));
        CHECK(conditional_severity_moment(ref_indemnity(), zetas[k], std::nullopt, 2) == doctest::Approx(ex2[k]).epsilon(1e-6));
        CHECK(conditional_severity_moment(ref_expense(), zetas[k], std::nullopt, 1) == doctest::Approx(ey[k]).epsilon(1e-6));
        CHECK(conditional_severity_moment(ref_expense(), zetas[k], std::nullopt, 2) == doctest::Approx(ey2[k]).epsilon(1e-6));
    }
}

TEST_CASE("moment special cases") {
    SeverityModel zero = ref_indemnity();
    zero.p0 = 1.0;
    CHECK(conditional_severity_moment(zero, 1.0, std::nullopt, 1) == 0.0);
    CHECK(conditional_severity_moment(zero, 1.0, std::nullopt, 2) == 0.0);
    SeverityModel flat = ref_expense();
    flat.kappa = 0.0;
    CHECK(conditional_severity_moment(flat, 0.0, std::nullopt, 2) ==
          doctest::Approx(conditional_severity_moment(flat, 5.0, std::nullopt, 2)));
    CHECK(conditional_cross_moment(zero, ref_expense(), 1.0, std::nullopt) == 0.0);
    SeverityModel fx = ref_indemnity(), fy = ref_expense();
    fx.kappa = fy.kappa = 0.0;
    const double prod = conditional_severity_moment(fx, 0, std::nullopt, 1) * conditional_severity_moment(fy, 0, std::nullopt, 1);
    CHECK(conditional_cross_moment(fx, fy, 0.0, std::nullopt) == doctest::Approx(prod));
    CHECK(conditional_cross_moment(fx, fy, 3.0, std::nullopt) == doctest::Approx(prod));
}

TEST_CASE("cross moment without copula against simulation") {
    const auto x = ref_indemnity(), y = ref_expense();
    const double closed = conditional_cross_moment(x, y, 1.0, std::nullopt);
    CHECK(closed == doctest::Approx(conditional_severity_moment(x, 1.0, std::nullopt, 1) *
                                    conditional_severity_moment(y, 1.0, std::nullopt, 1)));
    const int n = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        auto rx = make_stream(41, k, 0, StreamRole::Indemnity);
        auto ry = make_stream(41, k, 0, StreamRole::Expense);
        const double v = severity_sample(x, 1.0, std::nullopt, rx) * severity_sample(y, 1.0, std::nullopt, ry);
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - closed) < 3 * se);
}

TEST_CASE("injury class shift") {
    SeverityModel m = ref_indemnity();
    std::array<double, kInjuryClasses> phi{};
    phi[3] = 0.5;
    m.phi = phi;
    CHECK(conditional_severity_moment(m, 0.2, 3, 1) ==
          doctest::Approx(std::exp(0.5) * conditional_severity_moment(m, 0.2, 0, 1)));
    CHECK(m.log_shift(0.2, std::nullopt) == doctest::Approx(m.kappa * std::log(1 + 365 * 0.2)));
}

TEST_CASE("frank copula") {
    CHECK(frank_tau(kTheta) == doctest::Approx(0.154022670722037).epsilon(1e-10));
    CHECK(frank_tau(-4.0) == doctest::Approx(-0.388148021297938).epsilon(1e-10));
    CHECK(frank_theta_from_tau(0.3) == doctest::Approx(2.91743444592452).epsilon(1e-9));
    CHECK(std::abs(frank_tau(1e-7)) < 1e-6);
    CHECK(std::abs(frank_theta_from_tau(frank_tau(kTheta)) - kTheta) <= 1e-6);
    const FrankCopula c{kTheta};
    CHECK(c.cdf(0.3, 0.7) == doctest::Approx(0.239241279383026).epsilon(1e-10));
    CHECK(c.density(0.3, 0.7) == doctest::Approx(0.893755019171004).epsilon(1e-10));
    CHECK(c.cdf(0.4, 1.0) == doctest::Approx(0.4));
}

TEST_CASE("frank product moment against 2-d quadrature") {
    CHECK(frank_product_moment(ref_indemnity(), ref_expense(), FrankCopula{kTheta}) == doctest::Approx(19109.843331).epsilon(1e-6));
}

TEST_CASE("frank sampling reproduces kendall tau") {
    const FrankCopula c{5.0};
    const int n = 1000000;
    std::vector<double> u(n), v(n);
    for (int k = 0; k < n; ++k) {
        auto rng = make_stream(51, k, 0, StreamRole::Copula);
        const auto p = frank_sample(c, rng);
        u[k] = p[0];
        v[k] = p[1];
    }
    const auto tau = kendall_tau(u, v);
    CHECK(std::abs(tau.tau - frank_tau(5.0)) < 3 * tau.se);
}

}  // TEST_SUITE
