#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "atrp/error.hpp"
#include "atrp/riskmetrics.hpp"
#include "atrp/rng.hpp"

using namespace atrp;

namespace {

std::vector<double> one_to_hundred() {
    std::vector<double> x(100);
    std::iota(x.begin(), x.end(), 1.0);
    return x;
}

}  // namespace

TEST_SUITE("riskmetrics") {

TEST_CASE("order statistics on 1..100") {
    const auto r = risk_measures(one_to_hundred());
    CHECK(r.value_at_risk(0.95) == 95.0);
    CHECK(r.tail_value_at_risk(0.95) == 98.0);
    CHECK(r.tail_value_at_risk(0.60) == 80.5);
    CHECK(risk_capital(r) == 17.5);
    CHECK(r.mean == 50.5);
}

TEST_CASE("constant sample") {
    const std::vector<double> c(37, 4.25);
    const auto r = risk_measures(c);
    for (double p : {0.6, 0.8, 0.95}) {
        CHECK(r.value_at_risk(p) == 4.25);
        CHECK(r.tail_value_at_risk(p) == 4.25);
    }
    CHECK(risk_capital(r) == 0.0);
    CHECK(r.sd == 0.0);
}

TEST_CASE("uniform tail value at risk") {
    auto rng = make_stream(3, 0, 0, StreamRole::Auxiliary);
    std::vector<double> u(1000000);
    for (auto& v : u) v = rng.uniform();
    CHECK(std::abs(risk_measures(u).tail_value_at_risk(0.95) - 0.975) < 0.002);
}

TEST_CASE("translation and positive homogeneity") {
    auto rng = make_stream(4, 0, 0, StreamRole::Auxiliary);
    std::vector<double> x(5000);
    for (auto& v : x) v = std::exp(rng.normal());
    std::vector<double> shifted(x), scaled(x);
    for (auto& v : shifted) v += 8.0;
    for (auto& v : scaled) v *= 4.0;
    const auto r = risk_measures(x), rs = risk_measures(shifted), rk = risk_measures(scaled);
    for (double p : {0.6, 0.8, 0.95}) {
        CHECK(rs.value_at_risk(p) == r.value_at_risk(p) + 8.0);
        CHECK(rk.value_at_risk(p) == 4.0 * r.value_at_risk(p));
        CHECK(rs.tail_value_at_risk(p) == doctest::Approx(r.tail_value_at_risk(p) + 8.0).epsilon(1e-14));
        CHECK(rk.tail_value_at_risk(p) == 4.0 * r.tail_value_at_risk(p));
    }
}

TEST_CASE("published risk capital identity") {
    CHECK(138059327.0 - 110341323.0 == 27718004.0);
}

TEST_CASE("mape") {
    CHECK(mape(5.0, 5.0) == 0.0);
    CHECK(mape(74677943, 71005064) == doctest::Approx(5.1727).epsilon(1e-4));
    CHECK(mape(67154900, 71005064) == doctest::Approx(5.42).epsilon(1e-3));
    CHECK_THROWS_AS(mape(1.0, 0.0), Error);
}

TEST_CASE("ks two-sample") {
    std::vector<double> a(10), b(10);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 6.0);
    const auto t = ks_two_sample(a, b);
    CHECK(t.statistic == 0.5);
    CHECK(t.p_value > 0.05);
    CHECK(t.p_value < 0.3);
    CHECK(ks_two_sample(a, a).p_value == 1.0);
}

TEST_CASE("chain ladder on a 2x2 triangle") {
    const auto tri = RunoffTriangle::from_cumulative({{10, 15}, {12}});
    const auto m = chain_ladder_mack(tri);
    REQUIRE(m.factors.size() == 1);
    CHECK(m.factors[0] == 1.5);
    CHECK(m.reserve == doctest::Approx(6.0));
}

TEST_CASE("chain ladder on a 3x3 triangle") {
    const auto m = chain_ladder_mack(RunoffTriangle::from_cumulative({{100, 150, 165}, {110, 168}, {120}}));
    CHECK(m.factors[0] == doctest::Approx(1.51428571428571).epsilon(1e-13));
    CHECK(m.factors[1] == doctest::Approx(1.1).epsilon(1e-13));
    CHECK(m.reserve == doctest::Approx(96.6857142857143).epsilon(1e-12));
    CHECK(m.standard_error > 0.0);
}

TEST_CASE("fully developed triangle") {
    const auto m = chain_ladder_mack(RunoffTriangle::from_cumulative({{10, 10, 10}, {20, 20}, {30}}));
    CHECK(m.reserve == 0.0);
}

TEST_CASE("chain ladder scales with the data") {
    const std::vector<std::vector<double>> c{{100, 150, 165}, {110, 168}, {120}};
    auto k = c;
    for (auto& row : k)
        for (auto& v : row) v *= 7.0;
    const auto a = chain_ladder_mack(RunoffTriangle::from_cumulative(c));
    const auto b = chain_ladder_mack(RunoffTriangle::from_cumulative(k));
    CHECK(b.reserve == doctest::Approx(7.0 * a.reserve).epsilon(1e-12));
    CHECK(b.standard_error == doctest::Approx(7.0 * a.standard_error).epsilon(1e-10));
    CHECK(b.factors == a.factors);
}

}  // TEST_SUITE
