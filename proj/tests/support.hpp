#pragma once
// Published model parameters shared by the test suites.

#include <cmath>
#include <vector>

#include "atrp/distributions.hpp"
#include "atrp/financial.hpp"
#include "atrp/reserving.hpp"

namespace atrp::testing {

inline GeneralizedGammaDelay ref_settlement() { return {3.33246873, 0.67977335, 0.3645056}; }

inline SeverityModel ref_indemnity() {
    SeverityModel m;
    m.p0 = 0.5605836;
    m.weights = {0.7193306, 0.2806694};
    m.mu = {8.590078, 9.603317};
    m.sigma = {1.316284, 0.2598194};
    m.kappa = 0.29504;
    return m;
}

inline SeverityModel ref_expense() {
    SeverityModel m;
    m.p0 = 0.1683231;
    m.weights = {0.3142661, 0.6857334};
    m.mu = {-0.05958437, 0.9696933};
    m.sigma = {1.1458589, 0.7298423};
    m.kappa = 1.23178;
    return m;
}

inline constexpr double kAlpha1 = 0.045692;
inline constexpr double kAlpha2 = 0.041744;
inline constexpr double kTheta = 1.413523;

inline ReserveModels reference_models() {
    ReserveModels m;
    m.settlement = ref_settlement();
    m.indemnity = ref_indemnity();
    m.expense = ref_expense();
    return m;
}

inline FinancialAssumptions reference_rates(double t, double beta = 0.06) {
    FinancialAssumptions fa;
    fa.alpha1 = kAlpha1;
    fa.alpha2 = kAlpha2;
    fa.beta1 = beta;
    fa.beta2 = beta;
    fa.valuation_time = t;
    return fa;
}

/// Mean and unbiased sd of a sample.
struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

inline Moments sample_moments(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= double(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return {m, std::sqrt(s / double(x.size() - 1))};
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace atrp::testing
