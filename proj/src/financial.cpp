#include "atrp/financial.hpp"

#include <cmath>

#include "atrp/error.hpp"

namespace atrp {

void FinancialAssumptions::validate() const {
    require(std::isfinite(alpha1) && std::isfinite(alpha2) && std::isfinite(beta1) && std::isfinite(beta2),
            ErrorCode::InvalidArgument, "financial rates must be finite");
    require(valuation_time >= 0 && std::isfinite(valuation_time), ErrorCode::InvalidArgument,
            "valuation time must be finite and non-negative");
}

double net_discount_factor(const FinancialAssumptions& fa, int payment_type, double x) {
    require(payment_type == 1 || payment_type == 2, ErrorCode::InvalidArgument, "payment type must be 1 or 2");
    const double t = fa.valuation_time;
    require(x >= t, ErrorCode::Domain, "payment time precedes the valuation time");
    const double alpha = payment_type == 1 ? fa.alpha1 : fa.alpha2;
    const double beta = payment_type == 1 ? fa.beta1 : fa.beta2;
    const double inflation_end = fa.strict_literal ? t : x;
    return std::exp(alpha * inflation_end - beta * (x - t));
}

}  // namespace atrp
