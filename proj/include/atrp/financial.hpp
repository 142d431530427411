#pragma once

namespace atrp {

/// Constant forces of inflation (alpha) and interest (beta) per payment type,
/// with the valuation time t in years.
struct FinancialAssumptions {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double valuation_time = 0.0;
    /// Inflate only up to the valuation time, as the displayed factor reads
    /// literally. Off by default: inflation then accrues to the payment time.
    bool strict_literal = false;

    void validate() const;
};

/// A_k(x) for payment type k in {1, 2} (1 = indemnity, 2 = expense), x >= t.
double net_discount_factor(const FinancialAssumptions& fa, int payment_type, double x);

}  // namespace atrp
