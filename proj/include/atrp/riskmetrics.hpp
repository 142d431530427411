#pragma once

// Empirical risk measures, validation metrics and the chain-ladder/Mack
// baseline.

#include <span>
#include <vector>

namespace atrp {

struct RiskSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // n - 1 denominator
    double cv = 0.0;  // NaN unless mean > 0
    std::vector<double> levels;
    std::vector<double> var;
    std::vector<double> tvar;

    double value_at_risk(double level) const;
    double tail_value_at_risk(double level) const;
};

inline const std::vector<double> kDefaultRiskLevels{0.60, 0.80, 0.95};

/// VaR_p is the order statistic at ceil(p n); TVaR_p averages the n - ceil(p n)
/// values above it.
RiskSummary risk_measures(std::span<const double> sample, std::span<const double> levels = kDefaultRiskLevels);
/// TVaR_95 - TVaR_60.
double risk_capital(const RiskSummary& s);
/// 100 |estimate - truth| / |truth|.
double mape(double estimate, double truth);

struct TwoSampleTest {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
TwoSampleTest ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Incremental payments by accident year (rows) and development year
/// (columns); row i (0-based) of a t-year triangle holds t - i entries.
class RunoffTriangle {
public:
    static RunoffTriangle from_incremental(std::vector<std::vector<double>> rows, bool allow_negative = true);
    static RunoffTriangle from_cumulative(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::vector<double>>& incremental() const { return rows_; }
    std::vector<std::vector<double>> cumulative() const;

private:
    std::vector<std::vector<double>> rows_;
};

struct MackResult {
    double reserve = 0.0;
    double standard_error = 0.0;
    std::vector<double> factors;  // f_j, j = 1..t-1
    std::vector<double> sigma2;
    std::vector<double> reserve_by_year;
    std::vector<double> se_by_year;

    double cv() const { return reserve > 0 ? standard_error / reserve : 0.0; }
};

/// Volume-weighted chain ladder with Mack's mean-squared-error; no tail factor.
MackResult chain_ladder_mack(const RunoffTriangle& tri);

}  // namespace atrp
