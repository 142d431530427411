#pragma once

// Conditional moments of predicted RBNS payments. Accident year i collects
// the claims reported in (i-1, i] that are still open at the valuation t;
// cell (i, j) holds the payments falling in calendar interval (i+j-2, i+j-1].

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atrp/claims.hpp"
#include "atrp/distributions.hpp"
#include "atrp/financial.hpp"

namespace atrp {

struct OpenClaim {
    double t_occ = 0.0;
    double xi = 0.0;
    std::optional<int> injury_class;
    int accident_year = 0;

    double report_time() const { return t_occ + xi; }
};

struct InfoSetDiagnostics {
    std::size_t reported_after_valuation = 0;  // IBNR at t, not RBNS
    std::size_t settled_by_valuation = 0;
    std::size_t first_year_open = 0;  // reported in year 1, no window left to settle in
};

struct RbnsInfoSet {
    int valuation = 0;
    std::vector<std::vector<OpenClaim>> by_year;  // index i = 0..t; only 2..t populated
    InfoSetDiagnostics diagnostics;

    std::size_t count(int i) const;
    std::size_t total() const;
    /// Settlement-delay truncation window (t - T - ξ, t + i - 1 - T - ξ].
    std::pair<double, double> window(const OpenClaim& c) const;
};

/// Claims reported in year i (i-1 < T+ξ <= i) and unsettled at t.
RbnsInfoSet build_info_sets(std::span<const ClaimRecord> claims, int t);
/// Info set from already-open claims; accident years are derived from T+ξ.
RbnsInfoSet make_info_set(int t, std::span<const OpenClaim> claims);

struct ReserveModels {
    SettlementDelay settlement;
    SeverityModel indemnity;
    SeverityModel expense;
    DependenceMode dependence = DependenceMode::KappaCoupled;
    std::optional<FrankCopula> copula;  // required for FrankCopula mode
    bool use_covariates = false;

    void validate() const;
    /// Severity models as seen under the dependence mode (κ zeroed when independent).
    SeverityModel effective_indemnity() const;
    SeverityModel effective_expense() const;
    std::optional<int> effective_class(const OpenClaim& c) const;
};

/// An open claim together with its truncated settlement-delay law.
struct PreparedClaim {
    int year = 0;
    std::size_t index = 0;  // position in by_year[year]
    OpenClaim claim;
    TruncatedDelay delay;
};

struct PreparedPortfolio {
    std::vector<PreparedClaim> claims;
    std::vector<std::string> warnings;  // one per excluded claim
};

/// Attaches truncated delays; claims with no mass in their window are
/// excluded with a warning.
PreparedPortfolio prepare_claims(const RbnsInfoSet& info, const SettlementDelay& settlement);

struct CellPrediction {
    int i = 0;
    int j = 0;
    double mean = 0.0;
    double sd = 0.0;
};

/// Quadrature engine for the first and second conditional moments. The
/// discount factors are evaluated with the valuation time of the info set.
class RbnsMoments {
public:
    RbnsMoments(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa);

    int valuation() const { return t_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    double cell_mean(int i, int j) const;
    double cell_second_moment(int i, int j) const;
    double cross_cell_moment(int i, int j, int l) const;
    double cell_sd(int i, int j) const;

    /// Sum of the cell means.
    double total_mean() const;
    /// One integral per claim over its whole truncation window.
    double total_mean_whole_window() const;
    double total_second_moment() const;
    /// Variance assembled from per-claim variances over their whole windows.
    double total_variance_by_claim() const;
    double total_sd() const;

    std::vector<CellPrediction> cells() const;
    const FinancialAssumptions& financial() const { return fa_; }

private:
    struct ClaimTerms {
        int year = 0;
        std::vector<double> m;  // first-moment integral per development year j (index j)
        std::vector<double> s;  // E[(A1 X + A2 Y)^2 1{cell}] per j
        double m_whole = 0.0;
        double s_whole = 0.0;
    };

    void require_cell(int i, int j) const;
    double clamp_variance(double var, double scale, const char* what) const;

    int t_ = 0;
    FinancialAssumptions fa_;
    std::vector<ClaimTerms> terms_;
    std::vector<std::vector<std::size_t>> by_year_;  // indices into terms_
    mutable std::vector<std::string> warnings_;  // exclusions and variance clamps
};

double cell_mean(const RbnsInfoSet& info, int i, int j, const ReserveModels& models, const FinancialAssumptions& fa);
double total_mean(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa);
double cell_second_moment(const RbnsInfoSet& info, int i, int j, const ReserveModels& models,
                          const FinancialAssumptions& fa);
double cross_cell_moment(const RbnsInfoSet& info, int i, int j, int l, const ReserveModels& models,
                         const FinancialAssumptions& fa);
double total_second_moment(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa);
double total_sd(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa);

}  // namespace atrp
