#include "atrp/reserving.hpp"

#include <cmath>
#include <sstream>

#include "atrp/error.hpp"

namespace atrp {

std::size_t RbnsInfoSet::count(int i) const {
    if (i < 0 || i >= static_cast<int>(by_year.size())) return 0;
    return by_year[i].size();
}

std::size_t RbnsInfoSet::total() const {
    std::size_t n = 0;
    for (const auto& y : by_year) n += y.size();
    return n;
}

std::pair<double, double> RbnsInfoSet::window(const OpenClaim& c) const {
    const double r = c.report_time();
    return {valuation - r, valuation + c.accident_year - 1 - r};
}

namespace {

int reporting_year(double report) {
    require(report > 0 && std::isfinite(report), ErrorCode::InvalidArgument, "report time must be positive");
    return static_cast<int>(std::ceil(report));
}

}  // namespace

RbnsInfoSet build_info_sets(std::span<const ClaimRecord> claims, int t) {
    require(t >= 1, ErrorCode::InvalidArgument, "valuation must be at least one year");
    RbnsInfoSet info;
    info.valuation = t;
    info.by_year.assign(t + 1, {});
    for (const auto& c : claims) {
        require(c.report >= c.occurrence, ErrorCode::InvalidArgument, "claim reported before it occurred");
        if (c.report > t) {
            ++info.diagnostics.reported_after_valuation;
            continue;
        }
        if (c.settlement && *c.settlement <= t) {
            ++info.diagnostics.settled_by_valuation;
            continue;
        }
        const int i = reporting_year(c.report);
        if (i == 1) {
            ++info.diagnostics.first_year_open;
            continue;
        }
        info.by_year[i].push_back({c.occurrence, c.report - c.occurrence, c.injury_class, i});
    }
    return info;
}

RbnsInfoSet make_info_set(int t, std::span<const OpenClaim> claims) {
    require(t >= 2, ErrorCode::InvalidArgument, "valuation must be at least two years");
    RbnsInfoSet info;
    info.valuation = t;
    info.by_year.assign(t + 1, {});
    for (OpenClaim c : claims) {
        require(c.xi >= 0, ErrorCode::InvalidArgument, "reporting delay must be non-negative");
        const int i = reporting_year(c.report_time());
        require(i >= 2 && i <= t, ErrorCode::InvalidArgument, "open claim must be reported in years 2..t");
        c.accident_year = i;
        info.by_year[i].push_back(c);
    }
    return info;
}

void ReserveModels::validate() const {
    indemnity.validate();
    expense.validate();
    if (dependence == DependenceMode::FrankCopula) {
        require(copula.has_value(), ErrorCode::InvalidArgument, "Frank-copula mode needs a copula parameter");
        copula->validate();
    }
}

SeverityModel ReserveModels::effective_indemnity() const {
    return dependence == DependenceMode::Independent ? indemnity.without_delay_coupling() : indemnity;
}

SeverityModel ReserveModels::effective_expense() const {
    return dependence == DependenceMode::Independent ? expense.without_delay_coupling() : expense;
}

std::optional<int> ReserveModels::effective_class(const OpenClaim& c) const {
    return use_covariates ? c.injury_class : std::nullopt;
}

PreparedPortfolio prepare_claims(const RbnsInfoSet& info, const SettlementDelay& settlement) {
    PreparedPortfolio out;
    for (int i = 2; i < static_cast<int>(info.by_year.size()); ++i) {
        for (std::size_t k = 0; k < info.by_year[i].size(); ++k) {
            const auto& c = info.by_year[i][k];
            const auto [lo, hi] = info.window(c);
            try {
                out.claims.push_back({i, k, c, TruncatedDelay(settlement, lo, hi)});
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateWindow && e.code() != ErrorCode::InvalidArgument) throw;
                std::ostringstream msg;
                msg << "claim " << k << " of accident year " << i << " excluded: " << e.what();
                out.warnings.push_back(msg.str());
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

RbnsMoments::RbnsMoments(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa)
    : t_(info.valuation), fa_(fa) {
    models.validate();
    fa.validate();
    fa_.valuation_time = t_;
    const SeverityModel mx = models.effective_indemnity();
    const SeverityModel my = models.effective_expense();
    const bool copula = models.dependence == DependenceMode::FrankCopula;
    const double base_xy = copula ? frank_product_moment(mx, my, *models.copula) : 0.0;

    auto prepared = prepare_claims(info, models.settlement);
    warnings_ = std::move(prepared.warnings);
    by_year_.assign(t_ + 1, {});

    for (const auto& pc : prepared.claims) {
        const double r = pc.claim.report_time();
        const auto cls = models.effective_class(pc.claim);
        const auto first = [&](double v) {
            const double x = r + v;
            return net_discount_factor(fa_, 1, x) * conditional_severity_moment(mx, v, cls, 1) +
                   net_discount_factor(fa_, 2, x) * conditional_severity_moment(my, v, cls, 1);
        };
        const auto second = [&](double v) {
            const double x = r + v;
            const double a1 = net_discount_factor(fa_, 1, x);
            const double a2 = net_discount_factor(fa_, 2, x);
            const double xy = copula ? std::exp(mx.log_shift(v, cls) + my.log_shift(v, cls)) * base_xy
                                     : conditional_severity_moment(mx, v, cls, 1) *
                                           conditional_severity_moment(my, v, cls, 1);
            return a1 * a1 * conditional_severity_moment(mx, v, cls, 2) +
                   a2 * a2 * conditional_severity_moment(my, v, cls, 2) + 2.0 * a1 * a2 * xy;
        };

        ClaimTerms ct;
        ct.year = pc.year;
        ct.m.assign(t_ + 1, 0.0);
        ct.s.assign(t_ + 1, 0.0);
        const int i = pc.year;
        for (int j = t_ + 2 - i; j <= t_; ++j) {
            const double lo = i + j - 2 - r;
            const double hi = i + j - 1 - r;
            ct.m[j] = pc.delay.expect(first, lo, hi);
            ct.s[j] = pc.delay.expect(second, lo, hi);
        }
        ct.m_whole = pc.delay.expect(first, pc.delay.lower(), pc.delay.upper());
        ct.s_whole = pc.delay.expect(second, pc.delay.lower(), pc.delay.upper());
        by_year_[i].push_back(terms_.size());
        terms_.push_back(std::move(ct));
    }
}

void RbnsMoments::require_cell(int i, int j) const {
    require(i >= 2 && i <= t_ && j >= t_ + 2 - i && j <= t_, ErrorCode::InvalidArgument,
            "cell (" + std::to_string(i) + ", " + std::to_string(j) + ") is outside the lower triangle");
}

double RbnsMoments::clamp_variance(double var, double scale, const char* what) const {
    if (var >= 0) return var;
    if (-var <= 1e-8 * scale) {
        warnings_.push_back(std::string(what) + ": negative variance from rounding clamped to 0");
        return 0.0;
    }
    std::ostringstream msg;
    msg << what << ": variance " << var << " is negative beyond quadrature noise";
    fail(ErrorCode::Internal, msg.str());
}

double RbnsMoments::cell_mean(int i, int j) const {
    require_cell(i, j);
    double s = 0.0;
    for (auto k : by_year_[i]) s += terms_[k].m[j];
    return s;
}

double RbnsMoments::cell_second_moment(int i, int j) const {
    require_cell(i, j);
    double diag = 0.0, sum_m = 0.0, sum_m2 = 0.0;
    for (auto k : by_year_[i]) {
        diag += terms_[k].s[j];
        sum_m += terms_[k].m[j];
        sum_m2 += terms_[k].m[j] * terms_[k].m[j];
    }
    // products of distinct claims: (Σm)² − Σm²
    return diag + sum_m * sum_m - sum_m2;
}

double RbnsMoments::cross_cell_moment(int i, int j, int l) const {
    require_cell(i, j);
    require_cell(i, l);
    require(j != l, ErrorCode::InvalidArgument, "cross-cell moment needs two distinct development years");
    double sj = 0.0, sl = 0.0, same = 0.0;
    for (auto k : by_year_[i]) {
        sj += terms_[k].m[j];
        sl += terms_[k].m[l];
        same += terms_[k].m[j] * terms_[k].m[l];
    }
    return sj * sl - same;
}

double RbnsMoments::cell_sd(int i, int j) const {
    const double m = cell_mean(i, j);
    return std::sqrt(clamp_variance(cell_second_moment(i, j) - m * m, m * m, "cell variance"));
}

double RbnsMoments::total_mean() const {
    double s = 0.0;
    for (int i = 2; i <= t_; ++i)
        for (int j = t_ + 2 - i; j <= t_; ++j) s += cell_mean(i, j);
    return s;
}

double RbnsMoments::total_mean_whole_window() const {
    double s = 0.0;
    for (const auto& ct : terms_) s += ct.m_whole;
    return s;
}

double RbnsMoments::total_second_moment() const {
    double total = 0.0;
    std::vector<double> year_mean(t_ + 1, 0.0);
    for (int i = 2; i <= t_; ++i) {
        for (int j = t_ + 2 - i; j <= t_; ++j) {
            total += cell_second_moment(i, j);
            year_mean[i] += cell_mean(i, j);
            for (int l = t_ + 2 - i; l <= t_; ++l)
                if (l != j) total += cross_cell_moment(i, j, l);
        }
    }
    // accident years are independent given the information sets
    for (int i = 2; i <= t_; ++i)
        for (int k = 2; k <= t_; ++k)
            if (k != i) total += year_mean[i] * year_mean[k];
    return total;
}

double RbnsMoments::total_variance_by_claim() const {
    double v = 0.0;
    for (const auto& ct : terms_) v += ct.s_whole - ct.m_whole * ct.m_whole;
    return v;
}

double RbnsMoments::total_sd() const {
    const double m = total_mean();
    return std::sqrt(clamp_variance(total_second_moment() - m * m, m * m, "total variance"));
}

std::vector<CellPrediction> RbnsMoments::cells() const {
    std::vector<CellPrediction> out;
    for (int i = 2; i <= t_; ++i)
        for (int j = t_ + 2 - i; j <= t_; ++j) out.push_back({i, j, cell_mean(i, j), cell_sd(i, j)});
    return out;
}

double cell_mean(const RbnsInfoSet& info, int i, int j, const ReserveModels& models, const FinancialAssumptions& fa) {
    return RbnsMoments(info, models, fa).cell_mean(i, j);
}

double total_mean(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa) {
    return RbnsMoments(info, models, fa).total_mean();
}

double cell_second_moment(const RbnsInfoSet& info, int i, int j, const ReserveModels& models,
                          const FinancialAssumptions& fa) {
    return RbnsMoments(info, models, fa).cell_second_moment(i, j);
}

double cross_cell_moment(const RbnsInfoSet& info, int i, int j, int l, const ReserveModels& models,
                         const FinancialAssumptions& fa) {
    return RbnsMoments(info, models, fa).cross_cell_moment(i, j, l);
}

double total_second_moment(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa) {
    return RbnsMoments(info, models, fa).total_second_moment();
}

double total_sd(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa) {
    return RbnsMoments(info, models, fa).total_sd();
}

}  // namespace atrp
