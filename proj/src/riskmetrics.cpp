#include "atrp/riskmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atrp/error.hpp"

namespace atrp {

namespace {

std::size_t level_index(const std::vector<double>& levels, double level) {
    for (std::size_t k = 0; k < levels.size(); ++k)
        if (std::abs(levels[k] - level) < 1e-12) return k;
    fail(ErrorCode::InvalidArgument, "risk level " + std::to_string(level) + " was not computed");
}

// ceil(p n) without being pushed up by rounding in the product
std::size_t ceil_index(double p, std::size_t n) {
    const double pn = p * static_cast<double>(n);
    const double r = std::round(pn);
    if (std::abs(pn - r) <= 1e-9 * std::max(1.0, pn)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(pn));
}

}  // namespace

double RiskSummary::value_at_risk(double level) const { return var[level_index(levels, level)]; }
double RiskSummary::tail_value_at_risk(double level) const { return tvar[level_index(levels, level)]; }

RiskSummary risk_measures(std::span<const double> sample, std::span<const double> levels) {
    require(!sample.empty(), ErrorCode::InvalidArgument, "risk measures need a non-empty sample");
    std::vector<double> x(sample.begin(), sample.end());
    for (double v : x) require(std::isfinite(v), ErrorCode::InvalidArgument, "sample contains non-finite values");
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();

    RiskSummary s;
    s.n = n;
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.sd = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
    s.cv = s.mean > 0 ? s.sd / s.mean : std::numeric_limits<double>::quiet_NaN();
    for (double p : levels) {
        require(p > 0 && p < 1, ErrorCode::Domain, "risk levels must lie in (0, 1)");
        const std::size_t k = std::max<std::size_t>(ceil_index(p, n), 1);
        require(k < n, ErrorCode::InvalidArgument,
                "sample of " + std::to_string(n) + " is too small for level " + std::to_string(p));
        s.levels.push_back(p);
        s.var.push_back(x[k - 1]);
        s.tvar.push_back(std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(k), x.end(), 0.0) / double(n - k));
    }
    return s;
}

double risk_capital(const RiskSummary& s) { return s.tail_value_at_risk(0.95) - s.tail_value_at_risk(0.60); }

double mape(double estimate, double truth) {
    require(truth != 0.0, ErrorCode::Domain, "MAPE is undefined for a zero reference value");
    return 100.0 * std::abs(estimate - truth) / std::abs(truth);
}

TwoSampleTest ks_two_sample(std::span<const double> a, std::span<const double> b) {
    require(!a.empty() && !b.empty(), ErrorCode::InvalidArgument, "KS test needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = double(x.size()), m = double(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / n - double(j) / m));
    }
    TwoSampleTest out;
    out.statistic = d;
    const double ne = n * m / (n + m);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    if (lambda < 1e-3) return out;
    double p = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-16) break;
    }
    out.p_value = std::clamp(p, 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------

RunoffTriangle RunoffTriangle::from_incremental(std::vector<std::vector<double>> rows, bool allow_negative) {
    const std::size_t t = rows.size();
    require(t >= 1, ErrorCode::InvalidArgument, "triangle needs at least one accident year");
    for (std::size_t i = 0; i < t; ++i) {
        require(rows[i].size() == t - i, ErrorCode::InvalidArgument,
                "row " + std::to_string(i + 1) + " must have " + std::to_string(t - i) + " entries");
        for (double v : rows[i]) {
            require(std::isfinite(v), ErrorCode::InvalidArgument, "triangle entries must be finite");
            require(allow_negative || v >= 0, ErrorCode::InvalidArgument, "negative incremental payment");
        }
    }
    RunoffTriangle tri;
    tri.rows_ = std::move(rows);
    return tri;
}

RunoffTriangle RunoffTriangle::from_cumulative(const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> inc = rows;
    for (auto& r : inc)
        for (std::size_t j = r.size(); j-- > 1;) r[j] -= r[j - 1];
    return from_incremental(std::move(inc));
}

std::vector<std::vector<double>> RunoffTriangle::cumulative() const {
    auto c = rows_;
    for (auto& r : c) std::partial_sum(r.begin(), r.end(), r.begin());
    return c;
}

MackResult chain_ladder_mack(const RunoffTriangle& tri) {
    const std::size_t t = tri.size();
    require(t >= 2, ErrorCode::InvalidArgument, "chain ladder needs at least two accident years");
    const auto c = tri.cumulative();
    MackResult out;
    out.factors.assign(t - 1, 1.0);
    out.sigma2.assign(t - 1, 0.0);
    std::vector<double> col_sum(t - 1, 0.0);  // Σ C_{i,j} over rows with C_{i,j+1} known
    for (std::size_t j = 0; j + 1 < t; ++j) {
        double num = 0.0, den = 0.0;
        const std::size_t rows = t - 1 - j;
        for (std::size_t i = 0; i < rows; ++i) {
            num += c[i][j + 1];
            den += c[i][j];
        }
        require(den != 0.0, ErrorCode::Domain,
                "cumulative column " + std::to_string(j + 1) + " sums to zero; development factor undefined");
        out.factors[j] = num / den;
        col_sum[j] = den;
        if (rows >= 2) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                require(c[i][j] > 0, ErrorCode::Domain, "Mack variance needs positive cumulative payments");
                const double dev = c[i][j + 1] / c[i][j] - out.factors[j];
                s += c[i][j] * dev * dev;
            }
            out.sigma2[j] = s / double(rows - 1);
        } else if (j >= 2 && out.sigma2[j - 2] > 0) {
            const double a = out.sigma2[j - 1], b = out.sigma2[j - 2];
            out.sigma2[j] = std::min({a * a / b, a, b});
        }
    }

    // projected ultimates and Mack's per-year and aggregated mse
    std::vector<std::vector<double>> proj(t, std::vector<double>(t, 0.0));
    for (std::size_t i = 0; i < t; ++i) {
        const std::size_t last = t - 1 - i;
        for (std::size_t j = 0; j <= last; ++j) proj[i][j] = c[i][j];
        for (std::size_t j = last + 1; j < t; ++j) proj[i][j] = proj[i][j - 1] * out.factors[j - 1];
    }
    out.reserve_by_year.assign(t, 0.0);
    out.se_by_year.assign(t, 0.0);
    std::vector<double> mse(t, 0.0);
    for (std::size_t i = 1; i < t; ++i) {
        const std::size_t last = t - 1 - i;
        out.reserve_by_year[i] = proj[i][t - 1] - c[i][last];
        double acc = 0.0;
        for (std::size_t k = last; k + 1 < t; ++k) {
            const double f2 = out.factors[k] * out.factors[k];
            if (f2 == 0.0 || proj[i][k] == 0.0) continue;
            acc += out.sigma2[k] / f2 * (1.0 / proj[i][k] + 1.0 / col_sum[k]);
        }
        mse[i] = proj[i][t - 1] * proj[i][t - 1] * acc;
        out.se_by_year[i] = std::sqrt(mse[i]);
    }
    double total = 0.0;
    for (std::size_t i = 1; i < t; ++i) {
        total += mse[i];
        double later = 0.0;
        for (std::size_t l = i + 1; l < t; ++l) later += proj[l][t - 1];
        double acc = 0.0;
        for (std::size_t k = t - 1 - i; k + 1 < t; ++k) {
            const double f2 = out.factors[k] * out.factors[k];
            if (f2 == 0.0) continue;
            acc += 2.0 * out.sigma2[k] / f2 / col_sum[k];
        }
        total += proj[i][t - 1] * later * acc;
    }
    out.reserve = std::accumulate(out.reserve_by_year.begin(), out.reserve_by_year.end(), 0.0);
    out.standard_error = std::sqrt(std::max(total, 0.0));
    return out;
}

}  // namespace atrp
