#include "atrp/trend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "atrp/error.hpp"
#include "atrp/numerics.hpp"

namespace atrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double unit_scale(TimeUnit u) { return u == TimeUnit::Days ? kDaysPerYear : 1.0; }

double native_cumulative(const TrendSpec& s, double x) {
    switch (s.family) {
        case TrendFamily::Constant: return s.lambda * x;
        case TrendFamily::Power: return std::pow(x, s.gamma);
        case TrendFamily::GammaMixture: {
            double v = 0.0;
            if (s.p1 > 0) v += s.p1 * boost::math::gamma_p(s.alpha1, s.lambda1 * x);
            if (s.p2 > 0) v += s.p2 * boost::math::gamma_p(s.alpha2, s.lambda2 * x);
            return v;
        }
    }
    return 0.0;
}

double native_intensity(const TrendSpec& s, double x) {
    switch (s.family) {
        case TrendFamily::Constant: return s.lambda;
        case TrendFamily::Power:
            if (x == 0.0) return s.gamma < 1 ? kInf : (s.gamma == 1 ? 1.0 : 0.0);
            return s.gamma * std::pow(x, s.gamma - 1.0);
        case TrendFamily::GammaMixture: {
            if (x == 0.0) return 0.0;
            double v = 0.0;
            if (s.p1 > 0) v += s.p1 * s.lambda1 * boost::math::gamma_p_derivative(s.alpha1, s.lambda1 * x);
            if (s.p2 > 0) v += s.p2 * s.lambda2 * boost::math::gamma_p_derivative(s.alpha2, s.lambda2 * x);
            return v;
        }
    }
    return 0.0;
}

double native_inverse(const TrendSpec& s, double v) {
    switch (s.family) {
        case TrendFamily::Constant: return v / s.lambda;
        case TrendFamily::Power: return std::pow(v, 1.0 / s.gamma);
        case TrendFamily::GammaMixture: {
            if (v == 0.0) return 0.0;
            double hi = 1.0;
            while (native_cumulative(s, hi) < v) {
                hi *= 2.0;
                if (hi > 1e300) fail(ErrorCode::Saturation, "trend saturates before the requested level");
            }
            const auto f = [&](double x) { return native_cumulative(s, x) - v; };
            const auto df = [&](double x) { return native_intensity(s, x); };
            return numerics::find_root(f, 0.0, hi, df, 1e-15);
        }
    }
    return 0.0;
}

}  // namespace

const char* trend_family_name(TrendFamily f) {
    switch (f) {
        case TrendFamily::Constant: return "constant";
        case TrendFamily::Power: return "power";
        case TrendFamily::GammaMixture: return "gamma_mixture";
    }
    return "unknown";
}

TrendFamily parse_trend_family(const std::string& name) {
    if (name == "constant") return TrendFamily::Constant;
    if (name == "power") return TrendFamily::Power;
    if (name == "gamma_mixture") return TrendFamily::GammaMixture;
    fail(ErrorCode::Parse, "unknown trend family '" + name + "'");
}

TrendSpec TrendSpec::constant(double lambda, TimeUnit unit) {
    TrendSpec s;
    s.family = TrendFamily::Constant;
    s.unit = unit;
    s.lambda = lambda;
    s.validate();
    return s;
}

TrendSpec TrendSpec::power(double gamma, TimeUnit unit) {
    TrendSpec s;
    s.family = TrendFamily::Power;
    s.unit = unit;
    s.gamma = gamma;
    s.validate();
    return s;
}

TrendSpec TrendSpec::gamma_mixture(double p1, double alpha1, double lambda1, double p2, double alpha2,
                                   double lambda2, TimeUnit unit) {
    TrendSpec s;
    s.family = TrendFamily::GammaMixture;
    s.unit = unit;
    s.p1 = p1;
    s.alpha1 = alpha1;
    s.lambda1 = lambda1;
    s.p2 = p2;
    s.alpha2 = alpha2;
    s.lambda2 = lambda2;
    s.validate();
    return s;
}

void TrendSpec::validate() const {
    switch (family) {
        case TrendFamily::Constant:
            require(lambda > 0 && std::isfinite(lambda), ErrorCode::InvalidArgument, "trend rate must be positive");
            break;
        case TrendFamily::Power:
            require(gamma > 0 && std::isfinite(gamma), ErrorCode::InvalidArgument,
                    "power trend exponent must be positive");
            break;
        case TrendFamily::GammaMixture:
            require(p1 >= 0 && p2 >= 0 && p1 + p2 > 0, ErrorCode::InvalidArgument,
                    "gamma-mixture weights must be non-negative and not both zero");
            require(alpha1 > 0 && alpha2 > 0 && lambda1 > 0 && lambda2 > 0, ErrorCode::InvalidArgument,
                    "gamma-mixture shapes and rates must be positive");
            break;
    }
}

double TrendSpec::saturation() const { return family == TrendFamily::GammaMixture ? p1 + p2 : kInf; }

double cumulative_trend(const TrendSpec& spec, double t) {
    require(t >= 0, ErrorCode::Domain, "cumulative trend requires t >= 0");
    if (std::isinf(t)) return spec.saturation();
    return native_cumulative(spec, unit_scale(spec.unit) * t);
}

double trend_intensity(const TrendSpec& spec, double t) {
    require(t >= 0, ErrorCode::Domain, "trend intensity requires t >= 0");
    const double k = unit_scale(spec.unit);
    return k * native_intensity(spec, k * t);
}

double inverse_cumulative_trend(const TrendSpec& spec, double s) {
    require(s >= 0, ErrorCode::Domain, "inverse cumulative trend requires s >= 0");
    if (s >= spec.saturation()) {
        std::ostringstream msg;
        msg << "transformed time " << s << " reaches the trend saturation level " << spec.saturation();
        fail(ErrorCode::Saturation, msg.str());
    }
    return native_inverse(spec, s) / unit_scale(spec.unit);
}

// ---------------------------------------------------------------------------
// RenewalDistribution

RenewalDistribution RenewalDistribution::exponential(double rate) {
    require(rate > 0 && std::isfinite(rate), ErrorCode::InvalidArgument, "exponential rate must be positive");
    RenewalDistribution r;
    r.law_ = Exponential{rate};
    return r;
}

RenewalDistribution RenewalDistribution::generalized_gamma(GeneralizedGammaDelay gg) {
    gg.validate();
    RenewalDistribution r;
    r.law_ = gg;
    return r;
}

RenewalDistribution RenewalDistribution::user(std::function<double(double)> cdf,
                                              std::function<double(double)> density) {
    require(static_cast<bool>(cdf), ErrorCode::InvalidArgument, "user renewal law needs a cdf");
    require(cdf(0.0) == 0.0, ErrorCode::InvalidArgument, "renewal cdf must satisfy F(0) = 0");
    RenewalDistribution r;
    r.law_ = User{std::move(cdf), std::move(density)};
    return r;
}

RenewalDistribution RenewalDistribution::degenerate(double at) {
    require(at > 0 && std::isfinite(at), ErrorCode::InvalidArgument, "degenerate renewal must sit at a positive point");
    RenewalDistribution r;
    r.law_ = Degenerate{at};
    return r;
}

RenewalFamily RenewalDistribution::family() const {
    switch (law_.index()) {
        case 0: return RenewalFamily::Exponential;
        case 1: return RenewalFamily::GeneralizedGamma;
        case 2: return RenewalFamily::UserCdf;
        default: return RenewalFamily::Degenerate;
    }
}

const GeneralizedGammaDelay* RenewalDistribution::generalized_gamma_params() const {
    return std::get_if<GeneralizedGammaDelay>(&law_);
}

double RenewalDistribution::exponential_rate() const {
    const auto* e = std::get_if<Exponential>(&law_);
    require(e != nullptr, ErrorCode::InvalidArgument, "renewal law is not exponential");
    return e->rate;
}

double RenewalDistribution::cdf(double x) const {
    if (x <= 0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&law_)) return -std::expm1(-e->rate * x);
    if (const auto* g = std::get_if<GeneralizedGammaDelay>(&law_)) return gg_cdf(*g, x);
    if (const auto* u = std::get_if<User>(&law_)) return std::isinf(x) ? 1.0 : std::clamp(u->cdf(x), 0.0, 1.0);
    return x >= std::get<Degenerate>(law_).at ? 1.0 : 0.0;
}

double RenewalDistribution::survival(double x) const {
    if (x <= 0) return 1.0;
    if (const auto* e = std::get_if<Exponential>(&law_)) return std::exp(-e->rate * x);
    if (const auto* g = std::get_if<GeneralizedGammaDelay>(&law_)) return gg_survival(*g, x);
    return 1.0 - cdf(x);
}

double RenewalDistribution::density(double x) const {
    if (x <= 0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&law_)) return e->rate * std::exp(-e->rate * x);
    if (const auto* g = std::get_if<GeneralizedGammaDelay>(&law_)) return gg_density(*g, x);
    if (const auto* u = std::get_if<User>(&law_)) {
        if (u->density) return u->density(x);
        const double h = 1e-6 * std::max(x, 1e-3);
        return (u->cdf(x + h) - u->cdf(std::max(x - h, 0.0))) / (x + h - std::max(x - h, 0.0));
    }
    fail(ErrorCode::Unsupported, "degenerate renewal law has no density");
}

double RenewalDistribution::survival_quantile(double s) const {
    require(s >= 0 && s <= 1, ErrorCode::Domain, "probability outside [0, 1]");
    if (const auto* e = std::get_if<Exponential>(&law_)) return s == 0 ? kInf : -std::log(s) / e->rate;
    if (const auto* g = std::get_if<GeneralizedGammaDelay>(&law_)) return gg_survival_quantile(*g, s);
    if (const auto* d = std::get_if<Degenerate>(&law_)) return d->at;
    if (s == 1.0) return 0.0;
    if (s == 0.0) return kInf;
    const auto& u = std::get<User>(law_);
    double hi = 1.0;
    while (1.0 - u.cdf(hi) > s) {
        hi *= 2.0;
        require(hi < 1e300, ErrorCode::Convergence, "user renewal cdf does not reach the requested level");
    }
    return numerics::find_root([&](double x) { return (1.0 - u.cdf(x)) - s; }, 0.0, hi);
}

double RenewalDistribution::mean() const {
    if (const auto* e = std::get_if<Exponential>(&law_)) return 1.0 / e->rate;
    if (const auto* g = std::get_if<GeneralizedGammaDelay>(&law_)) return gg_raw_moment(*g, 1.0);
    if (const auto* d = std::get_if<Degenerate>(&law_)) return d->at;
    return numerics::integrate([&](double x) { return survival(x); }, 0.0, kInf, 1e-9).value;
}

double RenewalDistribution::sample(RandomStream& rng) const { return survival_quantile(rng.uniform()); }

// ---------------------------------------------------------------------------
// Paths, intensity, likelihood

OccurrenceHistory sample_trp(const TrendSpec& spec, const RenewalDistribution& renewal, double horizon,
                             RandomStream& rng) {
    require(horizon > 0, ErrorCode::InvalidArgument, "TRP horizon must be positive");
    OccurrenceHistory h;
    h.horizon = horizon;
    const double sat = spec.saturation();
    const double end = cumulative_trend(spec, horizon);
    double s = 0.0;
    for (;;) {
        s += renewal.sample(rng);
        if (s >= sat) {
            h.saturated = true;
            break;
        }
        if (s > end) break;
        double t = inverse_cumulative_trend(spec, s);
        if (t > horizon) break;
        if (!h.times.empty() && t <= h.times.back()) t = std::nextafter(h.times.back(), kInf);
        h.times.push_back(t);
    }
    return h;
}

double conditional_intensity(const TrendSpec& spec, const RenewalDistribution& renewal,
                             const OccurrenceHistory& history, double t) {
    const double last = history.times.empty() ? 0.0 : history.times.back();
    require(t >= last, ErrorCode::InvalidArgument, "intensity evaluated before the last event of the history");
    const double lam = trend_intensity(spec, t);
    if (renewal.family() == RenewalFamily::Exponential) return renewal.exponential_rate() * lam;
    if (renewal.family() == RenewalFamily::Degenerate)
        fail(ErrorCode::Unsupported, "degenerate renewal law has no hazard");
    const double x = cumulative_trend(spec, t) - cumulative_trend(spec, last);
    const double surv = renewal.survival(x);
    if (!(surv > 0)) fail(ErrorCode::Divergence, "renewal survival vanishes: hazard is unbounded");
    return renewal.density(x) / surv * lam;
}

double trp_log_likelihood(const TrendSpec& spec, const RenewalDistribution& renewal,
                          const OccurrenceHistory& history) {
    double ll = 0.0;
    double prev = 0.0;
    for (double t : history.times) {
        const double cur = cumulative_trend(spec, t);
        ll += std::log(renewal.density(cur - prev)) + std::log(trend_intensity(spec, t));
        prev = cur;
    }
    ll += std::log(renewal.survival(cumulative_trend(spec, history.horizon) - prev));
    return ll;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

double safe_nll(const TrendSpec& spec, const RenewalDistribution& renewal, const OccurrenceHistory& h) {
    try {
        const double ll = trp_log_likelihood(spec, renewal, h);
        return std::isfinite(ll) ? -ll : kInf;
    } catch (const Error&) {
        return kInf;
    }
}

// Grid scan on one log-parameter followed by Brent inside the best cell.
TrendFit fit_one_parameter(const std::function<TrendSpec(double)>& make, double centre,
                           const RenewalDistribution& renewal, const OccurrenceHistory& h) {
    constexpr int kGrid = 49;
    constexpr double kHalfWidth = 6.0;
    const auto nll = [&](double theta) { return safe_nll(make(theta), renewal, h); };
    std::vector<double> xs(kGrid), vs(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        xs[i] = centre - kHalfWidth + 2.0 * kHalfWidth * i / (kGrid - 1);
        vs[i] = nll(xs[i]);
    }
    const int best = static_cast<int>(std::min_element(vs.begin(), vs.end()) - vs.begin());
    TrendFit fit;
    if (!std::isfinite(vs[best])) fail(ErrorCode::Convergence, "TRP likelihood is not finite anywhere on the search grid");
    const double lo = xs[std::max(best - 1, 0)];
    const double hi = xs[std::min(best + 1, kGrid - 1)];
    const auto m = numerics::minimize_1d(nll, lo, hi, 52, 500);
    fit.spec = make(m.x);
    fit.log_likelihood = -m.value;
    fit.iterations = m.iterations + kGrid;
    fit.converged = best > 0 && best < kGrid - 1;
    if (!fit.converged) {
        std::ostringstream msg;
        msg << "trend fit hit the edge of the search range; best log-likelihood " << fit.log_likelihood;
        fail(ErrorCode::Convergence, msg.str());
    }
    return fit;
}

}  // namespace

TrendFit fit_trend(const OccurrenceHistory& history, TrendFamily family, const RenewalDistribution& renewal,
                   TimeUnit unit) {
    const std::size_t n = history.times.size();
    require(n >= 10, ErrorCode::InvalidArgument, "trend fitting needs at least 10 events");
    require(history.horizon >= history.times.back(), ErrorCode::InvalidArgument,
            "history horizon precedes its last event");
    for (std::size_t i = 1; i < n; ++i)
        require(history.times[i] > history.times[i - 1], ErrorCode::InvalidArgument,
                "event times must be strictly increasing");

    const double scale = unit_scale(unit);
    const double tau = history.horizon * scale;
    const double mass = static_cast<double>(n) * renewal.mean();

    if (family == TrendFamily::Constant) {
        const auto make = [&](double theta) { return TrendSpec::constant(std::exp(theta), unit); };
        return fit_one_parameter(make, std::log(mass / tau), renewal, history);
    }
    if (family == TrendFamily::Power) {
        double g0 = 1.0;
        if (tau > 1.0 + 1e-9 && mass > 1.0) g0 = std::log(mass) / std::log(tau);
        const auto make = [&](double theta) { return TrendSpec::power(std::exp(theta), unit); };
        return fit_one_parameter(make, std::log(std::clamp(g0, 1e-3, 1e3)), renewal, history);
    }

    // Gamma mixture: six log-parameters, Nelder-Mead from moment-matched starts.
    std::vector<double> x(history.times);
    for (double& v : x) v *= scale;
    const auto moments = [](const std::vector<double>& v, std::size_t a, std::size_t b) {
        double m = 0.0, s2 = 0.0;
        for (std::size_t i = a; i < b; ++i) m += v[i];
        m /= double(b - a);
        for (std::size_t i = a; i < b; ++i) s2 += (v[i] - m) * (v[i] - m);
        s2 = std::max(s2 / double(b - a), 1e-12 * m * m + 1e-300);
        return std::array<double, 2>{m * m / s2, m / s2};
    };
    const auto all = moments(x, 0, n);
    const auto lower = moments(x, 0, n / 2);
    const auto upper = moments(x, n / 2, n);
    const double total = mass * 1.05;
    const auto pack = [](double p1, double a1, double l1, double p2, double a2, double l2) {
        return std::vector<double>{std::log(p1), std::log(a1), std::log(l1), std::log(p2), std::log(a2), std::log(l2)};
    };
    const auto make = [&](std::span<const double> th) {
        return TrendSpec::gamma_mixture(std::exp(th[0]), std::exp(th[1]), std::exp(th[2]), std::exp(th[3]),
                                        std::exp(th[4]), std::exp(th[5]), unit);
    };
    const std::vector<std::vector<double>> starts{
        pack(0.5 * total, all[0], all[1], 0.5 * total, all[0], all[1] * 0.7),
        pack(0.5 * total, lower[0], lower[1], 0.5 * total, upper[0], upper[1]),
        pack(0.8 * total, all[0] * 0.6, all[1] * 0.6, 0.2 * total, all[0] * 1.6, all[1] * 1.6),
    };
    const auto nll = [&](std::span<const double> th) {
        try {
            return safe_nll(make(th), renewal, history);
        } catch (const Error&) {
            return kInf;
        }
    };
    TrendFit best;
    best.log_likelihood = -kInf;
    for (const auto& s : starts) {
        auto r = numerics::nelder_mead(nll, s, std::vector<double>(6, 0.3), 1e-12, 20000);
        // restart once from the result to escape a collapsed simplex
        r = numerics::nelder_mead(nll, r.x, std::vector<double>(6, 0.05), 1e-12, 20000);
        if (std::isfinite(r.value) && -r.value > best.log_likelihood) {
            best.spec = make(r.x);
            best.log_likelihood = -r.value;
            best.iterations = r.iterations;
            best.converged = r.converged;
        }
    }
    if (!best.converged) {
        std::ostringstream msg;
        msg << "gamma-mixture trend fit did not converge; best log-likelihood " << best.log_likelihood;
        fail(ErrorCode::Convergence, msg.str());
    }
    return best;
}

// ---------------------------------------------------------------------------
// Marginals of TRP inter-arrival times

namespace {

// Density of the sum of m iid renewal increments.
double sum_density(const RenewalDistribution& r, int m, double s) {
    if (s <= 0) return 0.0;
    if (m == 1) return r.density(s);
    if (r.family() == RenewalFamily::Exponential) {
        const double rate = r.exponential_rate();
        return rate * boost::math::gamma_p_derivative(double(m), rate * s);
    }
    const auto inner = [&](double x) { return sum_density(r, m - 1, x) * r.density(s - x); };
    return numerics::integrate(inner, 0.0, s, 1e-9, 15).value;
}

double marginal_by_quadrature(const RenewalDistribution& r, int m, const std::function<double(double)>& h,
                              double upper) {
    if (m == 0) return h(0.0);
    if (r.family() == RenewalFamily::Degenerate) {
        const double s = m * r.mean();
        return s < upper ? h(s) : 0.0;
    }
    const auto integrand = [&](double s) { return h(s) * sum_density(r, m, s); };
    return numerics::integrate(integrand, 0.0, upper, 1e-9, 15).value;
}

double marginal_by_mc(const RenewalDistribution& r, int m, const std::function<double(double)>& h, double upper,
                      const MarginalOptions& opts) {
    require(opts.mc_paths > 0, ErrorCode::InvalidArgument, "MC path count must be positive");
    double acc = 0.0;
    for (std::size_t p = 0; p < opts.mc_paths; ++p) {
        auto rng = make_stream(opts.seed, p, static_cast<std::uint64_t>(m), StreamRole::TrpDelay);
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += r.sample(rng);
        if (s < upper) acc += h(s);
    }
    return acc / double(opts.mc_paths);
}

bool use_quadrature(const MarginalOptions& opts, int m) {
    if (opts.method == MarginalMethod::MonteCarlo) return false;
    if (opts.method == MarginalMethod::Quadrature) {
        if (m + 1 > kMaxQuadratureIndex)
            fail(ErrorCode::Unsupported, "quadrature marginals are limited to k <= 4; use Monte Carlo");
        return true;
    }
    return m + 1 <= kMaxQuadratureIndex;
}

}  // namespace

double trp_delay_marginal_cdf(const TrendSpec& spec, const RenewalDistribution& renewal, int k, double t,
                              const MarginalOptions& opts) {
    require(k >= 1, ErrorCode::InvalidArgument, "delay index k must be >= 1");
    require(t >= 0, ErrorCode::Domain, "delay marginal requires t >= 0");
    if (spec.family == TrendFamily::Constant) return renewal.cdf(cumulative_trend(spec, t));
    const int m = k - 1;
    const bool quad = use_quadrature(opts, m);
    if (m == 0) return renewal.cdf(cumulative_trend(spec, t));
    const double sat = spec.saturation();
    const auto h = [&](double s) {
        if (s >= sat) return 0.0;
        const double u = inverse_cumulative_trend(spec, s);
        return renewal.cdf(cumulative_trend(spec, u + t) - s);
    };
    return quad ? marginal_by_quadrature(renewal, m, h, sat) : marginal_by_mc(renewal, m, h, sat, opts);
}

double trp_arrival_cdf(const TrendSpec& spec, const RenewalDistribution& renewal, int k, double t,
                       const MarginalOptions& opts) {
    require(k >= 1, ErrorCode::InvalidArgument, "arrival index k must be >= 1");
    require(t >= 0, ErrorCode::Domain, "arrival marginal requires t >= 0");
    const double x = cumulative_trend(spec, t);
    if (renewal.family() == RenewalFamily::Exponential)
        return boost::math::gamma_p(double(k), renewal.exponential_rate() * x);
    const int m = k - 1;
    const bool quad = use_quadrature(opts, m);
    const auto h = [&](double s) { return renewal.cdf(x - s); };
    if (m == 0) return renewal.cdf(x);
    return quad ? marginal_by_quadrature(renewal, m, h, x) : marginal_by_mc(renewal, m, h, x, opts);
}

}  // namespace atrp
