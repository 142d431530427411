#include "atrp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "atrp/error.hpp"
#include "atrp/numerics.hpp"

namespace atrp {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

std::array<double, 2> normalized(const std::array<double, 2>& w) {
    const double s = w[0] + w[1];
    return {w[0] / s, w[1] / s};
}

// Q(a, .) and its inverse for one shape, as cubic Hermite interpolation on
// logit scales with exact slopes at the nodes: log g against logit(s) for the
// inverse, logit(Q) against log g for Q itself. Relative error is around 1e-11;
// queries outside the tabulated range fall back to boost.
class GammaTables {
public:
    explicit GammaTables(double a) : a_(a) {
        inv_.resize(kNodes);
        for (int k = 0; k < kNodes; ++k) {
            const double v = kLo + k * kStep;
            // both tails from the side that keeps full precision
            const double s = 1.0 / (1.0 + std::exp(-v));
            const double q = 1.0 / (1.0 + std::exp(v));
            const double g = v <= 0 ? boost::math::gamma_q_inv(a, s) : boost::math::gamma_p_inv(a, q);
            const double f = g > 0 ? boost::math::gamma_p_derivative(a, g) : 0.0;
            auto& n = inv_[k];
            n.ok = g > 1e-250 && std::isfinite(g) && f > 0 && std::isfinite(f);
            if (!n.ok) continue;
            n.y = std::log(g);
            n.dy = -s * q / (f * g);
        }
        // the forward table spans the same g range
        int first = 0, last = kNodes - 1;
        while (first < kNodes && !inv_[first].ok) ++first;
        while (last >= 0 && !inv_[last].ok) --last;
        if (first >= last) return;
        w_lo_ = inv_[last].y;  // small g sits at large v
        const double span = inv_[first].y - w_lo_;
        const int nodes = std::max(kNodes, static_cast<int>(std::ceil(span / kMaxForwardStep)) + 1);
        w_step_ = span / (nodes - 1);
        fwd_.resize(nodes);
        for (int k = 0; k < nodes; ++k) {
            const double g = std::exp(w_lo_ + k * w_step_);
            const double q = boost::math::gamma_q(a, g), p = boost::math::gamma_p(a, g);
            const double f = boost::math::gamma_p_derivative(a, g);
            auto& n = fwd_[k];
            n.ok = q > 0 && p > 0 && std::isfinite(f);
            if (!n.ok) continue;
            n.y = std::log(q) - std::log(p);
            n.dy = -f * g / (q * p);
        }
    }

    double inverse(double s) const {
        const double v = std::log(s) - std::log1p(-s);
        double y;
        if (!interpolate(inv_, (v - kLo) / kStep, kStep, y)) return boost::math::gamma_q_inv(a_, s);
        return std::exp(y);
    }

    double survival(double g) const {
        double y;
        if (fwd_.empty() || !(g > 0) || !interpolate(fwd_, (std::log(g) - w_lo_) / w_step_, w_step_, y))
            return boost::math::gamma_q(a_, g);
        return 1.0 / (1.0 + std::exp(-y));
    }

private:
    struct Node {
        double y = 0.0, dy = 0.0;
        bool ok = false;
    };

    static bool interpolate(const std::vector<Node>& t, double pos, double step, double& out) {
        if (!(pos >= 0.0 && pos < double(t.size() - 1))) return false;
        const auto k = static_cast<std::size_t>(pos);
        const Node &l = t[k], &r = t[k + 1];
        if (!l.ok || !r.ok) return false;
        const double u = pos - double(k), u2 = u * u, u3 = u2 * u;
        out = (2 * u3 - 3 * u2 + 1) * l.y + (u3 - 2 * u2 + u) * step * l.dy + (-2 * u3 + 3 * u2) * r.y +
              (u3 - u2) * step * r.dy;
        return true;
    }

    static constexpr int kNodes = 8193;
    static constexpr double kLo = -36.0;
    static constexpr double kStep = 72.0 / (kNodes - 1);
    static constexpr double kMaxForwardStep = 0.01;
    double a_;
    std::vector<Node> inv_, fwd_;
    double w_lo_ = 0.0, w_step_ = 1.0;
};

thread_local bool tabulate = false;

std::shared_ptr<const GammaTables> shared_tables(double a) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const GammaTables>> tables;
    std::lock_guard lock(mu);
    auto& t = tables[a];
    if (!t) t = std::make_shared<const GammaTables>(a);
    return t;
}

const GammaTables* tables_for(double a) {
    if (!tabulate) return nullptr;
    thread_local double cached_a = std::numeric_limits<double>::quiet_NaN();
    thread_local std::shared_ptr<const GammaTables> table;
    if (a != cached_a) {
        table = shared_tables(a);
        cached_a = a;
    }
    return table.get();
}

double gamma_survival_inverse(double a, double s) {
    const auto* t = tables_for(a);
    return t ? t->inverse(s) : boost::math::gamma_q_inv(a, s);
}

double gamma_survival(double a, double g) {
    const auto* t = tables_for(a);
    return t ? t->survival(g) : boost::math::gamma_q(a, g);
}

}  // namespace

TabulatedGammaScope::TabulatedGammaScope() : previous_(tabulate) { tabulate = true; }

TabulatedGammaScope::~TabulatedGammaScope() { tabulate = previous_; }

// ---------------------------------------------------------------------------
// Generalized gamma

void GeneralizedGammaDelay::validate() const {
    require(a > 0 && b > 0 && c > 0 && std::isfinite(a) && std::isfinite(b) && std::isfinite(c),
            ErrorCode::InvalidArgument, "generalized gamma parameters must be positive and finite");
}

GeneralizedGammaDelay GeneralizedGammaDelay::scaled(double m) const {
    require(m > 0, ErrorCode::InvalidArgument, "delay multiplier must be positive");
    return {a, b, c * m};
}

double gg_log_density(const GeneralizedGammaDelay& d, double x) {
    require(x > 0, ErrorCode::Domain, "generalized gamma density requires x > 0");
    const double z = std::log(x / d.c);
    return std::log(d.b) - std::lgamma(d.a) - std::log(x) + d.a * d.b * z - std::exp(d.b * z);
}

double gg_density(const GeneralizedGammaDelay& d, double x) { return std::exp(gg_log_density(d, x)); }

double gg_cdf(const GeneralizedGammaDelay& d, double x) {
    require(x >= 0, ErrorCode::Domain, "generalized gamma cdf requires x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(d.a, std::pow(x / d.c, d.b));
}

double gg_survival(const GeneralizedGammaDelay& d, double x) {
    require(x >= 0, ErrorCode::Domain, "generalized gamma survival requires x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return gamma_survival(d.a, std::pow(x / d.c, d.b));
}

double gg_quantile(const GeneralizedGammaDelay& d, double p) {
    require(p >= 0 && p <= 1, ErrorCode::Domain, "probability outside [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return d.c * std::pow(boost::math::gamma_p_inv(d.a, p), 1.0 / d.b);
}

double gg_survival_quantile(const GeneralizedGammaDelay& d, double s) {
    require(s >= 0 && s <= 1, ErrorCode::Domain, "probability outside [0, 1]");
    if (s == 1.0) return 0.0;
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    return d.c * std::pow(gamma_survival_inverse(d.a, s), 1.0 / d.b);
}

double gg_sample(const GeneralizedGammaDelay& d, RandomStream& rng) {
    // gamma variate by inversion, then the power transform
    const double g = gamma_survival_inverse(d.a, rng.uniform());
    return d.c * std::pow(g, 1.0 / d.b);
}

double gg_raw_moment(const GeneralizedGammaDelay& d, double r) {
    return std::exp(r * std::log(d.c) + std::lgamma(d.a + r / d.b) - std::lgamma(d.a));
}

// ---------------------------------------------------------------------------
// SettlementDelay

SettlementDelay::SettlementDelay(GeneralizedGammaDelay gg) : model_(gg) { gg.validate(); }

SettlementDelay::SettlementDelay(PointMassDelay pm) : model_(pm) {
    require(pm.at >= 0 && std::isfinite(pm.at), ErrorCode::InvalidArgument,
            "point-mass delay must be finite and non-negative");
}

const GeneralizedGammaDelay* SettlementDelay::generalized_gamma() const {
    return std::get_if<GeneralizedGammaDelay>(&model_);
}

const PointMassDelay* SettlementDelay::point_mass() const { return std::get_if<PointMassDelay>(&model_); }

double SettlementDelay::cdf(double x) const {
    if (const auto* pm = point_mass()) return x >= pm->at ? 1.0 : 0.0;
    return gg_cdf(*generalized_gamma(), x);
}

double SettlementDelay::survival(double x) const {
    if (const auto* pm = point_mass()) return x >= pm->at ? 0.0 : 1.0;
    return gg_survival(*generalized_gamma(), x);
}

double SettlementDelay::density(double x) const {
    if (point_mass()) fail(ErrorCode::Unsupported, "point-mass delay has no density");
    return x > 0 ? gg_density(*generalized_gamma(), x) : 0.0;
}

double SettlementDelay::survival_quantile(double s) const {
    if (const auto* pm = point_mass()) return pm->at;
    return gg_survival_quantile(*generalized_gamma(), s);
}

SettlementDelay SettlementDelay::scaled(double m) const {
    require(m > 0, ErrorCode::InvalidArgument, "delay multiplier must be positive");
    if (const auto* pm = point_mass()) return PointMassDelay{pm->at * m};
    return generalized_gamma()->scaled(m);
}

// ---------------------------------------------------------------------------
// TruncatedDelay

TruncatedDelay::TruncatedDelay(SettlementDelay base, double lower, double upper)
    : base_(std::move(base)), lower_(lower), upper_(upper) {
    require(lower >= 0 && lower < upper, ErrorCode::InvalidArgument,
            "truncation window requires 0 <= lower < upper");
    if (const auto* pm = base_.point_mass()) {
        const bool inside = pm->at > lower && pm->at <= upper;
        s_lower_ = 1.0;
        s_upper_ = inside ? 0.0 : 1.0;
        mass_ = inside ? 1.0 : 0.0;
    } else {
        s_lower_ = base_.survival(lower);
        s_upper_ = base_.survival(upper);
        mass_ = s_lower_ - s_upper_;
    }
    if (!(mass_ > kMinWindowMass))
        fail(ErrorCode::DegenerateWindow, "settlement window (" + std::to_string(lower) + ", " +
                                              std::to_string(upper) + "] carries no probability mass");
}

double TruncatedDelay::cdf(double v) const {
    require(v >= lower_ && v <= upper_, ErrorCode::Domain, "value outside the truncation window");
    if (v == upper_) return 1.0;
    if (const auto* pm = base_.point_mass()) return v >= pm->at ? 1.0 : 0.0;
    return std::clamp((s_lower_ - base_.survival(v)) / mass_, 0.0, 1.0);
}

double TruncatedDelay::sample_from_uniform(double u) const {
    if (const auto* pm = base_.point_mass()) return pm->at;
    const double s = s_lower_ - u * mass_;
    const double x = base_.survival_quantile(std::clamp(s, s_upper_, s_lower_));
    return std::clamp(x, std::nextafter(lower_, upper_), upper_);
}

double TruncatedDelay::sample(RandomStream& rng) const { return sample_from_uniform(rng.uniform()); }

double TruncatedDelay::expect(const std::function<double(double)>& g, double lo, double hi) const {
    const double a = std::max(lo, lower_);
    const double b = std::min(hi, upper_);
    if (!(a < b)) return 0.0;
    if (const auto* pm = base_.point_mass()) return (pm->at > a && pm->at <= b) ? g(pm->at) / mass_ : 0.0;
    const auto& gg = *base_.generalized_gamma();
    const auto integrand = [&](double v) { return v > 0 ? g(v) * gg_density(gg, v) : 0.0; };
    return numerics::integrate(integrand, a, b).value / mass_;
}

double truncated_delay_cdf(const TruncatedDelay& td, double v) { return td.cdf(v); }

double truncated_delay_sample(const TruncatedDelay& td, RandomStream& rng) { return td.sample(rng); }

// ---------------------------------------------------------------------------
// Severity

const char* dependence_mode_name(DependenceMode mode) {
    switch (mode) {
        case DependenceMode::KappaCoupled: return "kappa_coupled";
        case DependenceMode::Independent: return "independent";
        case DependenceMode::FrankCopula: return "frank_copula";
    }
    return "unknown";
}

DependenceMode parse_dependence_mode(const std::string& name) {
    if (name == "kappa_coupled") return DependenceMode::KappaCoupled;
    if (name == "independent") return DependenceMode::Independent;
    if (name == "frank_copula") return DependenceMode::FrankCopula;
    fail(ErrorCode::Parse, "unknown dependence mode '" + name + "'");
}

void SeverityModel::validate() const {
    require(p0 >= 0 && p0 <= 1, ErrorCode::InvalidArgument, "zero mass p0 must lie in [0, 1]");
    require(weights[0] >= 0 && weights[1] >= 0 && std::abs(weights[0] + weights[1] - 1.0) < 1e-5,
            ErrorCode::InvalidArgument, "mixture weights must be non-negative and sum to 1");
    for (int i = 0; i < 2; ++i) {
        require(std::isfinite(mu[i]), ErrorCode::InvalidArgument, "mixture location must be finite");
        require(sigma[i] >= 0 && std::isfinite(sigma[i]), ErrorCode::InvalidArgument,
                "mixture scale must be non-negative");
    }
    require(std::isfinite(kappa), ErrorCode::InvalidArgument, "kappa must be finite");
}

double SeverityModel::log_shift(double zeta, std::optional<int> injury_class) const {
    require(zeta >= 0, ErrorCode::Domain, "settlement delay must be non-negative");
    double shift = kappa == 0.0 ? 0.0 : kappa * std::log1p(kDaysPerYear * zeta);
    if (injury_class && phi) {
        require(*injury_class >= 0 && *injury_class < kInjuryClasses, ErrorCode::Domain,
                "injury class outside 0..8");
        shift += (*phi)[*injury_class];
    }
    return shift;
}

SeverityModel SeverityModel::without_delay_coupling() const {
    SeverityModel m = *this;
    m.kappa = 0.0;
    return m;
}

double severity_cdf(const SeverityModel& m, double x, double zeta, std::optional<int> injury_class) {
    require(x >= 0, ErrorCode::Domain, "severity cdf requires x >= 0");
    const double shift = m.log_shift(zeta, injury_class);
    if (x == 0.0 || m.p0 == 1.0) return m.p0;
    const auto w = normalized(m.weights);
    const double lx = std::log(x);
    double mix = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (w[i] == 0.0) continue;
        const double loc = m.mu[i] + shift;
        const double comp = m.sigma[i] == 0.0 ? (lx >= loc ? 1.0 : 0.0) : normal_cdf((lx - loc) / m.sigma[i]);
        mix += w[i] * comp;
    }
    return m.p0 + (1.0 - m.p0) * mix;
}

double severity_sample(const SeverityModel& m, double zeta, std::optional<int> injury_class,
                       RandomStream& rng) {
    const double u_zero = rng.uniform();
    const double u_comp = rng.uniform();
    const double z = rng.normal();
    if (u_zero < m.p0) return 0.0;
    const auto w = normalized(m.weights);
    const int i = u_comp < w[0] ? 0 : 1;
    return std::exp(m.mu[i] + m.log_shift(zeta, injury_class) + m.sigma[i] * z);
}

double severity_quantile(const SeverityModel& m, double u, double zeta, std::optional<int> injury_class) {
    require(u > 0 && u < 1, ErrorCode::Domain, "quantile level must lie in (0, 1)");
    if (u <= m.p0) return 0.0;
    const double q = (u - m.p0) / (1.0 - m.p0);
    const double shift = m.log_shift(zeta, injury_class);
    const auto w = normalized(m.weights);
    if (w[1] == 0.0 || w[0] == 0.0) {
        const int i = w[0] == 0.0 ? 1 : 0;
        return std::exp(m.mu[i] + shift + m.sigma[i] * normal_quantile(q));
    }
    const auto mix_cdf = [&](double y) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
            s += w[i] * (m.sigma[i] == 0.0 ? (y >= m.mu[i] ? 1.0 : 0.0) : normal_cdf((y - m.mu[i]) / m.sigma[i]));
        return s - q;
    };
    const auto mix_pdf = [&](double y) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
            if (m.sigma[i] > 0) s += w[i] * normal_pdf((y - m.mu[i]) / m.sigma[i]) / m.sigma[i];
        return s;
    };
    const double spread = 40.0 * std::max({m.sigma[0], m.sigma[1], 1e-3});
    const double lo = std::min(m.mu[0], m.mu[1]) - spread;
    const double hi = std::max(m.mu[0], m.mu[1]) + spread;
    return std::exp(numerics::find_root(mix_cdf, lo, hi, mix_pdf, 1e-15) + shift);
}

double conditional_severity_moment(const SeverityModel& m, double zeta, std::optional<int> injury_class,
                                   int order) {
    require(order == 1 || order == 2, ErrorCode::InvalidArgument, "moment order must be 1 or 2");
    if (m.p0 == 1.0) return 0.0;
    const auto w = normalized(m.weights);
    const double shift = m.log_shift(zeta, injury_class);
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (w[i] == 0.0) continue;
        const double sig2 = m.sigma[i] * m.sigma[i];
        s += order == 1 ? w[i] * std::exp(m.mu[i] + 0.5 * sig2) : w[i] * std::exp(2.0 * m.mu[i] + 2.0 * sig2);
    }
    return (1.0 - m.p0) * std::exp(order * shift) * s;
}

// ---------------------------------------------------------------------------
// Frank copula

void FrankCopula::validate() const {
    require(theta != 0.0 && std::isfinite(theta), ErrorCode::InvalidArgument,
            "Frank copula parameter must be finite and non-zero");
}

double FrankCopula::cdf(double u, double v) const {
    if (u <= 0 || v <= 0) return 0.0;
    if (u >= 1) return std::min(v, 1.0);
    if (v >= 1) return u;
    const double num = std::expm1(-theta * u) * std::expm1(-theta * v) / std::expm1(-theta);
    return -std::log1p(num) / theta;
}

double FrankCopula::density(double u, double v) const {
    const double e1 = -std::expm1(-theta);  // 1 - e^{-θ}
    const double denom = e1 - (-std::expm1(-theta * u)) * (-std::expm1(-theta * v));
    return theta * e1 * std::exp(-theta * (u + v)) / (denom * denom);
}

double FrankCopula::conditional_inverse(double u, double w) const {
    const double num = w * std::expm1(-theta);
    const double den = w + (1.0 - w) * std::exp(-theta * u);
    return std::clamp(-std::log1p(num / den) / theta, 0.0, 1.0);
}

namespace {

// 1 − D1(θ), integrated directly so nothing cancels
double one_minus_debye1(double theta) {
    const auto integrand = [](double t) { return t == 0.0 ? 0.0 : 1.0 - t / std::expm1(t); };
    return numerics::integrate(integrand, 0.0, theta, 1e-14).value / theta;
}

}  // namespace

double frank_tau(double theta) {
    require(std::isfinite(theta), ErrorCode::InvalidArgument, "theta must be finite");
    if (std::abs(theta) < 0.2) {
        // Bernoulli series; truncation error is below 2e-16 relative here
        const double t2 = theta * theta;
        return theta * (1.0 / 9 - t2 * (1.0 / 900 - t2 * (1.0 / 52920 - t2 * (1.0 / 2721600 - t2 / 131725440))));
    }
    return 1.0 - 4.0 / theta * one_minus_debye1(theta);
}

double frank_theta_from_tau(double tau) {
    require(tau > -1 && tau < 1, ErrorCode::Domain, "Kendall tau must lie in (-1, 1)");
    if (tau == 0.0) return 0.0;
    const double sign = tau > 0 ? 1.0 : -1.0;
    double hi = 1.0;
    while (frank_tau(sign * hi) * sign < std::abs(tau)) {
        hi *= 2.0;
        require(hi < 1e7, ErrorCode::Convergence, "Kendall tau too close to +/-1");
    }
    const auto f = [&](double th) { return frank_tau(sign * th) * sign - std::abs(tau); };
    return sign * numerics::find_root(f, 0.0, hi, {}, 1e-15);
}

std::array<double, 2> frank_sample(const FrankCopula& c, RandomStream& rng) {
    const double u = rng.uniform();
    const double w = rng.uniform();
    return {u, c.conditional_inverse(u, w)};
}

namespace {

double frank_cdf_raw(double theta, double u, double v) {
    const double num = std::expm1(-theta * u) * std::expm1(-theta * v) / std::expm1(-theta);
    return -std::log1p(num) / theta;
}

// C(u,v) - uv, evaluated at the smaller of each pair (u, 1-u), (v, 1-v). Frank
// is radially symmetric and its rotation by a quarter turn is Frank with -θ.
double frank_excess(double theta, double u, double ub, double v, double vb) {
    if (u <= 0 || v <= 0 || ub <= 0 || vb <= 0) return 0.0;
    const bool fu = u > ub, fv = v > vb;
    const double a = fu ? ub : u, b = fv ? vb : v;
    const double t = fu == fv ? theta : -theta;
    const double d = frank_cdf_raw(t, a, b) - a * b;
    return fu == fv ? d : -d;
}

// 1 - F(x) for the unshifted model, without cancellation in the tail.
double severity_survival(const SeverityModel& m, double x) {
    if (m.p0 == 1.0) return 0.0;
    if (x <= 0.0) return 1.0 - m.p0;
    const auto w = normalized(m.weights);
    const double lx = std::log(x);
    double mix = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (w[i] == 0.0) continue;
        mix += w[i] * (m.sigma[i] == 0.0 ? (lx >= m.mu[i] ? 0.0 : 1.0) : normal_cdf((m.mu[i] - lx) / m.sigma[i]));
    }
    return (1.0 - m.p0) * mix;
}

}  // namespace

double frank_product_moment(const SeverityModel& mx, const SeverityModel& my, const FrankCopula& copula) {
    copula.validate();
    const double ex = conditional_severity_moment(mx, 0.0, std::nullopt, 1);
    const double ey = conditional_severity_moment(my, 0.0, std::nullopt, 1);
    const SeverityModel bx = mx.without_delay_coupling();
    const SeverityModel by = my.without_delay_coupling();
    const auto range = [](const SeverityModel& m) {
        const double s = 12.0 * std::max(m.sigma[0], m.sigma[1]) + 1.0;
        return std::array<double, 2>{std::min(m.mu[0], m.mu[1]) - s, std::max(m.mu[0], m.mu[1]) + s};
    };
    const auto rx = range(bx);
    const auto ry = range(by);
    // Hoeffding: Cov(X,Y) = ∫∫ C(F(x),G(y)) - F(x)G(y) dx dy, on log coordinates
    const auto inner = [&](double s) {
        const double x = std::exp(s);
        const double fx = severity_cdf(bx, x, 0.0), sx = severity_survival(bx, x);
        const auto g = [&](double r) {
            const double y = std::exp(r);
            return frank_excess(copula.theta, fx, sx, severity_cdf(by, y, 0.0), severity_survival(by, y)) * y;
        };
        return numerics::integrate(g, ry[0], ry[1], 1e-10).value * x;
    };
    const double cov = numerics::integrate(inner, rx[0], rx[1], 1e-9).value;
    return ex * ey + cov;
}

double conditional_cross_moment(const SeverityModel& mx, const SeverityModel& my, double zeta,
                                std::optional<int> injury_class, const std::optional<FrankCopula>& copula) {
    if (!copula) {
        return conditional_severity_moment(mx, zeta, injury_class, 1) *
               conditional_severity_moment(my, zeta, injury_class, 1);
    }
    if (mx.p0 == 1.0 || my.p0 == 1.0) return 0.0;
    const double scale = std::exp(mx.log_shift(zeta, injury_class) + my.log_shift(zeta, injury_class));
    return scale * frank_product_moment(mx, my, *copula);
}

}  // namespace atrp
