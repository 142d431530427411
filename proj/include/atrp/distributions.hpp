#pragma once

// Settlement-delay and severity models: generalized gamma delays, doubly
// truncated conditional delays, zero-inflated delay-coupled lognormal
// mixtures with an optional injury-class shift, and the Frank copula.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "atrp/rng.hpp"

namespace atrp {

inline constexpr double kDaysPerYear = 365.0;
inline constexpr int kInjuryClasses = 9;

/// Generalized gamma with density b/(x Γ(a)) (x/c)^{ab} exp(-(x/c)^b), x in years.
struct GeneralizedGammaDelay {
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;

    void validate() const;
    /// Same shape with the scale multiplied by m (delay multiplier).
    GeneralizedGammaDelay scaled(double m) const;
};

double gg_density(const GeneralizedGammaDelay& d, double x);
double gg_log_density(const GeneralizedGammaDelay& d, double x);
double gg_cdf(const GeneralizedGammaDelay& d, double x);
double gg_survival(const GeneralizedGammaDelay& d, double x);
double gg_quantile(const GeneralizedGammaDelay& d, double p);
/// Inverse of the survival function; accurate deep in the upper tail.
double gg_survival_quantile(const GeneralizedGammaDelay& d, double s);
double gg_sample(const GeneralizedGammaDelay& d, RandomStream& rng);
/// E[X^r] = c^r Γ(a + r/b) / Γ(a).
double gg_raw_moment(const GeneralizedGammaDelay& d, double r);

/// While alive, gg_survival and gg_survival_quantile on this thread use
/// per-shape interpolation tables (relative error about 1e-11) instead of
/// exact incomplete gamma calls. Tables are built on first use of a shape.
class TabulatedGammaScope {
public:
    TabulatedGammaScope();
    ~TabulatedGammaScope();
    TabulatedGammaScope(const TabulatedGammaScope&) = delete;
    TabulatedGammaScope& operator=(const TabulatedGammaScope&) = delete;

private:
    bool previous_;
};

/// Degenerate delay: all mass at one point.
struct PointMassDelay {
    double at = 0.0;
};

/// Settlement delay distribution used by the reserving engine.
class SettlementDelay {
public:
    SettlementDelay() = default;
    SettlementDelay(GeneralizedGammaDelay gg);  // NOLINT(google-explicit-constructor)
    SettlementDelay(PointMassDelay pm);         // NOLINT(google-explicit-constructor)

    bool is_point_mass() const { return std::holds_alternative<PointMassDelay>(model_); }
    const GeneralizedGammaDelay* generalized_gamma() const;
    const PointMassDelay* point_mass() const;

    double cdf(double x) const;
    double survival(double x) const;
    double density(double x) const;
    /// Draw with survival probability s: returns S^{-1}(s).
    double survival_quantile(double s) const;
    SettlementDelay scaled(double m) const;

private:
    std::variant<GeneralizedGammaDelay, PointMassDelay> model_ = GeneralizedGammaDelay{};
};

/// Settlement delay conditioned on lower < ζ <= upper.
class TruncatedDelay {
public:
    /// Throws DegenerateWindow when the base assigns no mass to the window.
    TruncatedDelay(SettlementDelay base, double lower, double upper);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    double mass() const { return mass_; }
    const SettlementDelay& base() const { return base_; }

    double cdf(double v) const;
    /// Inverse-CDF draw from one uniform.
    double sample_from_uniform(double u) const;
    double sample(RandomStream& rng) const;

    /// E[g(ζ) 1{lo < ζ <= hi}] under the truncated law, by adaptive quadrature.
    double expect(const std::function<double(double)>& g, double lo, double hi) const;

private:
    SettlementDelay base_;
    double lower_;
    double upper_;
    double s_lower_;
    double s_upper_;
    double mass_;
};

inline constexpr double kMinWindowMass = 1e-14;

double truncated_delay_cdf(const TruncatedDelay& td, double v);
double truncated_delay_sample(const TruncatedDelay& td, RandomStream& rng);

/// How indemnity, expense and settlement delay are linked.
enum class DependenceMode {
    KappaCoupled,  ///< severities scale with (1 + 365ζ)^κ
    Independent,   ///< κ treated as zero
    FrankCopula,   ///< κ coupling plus a Frank copula between X̃ and Ỹ
};

const char* dependence_mode_name(DependenceMode mode);
DependenceMode parse_dependence_mode(const std::string& name);

/// Zero-inflated two-component lognormal mixture whose log-location shifts by
/// κ ln(1 + 365ζ) and, when a class is given, by phi[class].
struct SeverityModel {
    double p0 = 0.0;
    std::array<double, 2> weights{1.0, 0.0};
    std::array<double, 2> mu{0.0, 0.0};
    std::array<double, 2> sigma{1.0, 1.0};
    double kappa = 0.0;
    std::optional<std::array<double, kInjuryClasses>> phi;

    void validate() const;
    /// Additive log-scale shift for a delay and optional class.
    double log_shift(double zeta, std::optional<int> injury_class) const;
    SeverityModel without_delay_coupling() const;
};

double severity_cdf(const SeverityModel& m, double x, double zeta,
                    std::optional<int> injury_class = std::nullopt);
double severity_sample(const SeverityModel& m, double zeta, std::optional<int> injury_class,
                       RandomStream& rng);
/// Quantile of the conditional law (zero for u <= p0), by monotone inversion.
double severity_quantile(const SeverityModel& m, double u, double zeta,
                         std::optional<int> injury_class = std::nullopt);
/// E[X^order | ζ] for order 1 or 2, closed form.
double conditional_severity_moment(const SeverityModel& m, double zeta,
                                   std::optional<int> injury_class, int order);

/// Frank copula C(u,v) = -1/θ ln(1 + (e^{-θu}-1)(e^{-θv}-1)/(e^{-θ}-1)).
struct FrankCopula {
    double theta = 1.0;

    void validate() const;
    double cdf(double u, double v) const;
    double density(double u, double v) const;
    /// Inverse of ∂C/∂u at u, applied to w.
    double conditional_inverse(double u, double w) const;
};

/// Kendall's tau for the Frank family, 1 - 4/θ (1 - D1(θ)).
double frank_tau(double theta);
/// Inverse of frank_tau. Returns 0 (independence sentinel) for tau == 0.
double frank_theta_from_tau(double tau);
std::array<double, 2> frank_sample(const FrankCopula& c, RandomStream& rng);

/// E[X Y | ζ]. Without a copula X̃ and Ỹ are independent and this is the
/// product of first moments; with one, E[X̃Ỹ] comes from Hoeffding's identity
/// integrated over the copula.
double conditional_cross_moment(const SeverityModel& mx, const SeverityModel& my, double zeta,
                                std::optional<int> injury_class,
                                const std::optional<FrankCopula>& copula = std::nullopt);

/// E[X̃ Ỹ] for the unshifted models under a Frank copula (2-D quadrature).
double frank_product_moment(const SeverityModel& mx, const SeverityModel& my,
                            const FrankCopula& copula);

}  // namespace atrp
