#pragma once

// Trend functions and the trend renewal process (TRP): occurrence times T_k
// such that Λ(T_k) is an ordinary renewal walk with inter-arrival CDF F.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "atrp/distributions.hpp"
#include "atrp/rng.hpp"

namespace atrp {

enum class TrendFamily { Constant, Power, GammaMixture };
enum class TimeUnit { Years, Days };

const char* trend_family_name(TrendFamily f);
TrendFamily parse_trend_family(const std::string& name);

/// λ(t) and Λ(t). Parameters are expressed in `unit`; every public function
/// below takes and returns times in years and converts at the boundary.
struct TrendSpec {
    TrendFamily family = TrendFamily::Constant;
    TimeUnit unit = TimeUnit::Years;
    double lambda = 1.0;  // Constant
    double gamma = 1.0;   // Power
    double p1 = 0.0, p2 = 0.0;
    double alpha1 = 1.0, alpha2 = 1.0;
    double lambda1 = 1.0, lambda2 = 1.0;  // rates per unit

    static TrendSpec constant(double lambda, TimeUnit unit = TimeUnit::Years);
    static TrendSpec power(double gamma, TimeUnit unit = TimeUnit::Years);
    static TrendSpec gamma_mixture(double p1, double alpha1, double lambda1, double p2, double alpha2,
                                   double lambda2, TimeUnit unit = TimeUnit::Days);

    void validate() const;
    /// Λ(∞); infinite except for GammaMixture, where it is p1 + p2.
    double saturation() const;
};

/// Λ(t), t in years.
double cumulative_trend(const TrendSpec& spec, double t);
/// λ(t) per year, t in years.
double trend_intensity(const TrendSpec& spec, double t);
/// Λ⁻¹(s) in years. Throws Saturation when s >= Λ(∞).
double inverse_cumulative_trend(const TrendSpec& spec, double s);

enum class RenewalFamily { Exponential, GeneralizedGamma, UserCdf, Degenerate };

/// Inter-arrival law of the transformed renewal walk. F(0) must be 0.
class RenewalDistribution {
public:
    struct Exponential {
        double rate = 1.0;
    };
    struct User {
        std::function<double(double)> cdf;
        std::function<double(double)> density;  // optional; finite differences otherwise
    };
    struct Degenerate {
        double at = 1.0;
    };

    RenewalDistribution() = default;
    static RenewalDistribution exponential(double rate = 1.0);
    static RenewalDistribution generalized_gamma(GeneralizedGammaDelay gg);
    static RenewalDistribution user(std::function<double(double)> cdf,
                                    std::function<double(double)> density = {});
    static RenewalDistribution degenerate(double at);

    RenewalFamily family() const;
    const GeneralizedGammaDelay* generalized_gamma_params() const;
    double exponential_rate() const;

    double cdf(double x) const;
    double survival(double x) const;
    /// Density; throws Unsupported for the degenerate law.
    double density(double x) const;
    /// Inverse of the survival function.
    double survival_quantile(double s) const;
    double mean() const;
    double sample(RandomStream& rng) const;

private:
    std::variant<Exponential, GeneralizedGammaDelay, User, Degenerate> law_ = Exponential{};
};

struct OccurrenceHistory {
    std::vector<double> times;  // strictly increasing, years
    double horizon = 0.0;
    bool saturated = false;  // the trend ran out of mass before the horizon
};

/// One TRP path on [0, horizon]. Consumes one uniform per renewal increment
/// from `rng`.
OccurrenceHistory sample_trp(const TrendSpec& spec, const RenewalDistribution& renewal, double horizon,
                             RandomStream& rng);

/// f(Λ(t)−Λ(T_last)) / F̄(Λ(t)−Λ(T_last)) · λ(t).
double conditional_intensity(const TrendSpec& spec, const RenewalDistribution& renewal,
                             const OccurrenceHistory& history, double t);

/// Log-likelihood of an observed history under a TRP.
double trp_log_likelihood(const TrendSpec& spec, const RenewalDistribution& renewal,
                          const OccurrenceHistory& history);

struct TrendFit {
    TrendSpec spec;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Maximum-likelihood trend parameters for a fixed renewal law.
TrendFit fit_trend(const OccurrenceHistory& history, TrendFamily family, const RenewalDistribution& renewal,
                   TimeUnit unit = TimeUnit::Years);

enum class MarginalMethod { Auto, Quadrature, MonteCarlo };

struct MarginalOptions {
    MarginalMethod method = MarginalMethod::Auto;
    std::size_t mc_paths = 200000;
    std::uint64_t seed = 20170101;
};

inline constexpr int kMaxQuadratureIndex = 4;

/// P(ζ_k <= t) where ζ_k = ψ_k − ψ_{k−1} are the inter-arrival times of a TRP.
double trp_delay_marginal_cdf(const TrendSpec& spec, const RenewalDistribution& renewal, int k, double t,
                              const MarginalOptions& opts = {});
/// P(ψ_k <= t) = F^{*k}(Λ(t)).
double trp_arrival_cdf(const TrendSpec& spec, const RenewalDistribution& renewal, int k, double t,
                       const MarginalOptions& opts = {});

}  // namespace atrp
