#pragma once

// Parameter estimation from claim-level data.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atrp/distributions.hpp"

namespace atrp {

struct FitDiagnostics {
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t n = 0;
    std::vector<std::string> parameter_names;
    Eigen::MatrixXd covariance;  // asymptotic, in the order of parameter_names
    double aic = 0.0;
    double bic = 0.0;

    double standard_error(std::size_t k) const;
};

// ---------------------------------------------------------------------------
// Generalized gamma

struct GeneralizedGammaFit {
    GeneralizedGammaDelay params;
    FitDiagnostics diagnostics;        // covariance of (a, b, c)
    Eigen::Matrix3d log_covariance;    // covariance of (log a, log b, log c)
};

/// Maximum likelihood, profiled over the power b.
GeneralizedGammaFit fit_generalized_gamma(std::span<const double> delays);

/// Maximum likelihood for right-truncated delays: delay k is only observed
/// when it does not exceed upper_bounds[k]. Starts from the untruncated fit.
GeneralizedGammaFit fit_generalized_gamma(std::span<const double> delays, std::span<const double> upper_bounds);

// ---------------------------------------------------------------------------
// Severity mixture

struct SeverityObservation {
    double amount = 0.0;
    double zeta = 0.0;
    std::optional<int> injury_class;
};

struct SeverityFitOptions {
    bool estimate_kappa = false;
    double kappa = 0.0;  // used when not estimated
    bool covariates = false;
    std::size_t max_iterations = 5000;
    double tolerance = 1e-10;  // relative change in log-likelihood
    int max_restarts = 10;
    std::optional<SeverityModel> warm_start;
    bool standard_errors = true;
    std::uint64_t seed = 7;  // jitter for restarts
};

struct SeverityFit {
    SeverityModel model;
    FitDiagnostics diagnostics;
    bool mixture_defined = true;  // false when every amount is zero
    bool monotone = true;         // log-likelihood never decreased
    int restarts = 0;
    std::vector<double> trace;  // log-likelihood per EM iteration of the final run
    std::vector<std::pair<double, double>> kappa_profile;  // (κ, profile log-likelihood)
};

/// EM on log(amount) − κ ln(1+365ζ) − φ_class over the positive amounts;
/// p0 is the empirical zero fraction.
SeverityFit fit_severity_em(std::span<const SeverityObservation> data, const SeverityFitOptions& opts = {});

// ---------------------------------------------------------------------------
// Inflation

struct InflationFit {
    double alpha = 0.0;
    double variance = 0.0;
    double intercept = 0.0;  // log mean amount at the mean payment time
    double dispersion = 1.0;
    std::size_t iterations = 0;
};

/// Quasi-Poisson regression of amount on calendar time with a log link.
InflationFit fit_inflation(std::span<const double> amounts, std::span<const double> times);

// ---------------------------------------------------------------------------
// Frank copula

struct KendallTau {
    double tau = 0.0;
    double se = 0.0;  // from the U-statistic variance
};

/// Kendall's tau-b in O(n log n).
KendallTau kendall_tau(std::span<const double> x, std::span<const double> y);

struct CopulaFit {
    double theta = 0.0;  // 0 marks the independence limit
    double theta_se = 0.0;
    KendallTau tau;
    bool near_independence = false;  // |tau| within two standard errors of 0
    std::optional<FrankCopula> copula() const;
};

CopulaFit fit_frank_itau(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Normal mixture for the reserve distribution

struct NormalMixtureFit {
    std::array<double, 2> weights{1.0, 0.0};
    std::array<double, 2> means{0.0, 0.0};
    std::array<double, 2> sds{1.0, 1.0};
    FitDiagnostics diagnostics;

    double mean() const;
    double sd() const;
    double cdf(double x) const;
    double value_at_risk(double p) const;
    double tail_value_at_risk(double p) const;
};

/// EM for a k-component normal mixture (k in {1, 2}); means ordered ascending.
NormalMixtureFit fit_normal_mixture(std::span<const double> sample, int k = 2);

// ---------------------------------------------------------------------------
// Heterogeneity

struct Heterogeneity {
    double q = 0.0;
    double i2 = 0.0;
};

Heterogeneity heterogeneity_stats(std::span<const double> means, std::span<const double> weights);
/// Default Cochran weights n_i / s_i².
std::vector<double> inverse_variance_weights(std::span<const double> counts, std::span<const double> sds);

}  // namespace atrp
