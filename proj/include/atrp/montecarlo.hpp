#pragma once

// Monte Carlo for the conditional RBNS reserve, the exposure processes
// (occurrence / claims-made / tail), IBNR and UPR proportions, dependent
// settlement delays and the parameter-uncertainty bootstrap.
//
// Every random quantity comes from a stream keyed by (seed, path, claim,
// role), so results do not depend on the number of workers and scenarios
// that share a seed share their random numbers.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "atrp/calibration.hpp"
#include "atrp/claims.hpp"
#include "atrp/distributions.hpp"
#include "atrp/financial.hpp"
#include "atrp/reserving.hpp"
#include "atrp/trend.hpp"

namespace atrp {

struct SimConfig {
    std::size_t n_sims = 100000;
    std::uint64_t seed = 20170101;
    unsigned workers = 0;  // 0: hardware concurrency
    double horizon = 0.0;    // t for the exposure processes, years
    double extension = 0.0;  // h for UPR, years
    double reporting_multiplier = 1.0;
    double settlement_multiplier = 1.0;
    bool keep_cells = false;
    std::size_t block = 512;  // paths per work item

    void validate() const;
};

struct RbnsSample {
    std::vector<double> totals;  // W(t) per path
    std::vector<std::pair<int, int>> cell_keys;  // (i, j) in lower-triangle order
    std::vector<std::vector<double>> cells;      // [cell][path], when kept
    std::vector<std::string> warnings;
    std::size_t open_claims = 0;
};

/// Draws ζ from each claim's truncated delay and (X, Y) given ζ under the
/// dependence mode, then discounts. The settlement multiplier scales the
/// delay law before truncation.
RbnsSample simulate_rbns(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa,
                         const SimConfig& cfg);

struct ExposureModels {
    TrendSpec trend;
    RenewalDistribution renewal;
    SettlementDelay reporting;  // ξ; a point mass at 0 means immediate reporting
    SettlementDelay settlement;
    SeverityModel indemnity;
    SeverityModel expense;
    DependenceMode dependence = DependenceMode::KappaCoupled;
    std::optional<FrankCopula> copula;

    void validate() const;
};

struct ExposureSample {
    double horizon = 0.0;
    std::vector<double> z_occ, z_cm, z_tc;
    std::vector<double> n_occ, n_cm, n_tc;
    std::size_t saturated_paths = 0;  // trend mass exhausted before the horizon

    std::size_t size() const { return z_occ.size(); }
};

/// One TRP path on [0, horizon] per simulation; ξ, ζ, X, Y per event.
/// Event k of a path always uses the same streams, so a run at t+h extends
/// the run at t event by event.
ExposureSample simulate_exposure(const ExposureModels& models, const FinancialAssumptions& fa,
                                 const SimConfig& cfg);

struct Proportions {
    double count_based = 0.0;
    double cost_based = 0.0;
};

/// E[N_tc]/E[N_occ] and E[Z_tc]/E[Z_occ].
Proportions ibnr_proportions(const ExposureSample& s);
/// (E[N_occ(t+h)] − E[N_occ(t)]) / E[N_occ(t+h)], and the same for costs.
Proportions upr_proportions(const ExposureSample& at_t, const ExposureSample& at_t_plus_h);
/// Runs both exposures with the same seed.
Proportions simulate_upr(const ExposureModels& models, const FinancialAssumptions& fa, const SimConfig& cfg);

/// Reserve when the settlement delays of the open claims, taken in order of
/// report time, form a TRP[F, λ]: Λ(ψ_k) − Λ(ψ_{k−1}) ~ F with ψ_k the running
/// sum of delays. Each claim's delay is drawn from the conditional law given
/// its truncation window.
RbnsSample simulate_trp_settlement(const RbnsInfoSet& info, const ReserveModels& models,
                                   const FinancialAssumptions& fa, const TrendSpec& zeta_trend,
                                   const RenewalDistribution& zeta_renewal, const SimConfig& cfg);

struct BootstrapInputs {
    std::span<const ClaimRecord> closed_claims;  // refit data
    ReserveModels base;                          // settlement must be generalized gamma
    FinancialAssumptions fa;
    Eigen::Matrix3d delay_log_covariance = Eigen::Matrix3d::Zero();
    double alpha1_variance = 0.0;
    double alpha2_variance = 0.0;
};

struct BootstrapOptions {
    std::size_t scenarios = 10000;
    double delay_covariance_scale = 1.0;
    double inflation_variance_scale = 1.0;
    bool resample = true;
    double max_failure_fraction = 0.01;
    SeverityFitOptions em;  // kappa is taken from the base models
};

struct BootstrapResult {
    std::vector<double> totals;  // one reserve per surviving scenario
    std::size_t requested = 0;
    std::size_t failures = 0;
    std::vector<std::string> warnings;
};

/// Per scenario: perturb the delay and inflation parameters, deflate and
/// optionally resample the closed claims, refit both severities by EM and
/// simulate one reserve. With zero scales and no resampling the base models
/// are reused and scenario s equals path s of simulate_rbns.
BootstrapResult bootstrap_parameter_uncertainty(const RbnsInfoSet& info, const BootstrapInputs& in,
                                                const BootstrapOptions& opts, const SimConfig& cfg);

}  // namespace atrp
