#pragma once

// Claims ingestion, scenario configuration, model bundles, the scenario
// runner and report emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "atrp/calibration.hpp"
#include "atrp/claims.hpp"
#include "atrp/distributions.hpp"
#include "atrp/financial.hpp"
#include "atrp/montecarlo.hpp"
#include "atrp/riskmetrics.hpp"
#include "atrp/trend.hpp"

namespace atrp {

// ---------------------------------------------------------------------------
// Ingestion

enum class TimeFormat { IsoDate, Years };

struct IngestOptions {
    std::string origin = "1989-11-22";  // calendar date mapped to time 0
    TimeFormat time_format = TimeFormat::IsoDate;
    char delimiter = ',';
    double max_reject_fraction = 0.05;
};

struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

struct IngestResult {
    ClaimSet claims;
    std::vector<RejectedRow> rejects;
};

/// Columns: occurrence_date, report_date, settlement_date (empty when open),
/// indemnity, expense and optionally injury_class. Dates become years from
/// the origin at 365 days per year.
IngestResult parse_claims(std::istream& in, const IngestOptions& opts = {});
IngestResult ingest_claims(const std::string& path, const IngestOptions& opts = {});
/// Days between the origin and an ISO date.
double days_from_origin(const std::string& date, const std::string& origin);

// ---------------------------------------------------------------------------
// Configuration

struct BootstrapSettings {
    std::size_t scenarios = 1000;
    bool resample = true;
    double delay_covariance_scale = 1.0;
    double inflation_variance_scale = 1.0;
};

/// Values of a scenario grid; each non-empty list is one axis of the
/// Cartesian product.
struct ScenarioGrid {
    std::vector<double> beta;              // β1 = β2, per year
    std::vector<double> inflation_shock;   // added to α1 and α2, per year
    std::vector<double> settlement_multiplier;
    std::vector<double> reporting_multiplier;
    std::vector<double> trend_gamma;       // power-trend exponent
    std::vector<DependenceMode> dependence;

    std::size_t size() const;
};

struct ScenarioConfig {
    int valuation = 0;  // years
    std::optional<double> alpha1, alpha2;  // per year; bundle values when absent
    double beta1 = 0.0, beta2 = 0.0;
    DependenceMode dependence = DependenceMode::KappaCoupled;
    bool covariates = false;
    bool estimate_kappa = true;
    double reporting_multiplier = 1.0;
    double settlement_multiplier = 1.0;
    std::optional<TrendSpec> trend;  // occurrences, for IBNR/UPR
    RenewalDistribution renewal = RenewalDistribution::exponential(1.0);
    std::optional<TrendSpec> zeta_trend;  // dependent settlement delays
    double horizon_t = 0.0;
    double horizon_h = 0.0;
    std::size_t sims = 100000;
    std::uint64_t seed = 20170101;
    unsigned workers = 0;
    bool common_random_numbers = true;
    std::vector<double> risk_levels{0.60, 0.80, 0.95};
    int mixture_components = 2;
    BootstrapSettings bootstrap;
    ScenarioGrid grid;
    IngestOptions ingest;

    /// Canonical form, without the worker count.
    nlohmann::json to_json() const;
};

/// Unknown keys are rejected. Rates carry a unit ("percent" or "per_year"),
/// times a unit ("years" or "days").
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Model bundle

inline constexpr int kBundleVersion = 1;

struct ModelBundle {
    SettlementDelay settlement;
    std::optional<SettlementDelay> reporting;
    SeverityModel indemnity;
    SeverityModel expense;
    std::optional<double> copula_theta;
    double alpha1 = 0.0, alpha2 = 0.0;
    double alpha1_variance = 0.0, alpha2_variance = 0.0;
    Eigen::Matrix3d settlement_log_covariance = Eigen::Matrix3d::Zero();
    nlohmann::json diagnostics = nlohmann::json::object();

    nlohmann::json to_json() const;
    static ModelBundle from_json(const nlohmann::json& j);
};

ModelBundle load_bundle(const std::string& path);
void save_bundle(const ModelBundle& b, const std::string& path);

/// Fits every model from the claims known at the valuation time.
ModelBundle calibrate_bundle(const ClaimSet& claims, const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Scenario runs

enum Task : unsigned {
    kTaskReserve = 1u << 0,
    kTaskSimulate = 1u << 1,
    kTaskIbnr = 1u << 2,
    kTaskUpr = 1u << 3,
    kTaskBootstrap = 1u << 4,
    kTaskTrpSettlement = 1u << 5,
};

struct ScenarioResult {
    std::vector<std::pair<std::string, double>> coordinates;
    std::string dependence;
    nlohmann::json reserve;    // quadrature cells and totals
    nlohmann::json simulated;  // risk summary and mixture fit
    nlohmann::json ibnr;
    nlohmann::json upr;
    nlohmann::json trp_settlement;
    nlohmann::json bootstrap;
    std::vector<std::string> warnings;
};

struct ReserveReport {
    int format_version = 1;
    std::uint64_t seed = 0;
    std::size_t sims = 0;
    unsigned tasks = 0;
    nlohmann::json config;
    nlohmann::json portfolio;  // info-set counts
    std::vector<ScenarioResult> scenarios;

    nlohmann::json to_json() const;
    static ReserveReport from_json(const nlohmann::json& j);
};

struct ScenarioInputs {
    const ClaimSet* claims = nullptr;
    const ModelBundle* bundle = nullptr;
};

/// Expands the grid and runs the requested tasks at every point. With
/// common random numbers every point uses the configured seed.
ReserveReport run_scenario(const ScenarioConfig& cfg, const ScenarioInputs& in, unsigned tasks);

enum class ReportFormat { Json, Csv, Text };
ReportFormat parse_report_format(const std::string& name);

/// Json and Text write a single file at `path`; Csv writes one file per
/// table into the directory `path`.
void emit_report(const ReserveReport& r, ReportFormat format, const std::string& path);
std::string render_text(const ReserveReport& r);
ReserveReport load_report(const std::string& path);

}  // namespace atrp
