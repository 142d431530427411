#include "atrp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "atrp/error.hpp"
#include "atrp/numerics.hpp"
#include "atrp/rng.hpp"

namespace atrp {

void SimConfig::validate() const {
    require(n_sims >= 1, ErrorCode::InvalidArgument, "n_sims must be at least 1");
    require(block >= 1, ErrorCode::InvalidArgument, "block size must be at least 1");
    require(horizon >= 0 && extension >= 0, ErrorCode::InvalidArgument, "horizons must be non-negative");
    require(reporting_multiplier > 0 && settlement_multiplier > 0, ErrorCode::InvalidArgument,
            "delay multipliers must be positive");
}

void ExposureModels::validate() const {
    trend.validate();
    indemnity.validate();
    expense.validate();
    if (dependence == DependenceMode::FrankCopula) {
        require(copula.has_value(), ErrorCode::InvalidArgument, "Frank-copula mode needs a copula parameter");
        copula->validate();
    }
}

namespace {

// Runs fn(begin, end) over [0, n) in blocks. Each index is handled by
// exactly one call, so writing results by index is deterministic.
template <class Fn>
void parallel_blocks(std::size_t n, std::size_t block, unsigned workers, Fn&& fn) {
    const std::size_t n_blocks = (n + block - 1) / block;
    unsigned w = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
    w = static_cast<unsigned>(std::min<std::size_t>(w, n_blocks));
    if (w <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b * block, std::min(n, (b + 1) * block));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    const auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                fn(b * block, std::min(n, (b + 1) * block));
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct SeverityDraw {
    double x = 0.0;
    double y = 0.0;
};

// (X, Y) given ζ. Under the copula the pair of uniforms is mapped through the
// conditional quantiles; otherwise each severity has its own stream.
class SeverityDrawer {
public:
    SeverityDrawer(SeverityModel mx, SeverityModel my, std::optional<FrankCopula> copula)
        : mx_(std::move(mx)), my_(std::move(my)), copula_(std::move(copula)) {}

    SeverityDraw draw(std::uint64_t seed, std::uint64_t path, std::uint64_t item, double zeta,
                      std::optional<int> cls) const {
        if (copula_) {
            auto rng = make_stream(seed, path, item, StreamRole::Copula);
            const auto uv = frank_sample(*copula_, rng);
            return {severity_quantile(mx_, uv[0], zeta, cls), severity_quantile(my_, uv[1], zeta, cls)};
        }
        auto rx = make_stream(seed, path, item, StreamRole::Indemnity);
        auto ry = make_stream(seed, path, item, StreamRole::Expense);
        return {severity_sample(mx_, zeta, cls, rx), severity_sample(my_, zeta, cls, ry)};
    }

private:
    SeverityModel mx_;
    SeverityModel my_;
    std::optional<FrankCopula> copula_;
};

SeverityDrawer make_drawer(const ReserveModels& m) {
    return {m.effective_indemnity(), m.effective_expense(),
            m.dependence == DependenceMode::FrankCopula ? m.copula : std::nullopt};
}

// Lower-triangle cell layout shared with RbnsMoments::cells().
struct CellLayout {
    int t = 0;
    std::vector<std::pair<int, int>> keys;
    std::vector<std::size_t> offset;  // first cell of accident year i

    explicit CellLayout(int valuation) : t(valuation), offset(valuation + 2, 0) {
        for (int i = 2; i <= t; ++i) {
            offset[i] = keys.size();
            for (int j = t + 2 - i; j <= t; ++j) keys.emplace_back(i, j);
        }
    }
    std::size_t index(int i, int j) const { return offset[i] + static_cast<std::size_t>(j - (t + 2 - i)); }
};

// Shared per-path evaluation for simulate_rbns, the dependent-delay variant
// and the bootstrap.
class RbnsPathEngine {
public:
    RbnsPathEngine(const PreparedPortfolio& pf, const ReserveModels& models, const FinancialAssumptions& fa, int t)
        : pf_(pf), models_(models), drawer_(make_drawer(models)), fa_(fa), layout_(t) {
        fa_.valuation_time = t;
    }

    const CellLayout& layout() const { return layout_; }

    // zetas: optional precomputed delays, one per prepared claim
    double run(std::uint64_t seed, std::uint64_t path, const double* zetas, double* cells,
               std::size_t cell_stride) const {
        double total = 0.0;
        for (std::size_t q = 0; q < pf_.claims.size(); ++q) {
            const auto& pc = pf_.claims[q];
            double zeta;
            if (zetas) {
                zeta = zetas[q];
            } else {
                auto rz = make_stream(seed, path, q, StreamRole::SettlementDelay);
                zeta = pc.delay.sample_from_uniform(rz.uniform());
            }
            const auto cls = models_.effective_class(pc.claim);
            const auto sev = drawer_.draw(seed, path, q, zeta, cls);
            const double x = pc.claim.report_time() + zeta;
            const double v = net_discount_factor(fa_, 1, x) * sev.x + net_discount_factor(fa_, 2, x) * sev.y;
            total += v;
            if (cells) {
                int j = static_cast<int>(std::ceil(x)) - pc.year + 1;
                j = std::clamp(j, layout_.t + 2 - pc.year, layout_.t);
                cells[layout_.index(pc.year, j) * cell_stride] += v;
            }
        }
        return total;
    }

private:
    const PreparedPortfolio& pf_;
    const ReserveModels& models_;
    SeverityDrawer drawer_;
    FinancialAssumptions fa_;
    CellLayout layout_;
};

RbnsSample allocate_sample(const RbnsInfoSet& info, const SimConfig& cfg, const PreparedPortfolio& pf) {
    RbnsSample out;
    out.totals.assign(cfg.n_sims, 0.0);
    out.cell_keys = CellLayout(info.valuation).keys;
    if (cfg.keep_cells) out.cells.assign(out.cell_keys.size(), std::vector<double>(cfg.n_sims, 0.0));
    out.warnings = pf.warnings;
    out.open_claims = pf.claims.size();
    return out;
}

// Run paths in blocks; cells are accumulated in a block-local buffer and
// scattered by path index.
template <class ZetaFn>
void run_paths(const RbnsPathEngine& engine, const SimConfig& cfg, std::size_t n_claims, RbnsSample& out,
               ZetaFn&& zeta_fn) {
    const std::size_t n_cells = out.cell_keys.size();
    parallel_blocks(cfg.n_sims, cfg.block, cfg.workers, [&](std::size_t begin, std::size_t end) {
        const TabulatedGammaScope fast;
        std::vector<double> zetas(n_claims);
        std::vector<double> cells(cfg.keep_cells ? n_cells : 0);
        for (std::size_t p = begin; p < end; ++p) {
            const double* z = zeta_fn(p, zetas);
            std::fill(cells.begin(), cells.end(), 0.0);
            out.totals[p] = engine.run(cfg.seed, p, z, cfg.keep_cells ? cells.data() : nullptr, 1);
            if (cfg.keep_cells)
                for (std::size_t c = 0; c < n_cells; ++c) out.cells[c][p] = cells[c];
        }
    });
}

}  // namespace

RbnsSample simulate_rbns(const RbnsInfoSet& info, const ReserveModels& models, const FinancialAssumptions& fa,
                         const SimConfig& cfg) {
    cfg.validate();
    models.validate();
    fa.validate();
    ReserveModels m = models;
    m.settlement = models.settlement.scaled(cfg.settlement_multiplier);
    const PreparedPortfolio pf = prepare_claims(info, m.settlement);
    RbnsSample out = allocate_sample(info, cfg, pf);
    const RbnsPathEngine engine(pf, m, fa, info.valuation);
    run_paths(engine, cfg, pf.claims.size(), out, [](std::size_t, std::vector<double>&) -> const double* {
        return nullptr;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Exposure

ExposureSample simulate_exposure(const ExposureModels& models, const FinancialAssumptions& fa,
                                 const SimConfig& cfg) {
    cfg.validate();
    models.validate();
    fa.validate();
    require(cfg.horizon > 0, ErrorCode::InvalidArgument, "exposure horizon must be positive");
    const double t = cfg.horizon;
    const SettlementDelay reporting = models.reporting.scaled(cfg.reporting_multiplier);
    const SettlementDelay settlement = models.settlement.scaled(cfg.settlement_multiplier);
    // amounts are valued at the start of the exposure period
    FinancialAssumptions fa0 = fa;
    fa0.valuation_time = 0.0;
    const bool independent = models.dependence == DependenceMode::Independent;
    const SeverityDrawer drawer(independent ? models.indemnity.without_delay_coupling() : models.indemnity,
                                independent ? models.expense.without_delay_coupling() : models.expense,
                                models.dependence == DependenceMode::FrankCopula ? models.copula : std::nullopt);

    ExposureSample s;
    s.horizon = t;
    for (auto* v : {&s.z_occ, &s.z_cm, &s.z_tc, &s.n_occ, &s.n_cm, &s.n_tc}) v->assign(cfg.n_sims, 0.0);
    std::vector<char> saturated(cfg.n_sims, 0);

    parallel_blocks(cfg.n_sims, cfg.block, cfg.workers, [&](std::size_t begin, std::size_t end) {
        const TabulatedGammaScope fast;
        for (std::size_t p = begin; p < end; ++p) {
            auto occ = make_stream(cfg.seed, p, 0, StreamRole::Occurrence);
            const auto hist = sample_trp(models.trend, models.renewal, t, occ);
            saturated[p] = hist.saturated;
            double z_cm = 0.0, z_tc = 0.0, n_cm = 0.0, n_tc = 0.0;
            for (std::size_t k = 0; k < hist.times.size(); ++k) {
                const double occurrence = hist.times[k];
                auto rr = make_stream(cfg.seed, p, k, StreamRole::ReportingDelay);
                auto rs = make_stream(cfg.seed, p, k, StreamRole::SettlementDelay);
                const double xi = reporting.survival_quantile(rr.uniform());
                const double zeta = settlement.survival_quantile(rs.uniform());
                const auto sev = drawer.draw(cfg.seed, p, k, zeta, std::nullopt);
                const double x = occurrence + xi + zeta;
                const double v = net_discount_factor(fa0, 1, x) * sev.x + net_discount_factor(fa0, 2, x) * sev.y;
                if (occurrence + xi <= t) {
                    z_cm += v;
                    n_cm += 1.0;
                } else {
                    z_tc += v;
                    n_tc += 1.0;
                }
            }
            s.z_cm[p] = z_cm;
            s.z_tc[p] = z_tc;
            s.z_occ[p] = z_cm + z_tc;
            s.n_cm[p] = n_cm;
            s.n_tc[p] = n_tc;
            s.n_occ[p] = n_cm + n_tc;
        }
    });
    s.saturated_paths = static_cast<std::size_t>(std::count(saturated.begin(), saturated.end(), 1));
    return s;
}

namespace {

double sum(const std::vector<double>& v) {
    // fixed left-to-right order keeps results identical across worker counts
    return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

Proportions ibnr_proportions(const ExposureSample& s) {
    const double n_occ = sum(s.n_occ);
    require(n_occ > 0, ErrorCode::UndefinedRatio, "no occurrences on any path: IBNR proportion is undefined");
    const double z_occ = sum(s.z_occ);
    return {sum(s.n_tc) / n_occ, z_occ > 0 ? sum(s.z_tc) / z_occ : 0.0};
}

Proportions upr_proportions(const ExposureSample& at_t, const ExposureSample& at_t_plus_h) {
    require(at_t.size() == at_t_plus_h.size(), ErrorCode::InvalidArgument, "UPR samples differ in size");
    require(at_t_plus_h.horizon > at_t.horizon, ErrorCode::InvalidArgument, "UPR needs h > 0");
    const double n_th = sum(at_t_plus_h.n_occ);
    require(n_th > 0, ErrorCode::UndefinedRatio, "no occurrences on any path: UPR proportion is undefined");
    const double z_th = sum(at_t_plus_h.z_occ);
    return {(n_th - sum(at_t.n_occ)) / n_th, z_th > 0 ? (z_th - sum(at_t.z_occ)) / z_th : 0.0};
}

Proportions simulate_upr(const ExposureModels& models, const FinancialAssumptions& fa, const SimConfig& cfg) {
    require(cfg.extension > 0, ErrorCode::InvalidArgument, "UPR needs h > 0");
    SimConfig later = cfg;
    later.horizon = cfg.horizon + cfg.extension;
    return upr_proportions(simulate_exposure(models, fa, cfg), simulate_exposure(models, fa, later));
}

// ---------------------------------------------------------------------------
// Dependent settlement delays

RbnsSample simulate_trp_settlement(const RbnsInfoSet& info, const ReserveModels& models,
                                   const FinancialAssumptions& fa, const TrendSpec& zeta_trend,
                                   const RenewalDistribution& zeta_renewal, const SimConfig& cfg) {
    cfg.validate();
    models.validate();
    fa.validate();
    zeta_trend.validate();
    const PreparedPortfolio pf = prepare_claims(info, models.settlement);
    RbnsSample out = allocate_sample(info, cfg, pf);
    const RbnsPathEngine engine(pf, models, fa, info.valuation);

    // sequence order: report time, ties by prepared position
    std::vector<std::size_t> order(pf.claims.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return pf.claims[a].claim.report_time() < pf.claims[b].claim.report_time();
    });
    const bool constant = zeta_trend.family == TrendFamily::Constant;
    const double rate = constant ? trend_intensity(zeta_trend, 0.0) : 0.0;

    run_paths(engine, cfg, pf.claims.size(), out, [&](std::size_t p, std::vector<double>& zetas) {
        double psi = 0.0;
        for (std::size_t q : order) {
            const auto& pc = pf.claims[q];
            const double lo = pc.delay.lower(), hi = pc.delay.upper();
            // the window for ζ maps to a window for the renewal increment
            const double base = constant ? 0.0 : cumulative_trend(zeta_trend, psi);
            const double a = constant ? rate * lo : cumulative_trend(zeta_trend, psi + lo) - base;
            const double b = constant ? rate * hi : cumulative_trend(zeta_trend, psi + hi) - base;
            const double sa = zeta_renewal.survival(a), sb = zeta_renewal.survival(b);
            const double mass = sa - sb;
            if (!(mass > 0)) {
                std::ostringstream msg;
                msg << "claim " << pc.index << " of accident year " << pc.year
                    << ": the dependent delay law puts no mass on the window (" << lo << ", " << hi << "]";
                fail(ErrorCode::DegenerateWindow, msg.str());
            }
            auto rz = make_stream(cfg.seed, p, q, StreamRole::TrpDelay);
            const double e = zeta_renewal.survival_quantile(std::clamp(sa - rz.uniform() * mass, sb, sa));
            double zeta = constant ? e / rate : inverse_cumulative_trend(zeta_trend, base + e) - psi;
            zeta = std::clamp(zeta, std::nextafter(lo, hi), hi);
            zetas[q] = zeta;
            psi += zeta;
        }
        return zetas.data();
    });
    return out;
}

// ---------------------------------------------------------------------------
// Parameter-uncertainty bootstrap

BootstrapResult bootstrap_parameter_uncertainty(const RbnsInfoSet& info, const BootstrapInputs& in,
                                                const BootstrapOptions& opts, const SimConfig& cfg) {
    cfg.validate();
    in.base.validate();
    in.fa.validate();
    require(opts.scenarios >= 1, ErrorCode::InvalidArgument, "bootstrap needs at least one scenario");
    require(opts.delay_covariance_scale >= 0 && opts.inflation_variance_scale >= 0, ErrorCode::InvalidArgument,
            "uncertainty scales must be non-negative");
    const auto* gg = in.base.settlement.generalized_gamma();
    require(gg != nullptr, ErrorCode::Unsupported, "bootstrap needs a generalized gamma settlement delay");
    require(in.alpha1_variance >= 0 && in.alpha2_variance >= 0, ErrorCode::InvalidArgument,
            "inflation variances must be non-negative");

    const bool degenerate = opts.delay_covariance_scale == 0 && opts.inflation_variance_scale == 0 && !opts.resample;
    std::vector<const ClaimRecord*> closed;
    for (const auto& c : in.closed_claims)
        if (c.settlement) closed.push_back(&c);
    if (!degenerate)
        require(closed.size() >= 50, ErrorCode::InvalidArgument, "bootstrap refits need at least 50 closed claims");

    const Eigen::MatrixXd chol = numerics::psd_cholesky(in.delay_log_covariance * opts.delay_covariance_scale);
    const double sd1 = std::sqrt(in.alpha1_variance * opts.inflation_variance_scale);
    const double sd2 = std::sqrt(in.alpha2_variance * opts.inflation_variance_scale);

    const std::size_t n = opts.scenarios;
    std::vector<double> totals(n, 0.0);
    std::vector<char> failed(n, 0);
    std::vector<std::string> fail_reason(n);

    const PreparedPortfolio base_pf = prepare_claims(info, in.base.settlement);
    const RbnsPathEngine base_engine(base_pf, in.base, in.fa, info.valuation);

    parallel_blocks(n, std::max<std::size_t>(1, cfg.block / 64), cfg.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            if (degenerate) {
                // same arithmetic as simulate_rbns, so scenario s is path s
                const TabulatedGammaScope fast;
                totals[s] = base_engine.run(cfg.seed, s, nullptr, nullptr, 1);
                continue;
            }
            auto rp = make_stream(cfg.seed, s, 0, StreamRole::Parameters);
            Eigen::Vector3d z(rp.normal(), rp.normal(), rp.normal());
            const Eigen::Vector3d shock = chol * z;
            GeneralizedGammaDelay g{gg->a * std::exp(shock(0)), gg->b * std::exp(shock(1)), gg->c * std::exp(shock(2))};
            FinancialAssumptions fa = in.fa;
            fa.alpha1 += sd1 * rp.normal();
            fa.alpha2 += sd2 * rp.normal();

            // deflate closed-claim amounts to time-zero money with the drawn forces
            std::vector<SeverityObservation> ind, exp;
            ind.reserve(closed.size());
            exp.reserve(closed.size());
            auto rr = make_stream(cfg.seed, s, 0, StreamRole::Resample);
            for (std::size_t k = 0; k < closed.size(); ++k) {
                const std::size_t pick =
                    opts.resample ? std::min(closed.size() - 1, static_cast<std::size_t>(rr.uniform() * closed.size()))
                                  : k;
                const auto& c = *closed[pick];
                const double when = *c.settlement;
                const double zeta = std::max(0.0, when - c.report);
                ind.push_back({c.indemnity * std::exp(-fa.alpha1 * when), zeta, c.injury_class});
                exp.push_back({c.expense * std::exp(-fa.alpha2 * when), zeta, c.injury_class});
            }
            ReserveModels m = in.base;
            m.settlement = g;
            try {
                SeverityFitOptions o = opts.em;
                o.estimate_kappa = false;
                o.standard_errors = false;
                o.covariates = in.base.use_covariates;
                o.kappa = in.base.indemnity.kappa;
                o.warm_start = in.base.indemnity;
                o.seed = cfg.seed ^ (s * 2 + 1);
                m.indemnity = fit_severity_em(ind, o).model;
                o.kappa = in.base.expense.kappa;
                o.warm_start = in.base.expense;
                m.expense = fit_severity_em(exp, o).model;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Convergence) throw;
                failed[s] = 1;
                fail_reason[s] = e.what();
                continue;
            }
            const PreparedPortfolio pf = prepare_claims(info, m.settlement);
            const RbnsPathEngine engine(pf, m, fa, info.valuation);
            totals[s] = engine.run(cfg.seed, s, nullptr, nullptr, 1);
        }
    });

    BootstrapResult out;
    out.requested = n;
    out.warnings = base_pf.warnings;
    for (std::size_t s = 0; s < n; ++s) {
        if (failed[s]) {
            ++out.failures;
            out.warnings.push_back("scenario " + std::to_string(s) + " dropped: " + fail_reason[s]);
        } else {
            out.totals.push_back(totals[s]);
        }
    }
    if (static_cast<double>(out.failures) > opts.max_failure_fraction * static_cast<double>(n)) {
        std::ostringstream msg;
        msg << out.failures << " of " << n << " bootstrap scenarios failed to refit, above the "
            << 100.0 * opts.max_failure_fraction << "% cap";
        fail(ErrorCode::Convergence, msg.str());
    }
    return out;
}

}  // namespace atrp
