#include "atrp/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "atrp/error.hpp"
#include "atrp/numerics.hpp"
#include "atrp/rng.hpp"

namespace atrp {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

Eigen::MatrixXd nan_matrix(Eigen::Index n) { return Eigen::MatrixXd::Constant(n, n, kNaN); }

// Inverse of the negative Hessian, or NaN when the information is singular.
Eigen::MatrixXd covariance_from_hessian(const Eigen::MatrixXd& h) {
    try {
        return numerics::symmetric_inverse(-h);
    } catch (const Error&) {
        return nan_matrix(h.rows());
    }
}

}  // namespace

double FitDiagnostics::standard_error(std::size_t k) const {
    require(k < static_cast<std::size_t>(covariance.rows()), ErrorCode::InvalidArgument, "parameter index out of range");
    return std::sqrt(covariance(k, k));
}

// ---------------------------------------------------------------------------
// Generalized gamma

namespace {

struct GammaShapeSolution {
    double a;
    double log_c;
};

// Gamma MLE for y = x^b: solve log a − ψ(a) = log ȳ − mean(log y).
GammaShapeSolution profile_gamma(std::span<const double> log_x, double b) {
    const double n = static_cast<double>(log_x.size());
    double m = -std::numeric_limits<double>::infinity();
    double mean_log_y = 0.0;
    for (double lx : log_x) {
        m = std::max(m, b * lx);
        mean_log_y += b * lx;
    }
    mean_log_y /= n;
    double acc = 0.0;
    for (double lx : log_x) acc += std::exp(b * lx - m);
    const double log_mean_y = m + std::log(acc / n);
    const double s = log_mean_y - mean_log_y;
    require(s > 1e-14, ErrorCode::Convergence, "delays are all equal; generalized gamma is not identifiable");
    double a = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < 100; ++it) {
        const double f = std::log(a) - boost::math::digamma(a) - s;
        const double df = 1.0 / a - boost::math::trigamma(a);
        double next = a - f / df;
        if (!(next > 0)) next = 0.5 * a;
        if (std::abs(next - a) <= 1e-15 * a) {
            a = next;
            break;
        }
        a = next;
    }
    const double log_theta = log_mean_y - std::log(a);
    return {a, log_theta / b};
}

double gg_log_likelihood(std::span<const double> log_x, double a, double b, double log_c) {
    double ll = 0.0;
    const double norm = std::log(b) - std::lgamma(a);
    for (double lx : log_x) {
        const double z = lx - log_c;
        ll += norm - lx + a * b * z - std::exp(b * z);
    }
    return ll;
}

}  // namespace

GeneralizedGammaFit fit_generalized_gamma(std::span<const double> delays) {
    require(delays.size() >= 30, ErrorCode::InvalidArgument, "generalized gamma fit needs at least 30 delays");
    std::vector<double> log_x;
    log_x.reserve(delays.size());
    for (double x : delays) {
        require(x > 0 && std::isfinite(x), ErrorCode::InvalidArgument, "delays must be positive and finite");
        log_x.push_back(std::log(x));
    }
    const auto profile = [&](double log_b) {
        const double b = std::exp(log_b);
        try {
            const auto g = profile_gamma(log_x, b);
            const double ll = gg_log_likelihood(log_x, g.a, b, g.log_c);
            return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    constexpr int kGrid = 41;
    const double lo = std::log(0.05), hi = std::log(20.0);
    std::vector<double> grid(kGrid), vals(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        grid[i] = lo + (hi - lo) * i / (kGrid - 1);
        vals[i] = profile(grid[i]);
    }
    const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    require(std::isfinite(vals[best]), ErrorCode::Convergence, "generalized gamma likelihood is not finite");
    const auto m = numerics::minimize_1d(profile, grid[std::max(best - 1, 0)], grid[std::min(best + 1, kGrid - 1)], 52);

    const double b = std::exp(m.x);
    const auto g = profile_gamma(log_x, b);
    GeneralizedGammaFit fit;
    fit.params = {g.a, b, std::exp(g.log_c)};
    auto& d = fit.diagnostics;
    d.n = delays.size();
    d.log_likelihood = -m.value;
    d.iterations = m.iterations + kGrid;
    d.converged = best > 0 && best < kGrid - 1;
    if (!d.converged) {
        std::ostringstream msg;
        msg << "generalized gamma power b ran to the edge of its search range; best log-likelihood "
            << d.log_likelihood;
        fail(ErrorCode::Convergence, msg.str());
    }
    d.parameter_names = {"a", "b", "c"};
    const auto ll = [&](std::span<const double> th) {
        return gg_log_likelihood(log_x, std::exp(th[0]), std::exp(th[1]), th[2]);
    };
    const std::array<double, 3> theta{std::log(g.a), std::log(b), g.log_c};
    const Eigen::MatrixXd cov_log = covariance_from_hessian(numerics::hessian(ll, theta, 1e-4));
    fit.log_covariance = cov_log;
    const Eigen::Vector3d jac(fit.params.a, fit.params.b, fit.params.c);
    d.covariance = jac.asDiagonal() * cov_log * jac.asDiagonal();
    const double n = static_cast<double>(d.n);
    d.aic = 2.0 * 3 - 2.0 * d.log_likelihood;
    d.bic = 3 * std::log(n) - 2.0 * d.log_likelihood;
    return fit;
}

GeneralizedGammaFit fit_generalized_gamma(std::span<const double> delays, std::span<const double> upper_bounds) {
    require(delays.size() == upper_bounds.size(), ErrorCode::InvalidArgument,
            "delays and truncation bounds differ in length");
    for (std::size_t k = 0; k < delays.size(); ++k)
        require(upper_bounds[k] >= delays[k], ErrorCode::InvalidArgument, "a delay exceeds its truncation bound");
    const auto start = fit_generalized_gamma(delays);
    std::vector<double> log_x;
    log_x.reserve(delays.size());
    for (double x : delays) log_x.push_back(std::log(x));

    const auto ll = [&](std::span<const double> th) {
        const double a = std::exp(th[0]), b = std::exp(th[1]), log_c = th[2];
        double v = gg_log_likelihood(log_x, a, b, log_c);
        for (double u : upper_bounds) {
            const double p = boost::math::gamma_p(a, std::exp(b * (std::log(u) - log_c)));
            if (!(p > 0)) return -std::numeric_limits<double>::infinity();
            v -= std::log(p);
        }
        return v;
    };
    const auto neg = [&](std::span<const double> th) {
        if (std::abs(th[0]) > 8 || std::abs(th[1]) > 8 || std::abs(th[2]) > 15)
            return std::numeric_limits<double>::infinity();
        const double v = ll(th);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    };
    const auto& p0 = start.params;
    auto best = numerics::nelder_mead(neg, {std::log(p0.a), std::log(p0.b), std::log(p0.c)}, {0.3, 0.3, 0.3}, 1e-12);
    // restart once from the optimum to shake off a collapsed simplex
    const auto again = numerics::nelder_mead(neg, best.x, {0.1, 0.1, 0.1}, 1e-12);
    if (again.value <= best.value) best = again;
    require(std::isfinite(best.value), ErrorCode::Convergence, "truncated generalized gamma likelihood is not finite");

    GeneralizedGammaFit fit;
    fit.params = {std::exp(best.x[0]), std::exp(best.x[1]), std::exp(best.x[2])};
    auto& d = fit.diagnostics;
    d.n = delays.size();
    d.log_likelihood = -best.value;
    d.iterations = best.iterations;
    d.converged = best.converged;
    if (!d.converged) fail(ErrorCode::Convergence, "truncated generalized gamma fit did not converge");
    d.parameter_names = {"a", "b", "c"};
    const Eigen::MatrixXd cov_log = covariance_from_hessian(numerics::hessian(ll, best.x, 1e-4));
    fit.log_covariance = cov_log;
    const Eigen::Vector3d jac(fit.params.a, fit.params.b, fit.params.c);
    d.covariance = jac.asDiagonal() * cov_log * jac.asDiagonal();
    const double n = static_cast<double>(d.n);
    d.aic = 2.0 * 3 - 2.0 * d.log_likelihood;
    d.bic = 3 * std::log(n) - 2.0 * d.log_likelihood;
    return fit;
}

// ---------------------------------------------------------------------------
// Severity EM

namespace {

struct MixtureState {
    std::array<double, 2> w{0.5, 0.5};
    std::array<double, 2> mu{0.0, 0.0};
    std::array<double, 2> sigma{1.0, 1.0};
    std::array<double, kInjuryClasses> phi{};
};

struct PositiveData {
    std::vector<double> log_x;
    std::vector<double> coupling;  // ln(1 + 365ζ)
    std::vector<int> cls;          // 0 when absent or covariates are off
    std::array<std::size_t, kInjuryClasses> class_count{};
    double sum_log_x = 0.0;
};

double mixture_loglik_point(const MixtureState& s, double z, std::array<double, 2>* resp) {
    std::array<double, 2> l{};
    for (int m = 0; m < 2; ++m) {
        if (s.w[m] <= 0) {
            l[m] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const double u = (z - s.mu[m]) / s.sigma[m];
        l[m] = std::log(s.w[m]) - std::log(s.sigma[m]) - kLogSqrt2Pi - 0.5 * u * u;
    }
    const double mx = std::max(l[0], l[1]);
    const double e0 = std::exp(l[0] - mx), e1 = std::exp(l[1] - mx);
    const double tot = e0 + e1;
    if (resp) *resp = {e0 / tot, e1 / tot};
    return mx + std::log(tot);
}

// Log-likelihood of the z values (positives only, without the Jacobian).
double z_loglik(const PositiveData& d, const MixtureState& s, double kappa) {
    double ll = 0.0;
    for (std::size_t i = 0; i < d.log_x.size(); ++i)
        ll += mixture_loglik_point(s, d.log_x[i] - kappa * d.coupling[i] - s.phi[d.cls[i]], nullptr);
    return ll;
}

struct EmRun {
    MixtureState state;
    double loglik = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool monotone = true;
    bool collapsed = false;
    std::vector<double> trace;
};

EmRun run_em(const PositiveData& d, MixtureState s, double kappa, bool covariates, std::size_t max_iter,
             double tol, bool keep_trace) {
    const std::size_t n = d.log_x.size();
    std::vector<double> y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = d.log_x[i] - kappa * d.coupling[i];
    std::vector<std::array<double, 2>> r(n);
    EmRun run;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iter; ++it) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = y[i] - s.phi[d.cls[i]];
            ll += mixture_loglik_point(s, z[i], &r[i]);
        }
        if (keep_trace) run.trace.push_back(ll);
        run.iterations = it;
        if (ll < prev - 1e-10 * std::max(1.0, std::abs(prev))) run.monotone = false;
        if (std::abs(ll - prev) <= tol * (1.0 + std::abs(ll))) {
            run.converged = true;
            run.loglik = ll;
            break;
        }
        prev = ll;
        run.loglik = ll;

        // CM step 1: weights, means, scales given the class shifts
        for (int m = 0; m < 2; ++m) {
            double sr = 0.0, srz = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sr += r[i][m];
                srz += r[i][m] * z[i];
            }
            s.w[m] = sr / double(n);
            if (sr <= 0) {
                run.collapsed = true;
                break;
            }
            s.mu[m] = srz / sr;
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += r[i][m] * (z[i] - s.mu[m]) * (z[i] - s.mu[m]);
            s.sigma[m] = std::sqrt(ss / sr);
            if (!(s.sigma[m] >= 1e-6) || s.w[m] < 1e-10) run.collapsed = true;
        }
        if (run.collapsed) break;

        // CM step 2: class shifts given the mixture, level 0 held at zero
        if (covariates) {
            std::array<double, kInjuryClasses> num{}, den{};
            for (std::size_t i = 0; i < n; ++i) {
                const int c = d.cls[i];
                if (c == 0) continue;
                for (int m = 0; m < 2; ++m) {
                    const double prec = r[i][m] / (s.sigma[m] * s.sigma[m]);
                    num[c] += prec * (y[i] - s.mu[m]);
                    den[c] += prec;
                }
            }
            for (int c = 1; c < kInjuryClasses; ++c) s.phi[c] = den[c] > 0 ? num[c] / den[c] : 0.0;
        }
    }
    run.state = s;
    return run;
}

MixtureState initial_state(const PositiveData& d, double kappa) {
    std::vector<double> z(d.log_x.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = d.log_x[i] - kappa * d.coupling[i];
    std::sort(z.begin(), z.end());
    const std::size_t half = z.size() / 2;
    MixtureState s;
    for (int m = 0; m < 2; ++m) {
        const std::size_t a = m == 0 ? 0 : half, b = m == 0 ? half : z.size();
        double mean = 0.0;
        for (std::size_t i = a; i < b; ++i) mean += z[i];
        mean /= double(b - a);
        double var = 0.0;
        for (std::size_t i = a; i < b; ++i) var += (z[i] - mean) * (z[i] - mean);
        s.mu[m] = mean;
        s.sigma[m] = std::max(std::sqrt(var / double(b - a)), 1e-3);
    }
    return s;
}

struct EmOutcome {
    EmRun run;
    int restarts = 0;
};

EmOutcome em_with_restarts(const PositiveData& d, const MixtureState& start, double kappa, const SeverityFitOptions& o,
                           bool keep_trace) {
    MixtureState s = start;
    auto rng = make_stream(o.seed, 0, 0, StreamRole::Auxiliary);
    for (int attempt = 0; attempt <= o.max_restarts; ++attempt) {
        auto run = run_em(d, s, kappa, o.covariates, o.max_iterations, o.tolerance, keep_trace);
        if (!run.collapsed) return {std::move(run), attempt};
        s = initial_state(d, kappa);
        const double spread = std::abs(s.mu[1] - s.mu[0]) + s.sigma[0] + s.sigma[1];
        for (int m = 0; m < 2; ++m) {
            s.mu[m] += 0.25 * spread * rng.normal();
            s.sigma[m] *= std::exp(0.3 * rng.normal());
        }
        s.w = {0.3 + 0.4 * rng.uniform(), 0.0};
        s.w[1] = 1.0 - s.w[0];
    }
    fail(ErrorCode::Convergence, "severity mixture collapsed to a point mass after the maximum number of restarts");
}

// Full log-likelihood over positives in unconstrained coordinates, for the
// observed-information standard errors.
double severity_full_loglik(const PositiveData& d, std::span<const double> th, bool with_kappa, double kappa_fixed,
                            const std::vector<int>& phi_classes) {
    MixtureState s;
    const double w1 = 1.0 / (1.0 + std::exp(-th[0]));
    s.w = {w1, 1.0 - w1};
    s.mu = {th[1], th[2]};
    s.sigma = {std::exp(th[3]), std::exp(th[4])};
    std::size_t k = 5;
    const double kappa = with_kappa ? th[k++] : kappa_fixed;
    for (int c : phi_classes) s.phi[c] = th[k++];
    return z_loglik(d, s, kappa);
}

}  // namespace

SeverityFit fit_severity_em(std::span<const SeverityObservation> data, const SeverityFitOptions& opts) {
    require(data.size() >= 50, ErrorCode::InvalidArgument, "severity fit needs at least 50 records");
    PositiveData d;
    std::size_t zeros = 0;
    for (const auto& o : data) {
        require(o.amount >= 0 && std::isfinite(o.amount), ErrorCode::InvalidArgument, "amounts must be non-negative");
        require(o.zeta >= 0, ErrorCode::InvalidArgument, "settlement delays must be non-negative");
        if (o.amount == 0.0) {
            ++zeros;
            continue;
        }
        int c = 0;
        if (opts.covariates && o.injury_class) {
            require(*o.injury_class >= 0 && *o.injury_class < kInjuryClasses, ErrorCode::InvalidArgument,
                    "injury class outside 0..8");
            c = *o.injury_class;
        }
        d.log_x.push_back(std::log(o.amount));
        d.coupling.push_back(std::log1p(kDaysPerYear * o.zeta));
        d.cls.push_back(c);
        ++d.class_count[c];
        d.sum_log_x += std::log(o.amount);
    }
    const double n_total = static_cast<double>(data.size());
    const double p0 = static_cast<double>(zeros) / n_total;

    SeverityFit fit;
    fit.model.p0 = p0;
    fit.diagnostics.n = data.size();
    if (d.log_x.empty()) {
        fit.mixture_defined = false;
        fit.model.weights = {1.0, 0.0};
        fit.model.kappa = opts.estimate_kappa ? 0.0 : opts.kappa;
        fit.diagnostics.converged = true;
        fit.diagnostics.parameter_names = {"p0"};
        fit.diagnostics.covariance = Eigen::MatrixXd::Zero(1, 1);
        return fit;
    }
    require(d.log_x.size() >= 10, ErrorCode::InvalidArgument, "too few positive amounts for a two-component mixture");

    const auto warm = [&](double kappa) {
        if (!opts.warm_start) return initial_state(d, kappa);
        MixtureState s;
        s.w = opts.warm_start->weights;
        s.mu = opts.warm_start->mu;
        s.sigma = opts.warm_start->sigma;
        if (opts.covariates && opts.warm_start->phi) s.phi = *opts.warm_start->phi;
        for (int m = 0; m < 2; ++m)
            if (s.w[m] <= 1e-6 || s.sigma[m] <= 1e-6) return initial_state(d, kappa);
        return s;
    };

    double kappa = opts.kappa;
    int restarts = 0;
    if (opts.estimate_kappa) {
        // profile over a coarse grid with warm starts, then golden-section refinement
        MixtureState carry = warm(-1.0);
        std::vector<std::pair<double, MixtureState>> solved;
        const auto profile = [&](double k, const MixtureState& from) {
            auto out = em_with_restarts(d, from, k, opts, false);
            restarts += out.restarts;
            fit.kappa_profile.emplace_back(k, out.run.loglik);
            return out.run;
        };
        double best_ll = -std::numeric_limits<double>::infinity();
        double best_k = 0.0;
        std::vector<double> grid;
        for (int g = 0; g <= 16; ++g) grid.push_back(-1.0 + 0.25 * g);
        std::vector<MixtureState> states;
        for (double k : grid) {
            auto run = profile(k, carry);
            carry = run.state;
            states.push_back(run.state);
            if (run.loglik > best_ll) {
                best_ll = run.loglik;
                best_k = k;
            }
        }
        const int bi = static_cast<int>(std::find(grid.begin(), grid.end(), best_k) - grid.begin());
        double a = grid[std::max(bi - 1, 0)], b = grid[std::min(bi + 1, static_cast<int>(grid.size()) - 1)];
        MixtureState centre = states[bi];
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = profile(x1, centre).loglik, f2 = profile(x2, centre).loglik;
        while (b - a > 1e-6) {
            if (f1 > f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = profile(x1, centre).loglik;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = profile(x2, centre).loglik;
            }
        }
        kappa = 0.5 * (a + b);
        auto final_run = em_with_restarts(d, centre, kappa, opts, true);
        restarts += final_run.restarts;
        fit.trace = final_run.run.trace;
        fit.monotone = final_run.run.monotone;
        fit.diagnostics.converged = final_run.run.converged;
        fit.diagnostics.iterations = final_run.run.iterations;
        carry = final_run.run.state;
        fit.model.weights = carry.w;
        fit.model.mu = carry.mu;
        fit.model.sigma = carry.sigma;
        if (opts.covariates) fit.model.phi = carry.phi;
    } else {
        auto out = em_with_restarts(d, warm(kappa), kappa, opts, true);
        restarts = out.restarts;
        fit.trace = out.run.trace;
        fit.monotone = out.run.monotone;
        fit.diagnostics.converged = out.run.converged;
        fit.diagnostics.iterations = out.run.iterations;
        fit.model.weights = out.run.state.w;
        fit.model.mu = out.run.state.mu;
        fit.model.sigma = out.run.state.sigma;
        if (opts.covariates) fit.model.phi = out.run.state.phi;
    }
    fit.restarts = restarts;
    fit.model.kappa = kappa;
    if (fit.model.mu[0] > fit.model.mu[1]) {
        std::swap(fit.model.weights[0], fit.model.weights[1]);
        std::swap(fit.model.mu[0], fit.model.mu[1]);
        std::swap(fit.model.sigma[0], fit.model.sigma[1]);
    }

    MixtureState final_state;
    final_state.w = fit.model.weights;
    final_state.mu = fit.model.mu;
    final_state.sigma = fit.model.sigma;
    if (fit.model.phi) final_state.phi = *fit.model.phi;
    const double n_pos = static_cast<double>(d.log_x.size());
    double ll = z_loglik(d, final_state, kappa) - d.sum_log_x + n_pos * std::log1p(-p0);
    if (zeros > 0) ll += static_cast<double>(zeros) * std::log(p0);

    auto& diag = fit.diagnostics;
    diag.log_likelihood = ll;
    diag.parameter_names = {"p0", "w1", "mu1", "mu2", "sigma1", "sigma2"};
    if (opts.estimate_kappa) diag.parameter_names.push_back("kappa");
    std::vector<int> phi_classes;
    if (opts.covariates)
        for (int c = 1; c < kInjuryClasses; ++c)
            if (d.class_count[c] > 0) {
                phi_classes.push_back(c);
                diag.parameter_names.push_back("phi" + std::to_string(c));
            }
    const auto k = static_cast<Eigen::Index>(diag.parameter_names.size());
    diag.aic = 2.0 * double(k) - 2.0 * ll;
    diag.bic = double(k) * std::log(n_total) - 2.0 * ll;
    diag.covariance = nan_matrix(k);
    diag.covariance(0, 0) = p0 * (1.0 - p0) / n_total;
    if (opts.standard_errors && fit.model.weights[0] > 0 && fit.model.weights[1] > 0) {
        std::vector<double> th{std::log(fit.model.weights[0] / fit.model.weights[1]), fit.model.mu[0],
                               fit.model.mu[1], std::log(fit.model.sigma[0]), std::log(fit.model.sigma[1])};
        if (opts.estimate_kappa) th.push_back(kappa);
        for (int c : phi_classes) th.push_back(final_state.phi[c]);
        const auto f = [&](std::span<const double> p) {
            return severity_full_loglik(d, p, opts.estimate_kappa, kappa, phi_classes);
        };
        const Eigen::MatrixXd cov = covariance_from_hessian(numerics::hessian(f, th, 1e-4));
        Eigen::VectorXd jac = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(th.size()));
        const double w1 = fit.model.weights[0];
        jac(0) = w1 * (1.0 - w1);
        jac(3) = fit.model.sigma[0];
        jac(4) = fit.model.sigma[1];
        diag.covariance.block(1, 1, k - 1, k - 1) = jac.asDiagonal() * cov * jac.asDiagonal();
        diag.covariance.row(0).tail(k - 1).setZero();
        diag.covariance.col(0).tail(k - 1).setZero();
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Inflation

InflationFit fit_inflation(std::span<const double> amounts, std::span<const double> times) {
    require(amounts.size() == times.size(), ErrorCode::InvalidArgument, "amounts and times differ in length");
    require(amounts.size() >= 50, ErrorCode::InvalidArgument, "inflation fit needs at least 50 records");
    const std::size_t n = amounts.size();
    double tmin = times[0], tmax = times[0], tbar = 0.0, ysum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        require(amounts[i] >= 0 && std::isfinite(amounts[i]), ErrorCode::InvalidArgument, "amounts must be non-negative");
        require(std::isfinite(times[i]), ErrorCode::InvalidArgument, "payment times must be finite");
        tmin = std::min(tmin, times[i]);
        tmax = std::max(tmax, times[i]);
        tbar += times[i];
        ysum += amounts[i];
    }
    require(tmax - tmin >= 1.0, ErrorCode::InvalidArgument, "payment times span less than one year");
    require(ysum > 0, ErrorCode::InvalidArgument, "all amounts are zero");
    tbar /= double(n);

    Eigen::Vector2d beta(std::log(ysum / double(n)), 0.0);
    InflationFit fit;
    for (int it = 0; it < 200; ++it) {
        Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
        Eigen::Vector2d xtwz = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = times[i] - tbar;
            const double eta = beta(0) + beta(1) * x;
            const double mu = std::exp(eta);
            const double z = eta + (amounts[i] - mu) / mu;
            const Eigen::Vector2d row(1.0, x);
            xtwx += mu * row * row.transpose();
            xtwz += mu * z * row;
        }
        const Eigen::Vector2d next = xtwx.ldlt().solve(xtwz);
        fit.iterations = static_cast<std::size_t>(it + 1);
        const bool done = (next - beta).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + beta.cwiseAbs().maxCoeff());
        beta = next;
        if (done) break;
        require(it < 199, ErrorCode::Convergence, "quasi-Poisson regression did not converge");
    }
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    double pearson = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = times[i] - tbar;
        const double mu = std::exp(beta(0) + beta(1) * x);
        const Eigen::Vector2d row(1.0, x);
        info += mu * row * row.transpose();
        pearson += (amounts[i] - mu) * (amounts[i] - mu) / mu;
    }
    fit.dispersion = pearson / double(n - 2);
    fit.alpha = beta(1);
    fit.intercept = beta(0);
    fit.variance = fit.dispersion * info.inverse()(1, 1);
    return fit;
}

// ---------------------------------------------------------------------------
// Kendall tau and the Frank copula

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    // count of inserted ranks < i
    long long below(std::size_t i) const {
        long long s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<long long> tree_;
};

}  // namespace

KendallTau kendall_tau(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), ErrorCode::InvalidArgument, "tau needs paired samples");
    const std::size_t n = x.size();
    require(n >= 2, ErrorCode::InvalidArgument, "tau needs at least two pairs");

    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    std::vector<std::size_t> ry(n);
    for (std::size_t i = 0; i < n; ++i) ry[i] = std::lower_bound(ys.begin(), ys.end(), y[i]) - ys.begin();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });

    // s[i] = Σ_j sign(x_i − x_j) sign(y_i − y_j)
    std::vector<long long> s(n, 0);
    std::vector<long long> y_equal(ys.size(), 0);
    for (std::size_t i = 0; i < n; ++i) ++y_equal[ry[i]];
    const auto sweep = [&](bool forward) {
        Fenwick fw(ys.size());
        long long inserted = 0;
        std::size_t g = 0;
        while (g < n) {
            std::size_t e = g;
            const auto at = [&](std::size_t k) { return forward ? order[k] : order[n - 1 - k]; };
            while (e < n && x[at(e)] == x[at(g)]) ++e;
            for (std::size_t k = g; k < e; ++k) {
                const std::size_t i = at(k);
                const long long less = fw.below(ry[i]);
                const long long greater = inserted - fw.below(ry[i] + 1);
                // forward: others have smaller x; backward: larger x
                s[i] += forward ? (less - greater) : (greater - less);
            }
            for (std::size_t k = g; k < e; ++k) fw.add(ry[at(k)]);
            inserted += static_cast<long long>(e - g);
            g = e;
        }
    };
    sweep(true);
    sweep(false);

    long double sum = 0.0;
    for (auto v : s) sum += v;
    const long double cd = sum / 2.0L;  // C − D
    long double ties_x = 0.0, ties_y = 0.0;
    for (std::size_t g = 0; g < n;) {
        std::size_t e = g;
        while (e < n && x[order[e]] == x[order[g]]) ++e;
        const long double m = e - g;
        ties_x += m * (m - 1) / 2.0L;
        g = e;
    }
    for (auto c : y_equal) ties_y += static_cast<long double>(c) * (c - 1) / 2.0L;
    const long double n0 = static_cast<long double>(n) * (n - 1) / 2.0L;
    const long double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
    require(denom > 0, ErrorCode::InvalidArgument, "tau is undefined when one margin is constant");

    KendallTau out;
    out.tau = static_cast<double>(cd / denom);
    // U-statistic variance: 4/n Var(h1), h1(i) = s_i / (n − 1)
    long double mean_h = 0.0, var_h = 0.0;
    for (auto v : s) mean_h += static_cast<long double>(v) / (n - 1);
    mean_h /= n;
    for (auto v : s) {
        const long double h = static_cast<long double>(v) / (n - 1) - mean_h;
        var_h += h * h;
    }
    var_h /= (n > 1 ? n - 1 : 1);
    out.se = static_cast<double>(std::sqrt(4.0L * var_h / n));
    return out;
}

std::optional<FrankCopula> CopulaFit::copula() const {
    if (theta == 0.0) return std::nullopt;
    return FrankCopula{theta};
}

CopulaFit fit_frank_itau(std::span<const double> x, std::span<const double> y) {
    require(x.size() >= 30, ErrorCode::InvalidArgument, "copula fit needs at least 30 pairs");
    CopulaFit fit;
    fit.tau = kendall_tau(x, y);
    require(std::abs(fit.tau.tau) < 1.0 - 1e-12, ErrorCode::Domain,
            "sample Kendall tau is +/-1: the Frank parameter is unbounded");
    fit.theta = frank_theta_from_tau(fit.tau.tau);
    const double h = 1e-4 * std::max(1.0, std::abs(fit.theta));
    const double slope = (frank_tau(fit.theta + h) - frank_tau(fit.theta - h)) / (2.0 * h);
    fit.theta_se = fit.tau.se / std::abs(slope);
    fit.near_independence = std::abs(fit.tau.tau) <= 2.0 * fit.tau.se;
    return fit;
}

// ---------------------------------------------------------------------------
// Normal mixture

double NormalMixtureFit::mean() const { return weights[0] * means[0] + weights[1] * means[1]; }

double NormalMixtureFit::sd() const {
    const double m = mean();
    double s2 = 0.0;
    for (int k = 0; k < 2; ++k) s2 += weights[k] * (sds[k] * sds[k] + means[k] * means[k]);
    return std::sqrt(std::max(s2 - m * m, 0.0));
}

double NormalMixtureFit::cdf(double x) const {
    double p = 0.0;
    for (int k = 0; k < 2; ++k)
        if (weights[k] > 0) p += weights[k] * normal_cdf((x - means[k]) / sds[k]);
    return p;
}

double NormalMixtureFit::value_at_risk(double p) const {
    require(p > 0 && p < 1, ErrorCode::Domain, "risk level must lie in (0, 1)");
    const double spread = 40.0 * std::max(sds[0], sds[1]);
    const double lo = std::min(means[0], means[1]) - spread;
    const double hi = std::max(means[0], means[1]) + spread;
    return numerics::find_root([&](double x) { return cdf(x) - p; }, lo, hi, {}, 1e-15);
}

double NormalMixtureFit::tail_value_at_risk(double p) const {
    const double v = value_at_risk(p);
    double acc = 0.0;
    for (int k = 0; k < 2; ++k) {
        if (weights[k] <= 0) continue;
        const double z = (v - means[k]) / sds[k];
        acc += weights[k] * (means[k] * normal_cdf(-z) + sds[k] * normal_pdf(z));
    }
    return acc / (1.0 - p);
}

NormalMixtureFit fit_normal_mixture(std::span<const double> sample, int k) {
    require(k == 1 || k == 2, ErrorCode::Unsupported, "normal mixture supports one or two components");
    require(sample.size() >= 1000, ErrorCode::InvalidArgument, "normal mixture fit needs at least 1000 values");
    const std::size_t n = sample.size();
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= double(n);
    double var = 0.0;
    for (double v : sample) var += (v - mean) * (v - mean);
    var /= double(n);
    require(var > 0, ErrorCode::InvalidArgument, "sample has zero variance");

    NormalMixtureFit fit;
    fit.diagnostics.n = n;
    const auto single = [&]() {
        fit.weights = {1.0, 0.0};
        fit.means = {mean, mean};
        fit.sds = {std::sqrt(var), std::sqrt(var)};
        double ll = 0.0;
        for (double v : sample) ll += std::log(normal_pdf((v - mean) / fit.sds[0]) / fit.sds[0]);
        fit.diagnostics.log_likelihood = ll;
        fit.diagnostics.converged = true;
    };
    if (k == 1) {
        single();
        fit.diagnostics.parameter_names = {"mean", "sd"};
        fit.diagnostics.covariance = Eigen::MatrixXd::Zero(2, 2);
        fit.diagnostics.covariance(0, 0) = var / double(n);
        fit.diagnostics.covariance(1, 1) = var / (2.0 * double(n));
        fit.diagnostics.aic = 4.0 - 2.0 * fit.diagnostics.log_likelihood;
        fit.diagnostics.bic = 2.0 * std::log(double(n)) - 2.0 * fit.diagnostics.log_likelihood;
        return fit;
    }

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    MixtureState s;
    for (int m = 0; m < 2; ++m) {
        const std::size_t a = m == 0 ? 0 : n / 2, b = m == 0 ? n / 2 : n;
        double mu = 0.0;
        for (std::size_t i = a; i < b; ++i) mu += sorted[i];
        mu /= double(b - a);
        double v = 0.0;
        for (std::size_t i = a; i < b; ++i) v += (sorted[i] - mu) * (sorted[i] - mu);
        s.mu[m] = mu;
        s.sigma[m] = std::max(std::sqrt(v / double(b - a)), 1e-6 * std::sqrt(var));
    }
    PositiveData d;
    d.log_x.assign(sample.begin(), sample.end());
    d.coupling.assign(n, 0.0);
    d.cls.assign(n, 0);
    auto run = run_em(d, s, 0.0, false, 10000, 1e-12, false);
    if (run.collapsed) {
        single();
    } else {
        fit.weights = run.state.w;
        fit.means = run.state.mu;
        fit.sds = run.state.sigma;
        fit.diagnostics.log_likelihood = run.loglik;
        fit.diagnostics.iterations = run.iterations;
        fit.diagnostics.converged = run.converged;
        if (fit.means[0] > fit.means[1]) {
            std::swap(fit.weights[0], fit.weights[1]);
            std::swap(fit.means[0], fit.means[1]);
            std::swap(fit.sds[0], fit.sds[1]);
        }
    }
    fit.diagnostics.parameter_names = {"w1", "mean1", "mean2", "sd1", "sd2"};
    fit.diagnostics.covariance = nan_matrix(5);
    if (!run.collapsed) {
        // observed information on (logit w1, means, log sds), mapped back by the delta method
        const auto ll = [&](std::span<const double> th) {
            const double w1 = 1.0 / (1.0 + std::exp(-th[0]));
            const double s1 = std::exp(th[3]), s2 = std::exp(th[4]);
            double acc = 0.0;
            for (double v : sample) {
                const double z1 = (v - th[1]) / s1, z2 = (v - th[2]) / s2;
                const double l1 = std::log(w1) - std::log(s1) - 0.5 * z1 * z1;
                const double l2 = std::log1p(-w1) - std::log(s2) - 0.5 * z2 * z2;
                const double top = std::max(l1, l2);
                acc += top + std::log(std::exp(l1 - top) + std::exp(l2 - top));
            }
            return acc;
        };
        const double w1 = fit.weights[0];
        const std::vector<double> th{std::log(w1 / (1.0 - w1)), fit.means[0], fit.means[1], std::log(fit.sds[0]),
                                     std::log(fit.sds[1])};
        const Eigen::MatrixXd cov = covariance_from_hessian(numerics::hessian(ll, th, 1e-4));
        Eigen::VectorXd jac(5);
        jac << w1 * (1.0 - w1), 1.0, 1.0, fit.sds[0], fit.sds[1];
        fit.diagnostics.covariance = jac.asDiagonal() * cov * jac.asDiagonal();
    }
    fit.diagnostics.aic = 10.0 - 2.0 * fit.diagnostics.log_likelihood;
    fit.diagnostics.bic = 5.0 * std::log(double(n)) - 2.0 * fit.diagnostics.log_likelihood;
    return fit;
}

// ---------------------------------------------------------------------------
// Heterogeneity

Heterogeneity heterogeneity_stats(std::span<const double> means, std::span<const double> weights) {
    require(means.size() == weights.size(), ErrorCode::InvalidArgument, "means and weights differ in length");
    require(means.size() >= 2, ErrorCode::InvalidArgument, "heterogeneity needs at least two groups");
    double sw = 0.0, swx = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        require(weights[i] > 0 && std::isfinite(weights[i]), ErrorCode::InvalidArgument, "weights must be positive");
        sw += weights[i];
        swx += weights[i] * means[i];
    }
    const double centre = swx / sw;
    Heterogeneity h;
    for (std::size_t i = 0; i < means.size(); ++i) h.q += weights[i] * (means[i] - centre) * (means[i] - centre);
    const double k = static_cast<double>(means.size());
    h.i2 = h.q > 0 ? std::max(0.0, (h.q - (k - 1.0)) / h.q) : 0.0;
    return h;
}

std::vector<double> inverse_variance_weights(std::span<const double> counts, std::span<const double> sds) {
    require(counts.size() == sds.size(), ErrorCode::InvalidArgument, "counts and sds differ in length");
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        require(counts[i] > 0 && sds[i] > 0, ErrorCode::InvalidArgument, "counts and sds must be positive");
        w[i] = counts[i] / (sds[i] * sds[i]);
    }
    return w;
}

}  // namespace atrp
