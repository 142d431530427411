#include "atrp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "atrp/error.hpp"

namespace atrp::numerics {

Integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                   unsigned max_depth) {
    if (a == b) return {};
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, max_depth, rel_tol, &error, &l1);
    if (!std::isfinite(value)) fail(ErrorCode::Convergence, "quadrature produced a non-finite value");
    return {value, error};
}

Integral integrate_split(const std::function<double(double)>& f, double a, double b,
                         std::span<const double> breakpoints, double rel_tol) {
    std::vector<double> nodes{a};
    for (double p : breakpoints)
        if (p > a && p < b) nodes.push_back(p);
    nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());
    Integral total;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const auto part = integrate(f, nodes[k], nodes[k + 1], rel_tol);
        total.value += part.value;
        total.error += part.error;
    }
    return total;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const std::function<double(double)>& df, double rel_tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) fail(ErrorCode::Convergence, "root is not bracketed");
    const bool increasing = fhi > flo;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == increasing)
            hi = x;
        else
            lo = x;
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi)) ||
            hi - lo <= std::numeric_limits<double>::min())
            return 0.5 * (lo + hi);
        double next = 0.5 * (lo + hi);
        if (df) {
            const double d = df(x);
            if (d != 0.0 && std::isfinite(d)) {
                const double newton = x - fx / d;
                if (newton > lo && newton < hi) next = newton;
            }
        }
        if (next == x) return x;
        x = next;
    }
    return x;
}

Minimum1d minimize_1d(const std::function<double(double)>& f, double lo, double hi, int bits,
                      std::size_t max_iter) {
    std::uintmax_t iters = max_iter;
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
    return {r.first, r.second, static_cast<std::size_t>(iters)};
}

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> start, std::vector<double> step, double f_tol,
                          std::size_t max_iter) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
    auto eval = [&](const std::vector<double>& p) {
        const double v = f(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    SimplexResult result;
    std::vector<std::size_t> order(n + 1);
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];
        result.iterations = it;
        if (std::abs(vals[worst] - vals[best]) <= f_tol * (std::abs(vals[best]) + f_tol)) {
            result.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / double(n);
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
            return p;
        };
        auto reflected = along(-1.0);
        const double fr = eval(reflected);
        if (fr < vals[best]) {
            auto expanded = along(-2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = std::move(expanded);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(reflected);
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = std::move(reflected);
            vals[worst] = fr;
        } else {
            auto contracted = fr < vals[worst] ? along(-0.5) : along(0.5);
            const double fc = eval(contracted);
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = std::move(contracted);
                vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    vals[i] = eval(pts[i]);
                }
            }
        }
    }
    const auto best = std::min_element(vals.begin(), vals.end()) - vals.begin();
    result.x = pts[best];
    result.value = vals[best];
    return result;
}

Eigen::MatrixXd hessian(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h) {
    const std::size_t n = x.size();
    std::vector<double> p(x.begin(), x.end());
    std::vector<double> steps(n);
    for (std::size_t i = 0; i < n; ++i) steps[i] = h * std::max(1.0, std::abs(x[i]));
    Eigen::MatrixXd H(n, n);
    const double f0 = f(p);
    for (std::size_t i = 0; i < n; ++i) {
        const double hi = steps[i];
        p[i] = x[i] + hi;
        const double fp = f(p);
        p[i] = x[i] - hi;
        const double fm = f(p);
        p[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (std::size_t j = 0; j < i; ++j) {
            const double hj = steps[j];
            auto at = [&](double si, double sj) {
                p[i] = x[i] + si * hi;
                p[j] = x[j] + sj * hj;
                const double v = f(p);
                p[i] = x[i];
                p[j] = x[j];
                return v;
            };
            const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        fail(ErrorCode::Convergence, "information matrix is not positive definite");
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& cov) {
    const Eigen::Index n = cov.rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = cov(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= 1e-300) continue;
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = cov(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

}  // namespace atrp::numerics
