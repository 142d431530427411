#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace atrp::numerics {

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod on [a, b]; bounds may be infinite.
/// Stops when the error estimate falls below rel_tol times the L1 norm.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double rel_tol = 1e-11, unsigned max_depth = 25);

/// Same as integrate() but splits [a, b] at the given interior points first.
Integral integrate_split(const std::function<double(double)>& f, double a, double b,
                         std::span<const double> breakpoints, double rel_tol = 1e-11);

/// Root of a monotone function on a bracket [lo, hi] where f(lo) and f(hi)
/// differ in sign. Bisection with a safeguarded Newton step when df is given.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const std::function<double(double)>& df = {}, double rel_tol = 1e-14,
                 int max_iter = 400);

struct Minimum1d {
    double x = 0.0;
    double value = 0.0;
    std::size_t iterations = 0;
};

/// Brent minimisation of f on [lo, hi].
Minimum1d minimize_1d(const std::function<double(double)>& f, double lo, double hi,
                      int bits = 40, std::size_t max_iter = 500);

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Nelder-Mead minimisation from a starting point with per-coordinate step.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> start, std::vector<double> step,
                          double f_tol = 1e-10, std::size_t max_iter = 20000);

/// Central-difference Hessian of f at x with relative step h.
Eigen::MatrixXd hessian(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h = 1e-4);

/// Inverse of a symmetric matrix via LDLT; throws Convergence when singular.
Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m);

/// Lower Cholesky factor of a covariance matrix, tolerating zero rows
/// (positive semidefinite input).
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& cov);

}  // namespace atrp::numerics
