#pragma once

// Derivative-free scalar and low-dimensional searches shared by the sweep
// optimizers and the spectrum fits.

#include <functional>
#include <span>
#include <vector>

namespace magconv {

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
    int evaluations = 0;
};

// Maximizes f on [lo, hi] until the bracket is narrower than x_tol. Exact
// ties keep the lower sub-interval, so flat landscapes resolve toward lo.
// The endpoints are evaluated too, so a monotone f returns the boundary.
GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                                int max_iterations = 200);

struct SimplexOptions {
    int max_evaluations = 2000;
    double rel_tol = 1e-9; // relative simplex size at convergence
    int restarts = 0;      // fresh simplexes built around the optimum
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history; // best value after each iteration
};

// Nelder-Mead minimization with reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. `step` sets the initial simplex edge per coordinate.
SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                               std::vector<double> step, const SimplexOptions& options = {});

} // namespace magconv
