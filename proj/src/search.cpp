#include "magconv/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magconv/error.hpp"

namespace magconv {

GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                                int max_iterations)
{
    require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "golden section: empty bracket");
    require(x_tol > 0.0, "golden section: tolerance must be positive");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

    GoldenResult best{lo, f(lo), 1};
    auto consider = [&best](double x, double v) {
        if (v > best.value || (v == best.value && x < best.x)) {
            best.x = x;
            best.value = v;
        }
    };
    consider(hi, f(hi));
    ++best.evaluations;

    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    best.evaluations += 2;
    consider(c, fc);
    consider(d, fd);

    for (int it = 0; it < max_iterations && b - a > x_tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
        ++best.evaluations;
    }
    return best;
}

namespace {

struct Vertex {
    std::vector<double> x;
    double value;
};

} // namespace

SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                               std::vector<double> step, const SimplexOptions& options)
{
    const std::size_t n = x0.size();
    require(n > 0 && step.size() == n, "simplex: start point and step sizes must match");

    SimplexResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isnan(v) ? HUGE_VAL : v;
    };

    Vertex best{x0, eval(x0)};
    for (int round = 0; round <= options.restarts; ++round) {
        std::vector<Vertex> simplex;
        simplex.push_back(best);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x = best.x;
            x[i] += step[i];
            simplex.push_back({x, eval(x)});
        }

        bool converged = false;
        while (result.evaluations < options.max_evaluations) {
            std::sort(simplex.begin(), simplex.end(),
                      [](const Vertex& p, const Vertex& q) { return p.value < q.value; });
            ++result.iterations;
            result.history.push_back(std::min(simplex.front().value, best.value));

            double size = 0.0;
            double scale = 1.0;
            for (std::size_t i = 0; i < n; ++i)
                scale = std::max(scale, std::abs(simplex.front().x[i]));
            for (std::size_t v = 1; v <= n; ++v)
                for (std::size_t i = 0; i < n; ++i)
                    size = std::max(size, std::abs(simplex[v].x[i] - simplex.front().x[i]));
            if (size <= options.rel_tol * scale) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t i = 0; i < n; ++i)
                    centroid[i] += simplex[v].x[i] / static_cast<double>(n);
            auto along = [&](double t) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i)
                    x[i] = centroid[i] + t * (simplex.back().x[i] - centroid[i]);
                return x;
            };

            Vertex reflected{along(-1.0), 0.0};
            reflected.value = eval(reflected.x);
            if (reflected.value < simplex.front().value) {
                Vertex expanded{along(-2.0), 0.0};
                expanded.value = eval(expanded.x);
                simplex.back() = expanded.value < reflected.value ? expanded : reflected;
                continue;
            }
            if (reflected.value < simplex[n - 1].value) {
                simplex.back() = reflected;
                continue;
            }
            const bool outside = reflected.value < simplex.back().value;
            Vertex contracted{along(outside ? -0.5 : 0.5), 0.0};
            contracted.value = eval(contracted.x);
            if (contracted.value < (outside ? reflected.value : simplex.back().value)) {
                simplex.back() = contracted;
                continue;
            }
            for (std::size_t v = 1; v <= n; ++v) {
                for (std::size_t i = 0; i < n; ++i)
                    simplex[v].x[i] = simplex.front().x[i] + 0.5 * (simplex[v].x[i] - simplex.front().x[i]);
                simplex[v].value = eval(simplex[v].x);
            }
        }

        const auto it = std::min_element(simplex.begin(), simplex.end(),
                                         [](const Vertex& p, const Vertex& q) { return p.value < q.value; });
        if (it->value <= best.value)
            best = *it;
        result.converged = converged;
        if (result.evaluations >= options.max_evaluations)
            break;
        // Restart with a smaller simplex around the optimum.
        for (std::size_t i = 0; i < n; ++i)
            step[i] = 0.1 * step[i];
    }

    result.x = best.x;
    result.value = best.value;
    return result;
}

} // namespace magconv
