#include "magconv/spectra_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magconv/error.hpp"
#include "magconv/search.hpp"
#include "magconv/units.hpp"

namespace magconv {

void validate(const MeasuredTrace& trace)
{
    require(trace.freq.size() == trace.value.size(), "trace: frequency and value columns differ in length");
    require(trace.freq.size() >= 8, "trace: at least 8 samples required");
    for (std::size_t i = 0; i < trace.freq.size(); ++i) {
        require(std::isfinite(trace.freq[i]) && std::isfinite(trace.value[i]), "trace: samples must be finite");
        require(i == 0 || trace.freq[i] > trace.freq[i - 1], "trace: frequencies must be strictly increasing");
    }
    if (trace.scale == TraceScale::Linear)
        for (double v : trace.value)
            require(v >= 0.0, "trace: linear power values must be non-negative");
}

std::vector<double> linear_power(const MeasuredTrace& trace)
{
    std::vector<double> out(trace.value);
    if (trace.scale == TraceScale::Decibel)
        for (double& v : out)
            v = std::pow(10.0, v / 10.0);
    return out;
}

std::optional<double> FitResult::find(std::string_view name) const
{
    for (const FitParam& p : params)
        if (p.name == name)
            return p.value;
    return std::nullopt;
}

double FitResult::at(std::string_view name) const
{
    const auto v = find(name);
    require(v.has_value(), "fit result has no parameter '" + std::string(name) + "'");
    return *v;
}

double reflection_power(double omega, const OscillatorParams& cavity)
{
    const cplx chi = 1.0 / cplx(0.5 * cavity.linewidth(), -(omega - cavity.omega));
    return std::norm(1.0 - cavity.kappa_ext * chi);
}

namespace {

std::vector<double> rms_history(const std::vector<double>& ssr, std::size_t n)
{
    std::vector<double> out(ssr.size());
    for (std::size_t i = 0; i < ssr.size(); ++i)
        out[i] = std::sqrt(ssr[i] / static_cast<double>(n));
    return out;
}

SimplexOptions fit_simplex_options()
{
    // Standard coefficients, 2000 evaluations, one restart from the optimum.
    SimplexOptions o;
    o.max_evaluations = 2000;
    o.rel_tol = 1e-9;
    o.restarts = 1;
    return o;
}

} // namespace

FitResult fit_reflection_resonance(const MeasuredTrace& trace, const ReflectionFitOptions& options)
{
    validate(trace);
    const std::vector<double> y = linear_power(trace);
    const std::size_t n = y.size();

    // Unit-span frequency coordinates; the model is invariant under a common
    // rescaling of detuning and rates, so rates are fitted in the same units.
    const double f_mid = 0.5 * (trace.freq.front() + trace.freq.back());
    const double span = trace.freq.back() - trace.freq.front();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = (trace.freq[i] - f_mid) / span;

    const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    const double floor = y[imin];
    const double top = *std::max_element(y.begin(), y.end());
    if (!(top - floor > 1e-9 * std::max(top, 1e-300)))
        fail(ErrorCode::DegenerateData, "reflection fit: trace shows no dip");

    // Half-depth crossings give the total linewidth.
    const double level = 0.5 * (std::min(top, 1.0) + floor);
    auto crossing = [&](int dir) -> std::optional<double> {
        for (std::size_t i = imin; dir < 0 ? i > 0 : i + 1 < n; i = dir < 0 ? i - 1 : i + 1) {
            const std::size_t j = dir < 0 ? i - 1 : i + 1;
            if (y[j] >= level)
                return u[i] + (level - y[i]) / (y[j] - y[i]) * (u[j] - u[i]);
        }
        return std::nullopt;
    };
    const auto left = crossing(-1);
    const auto right = crossing(+1);
    if (!left || !right)
        fail(ErrorCode::DegenerateData, "reflection fit: trace does not contain the whole dip");
    const double width0 = *right - *left;
    const double c0 = u[imin];
    if (c0 - 3.0 * width0 < u.front() || c0 + 3.0 * width0 > u.back())
        fail(ErrorCode::DegenerateData, "reflection fit: trace must extend three linewidths past the dip");

    // Depth at resonance is ((kappa - gamma) / (kappa + gamma))^2.
    const double r = std::clamp(std::sqrt(std::max(floor, 0.0)), 0.0, 0.98);
    double k0 = 0.5 * width0 * (1.0 + r);
    double g0 = 0.5 * width0 * (1.0 - r);
    if (options.regime == CouplingRegime::Undercoupled)
        std::swap(k0, g0);

    auto model = [](double x, double c, double kappa, double gamma) {
        return reflection_power(x, OscillatorParams{c, kappa, gamma});
    };
    auto cost = [&](std::span<const double> q) {
        const double kappa = std::exp(q[1]);
        const double gamma = std::exp(q[2]);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y[i] - model(u[i], q[0], kappa, gamma);
            s += d * d;
        }
        return s;
    };
    const SimplexResult s =
        minimize_simplex(cost, {c0, std::log(k0), std::log(g0)}, {0.1 * width0, 0.2, 0.2}, fit_simplex_options());
    if (!s.converged)
        fail(ErrorCode::NonConvergence, "reflection fit: simplex did not converge within 2000 evaluations");

    double kappa = std::exp(s.x[1]);
    double gamma = std::exp(s.x[2]);
    const bool over = kappa >= gamma;
    if (over != (options.regime == CouplingRegime::Overcoupled))
        std::swap(kappa, gamma);

    FitResult out;
    out.params = {
        {"omega_a", angular(f_mid + s.x[0] * span), "rad/s"},
        {"kappa_a", angular(kappa * span), "rad/s"},
        {"gamma_a", angular(gamma * span), "rad/s"},
    };
    out.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.residuals[i] = y[i] - model(u[i], s.x[0], kappa, gamma);
    out.residual_rms = std::sqrt(s.value / static_cast<double>(n));
    out.iterations = s.iterations;
    out.converged = s.converged;
    out.residual_history = rms_history(s.history, n);
    return out;
}

namespace {

constexpr double dip_contrast_fraction = 0.05;
constexpr int merge_distance = 3;

struct Window {
    int x0, x1, y0, y1; // inclusive index ranges
};

Window resolve_window(const SpectrumMap& map, const std::optional<FitWindow>& w)
{
    Window r{0, map.x_axis.points - 1, 0, map.y_axis.points - 1};
    if (!w)
        return r;
    require(w->field_hi > w->field_lo && w->freq_hi > w->freq_lo, "fit window: empty range");
    auto clip = [](const SweepAxis& a, double lo, double hi, int& first, int& last) {
        first = a.points;
        last = -1;
        for (int i = 0; i < a.points; ++i) {
            const double v = a.value(i);
            if (v >= lo && v <= hi) {
                first = std::min(first, i);
                last = std::max(last, i);
            }
        }
    };
    clip(map.x_axis, w->field_lo, w->field_hi, r.x0, r.x1);
    clip(map.y_axis, w->freq_lo, w->freq_hi, r.y0, r.y1);
    require(r.x1 >= r.x0 && r.y1 - r.y0 + 1 >= 8, "fit window: fewer than 8 frequency samples or no field column");
    return r;
}

std::vector<double> column_dips(const SpectrumMap& map, int ix, const Window& w)
{
    const int n = w.y1 - w.y0 + 1;
    std::vector<double> raw(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const std::size_t idx = map.index(ix, w.y0 + j);
        if (!map.valid[idx])
            return {};
        raw[j] = std::norm(map.values[idx]);
    }
    std::vector<double> smooth(raw.size());
    for (int j = 0; j < n; ++j) {
        const int a = std::max(0, j - 2);
        const int b = std::min(n - 1, j + 2);
        smooth[j] = std::accumulate(raw.begin() + a, raw.begin() + b + 1, 0.0) / (b - a + 1);
    }
    const double hi = *std::max_element(smooth.begin(), smooth.end());
    const double lo = *std::min_element(smooth.begin(), smooth.end());
    const double contrast = hi - lo;
    if (!(contrast > 1e-9 * std::max(hi, 1.0)))
        return {};

    std::vector<int> minima;
    for (int j = 1; j + 1 < n; ++j) {
        if (!(smooth[j] < smooth[j - 1] && smooth[j] <= smooth[j + 1]))
            continue;
        if (smooth[j] > hi - dip_contrast_fraction * contrast)
            continue;
        if (!minima.empty() && j - minima.back() < merge_distance) {
            if (smooth[j] < smooth[minima.back()])
                minima.back() = j;
            continue;
        }
        minima.push_back(j);
    }
    std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) { return smooth[a] < smooth[b]; });
    if (minima.size() > 2)
        minima.resize(2);

    std::vector<double> out;
    for (int j : minima) {
        // Deepest raw sample near the smoothed minimum, then a parabola.
        const int a = std::max(0, j - 2);
        const int b = std::min(n - 1, j + 2);
        const int k = static_cast<int>(std::min_element(raw.begin() + a, raw.begin() + b + 1) - raw.begin());
        double f = map.y_axis.value(w.y0 + k);
        if (k > 0 && k + 1 < n) {
            const double curv = raw[k - 1] - 2.0 * raw[k] + raw[k + 1];
            if (curv > 0.0) {
                const double t = std::clamp(0.5 * (raw[k - 1] - raw[k + 1]) / curv, -0.5, 0.5);
                const double fl = map.y_axis.value(w.y0 + k - 1);
                const double fr = map.y_axis.value(w.y0 + k + 1);
                f += t * 0.5 * (fr - fl);
            }
        }
        out.push_back(f);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

DipExtraction extract_dips(const SpectrumMap& map, const std::optional<FitWindow>& window)
{
    require(map.kind == MapKind::Reflection, "dip extraction needs a reflection map");
    const Window w = resolve_window(map, window);
    DipExtraction out;
    for (int ix = w.x0; ix <= w.x1; ++ix) {
        out.field.push_back(map.x_axis.value(ix));
        out.dips.push_back(column_dips(map, ix, w));
    }
    return out;
}

FitResult fit_avoided_crossing(const SpectrumMap& map, const std::optional<FitWindow>& window)
{
    const DipExtraction ex = extract_dips(map, window);
    const std::size_t columns = ex.field.size();
    std::size_t found = 0;
    std::size_t total_dips = 0;
    std::vector<std::size_t> pairs;
    for (std::size_t i = 0; i < columns; ++i) {
        found += ex.dips[i].empty() ? 0 : 1;
        total_dips += ex.dips[i].size();
        if (ex.dips[i].size() == 2)
            pairs.push_back(i);
    }
    if (total_dips < 2)
        fail(ErrorCode::DegenerateData, "avoided-crossing fit: fewer than 2 resolvable dips in the window");
    if (5 * found < 4 * columns)
        fail(ErrorCode::DegenerateData, "avoided-crossing fit: dip extraction failed on " +
                                            std::to_string(columns - found) + " of " + std::to_string(columns) +
                                            " columns");

    FitResult out;
    if (pairs.empty()) {
        // Only the cavity line is visible: the magnon does not couple.
        std::vector<double> single;
        for (const auto& d : ex.dips)
            single.insert(single.end(), d.begin(), d.end());
        std::sort(single.begin(), single.end());
        const double fa = single[single.size() / 2];
        out.params = {{"g_ma", 0.0, "rad/s"}, {"omega_a", angular(fa), "rad/s"}};
        double ss = 0.0;
        for (double f : single) {
            out.residuals.push_back(f - fa);
            ss += (f - fa) * (f - fa);
        }
        out.residual_rms = std::sqrt(ss / static_cast<double>(single.size()));
        out.converged = true;
        return out;
    }

    // Normalized coordinates: frequencies about their mean in units of the
    // frequency window, fields likewise.
    double f_ref = 0.0, h_ref = 0.0;
    for (std::size_t i : pairs) {
        f_ref += 0.5 * (ex.dips[i][0] + ex.dips[i][1]);
        h_ref += ex.field[i];
    }
    f_ref /= static_cast<double>(pairs.size());
    h_ref /= static_cast<double>(pairs.size());
    const double fs = map.y_axis.stop - map.y_axis.start;
    const double hs = std::max(ex.field.back() - ex.field.front(), 1e-12);

    const std::size_t m = pairs.size();
    std::vector<double> h(m), lo(m), hi(m);
    for (std::size_t k = 0; k < m; ++k) {
        h[k] = (ex.field[pairs[k]] - h_ref) / hs;
        lo[k] = (ex.dips[pairs[k]][0] - f_ref) / fs;
        hi[k] = (ex.dips[pairs[k]][1] - f_ref) / fs;
    }

    // Start values from the branch-sum and branch-gap identities:
    // S = w+ + w- = w_a + w_m and D^2 = (w+ - w-)^2 = (2 w_a - S)^2 + 4 g^2,
    // so D^2 - S^2 is linear in S with slope -4 w_a.
    auto regress = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double n = static_cast<double>(x.size());
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        return std::pair{slope, my - slope * mx};
    };
    std::vector<double> S(m), Y(m);
    std::size_t narrowest = 0;
    for (std::size_t k = 0; k < m; ++k) {
        S[k] = lo[k] + hi[k];
        const double D = hi[k] - lo[k];
        Y[k] = D * D - S[k] * S[k];
        if (D < hi[narrowest] - lo[narrowest])
            narrowest = k;
    }
    double a0 = 0.5 * S[narrowest];
    double g0 = 0.5 * (hi[narrowest] - lo[narrowest]);
    if (m >= 3) {
        const auto [b1, b0] = regress(S, Y);
        const double a = -0.25 * b1;
        const double g2 = 0.25 * b0 - a * a;
        if (std::isfinite(a) && g2 > 0.0) {
            a0 = a;
            g0 = std::sqrt(g2);
        }
    }
    std::vector<double> wm(m);
    for (std::size_t k = 0; k < m; ++k)
        wm[k] = S[k] - a0;
    const auto [s0, c0] = regress(h, wm);

    auto branches = [](double a, double g, double wmv) {
        const double mean = 0.5 * (a + wmv);
        const double half = std::hypot(0.5 * (a - wmv), g);
        return std::pair{mean - half, mean + half};
    };
    auto cost = [&](std::span<const double> q) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const auto [l, u] = branches(q[0], q[1], q[2] + q[3] * h[k]);
            s += (lo[k] - l) * (lo[k] - l) + (hi[k] - u) * (hi[k] - u);
        }
        return s;
    };
    SimplexOptions opts = fit_simplex_options();
    opts.rel_tol = 1e-10;
    const double step = std::max(0.05 * g0, 1e-4);
    const SimplexResult s = minimize_simplex(cost, {a0, g0, c0, s0}, {step, step, step, std::max(0.05 * std::abs(s0), step)},
                                             opts);
    if (!s.converged)
        fail(ErrorCode::NonConvergence, "avoided-crossing fit: simplex did not converge within 2000 evaluations");

    const double a = s.x[0];
    const double g = std::abs(s.x[1]);
    const double c = s.x[2];
    const double slope = s.x[3];
    out.params = {
        {"g_ma", angular(g * fs), "rad/s"},
        {"omega_a", angular(f_ref + a * fs), "rad/s"},
        {"field_to_omega_slope", angular(slope * fs / hs), "rad/s/T"},
    };
    if (slope != 0.0)
        out.params.push_back({"crossing_field", h_ref + (a - c) / slope * hs, "T"});
    for (std::size_t k = 0; k < m; ++k) {
        const auto [l, u] = branches(a, g, c + slope * h[k]);
        out.residuals.push_back((lo[k] - l) * fs);
        out.residuals.push_back((hi[k] - u) * fs);
    }
    out.residual_rms = std::sqrt(s.value / static_cast<double>(2 * m)) * fs;
    out.iterations = s.iterations;
    out.converged = s.converged;
    out.residual_history = rms_history(s.history, 2 * m);
    for (double& v : out.residual_history)
        v *= fs;
    return out;
}

} // namespace magconv
