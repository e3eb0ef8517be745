#include "magconv/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "magconv/error.hpp"
#include "magconv/map_kernels.hpp"
#include "magconv/search.hpp"
#include "magconv/units.hpp"

namespace magconv {

double SweepAxis::value(int i) const
{
    if (i == points - 1)
        return stop;
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    if (spacing == AxisSpacing::Log)
        return std::exp(std::log(start) + t * (std::log(stop) - std::log(start)));
    return start + t * (stop - start);
}

void validate(const SweepAxis& axis)
{
    const std::string n = axis.name.empty() ? std::string("axis") : axis.name;
    require(axis.points >= 2, n + ": at least 2 points required");
    require(std::isfinite(axis.start) && std::isfinite(axis.stop), n + ": ends must be finite");
    require(axis.stop > axis.start, n + ": stop must exceed start");
    if (axis.spacing == AxisSpacing::Log)
        require(axis.start > 0.0, n + ": log axis must be positive");
    require(!axis.name.empty() && std::all_of(axis.name.begin(), axis.name.end(),
                                              [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }),
            "axis name must be non-empty and use only letters, digits and underscores");
}

std::size_t SpectrumMap::invalid_count() const noexcept
{
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

bool same_map(const SpectrumMap& a, const SpectrumMap& b)
{
    if (!(a.x_axis == b.x_axis) || !(a.y_axis == b.y_axis) || a.kind != b.kind || a.valid != b.valid ||
        a.values.size() != b.values.size())
        return false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.valid[i] && std::memcmp(&a.values[i], &b.values[i], sizeof(cplx)) != 0)
            return false;
    return true;
}

double CouplingProfile::factor(const MagnetostaticMode& mode) const
{
    if (mode.family == ModeFamily::MSSW)
        return mssw_scale;
    return bvmsw_scale / std::pow(static_cast<double>(mode.n1), bvmsw_power);
}

SpectrumMap map_2d(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                   std::span<const MagnetostaticMode> mode_set, const SweepAxis& field_axis,
                   const SweepAxis& freq_axis, MapKind kind, const MapOptions& options)
{
    const MapProblem problem = prepare_map(cfg_template, geom, mode_set, field_axis, freq_axis, kind, options);
    if (options.variant == KernelVariant::Serial)
        return evaluate_map_serial(problem);
    return evaluate_map_openmp(problem, options.threads);
}

std::optional<cplx> map_cell(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                             std::span<const MagnetostaticMode> mode_set, double field, double probe_hz,
                             MapKind kind, const MapOptions& options)
{
    require(options.optical_mode < mode_set.size(), "map_cell: optical mode index outside the mode set");
    TransducerConfig cfg = cfg_template;
    if (kind == MapKind::ConversionAS)
        cfg.process = Process::AntiStokes;
    else if (kind == MapKind::ConversionS)
        cfg.process = Process::Stokes;
    std::vector<MagnonBranch> branches;
    for (const MagnetostaticMode& mode : mode_set)
        branches.push_back({mode_frequency(mode, field, geom), cfg.magnon.gamma_m,
                            cfg.g_ma * options.profile.factor(mode)});
    try {
        const ChainAmplitudes s = steady_state_solve_chain(angular(probe_hz), cfg, branches, options.optical_mode);
        return kind == MapKind::Reflection ? s.a_out : cplx(std::norm(s.b_out), 0.0);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<double> envelope_bandwidth_3db(std::span<const ScanSample> samples)
{
    std::vector<const ScanSample*> pts;
    for (const ScanSample& s : samples)
        if (s.valid)
            pts.push_back(&s);
    if (pts.size() < 3)
        return std::nullopt;

    std::size_t top = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i]->peak_efficiency > pts[top]->peak_efficiency)
            top = i;
    const double half = 0.5 * pts[top]->peak_efficiency;
    if (!(half > 0.0))
        return std::nullopt;

    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double x0 = pts[inside]->value;
        const double x1 = pts[outside]->value;
        const double y0 = pts[inside]->peak_efficiency;
        const double y1 = pts[outside]->peak_efficiency;
        return x0 + (y0 - half) / (y0 - y1) * (x1 - x0);
    };

    std::size_t l = top;
    while (l > 0 && pts[l - 1]->peak_efficiency >= half)
        --l;
    if (l == 0)
        return std::nullopt;
    std::size_t r = top;
    while (r + 1 < pts.size() && pts[r + 1]->peak_efficiency >= half)
        ++r;
    if (r + 1 == pts.size())
        return std::nullopt;
    return crossing(r, r + 1) - crossing(l, l - 1);
}

namespace {

double efficiency_at(double omega, const TransducerConfig& cfg, EfficiencyModel model)
{
    if (model == EfficiencyModel::ClosedForm)
        return conversion_efficiency(omega, cfg);
    return std::norm(steady_state_solve(omega, cfg).b_out);
}

constexpr int max_probe_grid = 4097;
constexpr int min_probe_grid = 65;

} // namespace

namespace {

// Eigenvalues of the real symmetric 3x3 matrix [[a, p, 0], [p, b, q], [0, q, c]]
// by the trigonometric method.
std::array<double, 3> tridiagonal_eigenvalues(double a, double b, double c, double p, double q)
{
    const double mean = (a + b + c) / 3.0;
    const double da = a - mean, db = b - mean, dc = c - mean;
    const double off = p * p + q * q;
    const double s2 = (da * da + db * db + dc * dc + 2.0 * off) / 6.0;
    if (!(s2 > 0.0))
        return {mean, mean, mean};
    const double s = std::sqrt(s2);
    // det((M - mean I) / s) / 2
    const double det = (da * (db * dc - q * q) - p * p * dc) / (s2 * s);
    const double phi = std::acos(std::clamp(0.5 * det, -1.0, 1.0)) / 3.0;
    return {mean + 2.0 * s * std::cos(phi), mean + 2.0 * s * std::cos(phi + 2.0 * pi / 3.0),
            mean + 2.0 * s * std::cos(phi + 4.0 * pi / 3.0)};
}

constexpr int refined_maxima = 3;

} // namespace

ProbePeak peak_over_probe(const TransducerConfig& cfg, EfficiencyModel model)
{
    validate(cfg);
    const double wm = cfg.magnon.omega_m;
    double optical_res = wm;
    if (model == EfficiencyModel::SteadyState)
        optical_res = cfg.process == Process::AntiStokes ? cfg.sideband_detuning : -cfg.sideband_detuning;

    const double ka = cfg.microwave.linewidth();
    const double kb = cfg.optical.linewidth();
    const double gm = cfg.magnon.gamma_m;
    const double pad = 2.5 * (ka + gm + kb);
    const double finest = std::min({ka, gm, kb});

    // Windows sit on every feature that can carry the maximum: the bare
    // optical resonance and the normal modes of the lossless three-mode
    // system. Overlapping windows are merged.
    const auto normal = tridiagonal_eigenvalues(cfg.microwave.omega, wm, optical_res, cfg.g_ma, cfg.g_mb);
    std::array<double, 4> centres{normal[0], normal[1], normal[2], optical_res};
    std::sort(centres.begin(), centres.end());
    std::vector<Bounds> windows;
    for (double c : centres) {
        if (!windows.empty() && c - pad <= windows.back().hi)
            windows.back().hi = c + pad;
        else
            windows.push_back({c - pad, c + pad});
    }

    auto eta = [&](double w) { return efficiency_at(w, cfg, model); };
    ProbePeak peak{windows.front().lo, -1.0};
    auto offer = [&peak](double w, double v) {
        if (v > peak.efficiency || (v == peak.efficiency && w < peak.omega)) {
            peak.omega = w;
            peak.efficiency = v;
        }
    };
    std::vector<double> grid;
    for (const Bounds& win : windows) {
        const int n = static_cast<int>(std::clamp(std::ceil(4.0 * (win.hi - win.lo) / finest) + 1.0,
                                                  static_cast<double>(min_probe_grid),
                                                  static_cast<double>(max_probe_grid)));
        const double step = (win.hi - win.lo) / (n - 1);
        grid.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            grid[i] = eta(win.lo + i * step);
            offer(win.lo + i * step, grid[i]);
        }

        // Golden section around the highest few local maxima of the grid.
        std::vector<int> maxima;
        for (int i = 0; i < n; ++i)
            if ((i == 0 || grid[i] > grid[i - 1]) && (i == n - 1 || grid[i] >= grid[i + 1]))
                maxima.push_back(i);
        std::stable_sort(maxima.begin(), maxima.end(), [&](int x, int y) { return grid[x] > grid[y]; });
        if (maxima.size() > refined_maxima)
            maxima.resize(refined_maxima);
        for (int best : maxima) {
            const double a = win.lo + std::max(best - 1, 0) * step;
            const double b = win.lo + std::min(best + 1, n - 1) * step;
            const double tol = std::max(1e-13 * std::abs(a), 1e-9 * step);
            const GoldenResult g = golden_section_max(eta, a, b, tol);
            offer(g.x, g.value);
        }
    }
    return peak;
}

namespace {

void flag_sample(ScanSample& s, const Error& e)
{
    s.valid = false;
    s.flag = std::string(to_string(e.code()));
    s.peak_efficiency = 0.0;
    s.peak_frequency = 0.0;
}

} // namespace

ScanResult fsr_scan(const TransducerConfig& cfg_template, const MaterialGeometry& geom, const MagnetostaticMode& mode,
                    const SweepAxis& fsr_axis, const ScanOptions& options)
{
    validate(fsr_axis);
    validate(geom);
    require(fsr_axis.start > 0.0, "fsr_scan: FSR values must be positive");

    ScanResult result;
    result.parameter = fsr_axis.name;
    result.samples.resize(static_cast<std::size_t>(fsr_axis.points));
    parallel_for(result.samples.size(), options.threads, [&](std::size_t i) {
        ScanSample& s = result.samples[i];
        s.value = fsr_axis.value(static_cast<int>(i));
        try {
            s.field = field_for_frequency(angular(s.value), mode, geom);
            TransducerConfig cfg = cfg_template;
            cfg.magnon.omega_m = mode_frequency(mode, s.field, geom);
            cfg = with_triple_resonance(cfg);
            const ProbePeak peak = peak_over_probe(cfg, options.model);
            s.peak_efficiency = peak.efficiency;
            s.peak_frequency = ordinary(peak.omega);
        } catch (const Error& e) {
            flag_sample(s, e);
        }
    });
    result.bandwidth_3db = envelope_bandwidth_3db(result.samples);
    return result;
}

KappaOptimum optimize_kappa_a(const TransducerConfig& cfg_template, const SweepAxis& kappa_range,
                              const ScanOptions& options)
{
    validate(kappa_range);
    require(kappa_range.start > 0.0, "optimize_kappa_a: kappa range must be positive");

    KappaOptimum out;
    out.curve.parameter = kappa_range.name;
    auto& samples = out.curve.samples;
    samples.resize(static_cast<std::size_t>(kappa_range.points));
    parallel_for(samples.size(), options.threads, [&](std::size_t i) {
        ScanSample& s = samples[i];
        s.value = kappa_range.value(static_cast<int>(i));
        try {
            TransducerConfig cfg = cfg_template;
            cfg.microwave.kappa_ext = s.value;
            const ProbePeak peak = peak_over_probe(cfg, options.model);
            s.peak_efficiency = peak.efficiency;
            s.peak_frequency = ordinary(peak.omega);
        } catch (const Error& e) {
            flag_sample(s, e);
        }
    });

    std::vector<const ScanSample*> pts;
    for (const ScanSample& s : samples)
        if (s.valid)
            pts.push_back(&s);
    if (pts.empty())
        fail(ErrorCode::NonConvergence, "optimize_kappa_a: no sample could be evaluated");
    std::size_t top = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i]->peak_efficiency > pts[top]->peak_efficiency)
            top = i;
    out.best_kappa = pts[top]->value;
    out.best_eta = pts[top]->peak_efficiency;

    // Plateaus are allowed; only a genuine reversal of trend breaks unimodality.
    const double slack = 1e-12 * out.best_eta;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double d = pts[i + 1]->peak_efficiency - pts[i]->peak_efficiency;
        if ((i < top && d < -slack) || (i >= top && d > slack)) {
            out.unimodal = false;
            out.warning = "efficiency versus kappa_a is not unimodal near kappa_a = " +
                          std::to_string(pts[i + 1]->value) + " rad/s";
            break;
        }
    }
    return out;
}

GmbCurves gmb_scan(const TransducerConfig& cfg_template, const SweepAxis& gmb_axis)
{
    validate(gmb_axis);
    require(gmb_axis.start >= 0.0, "gmb_scan: g_mb must be non-negative");

    auto curve = [&](Process process) {
        TransducerConfig base = with_triple_resonance(with_process(cfg_template, process));
        // g_mb is the scanned quantity; its factorization no longer applies.
        base.g_mb_single.reset();
        base.pump_amplitude.reset();
        ScanResult r;
        r.parameter = gmb_axis.name;
        for (int i = 0; i < gmb_axis.points; ++i) {
            ScanSample s;
            s.value = gmb_axis.value(i);
            try {
                TransducerConfig cfg = base;
                cfg.g_mb = s.value;
                s.peak_efficiency = conversion_efficiency(cfg.magnon.omega_m, cfg);
                s.peak_frequency = ordinary(cfg.magnon.omega_m);
            } catch (const Error& e) {
                flag_sample(s, e);
            }
            r.samples.push_back(s);
        }
        return r;
    };
    return {curve(Process::AntiStokes), curve(Process::Stokes)};
}

namespace {

constexpr int coarse_points = 33;

struct AxisBest {
    double x;
    double value;
    int evaluations;
};

// Coarse scan, then golden section inside the winning cell pair.
AxisBest axis_max(const std::function<double(double)>& f, Bounds b, double rel_tol)
{
    const double step = (b.hi - b.lo) / (coarse_points - 1);
    auto at = [&](int i) { return i == coarse_points - 1 ? b.hi : b.lo + i * step; };
    int best = 0;
    double best_v = -HUGE_VAL;
    for (int i = 0; i < coarse_points; ++i) {
        const double v = f(at(i));
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    AxisBest out{at(best), best_v, coarse_points};
    const GoldenResult g = golden_section_max(f, at(std::max(best - 1, 0)), at(std::min(best + 1, coarse_points - 1)),
                                              rel_tol * (b.hi - b.lo));
    out.evaluations += g.evaluations;
    if (g.value > out.value || (g.value == out.value && g.x < out.x)) {
        out.x = g.x;
        out.value = g.value;
    }
    return out;
}

void check_bounds(Bounds b, const char* what)
{
    require(std::isfinite(b.lo) && std::isfinite(b.hi) && b.hi > b.lo, std::string(what) + ": empty or invalid bounds");
}

} // namespace

PlaneOptimum coordinate_search_max(const std::function<double(double, double)>& f, Bounds x, Bounds y, int rounds,
                                   double rel_tol)
{
    check_bounds(x, "coordinate search x");
    check_bounds(y, "coordinate search y");
    require(rounds >= 1, "coordinate search: at least one round");

    PlaneOptimum p;
    p.x = 0.5 * (x.lo + x.hi);
    p.y = 0.5 * (y.lo + y.hi);
    p.value = f(p.x, p.y);
    p.evaluations = 1;
    auto take = [](double& pos, double& value, const AxisBest& cand) {
        if (cand.value > value || (cand.value == value && cand.x < pos)) {
            pos = cand.x;
            value = cand.value;
        }
    };
    for (int r = 0; r < rounds; ++r) {
        const double px = p.x;
        const double py = p.y;
        const AxisBest bx = axis_max([&](double v) { return f(v, p.y); }, x, rel_tol);
        take(p.x, p.value, bx);
        const AxisBest by = axis_max([&](double v) { return f(p.x, v); }, y, rel_tol);
        take(p.y, p.value, by);
        p.evaluations += bx.evaluations + by.evaluations;
        if (p.x == px && p.y == py)
            break;
    }
    const double edge = 1e-5;
    p.x_at_bound = p.x - x.lo <= edge * (x.hi - x.lo) || x.hi - p.x <= edge * (x.hi - x.lo);
    p.y_at_bound = p.y - y.lo <= edge * (y.hi - y.lo) || y.hi - p.y <= edge * (y.hi - y.lo);
    return p;
}

TripleResonanceOptimum optimize_triple_resonance(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                                                 const MagnetostaticMode& mode, Bounds fsr_bounds,
                                                 Bounds field_bounds, const TripleResonanceOptions& options)
{
    check_bounds(fsr_bounds, "FSR");
    check_bounds(field_bounds, "bias field");
    require(fsr_bounds.lo > 0.0 && field_bounds.lo > 0.0, "optimize_triple_resonance: bounds must be positive");
    validate(cfg_template);
    validate(geom);

    // The magnon band over the field bounds must reach the FSR window, or no
    // point in the box can satisfy the triple-resonance condition.
    const double width_hz = ordinary(cfg_template.microwave.linewidth() + cfg_template.magnon.gamma_m +
                                     cfg_template.optical.linewidth());
    const double f_low = ordinary(mode_frequency(mode, field_bounds.lo, geom));
    const double f_high = ordinary(mode_frequency(mode, field_bounds.hi, geom));
    if (std::max(f_low, f_high) < fsr_bounds.lo - width_hz || std::min(f_low, f_high) > fsr_bounds.hi + width_hz)
        fail(ErrorCode::OutOfBand, "optimize_triple_resonance: infeasible bounds, the magnon band " +
                                       std::to_string(std::min(f_low, f_high)) + " .. " +
                                       std::to_string(std::max(f_low, f_high)) +
                                       " Hz does not reach the FSR window");

    // Search coordinates: the FSR offset from the magnon frequency, and H0.
    // Stepping H0 at fixed offset keeps Delta_b riding along with omega_m(H0).
    const double sign = cfg_template.process == Process::AntiStokes ? 1.0 : -1.0;
    auto fsr_at = [&](double offset_hz, double h) {
        return std::clamp(ordinary(mode_frequency(mode, h, geom)) + offset_hz, fsr_bounds.lo, fsr_bounds.hi);
    };
    auto objective = [&](double offset_hz, double h) {
        try {
            TransducerConfig cfg = cfg_template;
            cfg.magnon.omega_m = mode_frequency(mode, h, geom);
            cfg = with_sideband_detuning(cfg, sign * angular(fsr_at(offset_hz, h)));
            return peak_over_probe(cfg, EfficiencyModel::SteadyState).efficiency;
        } catch (const Error&) {
            return 0.0;
        }
    };
    const double reach = 5.0 * width_hz;
    const PlaneOptimum p = coordinate_search_max(objective, {-reach, reach}, field_bounds, options.rounds);

    TripleResonanceOptimum out;
    out.best_H0 = p.y;
    out.best_fsr = fsr_at(p.x, p.y);
    out.best_eta = p.value;
    out.evaluations = p.evaluations;
    const double fsr_edge = 1e-9 * fsr_bounds.hi;
    out.at_boundary = p.y_at_bound || out.best_fsr - fsr_bounds.lo <= fsr_edge || fsr_bounds.hi - out.best_fsr <= fsr_edge;
    return out;
}

namespace {

double lorentz_profile(double u, double c, double w)
{
    const double h2 = 0.25 * w * w;
    const double d = u - c;
    return h2 / (d * d + h2);
}

// Amplitude and offset minimizing the squared residual for a fixed shape.
std::array<double, 2> linear_coefficients(std::span<const double> u, std::span<const double> v, double c, double w)
{
    double spp = 0.0, sp = 0.0, svp = 0.0, sv = 0.0;
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double p = lorentz_profile(u[i], c, w);
        spp += p * p;
        sp += p;
        svp += v[i] * p;
        sv += v[i];
    }
    const double det = spp * n - sp * sp;
    if (!(std::abs(det) > 1e-300))
        return {0.0, sv / n};
    return {(svp * n - sp * sv) / det, (spp * sv - sp * svp) / det};
}

double squared_residual(std::span<const double> u, std::span<const double> v, double c, double w, double amp,
                        double off)
{
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = v[i] - off - amp * lorentz_profile(u[i], c, w);
        s += r * r;
    }
    return s;
}

// Solves the 4x4 system m x = rhs by partial pivoting; false when singular.
bool solve4(std::array<std::array<double, 4>, 4> m, std::array<double, 4>& rhs)
{
    for (int k = 0; k < 4; ++k) {
        int piv = k;
        for (int r = k + 1; r < 4; ++r)
            if (std::abs(m[r][k]) > std::abs(m[piv][k]))
                piv = r;
        if (!(std::abs(m[piv][k]) > 0.0))
            return false;
        std::swap(m[k], m[piv]);
        std::swap(rhs[k], rhs[piv]);
        for (int r = k + 1; r < 4; ++r) {
            const double f = m[r][k] / m[k][k];
            for (int c = k; c < 4; ++c)
                m[r][c] -= f * m[k][c];
            rhs[r] -= f * rhs[k];
        }
    }
    for (int k = 3; k >= 0; --k) {
        for (int c = k + 1; c < 4; ++c)
            rhs[k] -= m[k][c] * rhs[c];
        rhs[k] /= m[k][k];
    }
    return true;
}

} // namespace

LorentzianFit lorentzian_fwhm_fit(std::span<const SpectrumPoint> spectrum)
{
    require(spectrum.size() >= 8, "lorentzian fit: at least 8 samples required");
    std::vector<SpectrumPoint> pts(spectrum.begin(), spectrum.end());
    for (const SpectrumPoint& p : pts)
        require(std::isfinite(p.freq) && std::isfinite(p.value), "lorentzian fit: samples must be finite");
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.freq < b.freq; });
    for (std::size_t i = 1; i < pts.size(); ++i)
        require(pts[i].freq > pts[i - 1].freq, "lorentzian fit: duplicate frequencies");

    const double f0 = pts.front().freq;
    const double span = pts.back().freq - f0;
    const auto [ymin_it, ymax_it] =
        std::minmax_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    const double ymin = ymin_it->value;
    const double yrange = ymax_it->value - ymin;
    if (!(yrange > 1e-12 * std::max(std::abs(ymin), std::abs(ymax_it->value))))
        fail(ErrorCode::DegenerateData, "lorentzian fit: data are flat");

    // Work in unit-span, unit-height coordinates so the fit is scale-free.
    std::vector<double> u(pts.size());
    std::vector<double> v(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        u[i] = (pts[i].freq - f0) / span;
        v[i] = (pts[i].value - ymin) / yrange;
    }

    // Shape parameters (centre, log width) by simplex; amplitude and offset
    // are eliminated by linear least squares at every shape.
    auto shape_cost = [&](std::span<const double> q) {
        const double w = std::exp(q[1]);
        const auto [amp, off] = linear_coefficients(u, v, q[0], w);
        return squared_residual(u, v, q[0], w, amp, off);
    };
    const double c0 = u[static_cast<std::size_t>(ymax_it - pts.begin())];
    const double w0 = 0.2;
    SimplexOptions opts;
    opts.max_evaluations = 500;
    opts.rel_tol = 1e-9;
    const SimplexResult s = minimize_simplex(shape_cost, {c0, std::log(w0)}, {0.1 * w0, 0.3}, opts);
    if (!s.converged)
        fail(ErrorCode::NonConvergence, "lorentzian fit: simplex did not converge within 500 evaluations");

    // Gauss-Newton polish on all four parameters, halving steps until the
    // residual drops.
    double c = s.x[0];
    double w = std::exp(s.x[1]);
    auto [amp, off] = linear_coefficients(u, v, c, w);
    double cost = squared_residual(u, v, c, w, amp, off);
    int evaluations = s.evaluations;
    for (int it = 0; it < 50; ++it) {
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double h2 = 0.25 * w * w;
            const double d = u[i] - c;
            const double den = d * d + h2;
            const double p = h2 / den;
            const std::array<double, 4> g{amp * 2.0 * d * h2 / (den * den), amp * 0.5 * w * d * d / (den * den), p,
                                          1.0};
            const double r = v[i] - off - amp * p;
            for (int a = 0; a < 4; ++a) {
                jtr[a] += g[a] * r;
                for (int b = 0; b < 4; ++b)
                    jtj[a][b] += g[a] * g[b];
            }
        }
        if (!solve4(jtj, jtr))
            break;
        bool accepted = false;
        for (double t = 1.0; t > 1e-3 && !accepted; t *= 0.5) {
            const double nc = c + t * jtr[0];
            const double nw = w + t * jtr[1];
            const double na = amp + t * jtr[2];
            const double no = off + t * jtr[3];
            ++evaluations;
            if (!(nw > 0.0))
                continue;
            const double ncost = squared_residual(u, v, nc, nw, na, no);
            if (ncost < cost) {
                c = nc;
                w = nw;
                amp = na;
                off = no;
                cost = ncost;
                accepted = true;
            }
        }
        if (!accepted)
            break;
    }

    LorentzianFit fit;
    fit.center = f0 + c * span;
    fit.fwhm = w * span;
    fit.amplitude = amp * yrange;
    fit.offset = ymin + off * yrange;
    fit.residual_norm = std::sqrt(cost) * yrange;
    fit.evaluations = evaluations;
    return fit;
}

} // namespace magconv
