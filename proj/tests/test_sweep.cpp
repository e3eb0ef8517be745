#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "magconv/error.hpp"
#include "magconv/map_kernels.hpp"
#include "magconv/sweep.hpp"
#include "magconv/units.hpp"
#include "test_support.hpp"

using namespace magconv;
using namespace magconv::testing;

namespace {

MaterialGeometry flake() { return MaterialGeometry{}; }

// One MSSW mode swept through a 4.6 GHz cavity with g_ma/2pi = 20 MHz.
struct CrossingSetup {
    TransducerConfig cfg;
    MaterialGeometry geom = flake();
    std::vector<MagnetostaticMode> modes;
    double resonant_field = 0.0;
    SweepAxis fields;
    SweepAxis freqs;

    explicit CrossingSetup(double g_ma_hz = 20 * MHz, double fsr_hz = 4.63 * GHz)
    {
        cfg = resonant_config();
        cfg.g_ma = angular(g_ma_hz);
        cfg.g_mb = angular(1 * MHz);
        cfg.sideband_detuning = angular(fsr_hz);
        modes = {make_mode(ModeFamily::MSSW, 1, geom)};
        resonant_field = field_for_frequency(cfg.microwave.omega, modes[0], geom);
        fields = {"field", resonant_field - 4e-3, resonant_field + 4e-3, 41};
        freqs = {"freq", 4.5 * GHz, 4.7 * GHz, 401};
    }
};

bool bit_equal(const cplx& a, const cplx& b) { return std::memcmp(&a, &b, sizeof(cplx)) == 0; }

double dense_peak(const TransducerConfig& cfg, double lo, double hi, int n)
{
    double best = 0.0;
    for (int i = 0; i < n; ++i)
        best = std::max(best, conversion_efficiency(lo + (hi - lo) * i / (n - 1), cfg));
    return best;
}

} // namespace

TEST_CASE("sweep axes")
{
    const SweepAxis lin{"x", 1.0, 2.0, 5};
    CHECK(lin.value(0) == 1.0);
    CHECK(lin.value(2) == 1.5);
    CHECK(lin.value(4) == 2.0);
    const SweepAxis lg{"k", 1e3, 1e9, 7, AxisSpacing::Log};
    CHECK(lg.value(6) == 1e9);
    CHECK(lg.value(3) == doctest::Approx(1e6).epsilon(1e-12));
    CHECK_NOTHROW(validate(lin));
    CHECK_THROWS_AS(validate(SweepAxis{"x", 1.0, 1.0, 5}), Error);
    CHECK_THROWS_AS(validate(SweepAxis{"x", 1.0, 2.0, 1}), Error);
    CHECK_THROWS_AS(validate(SweepAxis{"x", -1.0, 2.0, 3, AxisSpacing::Log}), Error);
    CHECK_THROWS_AS(validate(SweepAxis{"bad name", 1.0, 2.0, 3}), Error);
}

TEST_CASE("OpenMP map kernel is bit-identical to the serial reference")
{
    const CrossingSetup s;
    for (MapKind kind : {MapKind::Reflection, MapKind::ConversionAS, MapKind::ConversionS}) {
        const MapProblem p = prepare_map(s.cfg, s.geom, s.modes, s.fields, s.freqs, kind, {});
        const SpectrumMap serial = evaluate_map_serial(p);
        for (int threads : {0, 2, 3, 7}) {
            const SpectrumMap par = evaluate_map_openmp(p, threads);
            CHECK(same_map(serial, par));
            CHECK(serial.valid == par.valid);
        }
    }
}

TEST_CASE("map cells match fresh single-point evaluations")
{
    const CrossingSetup s;
    std::vector<MagnetostaticMode> modes = s.modes;
    modes.push_back(make_mode(ModeFamily::BVMSW, 2, s.geom));
    modes.push_back(make_mode(ModeFamily::MSSW, 3, s.geom));
    MapOptions opts;
    opts.optical_mode = 0;
    std::mt19937_64 rng(5);
    for (MapKind kind : {MapKind::Reflection, MapKind::ConversionAS}) {
        const SpectrumMap m = map_2d(s.cfg, s.geom, modes, s.fields, s.freqs, kind, opts);
        REQUIRE(m.values.size() == 41u * 401u);
        CHECK(m.invalid_count() == 0);
        std::uniform_int_distribution<int> ix(0, 40), iy(0, 400);
        for (int k = 0; k < 100; ++k) {
            const int i = ix(rng);
            const int j = iy(rng);
            const auto fresh = map_cell(s.cfg, s.geom, modes, s.fields.value(i), s.freqs.value(j), kind, opts);
            REQUIRE(fresh);
            CHECK(bit_equal(*fresh, m.at(i, j)));
        }
    }
}

TEST_CASE("passive reflection map stays within the unit circle")
{
    const CrossingSetup s;
    const SpectrumMap m = map_2d(s.cfg, s.geom, s.modes, s.fields, s.freqs, MapKind::Reflection);
    double worst = 0.0;
    for (const cplx& v : m.values)
        worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1.0 + 1e-9);
}

TEST_CASE("conversion map vanishes without optomagnonic coupling")
{
    CrossingSetup s;
    s.cfg.g_mb = 0.0;
    for (MapKind kind : {MapKind::ConversionAS, MapKind::ConversionS}) {
        const SpectrumMap m = map_2d(s.cfg, s.geom, s.modes, s.fields, s.freqs, kind);
        for (const cplx& v : m.values)
            CHECK(v == cplx(0.0, 0.0));
    }
}

TEST_CASE("reflection map splitting at resonance is 2 g_ma")
{
    CrossingSetup s;
    s.fields = {"field", s.resonant_field - 1e-3, s.resonant_field + 1e-3, 3}; // middle column on resonance
    s.freqs = {"freq", 4.55 * GHz, 4.65 * GHz, 2001};
    const SpectrumMap m = map_2d(s.cfg, s.geom, s.modes, s.fields, s.freqs, MapKind::Reflection);
    std::vector<int> dips;
    for (int j = 1; j + 1 < 2001; ++j) {
        const double v = std::abs(m.at(1, j));
        if (v < std::abs(m.at(1, j - 1)) && v < std::abs(m.at(1, j + 1)) && v < 0.9)
            dips.push_back(j);
    }
    REQUIRE(dips.size() == 2);
    const double step = (s.freqs.stop - s.freqs.start) / 2000;
    CHECK(std::abs((dips[1] - dips[0]) * step - 40 * MHz) <= 2 * step);
}

TEST_CASE("conversion map maximum sits on a polariton branch")
{
    const CrossingSetup s;
    const SpectrumMap m = map_2d(s.cfg, s.geom, s.modes, s.fields, s.freqs, MapKind::ConversionAS);
    int bi = 0, bj = 0;
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 401; ++j)
            if (m.at(i, j).real() > m.at(bi, bj).real()) {
                bi = i;
                bj = j;
            }
    const double f_peak = s.freqs.value(bj);
    const double wm = mode_frequency(s.modes[0], s.fields.value(bi), s.geom);
    const double wa = s.cfg.microwave.omega;
    const double upper = 0.5 * (wa + wm) + std::hypot(0.5 * (wa - wm), s.cfg.g_ma);
    const double lower = 0.5 * (wa + wm) - std::hypot(0.5 * (wa - wm), s.cfg.g_ma);
    const double to_branch = std::min(std::abs(angular(f_peak) - upper), std::abs(angular(f_peak) - lower));
    const double to_bare = std::abs(angular(f_peak) - wm);
    CHECK(to_branch < angular(2 * MHz));
    CHECK(to_bare > angular(5 * MHz));
    // The bright spot also sits on the optical resonance: Delta_b = omega.
    CHECK(std::abs(f_peak - 4.63 * GHz) < 3 * MHz);
}

TEST_CASE("map_2d preconditions")
{
    const CrossingSetup s;
    std::vector<MagnetostaticMode> none;
    CHECK_THROWS_AS(map_2d(s.cfg, s.geom, none, s.fields, s.freqs, MapKind::Reflection), Error);
    MapOptions opts;
    opts.optical_mode = 3;
    CHECK_THROWS_AS(map_2d(s.cfg, s.geom, s.modes, s.fields, s.freqs, MapKind::Reflection, opts), Error);
}

TEST_CASE("coupling profile")
{
    const MaterialGeometry g = flake();
    const CouplingProfile p;
    CHECK(p.factor(make_mode(ModeFamily::MSSW, 4, g)) == 1.0);
    CHECK(p.factor(make_mode(ModeFamily::BVMSW, 4, g)) == 0.25);
    const CouplingProfile q{0.5, 2.0, 2.0};
    CHECK(q.factor(make_mode(ModeFamily::MSSW, 1, g)) == 0.5);
    CHECK(q.factor(make_mode(ModeFamily::BVMSW, 2, g)) == 0.5);
}

TEST_CASE("3 dB envelope width")
{
    // Triangle: linear interpolation is exact, half maximum at 2.5 and 7.5.
    std::vector<ScanSample> tri;
    for (int i = 0; i <= 10; ++i)
        tri.push_back({double(i), 1.0 - 0.2 * std::abs(i - 5), 0.0, 0.0, true, {}});
    REQUIRE(envelope_bandwidth_3db(tri));
    CHECK(*envelope_bandwidth_3db(tri) == doctest::Approx(5.0).epsilon(1e-15));

    // Lorentzian envelope of FWHM 300 MHz on a 1 MHz grid.
    std::vector<ScanSample> lor;
    for (int i = 0; i <= 1000; ++i) {
        const double x = 5.2e9 + i * 1e6;
        const double d = (x - 5.7e9) / 150e6;
        lor.push_back({x, 1e-8 / (1.0 + d * d), 0.0, 0.0, true, {}});
    }
    CHECK(std::abs(*envelope_bandwidth_3db(lor) - 300e6) < 1e3);

    // Envelope still above half at the scan edge.
    tri.erase(tri.begin(), tri.begin() + 4);
    CHECK_FALSE(envelope_bandwidth_3db(tri));
}

TEST_CASE("peak over probe frequency matches a dense scan")
{
    RandomConfigs gen(17);
    for (int k = 0; k < 40; ++k) {
        TransducerConfig cfg = gen.next(Process::AntiStokes);
        // Keep the features resolvable on the coarse grid.
        cfg.microwave.kappa_ext = angular(1 * MHz) + cfg.microwave.kappa_ext * 1e-2;
        cfg.magnon.gamma_m = angular(1 * MHz);
        const ProbePeak p = peak_over_probe(cfg);
        const double hw = 2.5 * (cfg.microwave.linewidth() + cfg.magnon.gamma_m + cfg.optical.linewidth());
        const double lo = std::min(cfg.magnon.omega_m, cfg.microwave.omega) - hw - cfg.g_ma;
        const double hi = std::max(cfg.magnon.omega_m, cfg.microwave.omega) + hw + cfg.g_ma;
        const double oracle = dense_peak(cfg, lo, hi, 200001);
        CHECK(p.efficiency >= oracle * (1 - 1e-6));
        CHECK(p.efficiency == doctest::Approx(conversion_efficiency(p.omega, cfg)));
    }
}

TEST_CASE("fsr scan envelope")
{
    TransducerConfig cfg = resonant_config();
    cfg.g_mb = angular(1 * MHz);
    const MaterialGeometry geom = flake();
    const MagnetostaticMode mode = make_mode(ModeFamily::MSSW, 1, geom);
    const SweepAxis fsr{"fsr", 4.40 * GHz, 4.80 * GHz, 81};
    const ScanResult r = fsr_scan(cfg, geom, mode, fsr);
    REQUIRE(r.samples.size() == 81);
    std::size_t top = 0;
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const ScanSample& s = r.samples[i];
        REQUIRE(s.valid);
        CHECK(s.peak_efficiency >= 0.0);
        CHECK(std::abs(ordinary(mode_frequency(mode, s.field, geom)) - s.value) <= 1e3);
        if (s.peak_efficiency > r.samples[top].peak_efficiency)
            top = i;

        // Brute force over probe frequency at the same retuned point.
        TransducerConfig c = cfg;
        c.magnon.omega_m = mode_frequency(mode, s.field, geom);
        c = with_triple_resonance(c);
        const double brute = dense_peak(c, c.magnon.omega_m - angular(100 * MHz),
                                        c.magnon.omega_m + angular(100 * MHz), 20001);
        CHECK(s.peak_efficiency >= brute * (1 - 1e-6));

        // Detuning Delta_b by 50 MHz can only lose efficiency.
        const TransducerConfig off = with_sideband_detuning(c, c.sideband_detuning + angular(50 * MHz));
        CHECK(s.peak_efficiency >= peak_over_probe(off, EfficiencyModel::SteadyState).efficiency);
    }
    REQUIRE(r.bandwidth_3db);
    CHECK(*r.bandwidth_3db > 0.0);
    CHECK(*r.bandwidth_3db < 400 * MHz);
    // The envelope is symmetric about the cavity for a resonant cavity here,
    // but its maxima are pulled away from 4.6 GHz by the polariton splitting.
    CHECK(std::abs(r.samples[top].value - 4.6 * GHz) > 5 * MHz);

    CHECK_THROWS_AS(fsr_scan(cfg, geom, mode, SweepAxis{"fsr", 5e9, 5e9, 3}), Error);
}

TEST_CASE("fsr scan is nearly flat when g_ma dominates")
{
    TransducerConfig cfg = resonant_config();
    cfg.g_ma = angular(1 * GHz);
    cfg.g_mb = angular(1 * MHz);
    const MaterialGeometry geom = flake();
    const MagnetostaticMode mode = make_mode(ModeFamily::MSSW, 1, geom);
    const ScanResult r = fsr_scan(cfg, geom, mode, SweepAxis{"fsr", 4.4 * GHz, 4.8 * GHz, 41});
    double lo = 1e300, hi = 0.0;
    for (const ScanSample& s : r.samples) {
        lo = std::min(lo, s.peak_efficiency);
        hi = std::max(hi, s.peak_efficiency);
    }
    CHECK(10 * std::log10(hi / lo) < 3.0);
}

TEST_CASE("fsr scan flags out-of-band samples")
{
    const TransducerConfig cfg = resonant_config();
    const MaterialGeometry geom = flake();
    const MagnetostaticMode mode = make_mode(ModeFamily::MSSW, 1, geom);
    const ScanResult r = fsr_scan(cfg, geom, mode, SweepAxis{"fsr", 0.1 * GHz, 4.6 * GHz, 3});
    CHECK_FALSE(r.samples[0].valid);
    CHECK(r.samples[0].flag == "out-of-band");
    CHECK(r.samples[2].valid);
}

TEST_CASE("kappa_a optimum")
{
    TransducerConfig cfg = resonant_config();
    cfg.g_mb = angular(1 * MHz);
    cfg.magnon.gamma_m = angular(10 * MHz);
    const SweepAxis range{"kappa_a", angular(10e3), angular(1e11), 81, AxisSpacing::Log};
    const KappaOptimum opt = optimize_kappa_a(cfg, range);
    CHECK(opt.unimodal);
    CHECK(opt.warning.empty());
    CHECK(opt.curve.samples.front().peak_efficiency < 0.05 * opt.best_eta);
    CHECK(opt.curve.samples.back().peak_efficiency < 0.05 * opt.best_eta);

    // Dense 1e4-point scan of the same range.
    const SweepAxis dense{"kappa_a", range.start, range.stop, 10000, AxisSpacing::Log};
    double best_k = 0.0, best_eta = -1.0;
    for (int i = 0; i < dense.points; ++i) {
        TransducerConfig c = cfg;
        c.microwave.kappa_ext = dense.value(i);
        const double eta = peak_over_probe(c).efficiency;
        if (eta > best_eta) {
            best_eta = eta;
            best_k = dense.value(i);
        }
    }
    const double ratio = std::pow(range.stop / range.start, 1.0 / (range.points - 1));
    CHECK(std::abs(std::log(opt.best_kappa / best_k)) <= std::log(ratio));
    CHECK(opt.best_eta <= best_eta * (1 + 1e-9));
}

TEST_CASE("kappa_a curve with two optima is reported, not rejected")
{
    // g_ma well above gamma_m: a polariton optimum at small kappa_a and a
    // cooperativity-matched one at large kappa_a.
    TransducerConfig cfg = resonant_config();
    cfg.g_mb = angular(1 * MHz);
    const KappaOptimum opt =
        optimize_kappa_a(cfg, SweepAxis{"kappa_a", angular(10e3), angular(1e11), 81, AxisSpacing::Log});
    CHECK_FALSE(opt.unimodal);
    CHECK_FALSE(opt.warning.empty());
    CHECK(opt.best_kappa > angular(100 * MHz));
}

TEST_CASE("g_mb scan")
{
    const TransducerConfig cfg = resonant_config();
    const GmbCurves lin = gmb_scan(cfg, SweepAxis{"g_mb", 0.0, angular(1e3), 5});
    CHECK(lin.anti_stokes.samples[0].peak_efficiency == 0.0);
    CHECK(lin.stokes.samples[0].peak_efficiency == 0.0);

    const GmbCurves c = gmb_scan(cfg, SweepAxis{"g_mb", angular(1.0), angular(1e3), 31, AxisSpacing::Log});
    // Log-log slopes of both curves and of the Stokes/anti-Stokes gap.
    auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            mx += std::log(x[i]);
            my += std::log(y[i]);
        }
        mx /= x.size();
        my /= y.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
            sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
        }
        return sxy / sxx;
    };
    std::vector<double> g, as, st, gap;
    for (std::size_t i = 0; i < c.anti_stokes.samples.size(); ++i) {
        g.push_back(c.anti_stokes.samples[i].value);
        as.push_back(c.anti_stokes.samples[i].peak_efficiency);
        st.push_back(c.stokes.samples[i].peak_efficiency);
        gap.push_back((st.back() - as.back()) / as.back());
    }
    CHECK(std::abs(slope(g, as) - 2.0) < 0.01);
    CHECK(std::abs(slope(g, st) - 2.0) < 0.01);

    const GmbCurves two = gmb_scan(cfg, SweepAxis{"g_mb", angular(10.0), angular(1e3), 2});
    auto rel_gap = [](const GmbCurves& k, int i) {
        const double a = k.anti_stokes.samples[i].peak_efficiency;
        return (k.stokes.samples[i].peak_efficiency - a) / a;
    };
    // Equal to 1e4 up to the O(g_mb^4) correction at 1 kHz.
    CHECK(rel_gap(two, 1) / rel_gap(two, 0) == doctest::Approx(1e4).epsilon(5e-3));
}

TEST_CASE("g_mb scan flags the Stokes instability")
{
    TransducerConfig cfg = resonant_config();
    // Threshold of the fully resonant Stokes system: g_mb^2 = (Ka/2 (Kb/2) (gm/2) + g_ma^2 Kb/2) / (Ka/2).
    const double ka = cfg.microwave.linewidth() / 2, kb = cfg.optical.linewidth() / 2, gm = cfg.magnon.gamma_m / 2;
    const double g_th = std::sqrt((ka * kb * gm + cfg.g_ma * cfg.g_ma * kb) / ka);
    const GmbCurves c = gmb_scan(cfg, SweepAxis{"g_mb", 0.5 * g_th, g_th, 2});
    CHECK(c.stokes.samples[0].valid);
    CHECK_FALSE(c.stokes.samples[1].valid);
    CHECK(c.stokes.samples[1].flag == "stokes-instability");
    CHECK(c.anti_stokes.samples[1].valid);
}

namespace {

struct Landscape {
    const char* name;
    std::function<double(double, double)> f;
    Bounds x, y;
};

std::vector<Landscape> landscapes()
{
    return {
        {"separable bowl", [](double x, double y) { return -(x - 0.31) * (x - 0.31) - 2.0 * (y + 0.4) * (y + 0.4); },
         {-1, 1}, {-1, 1}},
        {"tilted ellipse",
         [](double x, double y) {
             const double u = x - 2.0, v = y - 3.0;
             return -(u * u + v * v + 0.8 * u * v);
         },
         {0, 5}, {0, 5}},
        {"gaussian peak",
         [](double x, double y) { return std::exp(-((x - 5.6) * (x - 5.6) / 0.02 + (y - 0.12) * (y - 0.12) / 1e-3)); },
         {5.4, 5.9}, {0.05, 0.2}},
    };
}

} // namespace

TEST_CASE("coordinate search against a 200x200 grid")
{
    for (const Landscape& l : landscapes()) {
        CAPTURE(l.name);
        const PlaneOptimum p = coordinate_search_max(l.f, l.x, l.y);
        const double dx = (l.x.hi - l.x.lo) / 199, dy = (l.y.hi - l.y.lo) / 199;
        double gx = 0, gy = 0, gv = -HUGE_VAL;
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 200; ++j) {
                const double x = l.x.lo + i * dx, y = l.y.lo + j * dy;
                const double v = l.f(x, y);
                if (v > gv) {
                    gv = v;
                    gx = x;
                    gy = y;
                }
            }
        CHECK(std::abs(p.x - gx) <= dx);
        CHECK(std::abs(p.y - gy) <= dy);
        CHECK(p.value >= gv);
        CHECK_FALSE(p.x_at_bound);
    }
}

TEST_CASE("coordinate search boundary and tie cases")
{
    const auto f = [](double x, double y) { return -(x - 3.0) * (x - 3.0) - y * y; };
    const PlaneOptimum edge = coordinate_search_max(f, {0, 1}, {-1, 1});
    CHECK(edge.x == 1.0);
    CHECK(edge.x_at_bound);
    CHECK_FALSE(edge.y_at_bound);

    // Two equal peaks at x = +-0.5: the lower one wins.
    const auto twin = [](double x, double y) { return -std::pow(x * x - 0.25, 2) - y * y; };
    const PlaneOptimum t = coordinate_search_max(twin, {-1, 1}, {-1, 1});
    CHECK(t.x == doctest::Approx(-0.5).epsilon(1e-6));

    CHECK_THROWS_AS(coordinate_search_max(f, {1, 1}, {0, 1}), Error);
}

TEST_CASE("triple-resonance optimizer finds the ridge maximum")
{
    TransducerConfig cfg = resonant_config();
    cfg.g_mb = angular(1 * MHz);
    const MaterialGeometry geom = flake();
    const MagnetostaticMode mode = make_mode(ModeFamily::MSSW, 1, geom);
    const double h_lo = field_for_frequency(angular(4.45 * GHz), mode, geom);
    const double h_hi = field_for_frequency(angular(4.75 * GHz), mode, geom);
    const TripleResonanceOptimum opt =
        optimize_triple_resonance(cfg, geom, mode, {4.4 * GHz, 4.8 * GHz}, {h_lo, h_hi});

    // Never worse than the triple-resonance ridge sampled by an FSR scan.
    const ScanResult r = fsr_scan(cfg, geom, mode, SweepAxis{"fsr", 4.45 * GHz, 4.75 * GHz, 301});
    double envelope = 0.0;
    for (const ScanSample& s : r.samples)
        envelope = std::max(envelope, s.peak_efficiency);
    CHECK(opt.best_eta >= envelope * (1 - 1e-9));
    CHECK_FALSE(opt.at_boundary);

    // Local brute force: a 41x41 (FSR, H0) grid around the optimum never beats it.
    const double dh = 2e-4 * (h_hi - h_lo);
    double grid_best = 0.0;
    for (int i = -20; i <= 20; ++i)
        for (int j = -20; j <= 20; ++j) {
            TransducerConfig c = cfg;
            c.magnon.omega_m = mode_frequency(mode, opt.best_H0 + j * 50 * dh, geom);
            c.sideband_detuning = angular(opt.best_fsr + i * 0.5 * MHz);
            grid_best = std::max(grid_best, peak_over_probe(c, EfficiencyModel::SteadyState).efficiency);
        }
    CHECK(opt.best_eta >= grid_best * (1 - 1e-6));

    CHECK_THROWS_AS(optimize_triple_resonance(cfg, geom, mode, {8 * GHz, 9 * GHz}, {h_lo, h_hi}), Error);
    CHECK_THROWS_AS(optimize_triple_resonance(cfg, geom, mode, {4.8 * GHz, 4.4 * GHz}, {h_lo, h_hi}), Error);
}

TEST_CASE("lorentzian fit round trips")
{
    auto make = [](double fwhm, double noise, unsigned seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, noise);
        std::vector<SpectrumPoint> pts;
        for (int i = 0; i < 201; ++i) {
            const double f = 4.5e9 + i * 1e6;
            const double d = (f - 4.6e9) / (0.5 * fwhm);
            pts.push_back({f, 0.2 + 3.0 / (1 + d * d) + 3.0 * n(rng)});
        }
        return pts;
    };
    const auto clean = lorentzian_fwhm_fit(make(24e6, 0.0, 1));
    CHECK(rel_err(clean.fwhm, 24e6) < 1e-3);
    CHECK(std::abs(clean.center - 4.6e9) < 1e3);
    CHECK(rel_err(clean.amplitude, 3.0) < 1e-6);
    CHECK(rel_err(clean.offset, 0.2) < 1e-6);
    CHECK(clean.residual_norm < 1e-6);

    const auto noisy = lorentzian_fwhm_fit(make(24e6, 0.01, 2));
    CHECK(rel_err(noisy.fwhm, 24e6) < 0.02);
}

TEST_CASE("lorentzian fit is scale invariant")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 0.02);
    std::vector<SpectrumPoint> pts;
    for (int i = 0; i < 120; ++i) {
        const double f = 1e6 * i;
        const double d = (f - 47e6) / 9e6;
        pts.push_back({f, 1.0 + 1.0 / (1 + d * d) + n(rng)});
    }
    const auto base = lorentzian_fwhm_fit(pts);
    for (double c : {1e-6, 0.37, 4.0, 1e9}) {
        std::vector<SpectrumPoint> scaled = pts;
        for (auto& p : scaled)
            p.value *= c;
        const auto s = lorentzian_fwhm_fit(scaled);
        CHECK(rel_err(s.center, base.center) < 1e-9);
        CHECK(rel_err(s.fwhm, base.fwhm) < 1e-9);
        CHECK(rel_err(s.amplitude, c * base.amplitude) < 1e-9);
        CHECK(rel_err(s.offset, c * base.offset) < 1e-9);
    }
}

TEST_CASE("lorentzian fit rejects degenerate input")
{
    std::vector<SpectrumPoint> flat;
    for (int i = 0; i < 20; ++i)
        flat.push_back({double(i), 2.5});
    try {
        lorentzian_fwhm_fit(flat);
        FAIL("expected degenerate data");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateData);
    }
    flat.resize(7);
    CHECK_THROWS_AS(lorentzian_fwhm_fit(flat), Error);
}
