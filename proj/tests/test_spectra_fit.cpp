#include <doctest.h>

#include <cmath>
#include <random>

#include "magconv/error.hpp"
#include "magconv/spectra_fit.hpp"
#include "magconv/units.hpp"
#include "test_support.hpp"

using namespace magconv;
using namespace magconv::testing;

namespace {

MeasuredTrace synthetic_trace(double kappa_hz, double gamma_hz, double noise = 0.0, unsigned seed = 1)
{
    const OscillatorParams cav{angular(4.6 * GHz), angular(kappa_hz), angular(gamma_hz)};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise);
    MeasuredTrace t;
    for (int i = 0; i < 401; ++i) {
        const double f = 4.6 * GHz - 20 * MHz + i * 0.1 * MHz;
        t.freq.push_back(f);
        t.value.push_back(std::max(0.0, reflection_power(angular(f), cav) + noise * n(rng)));
    }
    return t;
}

void check_reflection(const FitResult& r, double kappa_hz, double gamma_hz, double tol)
{
    CHECK(rel_err(ordinary(r.at("omega_a")), 4.6 * GHz) < 1e-6);
    CHECK(rel_err(ordinary(r.at("kappa_a")), kappa_hz) < tol);
    CHECK(rel_err(ordinary(r.at("gamma_a")), gamma_hz) < tol);
}

// Reflection map of one MSSW mode crossing a 4.6 GHz cavity.
SpectrumMap crossing_map(double g_ma_hz, std::vector<MagnetostaticMode> extra = {}, double field_half_span = 4e-3)
{
    TransducerConfig cfg = resonant_config();
    cfg.g_ma = angular(g_ma_hz);
    const MaterialGeometry geom;
    std::vector<MagnetostaticMode> modes{make_mode(ModeFamily::MSSW, 1, geom)};
    modes.insert(modes.end(), extra.begin(), extra.end());
    const double h0 = field_for_frequency(cfg.microwave.omega, modes[0], geom);
    const SweepAxis fields{"field", h0 - field_half_span, h0 + field_half_span, 81};
    const SweepAxis freqs{"freq", 4.5 * GHz, 4.7 * GHz, 801};
    return map_2d(cfg, geom, modes, fields, freqs, MapKind::Reflection);
}

} // namespace

TEST_CASE("bare reflection model agrees with the core solver")
{
    TransducerConfig cfg = resonant_config();
    cfg.g_ma = 0.0;
    cfg.g_mb = 0.0;
    for (double df : {-30.0, -1.0, 0.0, 0.4, 12.0}) {
        const double w = cfg.microwave.omega + angular(df * MHz);
        CHECK(reflection_power(w, cfg.microwave) == doctest::Approx(std::norm(reflection_s11(w, cfg))).epsilon(1e-12));
    }
}

TEST_CASE("S11 of an uncoupled cavity is a Lorentzian dip of width kappa + gamma")
{
    // 1 - |S11|^2 = kappa gamma / (Delta^2 + (K/2)^2): the dip has FWHM K.
    const OscillatorParams cav{angular(4.6 * GHz), angular(2 * MHz), angular(1 * MHz)};
    std::vector<SpectrumPoint> pts;
    for (int i = 0; i < 301; ++i) {
        const double f = 4.6 * GHz - 15 * MHz + i * 0.1 * MHz;
        pts.push_back({f, 1.0 - reflection_power(angular(f), cav)});
    }
    const LorentzianFit fit = lorentzian_fwhm_fit(pts);
    CHECK(rel_err(fit.fwhm, 3 * MHz) < 1e-3);
    CHECK(rel_err(fit.amplitude, 4.0 * 2 * 1 / 9.0) < 1e-3);
}

TEST_CASE("reflection fit round trips")
{
    const FitResult r = fit_reflection_resonance(synthetic_trace(2 * MHz, 1 * MHz));
    CHECK(r.converged);
    check_reflection(r, 2 * MHz, 1 * MHz, 5e-3);
    CHECK(r.residual_rms < 1e-6);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i)
        CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
}

TEST_CASE("reflection fit under the undercoupled convention")
{
    ReflectionFitOptions opts;
    opts.regime = CouplingRegime::Undercoupled;
    const FitResult r = fit_reflection_resonance(synthetic_trace(0.5 * MHz, 1.5 * MHz), opts);
    check_reflection(r, 0.5 * MHz, 1.5 * MHz, 5e-3);
    // The default convention reports the mirror solution.
    const FitResult mirror = fit_reflection_resonance(synthetic_trace(0.5 * MHz, 1.5 * MHz));
    CHECK(rel_err(ordinary(mirror.at("kappa_a")), 1.5 * MHz) < 5e-3);
}

TEST_CASE("reflection fit at critical coupling")
{
    const MeasuredTrace t = synthetic_trace(1 * MHz, 1 * MHz);
    double floor = 1.0;
    for (double v : t.value)
        floor = std::min(floor, v);
    CHECK(floor < 1e-4);
    check_reflection(fit_reflection_resonance(t), 1 * MHz, 1 * MHz, 5e-3);
}

TEST_CASE("reflection fit with 1% noise")
{
    for (unsigned seed : {1u, 2u, 3u}) {
        const FitResult r = fit_reflection_resonance(synthetic_trace(2 * MHz, 1 * MHz, 0.01, seed));
        check_reflection(r, 2 * MHz, 1 * MHz, 0.03);
    }
}

TEST_CASE("decibel and linear traces fit identically")
{
    const MeasuredTrace lin = synthetic_trace(2 * MHz, 1 * MHz, 0.002, 9);
    MeasuredTrace db = lin;
    db.scale = TraceScale::Decibel;
    for (double& v : db.value)
        v = 10.0 * std::log10(v);
    const FitResult a = fit_reflection_resonance(lin);
    const FitResult b = fit_reflection_resonance(db);
    for (const char* p : {"omega_a", "kappa_a", "gamma_a"})
        CHECK(rel_err(b.at(p), a.at(p)) < 1e-6);
}

TEST_CASE("reflection fit preconditions")
{
    MeasuredTrace flat;
    for (int i = 0; i < 20; ++i) {
        flat.freq.push_back(i);
        flat.value.push_back(1.0);
    }
    CHECK_THROWS_AS(fit_reflection_resonance(flat), Error);

    // Only 2 linewidths of margin.
    const OscillatorParams cav{angular(4.6 * GHz), angular(2 * MHz), angular(1 * MHz)};
    MeasuredTrace narrow;
    for (int i = 0; i < 81; ++i) {
        const double f = 4.6 * GHz - 6 * MHz + i * 0.15 * MHz;
        narrow.freq.push_back(f);
        narrow.value.push_back(reflection_power(angular(f), cav));
    }
    try {
        fit_reflection_resonance(narrow);
        FAIL("expected an under-spanned trace error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateData);
    }

    MeasuredTrace unsorted = synthetic_trace(2 * MHz, 1 * MHz);
    std::swap(unsorted.freq[3], unsorted.freq[4]);
    CHECK_THROWS_AS(fit_reflection_resonance(unsorted), Error);
    MeasuredTrace short_trace = synthetic_trace(2 * MHz, 1 * MHz);
    short_trace.freq.resize(7);
    short_trace.value.resize(7);
    CHECK_THROWS_AS(fit_reflection_resonance(short_trace), Error);
}

TEST_CASE("avoided-crossing fit recovers g_ma")
{
    const FitResult r = fit_avoided_crossing(crossing_map(20 * MHz));
    CHECK(r.converged);
    CHECK(rel_err(ordinary(r.at("g_ma")), 20 * MHz) < 0.01);
    CHECK(rel_err(ordinary(r.at("omega_a")), 4.6 * GHz) < 1e-5);
    CHECK(r.at("field_to_omega_slope") > 0.0);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i)
        CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
}

TEST_CASE("avoided-crossing fit of an uncoupled map")
{
    const SpectrumMap m = crossing_map(0.0);
    const FitResult r = fit_avoided_crossing(m);
    const double step = (m.y_axis.stop - m.y_axis.start) / (m.y_axis.points - 1);
    CHECK(ordinary(r.at("g_ma")) <= 0.5 * step);
    CHECK(std::abs(ordinary(r.at("omega_a")) - 4.6 * GHz) <= step);
}

TEST_CASE("avoided-crossing fit inside a window isolates one mode")
{
    const MaterialGeometry geom;
    const MagnetostaticMode other = make_mode(ModeFamily::MSSW, 3, geom);
    const SpectrumMap m = crossing_map(20 * MHz, {other}, 8e-3);
    const MagnetostaticMode m1 = make_mode(ModeFamily::MSSW, 1, geom);
    const double h0 = field_for_frequency(angular(4.6 * GHz), m1, geom);

    // The second mode crosses the cavity about 7 mT lower.
    const double h2 = field_for_frequency(angular(4.6 * GHz), other, geom);
    REQUIRE(h2 < h0 - 5e-3);
    const DipExtraction all = extract_dips(m);
    std::size_t pairs_near_h2 = 0;
    for (std::size_t i = 0; i < all.field.size(); ++i)
        pairs_near_h2 += std::abs(all.field[i] - h2) < 1e-3 && all.dips[i].size() == 2 ? 1 : 0;
    REQUIRE(pairs_near_h2 > 0);

    // Its dispersive pull on the cavity branch (~g^2/Delta) is what limits
    // the windowed estimate.
    const FitWindow w{h0 - 1.5e-3, h0 + 8e-3, 4.5 * GHz, 4.7 * GHz};
    const FitResult r = fit_avoided_crossing(m, w);
    CHECK(rel_err(ordinary(r.at("g_ma")), 20 * MHz) < 0.02);
    CHECK(std::abs(r.at("crossing_field") - h0) < 2e-4);
}

TEST_CASE("avoided-crossing fit rejects unusable maps")
{
    SpectrumMap m = crossing_map(20 * MHz);
    SpectrumMap conv = m;
    conv.kind = MapKind::ConversionAS;
    CHECK_THROWS_AS(fit_avoided_crossing(conv), Error);

    // A window far from every resonance has no dips.
    const FitWindow empty{m.x_axis.start, m.x_axis.stop, 4.5 * GHz, 4.52 * GHz};
    try {
        fit_avoided_crossing(m, empty);
        FAIL("expected degenerate data");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateData);
    }
}
