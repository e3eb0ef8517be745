#pragma once

// Map and scan products over bias field, probe frequency, FSR and coupling
// rates, plus the optimizers that sit on top of them.
//
// Axis units: bias fields in tesla, probe frequencies and FSRs in Hz,
// coupling rates in rad/s. Efficiencies are photon-number ratios.

#include <complex>
#include <functional>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "magconv/coupled_mode.hpp"
#include "magconv/magnetostatics.hpp"

namespace magconv {

enum class AxisSpacing { Linear, Log };

struct SweepAxis {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    AxisSpacing spacing = AxisSpacing::Linear;

    double value(int i) const;
    bool operator==(const SweepAxis&) const = default;
};

// points >= 2, stop > start, finite ends, log axes strictly positive, and a
// name made of [A-Za-z0-9_] so it survives the CSV header.
void validate(const SweepAxis& axis);

enum class MapKind { Reflection, ConversionAS, ConversionS };

struct SpectrumMap {
    SweepAxis x_axis; // bias field, T
    SweepAxis y_axis; // probe frequency, Hz
    MapKind kind = MapKind::Reflection;
    // Row-major over x: cell (ix, iy) lives at ix * y_axis.points + iy.
    // Conversion maps keep efficiencies in the real part.
    std::vector<cplx> values;
    // 1 for a computed cell, 0 for a poisoned one (value NaN).
    std::vector<std::uint8_t> valid;

    std::size_t index(int ix, int iy) const noexcept
    {
        return static_cast<std::size_t>(ix) * static_cast<std::size_t>(y_axis.points) + static_cast<std::size_t>(iy);
    }
    const cplx& at(int ix, int iy) const noexcept { return values[index(ix, iy)]; }
    std::size_t invalid_count() const noexcept;
};

// Axes, kind and validity mask equal; valid cells bitwise equal.
bool same_map(const SpectrumMap& a, const SpectrumMap& b);

// g_ma of each catalog mode relative to the template's g_ma. MSSW modes keep
// `mssw_scale`; BVMSW modes scale as bvmsw_scale / n1^bvmsw_power.
struct CouplingProfile {
    double mssw_scale = 1.0;
    double bvmsw_scale = 1.0;
    double bvmsw_power = 1.0;

    double factor(const MagnetostaticMode& mode) const;
    bool operator==(const CouplingProfile&) const = default;
};

enum class KernelVariant { Serial, OpenMP };

struct MapOptions {
    std::size_t optical_mode = 0; // index into mode_set that carries g_mb
    CouplingProfile profile;
    KernelVariant variant = KernelVariant::OpenMP;
    int threads = 0; // 0 = OpenMP default
};

// Every mode in mode_set is resolved at each bias field and added to the
// microwave cavity's Langevin system as its own magnon row. Cells whose solve
// fails are poisoned individually.
SpectrumMap map_2d(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                   std::span<const MagnetostaticMode> mode_set, const SweepAxis& field_axis,
                   const SweepAxis& freq_axis, MapKind kind, const MapOptions& options = {});

// Single-cell evaluation used by map_2d; exposed for spot checks.
std::optional<cplx> map_cell(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                             std::span<const MagnetostaticMode> mode_set, double field, double probe_hz,
                             MapKind kind, const MapOptions& options = {});

struct ScanSample {
    double value = 0.0;            // scanned parameter
    double peak_efficiency = 0.0;
    double peak_frequency = 0.0;   // probe frequency of the peak, Hz
    double field = 0.0;            // bias field used, T (0 when not retuned)
    bool valid = true;
    std::string flag;              // error class of a flagged sample

    bool operator==(const ScanSample&) const = default;
};

struct ScanResult {
    std::string parameter;
    std::vector<ScanSample> samples;
    std::optional<double> bandwidth_3db; // in the parameter's unit

    bool operator==(const ScanResult&) const = default;
};

// Full width of the region around the envelope maximum where the peak
// efficiency stays at or above half the maximum, with linear interpolation
// between samples. Empty when the envelope does not fall below half on
// both sides inside the scan.
std::optional<double> envelope_bandwidth_3db(std::span<const ScanSample> samples);

enum class EfficiencyModel {
    ClosedForm,  // triple-resonance closed forms
    SteadyState, // direct Langevin solve with the config's Delta_b
};

struct ProbePeak {
    double omega = 0.0;
    double efficiency = 0.0;
};

// Maximum of the conversion efficiency over the probe frequency. Windows of
// +-2.5 total linewidths around the optical resonance and each normal mode of
// the lossless three-mode system are gridded, and the best local maxima are
// refined by golden section.
ProbePeak peak_over_probe(const TransducerConfig& cfg, EfficiencyModel model = EfficiencyModel::ClosedForm);

struct ScanOptions {
    int threads = 0;
    EfficiencyModel model = EfficiencyModel::ClosedForm;
};

// For each FSR the mode is retuned to omega_m = 2pi FSR, Delta_b is pinned to
// +-omega_m, and the peak efficiency over probe frequency is recorded.
ScanResult fsr_scan(const TransducerConfig& cfg_template, const MaterialGeometry& geom, const MagnetostaticMode& mode,
                    const SweepAxis& fsr_axis, const ScanOptions& options = {});

struct KappaOptimum {
    double best_kappa = 0.0;
    double best_eta = 0.0;
    ScanResult curve;
    bool unimodal = true;
    std::string warning;
};

// Peak efficiency versus kappa_a (rad/s) with everything else fixed.
KappaOptimum optimize_kappa_a(const TransducerConfig& cfg_template, const SweepAxis& kappa_range,
                              const ScanOptions& options = {});

struct GmbCurves {
    ScanResult anti_stokes;
    ScanResult stokes;
};

// Efficiency of both processes versus g_mb (rad/s) at the triple-resonance
// probe frequency omega = omega_m.
GmbCurves gmb_scan(const TransducerConfig& cfg_template, const SweepAxis& gmb_axis);

struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

struct PlaneOptimum {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    bool x_at_bound = false;
    bool y_at_bound = false;
    int evaluations = 0;
};

// Alternating golden-section coordinate search starting from the box
// centre. Exact ties resolve toward lower coordinates.
PlaneOptimum coordinate_search_max(const std::function<double(double, double)>& f, Bounds x, Bounds y,
                                   int rounds = 5, double rel_tol = 1e-7);

struct TripleResonanceOptimum {
    double best_fsr = 0.0; // Hz
    double best_H0 = 0.0;  // T
    double best_eta = 0.0;
    bool at_boundary = false;
    int evaluations = 0;
};

struct TripleResonanceOptions {
    int rounds = 5;
};

// Maximizes the steady-state peak efficiency over (FSR, H0), with
// Delta_b = +-2pi FSR and the magnon at the mode's frequency for H0.
TripleResonanceOptimum optimize_triple_resonance(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                                                 const MagnetostaticMode& mode, Bounds fsr_bounds,
                                                 Bounds field_bounds, const TripleResonanceOptions& options = {});

struct LorentzianFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double residual_norm = 0.0;
    int evaluations = 0;
};

struct SpectrumPoint {
    double freq = 0.0;
    double value = 0.0;
};

// Least-squares fit of offset + amplitude (G/2)^2 / ((f - f0)^2 + (G/2)^2).
LorentzianFit lorentzian_fwhm_fit(std::span<const SpectrumPoint> spectrum);

} // namespace magconv
