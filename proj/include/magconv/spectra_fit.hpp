#pragma once

// Parameter extraction from reflection spectra: one bare cavity resonance,
// and the coupling strength of an avoided crossing in a field/frequency map.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "magconv/coupled_mode.hpp"
#include "magconv/sweep.hpp"

namespace magconv {

enum class TraceScale { Linear, Decibel };

// |S11|^2 versus frequency (Hz). Decibel values are 10 log10 of the power.
struct MeasuredTrace {
    std::vector<double> freq;
    std::vector<double> value;
    TraceScale scale = TraceScale::Linear;
};

// Equal lengths >= 8, finite values, strictly increasing frequencies.
void validate(const MeasuredTrace& trace);

std::vector<double> linear_power(const MeasuredTrace& trace);

struct FitParam {
    std::string name;
    double value = 0.0;
    std::string unit;
};

struct FitResult {
    std::vector<FitParam> params;
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history; // best rms after each iteration
    std::vector<double> residuals;        // final per-point residuals

    std::optional<double> find(std::string_view name) const;
    // Throws InvalidArgument for an unknown name.
    double at(std::string_view name) const;
};

// |S11|^2 of a bare port-coupled cavity: |1 - kappa chi_a|^2.
double reflection_power(double omega, const OscillatorParams& cavity);

// Magnitude-only data cannot tell kappa from gamma; the fit reports the
// solution on the chosen side of critical coupling.
enum class CouplingRegime { Overcoupled, Undercoupled };

struct ReflectionFitOptions {
    CouplingRegime regime = CouplingRegime::Overcoupled;
};

// Fits omega_a, kappa_a, gamma_a (rad/s). The trace must reach three
// linewidths past the dip on both sides.
FitResult fit_reflection_resonance(const MeasuredTrace& trace, const ReflectionFitOptions& options = {});

// Optional sub-rectangle of a map: fields in T, frequencies in Hz.
struct FitWindow {
    double field_lo = 0.0;
    double field_hi = 0.0;
    double freq_lo = 0.0;
    double freq_hi = 0.0;
};

struct DipExtraction {
    std::vector<double> field;
    std::vector<std::vector<double>> dips; // per column, ascending, Hz
};

// Per-column dip frequencies of a reflection map: 5-point smoothing, minima
// within 3 steps merged, the two deepest kept and refined by a parabola
// through the raw samples.
DipExtraction extract_dips(const SpectrumMap& map, const std::optional<FitWindow>& window = std::nullopt);

// Fits omega_pm = (omega_a + omega_m)/2 +- sqrt(((omega_a - omega_m)/2)^2 + g^2)
// with omega_m linear in field. Parameters: g_ma and omega_a (rad/s),
// field_to_omega_slope (rad/s/T) and crossing_field (T). When no column
// resolves two dips the crossing is uncoupled: g_ma = 0 and only omega_a is
// reported.
FitResult fit_avoided_crossing(const SpectrumMap& map, const std::optional<FitWindow>& window = std::nullopt);

} // namespace magconv
