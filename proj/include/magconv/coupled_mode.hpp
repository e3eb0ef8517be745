#pragma once

// Frequency-domain steady state of the microwave cavity / magnon / optical
// sideband chain. All frequencies and rates are angular (rad/s).

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "magconv/dense_solve.hpp"

namespace magconv {

enum class Process { AntiStokes, Stokes };

// A cavity mode with an input/output port.
struct OscillatorParams {
    double omega = 0.0;     // resonance
    double kappa_ext = 0.0; // external (port) coupling rate
    double gamma_int = 0.0; // intrinsic loss rate

    double linewidth() const noexcept { return kappa_ext + gamma_int; }
    // Port extraction efficiency kappa / (kappa + gamma).
    double extraction() const noexcept { return kappa_ext / linewidth(); }

    bool operator==(const OscillatorParams&) const = default;
};

// The magnon has no port; it couples only through g_ma and g_mb.
struct MagnonParams {
    double omega_m = 0.0;
    double gamma_m = 0.0;

    bool operator==(const MagnonParams&) const = default;
};

struct TransducerConfig {
    OscillatorParams microwave;
    MagnonParams magnon;
    OscillatorParams optical; // omega is the sideband cavity mode
    // Delta_b = omega_b - omega_p, stored directly: it is ~1e5 times smaller
    // than omega_b, so recovering it from two absolute optical frequencies
    // would cost ~0.1 rad/s of rounding.
    double sideband_detuning = 0.0;
    double g_ma = 0.0;
    double g_mb = 0.0; // pump-enhanced optomagnonic coupling
    std::optional<double> g_mb_single;
    std::optional<double> pump_amplitude;
    Process process = Process::AntiStokes;

    double pump_omega() const noexcept { return optical.omega - sideband_detuning; }
    bool at_triple_resonance(double rel_tol = 1e-12) const noexcept;

    bool operator==(const TransducerConfig&) const = default;
};

// Throws ErrorCode::InvalidArgument naming the first violated invariant.
void validate(const TransducerConfig& cfg);

TransducerConfig with_process(TransducerConfig cfg, Process process);
// Retunes the pump so that Delta_b equals `detuning`.
TransducerConfig with_sideband_detuning(TransducerConfig cfg, double detuning);
// Retunes the pump so that Delta_b = +omega_m (anti-Stokes) or -omega_m (Stokes).
TransducerConfig with_triple_resonance(TransducerConfig cfg);

struct Susceptibilities {
    cplx a;
    cplx m;
    cplx b;
};

// chi_b is written on triple resonance: its pole sits at omega = omega_m.
Susceptibilities susceptibilities(double probe_omega, const TransducerConfig& cfg);

inline constexpr double default_instability_threshold = 1e-6;

// Closed-form photon-number conversion efficiencies. They assume the triple
// resonance convention for chi_b; away from Delta_b = +-omega_m use
// steady_state_solve instead.
double eta_antistokes(double probe_omega, const TransducerConfig& cfg);
// Raises ErrorCode::StokesInstability when |denominator| falls below
// `instability_threshold` * |chi_a^-1 chi_b^-1 chi_m^-1| (parametric threshold).
double eta_stokes(double probe_omega, const TransducerConfig& cfg,
                  double instability_threshold = default_instability_threshold);
// Dispatches on cfg.process.
double conversion_efficiency(double probe_omega, const TransducerConfig& cfg,
                             double instability_threshold = default_instability_threshold);

struct InternalEfficiency {
    double eta_int = 0.0;
    double xi_a = 0.0;
    double xi_b = 0.0;
};

InternalEfficiency eta_internal(double eta, const TransducerConfig& cfg);

// Microwave extraction efficiency implied by a measured (eta, eta_int) pair
// once the optical extraction efficiency is known.
double implied_microwave_extraction(double eta, double eta_int, double xi_b);

struct Drive {
    cplx a_in{1.0, 0.0};
    cplx b_in{0.0, 0.0};
};

struct ModeAmplitudes {
    cplx a;
    cplx m;
    cplx b_or_bdag; // b for anti-Stokes, b^dagger for Stokes
    cplx a_out;
    cplx b_out;
    double condition = 0.0;
};

// Direct linear solve of the Fourier-transformed Langevin equations. The
// optical row uses Delta_b from the config, so this also covers operation
// away from triple resonance.
ModeAmplitudes steady_state_solve(double probe_omega, const TransducerConfig& cfg, Drive drive = {});

// One magnon branch of a multi-mode chain.
struct MagnonBranch {
    double omega_m = 0.0;
    double gamma_m = 0.0;
    double g_ma = 0.0;
};

struct ChainAmplitudes {
    cplx a;
    std::vector<cplx> m;
    cplx b_or_bdag;
    cplx a_out;
    cplx b_out;
    double condition = 0.0;
};

// Multi-magnon generalization: every branch couples to the microwave cavity
// with its own g_ma; only `optical_branch` carries cfg.g_mb. cfg.magnon and
// cfg.g_ma are ignored.
ChainAmplitudes steady_state_solve_chain(double probe_omega, const TransducerConfig& cfg,
                                         std::span<const MagnonBranch> branches,
                                         std::size_t optical_branch, Drive drive = {});

// a_out / a_in with no optical input. Convention a_out = sqrt(kappa_a) a - a_in,
// so an empty far-detuned cavity reflects -1.
cplx reflection_s11(double probe_omega, const TransducerConfig& cfg);

struct CavityFigures {
    double finesse = 0.0;
    double quality = 0.0;
};

CavityFigures cavity_figures(double fsr_hz, const OscillatorParams& optical, double wavelength_m);

// Photons per second carried by `power_w` watts at angular frequency omega.
double photon_flux(double power_w, double omega);

} // namespace magconv
