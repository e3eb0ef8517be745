#include "magconv/coupled_mode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magconv/error.hpp"
#include "magconv/units.hpp"

namespace magconv {

namespace {

constexpr cplx I{0.0, 1.0};

void require_finite(double v, const char* name)
{
    if (!std::isfinite(v))
        fail(ErrorCode::InvalidArgument, std::string(name) + " must be finite");
}

void validate_port(const OscillatorParams& p, const char* name)
{
    const std::string n(name);
    require_finite(p.omega, name);
    require_finite(p.kappa_ext, name);
    require_finite(p.gamma_int, name);
    require(p.omega > 0.0, n + ": resonance frequency must be positive");
    require(p.kappa_ext >= 0.0, n + ": external coupling rate must be non-negative");
    require(p.gamma_int >= 0.0, n + ": intrinsic loss rate must be non-negative");
    require(p.linewidth() > 0.0, n + ": total linewidth must be positive");
}

// Inverse susceptibility -i(w - w0) + width/2.
cplx inverse_response(double probe_omega, double resonance, double width)
{
    return {0.5 * width, -(probe_omega - resonance)};
}

} // namespace

bool TransducerConfig::at_triple_resonance(double rel_tol) const noexcept
{
    const double target = process == Process::AntiStokes ? magnon.omega_m : -magnon.omega_m;
    return std::abs(sideband_detuning - target) <= rel_tol * magnon.omega_m;
}

void validate(const TransducerConfig& cfg)
{
    validate_port(cfg.microwave, "microwave");
    validate_port(cfg.optical, "optical");
    require_finite(cfg.magnon.omega_m, "magnon omega_m");
    require_finite(cfg.magnon.gamma_m, "magnon gamma_m");
    require(cfg.magnon.omega_m > 0.0, "magnon: frequency must be positive");
    require(cfg.magnon.gamma_m > 0.0, "magnon: dissipation rate must be positive");
    require_finite(cfg.sideband_detuning, "sideband detuning");
    require_finite(cfg.g_ma, "g_ma");
    require_finite(cfg.g_mb, "g_mb");
    require(cfg.g_ma >= 0.0, "g_ma must be non-negative");
    require(cfg.g_mb >= 0.0, "g_mb must be non-negative");
    if (cfg.g_mb_single && cfg.pump_amplitude) {
        const double expected = *cfg.g_mb_single * *cfg.pump_amplitude;
        require(std::abs(cfg.g_mb - expected) <= 1e-12 * std::max(std::abs(expected), 1.0),
                "g_mb must equal g_mb_single * pump_amplitude");
    }
}

TransducerConfig with_process(TransducerConfig cfg, Process process)
{
    cfg.process = process;
    return cfg;
}

TransducerConfig with_sideband_detuning(TransducerConfig cfg, double detuning)
{
    cfg.sideband_detuning = detuning;
    return cfg;
}

TransducerConfig with_triple_resonance(TransducerConfig cfg)
{
    const double detuning = cfg.process == Process::AntiStokes ? cfg.magnon.omega_m : -cfg.magnon.omega_m;
    return with_sideband_detuning(std::move(cfg), detuning);
}

Susceptibilities susceptibilities(double probe_omega, const TransducerConfig& cfg)
{
    require_finite(probe_omega, "probe frequency");
    validate(cfg);
    const double w_m = cfg.magnon.omega_m;
    return {
        1.0 / inverse_response(probe_omega, cfg.microwave.omega, cfg.microwave.linewidth()),
        1.0 / inverse_response(probe_omega, w_m, cfg.magnon.gamma_m),
        1.0 / inverse_response(probe_omega, w_m, cfg.optical.linewidth()),
    };
}

namespace {

struct ClosedForm {
    cplx denominator;
    cplx bare_product; // chi_a^-1 chi_b^-1 chi_m^-1
    double numerator_sq;
};

ClosedForm closed_form(double probe_omega, const TransducerConfig& cfg, double gmb_sign)
{
    require_finite(probe_omega, "probe frequency");
    validate(cfg);
    const double w_m = cfg.magnon.omega_m;
    const cplx ia = inverse_response(probe_omega, cfg.microwave.omega, cfg.microwave.linewidth());
    const cplx im = inverse_response(probe_omega, w_m, cfg.magnon.gamma_m);
    const cplx ib = inverse_response(probe_omega, w_m, cfg.optical.linewidth());
    const double gma2 = cfg.g_ma * cfg.g_ma;
    const double gmb2 = cfg.g_mb * cfg.g_mb;
    const cplx bare = ia * ib * im;
    const double num = cfg.g_ma * cfg.g_mb;
    return {bare + gma2 * ib + gmb_sign * gmb2 * ia, bare,
            num * num * cfg.microwave.kappa_ext * cfg.optical.kappa_ext};
}

} // namespace

double eta_antistokes(double probe_omega, const TransducerConfig& cfg)
{
    require(cfg.process == Process::AntiStokes, "eta_antistokes: config describes the Stokes process");
    const ClosedForm f = closed_form(probe_omega, cfg, +1.0);
    if (f.numerator_sq == 0.0)
        return 0.0;
    return f.numerator_sq / std::norm(f.denominator);
}

double eta_stokes(double probe_omega, const TransducerConfig& cfg, double instability_threshold)
{
    require(cfg.process == Process::Stokes, "eta_stokes: config describes the anti-Stokes process");
    const ClosedForm f = closed_form(probe_omega, cfg, -1.0);
    if (f.numerator_sq == 0.0)
        return 0.0;
    if (std::abs(f.denominator) < instability_threshold * std::abs(f.bare_product))
        fail(ErrorCode::StokesInstability,
             "Stokes denominator below instability threshold (parametric gain regime)");
    return f.numerator_sq / std::norm(f.denominator);
}

double conversion_efficiency(double probe_omega, const TransducerConfig& cfg, double instability_threshold)
{
    return cfg.process == Process::AntiStokes ? eta_antistokes(probe_omega, cfg)
                                              : eta_stokes(probe_omega, cfg, instability_threshold);
}

InternalEfficiency eta_internal(double eta, const TransducerConfig& cfg)
{
    require(std::isfinite(eta) && eta >= 0.0, "eta_internal: efficiency must be finite and non-negative");
    require(cfg.microwave.kappa_ext > 0.0, "eta_internal: microwave port is decoupled (kappa_a = 0)");
    require(cfg.optical.kappa_ext > 0.0, "eta_internal: optical port is decoupled (kappa_b = 0)");
    require(cfg.microwave.linewidth() > 0.0 && cfg.optical.linewidth() > 0.0,
            "eta_internal: linewidths must be positive");
    const double xi_a = cfg.microwave.extraction();
    const double xi_b = cfg.optical.extraction();
    return {eta / (xi_a * xi_b), xi_a, xi_b};
}

double implied_microwave_extraction(double eta, double eta_int, double xi_b)
{
    require(eta >= 0.0 && eta_int > 0.0, "implied extraction needs eta >= 0 and eta_int > 0");
    require(xi_b > 0.0 && xi_b <= 1.0, "optical extraction efficiency must lie in (0, 1]");
    return eta / (eta_int * xi_b);
}

ChainAmplitudes steady_state_solve_chain(double probe_omega, const TransducerConfig& cfg,
                                         std::span<const MagnonBranch> branches,
                                         std::size_t optical_branch, Drive drive)
{
    require_finite(probe_omega, "probe frequency");
    validate_port(cfg.microwave, "microwave");
    validate_port(cfg.optical, "optical");
    require(!branches.empty(), "steady state needs at least one magnon branch");
    require(optical_branch < branches.size(), "optical branch index out of range");
    require(std::isfinite(cfg.g_mb) && cfg.g_mb >= 0.0, "g_mb must be finite and non-negative");
    require_finite(cfg.sideband_detuning, "sideband detuning");
    for (const auto& br : branches) {
        require(std::isfinite(br.omega_m) && br.omega_m > 0.0, "magnon branch frequency must be positive");
        require(std::isfinite(br.gamma_m) && br.gamma_m > 0.0, "magnon branch dissipation must be positive");
        require(std::isfinite(br.g_ma) && br.g_ma >= 0.0, "magnon branch g_ma must be non-negative");
    }

    const std::size_t n_mag = branches.size();
    const std::size_t n = n_mag + 2;
    const std::size_t row_b = n - 1;
    const double kappa_a = cfg.microwave.kappa_ext;
    const double kappa_b = cfg.optical.kappa_ext;
    const double delta_b = cfg.sideband_detuning;
    const bool stokes = cfg.process == Process::Stokes;

    DenseMatrix a(n);
    a(0, 0) = inverse_response(probe_omega, cfg.microwave.omega, cfg.microwave.linewidth());
    for (std::size_t j = 0; j < n_mag; ++j) {
        const MagnonBranch& br = branches[j];
        a(0, 1 + j) = I * br.g_ma;
        a(1 + j, 0) = I * br.g_ma;
        a(1 + j, 1 + j) = inverse_response(probe_omega, br.omega_m, br.gamma_m);
    }
    a(1 + optical_branch, row_b) = I * cfg.g_mb;
    // The conjugate sideband b^dagger rotates at -Delta_b and couples with +i g_mb.
    if (stokes) {
        a(row_b, 1 + optical_branch) = -I * cfg.g_mb;
        a(row_b, row_b) = inverse_response(probe_omega, -delta_b, cfg.optical.linewidth());
    } else {
        a(row_b, 1 + optical_branch) = I * cfg.g_mb;
        a(row_b, row_b) = inverse_response(probe_omega, delta_b, cfg.optical.linewidth());
    }

    std::vector<cplx> rhs(n);
    rhs[0] = std::sqrt(kappa_a) * drive.a_in;
    rhs[row_b] = std::sqrt(kappa_b) * drive.b_in;

    LinearSolution sol = solve_dense(a, rhs);
    ChainAmplitudes out;
    out.a = sol.x[0];
    out.m.assign(sol.x.begin() + 1, sol.x.begin() + 1 + static_cast<std::ptrdiff_t>(n_mag));
    out.b_or_bdag = sol.x[row_b];
    out.a_out = std::sqrt(kappa_a) * out.a - drive.a_in;
    out.b_out = std::sqrt(kappa_b) * out.b_or_bdag - drive.b_in;
    out.condition = sol.condition;
    return out;
}

ModeAmplitudes steady_state_solve(double probe_omega, const TransducerConfig& cfg, Drive drive)
{
    validate(cfg);
    const MagnonBranch branch{cfg.magnon.omega_m, cfg.magnon.gamma_m, cfg.g_ma};
    ChainAmplitudes c = steady_state_solve_chain(probe_omega, cfg, std::span(&branch, 1), 0, drive);
    return {c.a, c.m[0], c.b_or_bdag, c.a_out, c.b_out, c.condition};
}

cplx reflection_s11(double probe_omega, const TransducerConfig& cfg)
{
    return steady_state_solve(probe_omega, cfg, Drive{{1.0, 0.0}, {0.0, 0.0}}).a_out;
}

CavityFigures cavity_figures(double fsr_hz, const OscillatorParams& optical, double wavelength_m)
{
    require(std::isfinite(fsr_hz) && fsr_hz > 0.0, "cavity_figures: FSR must be positive");
    require(std::isfinite(wavelength_m) && wavelength_m > 0.0, "cavity_figures: wavelength must be positive");
    const double width_hz = ordinary(optical.linewidth());
    if (!(width_hz > 0.0))
        fail(ErrorCode::InvalidArgument, "cavity_figures: optical linewidth is zero");
    return {fsr_hz / width_hz, (speed_of_light / wavelength_m) / width_hz};
}

double photon_flux(double power_w, double omega)
{
    require(std::isfinite(power_w) && power_w >= 0.0, "photon_flux: power must be non-negative");
    require(std::isfinite(omega) && omega > 0.0, "photon_flux: frequency must be positive");
    return power_w / (hbar * omega);
}

} // namespace magconv
