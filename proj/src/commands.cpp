#include "magconv/commands.hpp"

#include <cmath>
#include <limits>

#include "magconv/artifacts.hpp"
#include "magconv/error.hpp"
#include "magconv/spectra_fit.hpp"
#include "magconv/sweep.hpp"
#include "magconv/units.hpp"

namespace magconv {

namespace fs = std::filesystem;

namespace {

constexpr Command all_commands[] = {Command::Simulate, Command::Map2d,      Command::FsrScan, Command::Fit,
                                    Command::Optimize, Command::Dispersion, Command::Report};

std::string header(Command c)
{
    return "# schema_version = " + std::to_string(config_schema_version) + "\n# command = " +
           std::string(to_string(c)) + "\n";
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string(na_token); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(na_token); }
std::string yes_no(bool b) { return b ? "true" : "false"; }

void log(const RunContext& ctx, const std::string& line)
{
    if (ctx.log)
        *ctx.log << line << "\n";
}

template <class Block>
const Block& block(const std::optional<Block>& b, std::string_view section)
{
    if (!b)
        fail(ErrorCode::InvalidArgument, "config has no [" + std::string(section) + "] section");
    return *b;
}

const MaterialGeometry& geometry(const RunConfig& cfg)
{
    if (!cfg.geometry_given)
        fail(ErrorCode::InvalidArgument, "config has no [geometry] section");
    return cfg.geometry;
}

// The configured detuning magnitude serves both processes with the sign each
// one needs; without one, each process sits on its own triple resonance.
TransducerConfig process_config(const RunConfig& cfg, Process p)
{
    TransducerConfig c = with_process(cfg.transducer, p);
    if (!cfg.detuning_given)
        return with_triple_resonance(c);
    const double d = std::abs(cfg.transducer.sideband_detuning);
    return with_sideband_detuning(c, p == Process::AntiStokes ? d : -d);
}

std::optional<double> efficiency_at(double omega, const TransducerConfig& c)
{
    try {
        if (c.at_triple_resonance())
            return conversion_efficiency(omega, c);
        return std::norm(steady_state_solve(omega, c).b_out);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void simulate(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const SimulateBlock& b = block(cfg.simulate, "simulate");
    const TransducerConfig as = process_config(cfg, Process::AntiStokes);
    const TransducerConfig st = process_config(cfg, Process::Stokes);
    const Process own = cfg.transducer.process;

    std::string csv = header(Command::Simulate);
    csv += "# process = " + std::string(own == Process::AntiStokes ? "anti-stokes" : "stokes") + "\n";
    csv += "# triple_resonance = " + yes_no(!cfg.detuning_given || cfg.transducer.at_triple_resonance()) + "\n";
    csv += "freq_hz,eta_as,eta_s,eta_int,s11_abs\n";
    int flagged = 0;
    for (int i = 0; i < b.probe.points; ++i) {
        const double f = b.probe.value(i);
        const double w = angular(f);
        const auto e_as = efficiency_at(w, as);
        const auto e_s = efficiency_at(w, st);
        const auto& own_eta = own == Process::AntiStokes ? e_as : e_s;
        const std::optional<double> e_int =
            own_eta ? std::optional(eta_internal(*own_eta, cfg.transducer).eta_int) : std::nullopt;
        flagged += !e_as || !e_s;
        csv += num(f) + "," + num(e_as) + "," + num(e_s) + "," + num(e_int) + "," +
               num(std::abs(reflection_s11(w, cfg.transducer))) + "\n";
    }
    log(ctx, "simulate: " + std::to_string(b.probe.points) + " probe points, " + std::to_string(flagged) + " flagged");
    out.add("simulate.csv", std::move(csv));
}

void map2d(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const Map2dBlock& b = block(cfg.map2d, "map2d");
    const MaterialGeometry& geom = geometry(cfg);
    std::vector<MagnetostaticMode> modes;
    for (const ModeSpec& m : b.modes)
        modes.push_back(resolve(m, geom, cfg.wavevector));
    MapOptions opts;
    opts.optical_mode = b.optical_mode;
    opts.profile = b.profile;
    opts.threads = ctx.threads;
    for (MapKind kind : b.kinds) {
        const SpectrumMap map = map_2d(cfg.transducer, geom, modes, b.field, b.freq, kind, opts);
        const std::string stem = "map2d_" + std::string(to_string(kind));
        log(ctx, "map2d: " + std::string(to_string(kind)) + " " + std::to_string(map.values.size()) + " cells, " +
                     std::to_string(map.invalid_count()) + " poisoned");
        if (map.invalid_count() > 0) {
            out.add(stem + ".csv", map_text(map, stem + ".mask.csv"));
            out.add(stem + ".mask.csv", mask_text(map, stem + ".csv"));
        } else {
            out.add(stem + ".csv", map_text(map));
            out.remove_stale(stem + ".mask.csv");
        }
    }
}

void fsrscan(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const FsrScanBlock& b = block(cfg.fsrscan, "fsrscan");
    const MaterialGeometry& geom = geometry(cfg);
    const ScanResult r =
        fsr_scan(cfg.transducer, geom, resolve(b.mode, geom, cfg.wavevector), b.fsr, ScanOptions{ctx.threads, b.model});

    std::string csv = header(Command::FsrScan);
    csv += "# mode = " + to_string(b.mode) + "\n";
    csv += "# model = " + std::string(b.model == EfficiencyModel::ClosedForm ? "closed-form" : "steady-state") + "\n";
    csv += "# bandwidth_3db_hz = " + num(r.bandwidth_3db) + "\n";
    csv += "fsr_hz,peak_efficiency,peak_frequency_hz,field_t,flag\n";
    const ScanSample* best = nullptr;
    for (const ScanSample& s : r.samples) {
        if (s.valid) {
            csv += num(s.value) + "," + num(s.peak_efficiency) + "," + num(s.peak_frequency) + "," + num(s.field) +
                   ",ok\n";
            if (!best || s.peak_efficiency > best->peak_efficiency)
                best = &s;
        } else {
            csv += num(s.value) + ",NA,NA,NA," + s.flag + "\n";
        }
    }
    if (best)
        log(ctx, "fsrscan: peak " + format_double(best->peak_efficiency) + " at FSR " + format_double(best->value) +
                     " Hz");
    out.add("fsrscan.csv", std::move(csv));
}

std::string fit_report(std::string_view kind, const std::string& input, const FitResult& r)
{
    std::string txt = header(Command::Fit);
    txt += "kind = " + std::string(kind) + "\n";
    txt += "input = " + input + "\n";
    txt += "converged = " + yes_no(r.converged) + "\n";
    txt += "iterations = " + std::to_string(r.iterations) + "\n";
    txt += "residual_rms = " + num(r.residual_rms) + "\n";
    for (const FitParam& p : r.params) {
        txt += p.name + " = " + num(p.value) + (p.unit.empty() ? "" : " " + p.unit) + "\n";
        if (p.unit == "rad/s")
            txt += p.name + "_over_2pi = " + num(ordinary(p.value)) + " Hz\n";
    }
    return txt;
}

void fit(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const FitBlock& b = block(cfg.fit, "fit");
    const fs::path input = fs::path(b.input).is_absolute() ? fs::path(b.input) : ctx.config_dir / b.input;
    std::string residuals = header(Command::Fit);
    FitResult r;
    std::string_view kind;

    if (b.kind == FitKind::AvoidedCrossing) {
        kind = "avoided-crossing";
        r = fit_avoided_crossing(parse_map(input), b.window);
        residuals += "index,residual\n";
        for (std::size_t i = 0; i < r.residuals.size(); ++i)
            residuals += std::to_string(i) + "," + num(r.residuals[i]) + "\n";
    } else {
        const auto xy = read_xy_csv(input);
        if (b.kind == FitKind::Reflection) {
            kind = "reflection";
            MeasuredTrace trace;
            trace.scale = b.scale;
            for (const auto& [f, v] : xy) {
                trace.freq.push_back(f);
                trace.value.push_back(v);
            }
            r = fit_reflection_resonance(trace, ReflectionFitOptions{b.regime});
        } else {
            kind = "lorentzian";
            std::vector<SpectrumPoint> pts;
            for (const auto& [f, v] : xy)
                pts.push_back({f, v});
            const LorentzianFit l = lorentzian_fwhm_fit(pts);
            r.params = {{"center", l.center, "Hz"}, {"fwhm", l.fwhm, "Hz"}, {"amplitude", l.amplitude, ""},
                        {"offset", l.offset, ""}};
            r.iterations = l.evaluations;
            r.converged = true;
            double ss = 0.0;
            for (const auto& [f, v] : xy) {
                const double h = 0.5 * l.fwhm;
                const double model = l.offset + l.amplitude * h * h / ((f - l.center) * (f - l.center) + h * h);
                r.residuals.push_back(v - model);
                ss += (v - model) * (v - model);
            }
            r.residual_rms = std::sqrt(ss / static_cast<double>(xy.size()));
        }
        residuals += "freq_hz,residual\n";
        for (std::size_t i = 0; i < r.residuals.size() && i < xy.size(); ++i)
            residuals += num(xy[i].first) + "," + num(r.residuals[i]) + "\n";
    }
    log(ctx, "fit: " + std::string(kind) + " residual_rms " + num(r.residual_rms));
    out.add("fit.txt", fit_report(kind, b.input, r));
    out.add("fit_residuals.csv", std::move(residuals));
}

void optimize(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const OptimizeBlock& b = block(cfg.optimize, "optimize");
    std::string txt = header(Command::Optimize);
    std::string curve = header(Command::Optimize);

    switch (b.target) {
    case OptimizeTarget::KappaA: {
        const KappaOptimum k = optimize_kappa_a(cfg.transducer, *b.kappa, ScanOptions{ctx.threads, {}});
        txt += "target = kappa-a\n";
        txt += "best_kappa_a = " + num(k.best_kappa) + " rad/s\n";
        txt += "best_kappa_a_over_2pi = " + num(ordinary(k.best_kappa)) + " Hz\n";
        txt += "best_eta = " + num(k.best_eta) + "\n";
        txt += "unimodal = " + yes_no(k.unimodal) + "\n";
        if (!k.warning.empty())
            txt += "warning = " + k.warning + "\n";
        curve += "kappa_a_hz,peak_efficiency,peak_frequency_hz,flag\n";
        for (const ScanSample& s : k.curve.samples)
            curve += num(ordinary(s.value)) + "," + (s.valid ? num(s.peak_efficiency) : "NA") + "," +
                     (s.valid ? num(s.peak_frequency) : "NA") + "," + (s.valid ? "ok" : s.flag) + "\n";
        log(ctx, "optimize: kappa_a/2pi " + num(ordinary(k.best_kappa)) + " Hz, eta " + num(k.best_eta));
        out.add("optimize_curve.csv", std::move(curve));
        break;
    }
    case OptimizeTarget::TripleResonance: {
        const MaterialGeometry& geom = geometry(cfg);
        const TripleResonanceOptimum t = optimize_triple_resonance(
            cfg.transducer, geom, resolve(*b.mode, geom, cfg.wavevector), *b.fsr, *b.field,
            TripleResonanceOptions{b.rounds});
        txt += "target = triple-resonance\n";
        txt += "mode = " + to_string(*b.mode) + "\n";
        txt += "best_fsr = " + num(t.best_fsr) + " Hz\n";
        txt += "best_field = " + num(t.best_H0) + " T\n";
        txt += "best_eta = " + num(t.best_eta) + "\n";
        txt += "at_boundary = " + yes_no(t.at_boundary) + "\n";
        txt += "evaluations = " + std::to_string(t.evaluations) + "\n";
        log(ctx, "optimize: FSR " + num(t.best_fsr) + " Hz, field " + num(t.best_H0) + " T, eta " + num(t.best_eta));
        break;
    }
    case OptimizeTarget::Gmb: {
        const GmbCurves g = gmb_scan(cfg.transducer, *b.gmb);
        txt += "target = gmb\n";
        curve += "g_mb_hz,eta_as,eta_s,relative_gap,flag\n";
        std::optional<double> unstable_from;
        for (std::size_t i = 0; i < g.anti_stokes.samples.size(); ++i) {
            const ScanSample& a = g.anti_stokes.samples[i];
            const ScanSample& s = g.stokes.samples[i];
            const std::optional<double> ea = a.valid ? std::optional(a.peak_efficiency) : std::nullopt;
            const std::optional<double> es = s.valid ? std::optional(s.peak_efficiency) : std::nullopt;
            const std::optional<double> gap =
                ea && es && *ea > 0.0 ? std::optional(std::abs(*es - *ea) / *ea) : std::nullopt;
            if (!s.valid && !unstable_from)
                unstable_from = a.value;
            const std::string flag = !a.valid ? a.flag : !s.valid ? s.flag : "ok";
            curve += num(ordinary(a.value)) + "," + num(ea) + "," + num(es) + "," + num(gap) + "," + flag + "\n";
        }
        txt += "stokes_unstable_from = " +
               (unstable_from ? num(ordinary(*unstable_from)) + " Hz" : std::string(na_token)) + "\n";
        log(ctx, "optimize: g_mb scan of " + std::to_string(g.anti_stokes.samples.size()) + " points");
        out.add("optimize_curve.csv", std::move(curve));
        break;
    }
    }
    out.add("optimize.txt", std::move(txt));
}

void dispersion(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const DispersionBlock& b = block(cfg.dispersion, "dispersion");
    const auto modes = mode_catalog(geometry(cfg), b.field, b.family, b.max_index, cfg.wavevector);
    std::string csv = header(Command::Dispersion);
    csv += "# field_t = " + num(b.field) + "\n";
    csv += "family,n1,n2,k_rad_per_m,freq_hz\n";
    for (const MagnetostaticMode& m : modes)
        csv += std::string(to_string(m.family)) + "," + std::to_string(m.n1) + "," + std::to_string(m.n2) + "," +
               num(m.k) + "," + num(ordinary(*m.omega)) + "\n";
    log(ctx, "dispersion: " + std::to_string(modes.size()) + " modes");
    out.add("dispersion.csv", std::move(csv));
}

void report(const RunConfig& cfg, const RunContext& ctx, ArtifactSet& out)
{
    const InternalEfficiency ext = eta_internal(1.0, cfg.transducer);
    std::string txt = header(Command::Report);
    txt += "xi_a = " + num(ext.xi_a) + "\n";
    txt += "xi_b = " + num(ext.xi_b) + "\n";
    if (cfg.optical_fsr && cfg.optical_wavelength) {
        const CavityFigures f = cavity_figures(*cfg.optical_fsr, cfg.transducer.optical, *cfg.optical_wavelength);
        txt += "optical_finesse = " + num(f.finesse) + "\n";
        txt += "optical_quality = " + num(f.quality) + "\n";
    }
    const auto model = efficiency_at(cfg.transducer.magnon.omega_m, cfg.transducer);
    txt += "model_eta_at_omega_m = " + num(model) + "\n";
    txt += "model_eta_int_at_omega_m = " +
           num(model ? std::optional(eta_internal(*model, cfg.transducer).eta_int) : std::nullopt) + "\n";
    if (cfg.report) {
        const double implied = implied_microwave_extraction(cfg.report->eta, cfg.report->eta_int, ext.xi_b);
        txt += "measured_eta = " + num(cfg.report->eta) + "\n";
        txt += "measured_eta_int = " + num(cfg.report->eta_int) + "\n";
        txt += "implied_xi_a = " + num(implied) + "\n";
        txt += "identity_residual = " + num(cfg.report->eta_int * implied * ext.xi_b - cfg.report->eta) + "\n";
        log(ctx, "report: implied xi_a " + num(implied));
    }
    out.add("report.txt", std::move(txt));
}

} // namespace

std::string_view to_string(Command c) noexcept
{
    switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Map2d: return "map2d";
    case Command::FsrScan: return "fsrscan";
    case Command::Fit: return "fit";
    case Command::Optimize: return "optimize";
    case Command::Dispersion: return "dispersion";
    case Command::Report: return "report";
    }
    return "simulate";
}

std::optional<Command> parse_command(std::string_view s) noexcept
{
    for (Command c : all_commands)
        if (to_string(c) == s)
            return c;
    return std::nullopt;
}

std::vector<fs::path> run_command(const RunConfig& cfg, Command command, const RunContext& ctx)
{
    ArtifactSet out(ctx.out_dir);
    try {
        switch (command) {
        case Command::Simulate: simulate(cfg, ctx, out); break;
        case Command::Map2d: map2d(cfg, ctx, out); break;
        case Command::FsrScan: fsrscan(cfg, ctx, out); break;
        case Command::Fit: fit(cfg, ctx, out); break;
        case Command::Optimize: optimize(cfg, ctx, out); break;
        case Command::Dispersion: dispersion(cfg, ctx, out); break;
        case Command::Report: report(cfg, ctx, out); break;
        }
        return out.commit();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(to_string(command)) + ": " + e.what());
    }
}

} // namespace magconv
