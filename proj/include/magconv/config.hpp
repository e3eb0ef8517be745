#pragma once

// Run configuration documents: an INI/TOML-style subset with [sections],
// `key = value unit` lines, `#` comments and a mandatory schema_version.
// Every dimensional value must carry a unit suffix; the grammar and the key
// tables live in docs/config-format.md.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "magconv/coupled_mode.hpp"
#include "magconv/magnetostatics.hpp"
#include "magconv/spectra_fit.hpp"
#include "magconv/sweep.hpp"

namespace magconv {

inline constexpr int config_schema_version = 1;

struct ModeSpec {
    ModeFamily family = ModeFamily::MSSW;
    int index = 1;

    bool operator==(const ModeSpec&) const = default;
};

MagnetostaticMode resolve(const ModeSpec& spec, const MaterialGeometry& geom, WavevectorModel model);

struct SimulateBlock {
    SweepAxis probe{"probe", 0.0, 0.0, 0}; // Hz

    bool operator==(const SimulateBlock&) const = default;
};

struct Map2dBlock {
    SweepAxis field{"field", 0.0, 0.0, 0}; // T
    SweepAxis freq{"freq", 0.0, 0.0, 0};   // Hz
    std::vector<MapKind> kinds; // one map file per kind
    std::vector<ModeSpec> modes;
    std::size_t optical_mode = 0;
    CouplingProfile profile;

    bool operator==(const Map2dBlock&) const = default;
};

struct FsrScanBlock {
    ModeSpec mode;
    SweepAxis fsr{"fsr", 0.0, 0.0, 0}; // Hz
    EfficiencyModel model = EfficiencyModel::ClosedForm;

    bool operator==(const FsrScanBlock&) const = default;
};

enum class FitKind { Reflection, Lorentzian, AvoidedCrossing };

struct FitBlock {
    FitKind kind = FitKind::Reflection;
    std::string input; // relative paths resolve against the config file
    TraceScale scale = TraceScale::Linear;
    CouplingRegime regime = CouplingRegime::Overcoupled;
    std::optional<FitWindow> window;

    bool operator==(const FitBlock& o) const
    {
        auto same_window = [](const std::optional<FitWindow>& a, const std::optional<FitWindow>& b) {
            if (a.has_value() != b.has_value())
                return false;
            return !a || (a->field_lo == b->field_lo && a->field_hi == b->field_hi && a->freq_lo == b->freq_lo &&
                          a->freq_hi == b->freq_hi);
        };
        return kind == o.kind && input == o.input && scale == o.scale && regime == o.regime &&
               same_window(window, o.window);
    }
};

enum class OptimizeTarget { KappaA, TripleResonance, Gmb };

struct OptimizeBlock {
    OptimizeTarget target = OptimizeTarget::KappaA;
    std::optional<SweepAxis> kappa; // rad/s
    std::optional<SweepAxis> gmb;   // rad/s
    std::optional<ModeSpec> mode;
    std::optional<Bounds> fsr;   // Hz
    std::optional<Bounds> field; // T
    int rounds = 5;

    bool operator==(const OptimizeBlock& o) const
    {
        auto same_bounds = [](const std::optional<Bounds>& a, const std::optional<Bounds>& b) {
            return a.has_value() == b.has_value() && (!a || (a->lo == b->lo && a->hi == b->hi));
        };
        return target == o.target && kappa == o.kappa && gmb == o.gmb && mode == o.mode && same_bounds(fsr, o.fsr) &&
               same_bounds(field, o.field) && rounds == o.rounds;
    }
};

struct DispersionBlock {
    ModeFamily family = ModeFamily::MSSW;
    int max_index = 1;
    double field = 0.0; // T

    bool operator==(const DispersionBlock&) const = default;
};

// Measured efficiency pair for the internal-efficiency back-inference.
struct ReportBlock {
    double eta = 0.0;
    double eta_int = 0.0;

    bool operator==(const ReportBlock&) const = default;
};

struct RunConfig {
    int schema_version = config_schema_version;
    // Rates in rad/s. When sideband_detuning is not given the pump is placed
    // on triple resonance for the configured process.
    TransducerConfig transducer;
    bool detuning_given = false;
    // Without a [geometry] section the literature defaults stand in, but the
    // commands that need a flake refuse to run.
    bool geometry_given = false;
    MaterialGeometry geometry;
    WavevectorModel wavevector = WavevectorModel::PropagationAxis;
    std::optional<double> optical_wavelength; // m
    std::optional<double> optical_fsr;        // Hz

    std::optional<SimulateBlock> simulate;
    std::optional<Map2dBlock> map2d;
    std::optional<FsrScanBlock> fsrscan;
    std::optional<FitBlock> fit;
    std::optional<OptimizeBlock> optimize;
    std::optional<DispersionBlock> dispersion;
    std::optional<ReportBlock> report;

    bool operator==(const RunConfig&) const = default;
};

std::string_view to_string(MapKind kind) noexcept;
std::optional<MapKind> parse_map_kind(std::string_view s) noexcept;
std::string_view to_string(ModeFamily family) noexcept;
std::string to_string(const ModeSpec& mode);

// Errors: ConfigSyntax, UnitMissing, UnknownKey or RangeViolation, each with
// the offending key and line number in the message.
RunConfig parse_config(std::string_view text);

// Canonical text; parse_config(serialize_config(c)) == c bit for bit.
std::string serialize_config(const RunConfig& cfg);

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

} // namespace magconv
