#pragma once

// Magnetostatic spin-wave modes of an in-plane magnetized YIG flake.
// Fields are given as mu0*H in tesla; frequencies are angular (rad/s).

#include <optional>
#include <vector>

namespace magconv {

struct MaterialGeometry {
    double mu0_HM = 0.175;        // saturation magnetization, T
    double d = 0.5e-3;            // thickness, m
    double l1 = 3e-3;             // in-plane side along the bias field, m
    double l2 = 3e-3;             // in-plane side across the bias field, m
    double gyro_over_2pi = 28e9;  // |gamma| / 2pi, Hz/T

    double omega_M() const noexcept;
    // omega_0 for a bias field mu0*H0.
    double omega_0(double H0) const noexcept;

    bool operator==(const MaterialGeometry&) const = default;
};

void validate(const MaterialGeometry& geom);

enum class ModeFamily { MSSW, BVMSW };

// How a standing-wave pair (n1, n2) is reduced to the scalar k of the
// dispersion relations.
enum class WavevectorModel {
    PropagationAxis, // MSSW: k_perp = n2 pi / l2, BVMSW: k_par = n1 pi / l1
    Magnitude,       // |k| = sqrt(k_par^2 + k_perp^2)
};

struct MagnetostaticMode {
    ModeFamily family = ModeFamily::MSSW;
    int n1 = 1;
    int n2 = 1;
    double k = 0.0;               // rad/m
    std::optional<double> omega;  // resolved at a bias field

    bool operator==(const MagnetostaticMode&) const = default;
};

// MSSW modes are (1, n2); BVMSW modes are (n, 1).
MagnetostaticMode make_mode(ModeFamily family, int index, const MaterialGeometry& geom,
                            WavevectorModel model = WavevectorModel::PropagationAxis);

double standing_wave_k(const MagnetostaticMode& mode, const MaterialGeometry& geom,
                       WavevectorModel model = WavevectorModel::PropagationAxis);

double mssw_frequency(double k, double H0, const MaterialGeometry& geom);
double bvmsw_frequency(double k, double H0, const MaterialGeometry& geom);
double mode_frequency(const MagnetostaticMode& mode, double H0, const MaterialGeometry& geom);

inline constexpr double min_search_field = 1e-3; // T
inline constexpr double max_search_field = 2.0;  // T

// Bias field placing `mode` at target_omega (within 2pi * 1 kHz). Raises
// ErrorCode::OutOfBand when the target lies outside the band reachable for
// fields in [min_search_field, max_search_field].
double field_for_frequency(double target_omega, const MagnetostaticMode& mode, const MaterialGeometry& geom);

// MSSW (1,1)..(1,max_index) ascending, BVMSW (1,1)..(max_index,1) descending
// in frequency, each resolved at H0.
std::vector<MagnetostaticMode> mode_catalog(const MaterialGeometry& geom, double H0, ModeFamily family,
                                            int max_index,
                                            WavevectorModel model = WavevectorModel::PropagationAxis);

} // namespace magconv
