#include "magconv/magnetostatics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magconv/error.hpp"
#include "magconv/units.hpp"

namespace magconv {

double MaterialGeometry::omega_M() const noexcept { return two_pi * gyro_over_2pi * mu0_HM; }

double MaterialGeometry::omega_0(double H0) const noexcept { return two_pi * gyro_over_2pi * H0; }

void validate(const MaterialGeometry& geom)
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    require(positive(geom.mu0_HM), "geometry: saturation magnetization must be positive");
    require(positive(geom.d), "geometry: thickness must be positive");
    require(positive(geom.l1), "geometry: l1 must be positive");
    require(positive(geom.l2), "geometry: l2 must be positive");
    require(positive(geom.gyro_over_2pi), "geometry: gyromagnetic ratio must be positive");
}

namespace {

void check_dispersion_args(double k, double H0)
{
    require(std::isfinite(k) && k >= 0.0, "dispersion: wavevector must be finite and non-negative");
    require(std::isfinite(H0) && H0 > 0.0, "dispersion: bias field must be positive");
}

} // namespace

double mssw_frequency(double k, double H0, const MaterialGeometry& geom)
{
    check_dispersion_args(k, H0);
    const double w0 = geom.omega_0(H0);
    const double wM = geom.omega_M();
    const double surface = -std::expm1(-2.0 * k * geom.d); // 1 - exp(-2kd)
    return std::sqrt(w0 * (w0 + wM) + 0.25 * wM * wM * surface);
}

double bvmsw_frequency(double k, double H0, const MaterialGeometry& geom)
{
    check_dispersion_args(k, H0);
    const double w0 = geom.omega_0(H0);
    const double wM = geom.omega_M();
    const double x = k * geom.d;
    // (1 - exp(-x)) / x, with its removable singularity at x = 0 filled in.
    const double profile = x == 0.0 ? 1.0 : -std::expm1(-x) / x;
    return std::sqrt(w0 * (w0 + wM * profile));
}

double standing_wave_k(const MagnetostaticMode& mode, const MaterialGeometry& geom, WavevectorModel model)
{
    require(mode.n1 >= 1 && mode.n2 >= 1, "standing wave: mode numbers must be positive");
    validate(geom);
    const double k_par = mode.n1 * pi / geom.l1;
    const double k_perp = mode.n2 * pi / geom.l2;
    if (model == WavevectorModel::Magnitude)
        return std::hypot(k_par, k_perp);
    return mode.family == ModeFamily::MSSW ? k_perp : k_par;
}

MagnetostaticMode make_mode(ModeFamily family, int index, const MaterialGeometry& geom, WavevectorModel model)
{
    require(index >= 1, "mode index must be positive");
    MagnetostaticMode mode;
    mode.family = family;
    mode.n1 = family == ModeFamily::MSSW ? 1 : index;
    mode.n2 = family == ModeFamily::MSSW ? index : 1;
    mode.k = standing_wave_k(mode, geom, model);
    return mode;
}

double mode_frequency(const MagnetostaticMode& mode, double H0, const MaterialGeometry& geom)
{
    return mode.family == ModeFamily::MSSW ? mssw_frequency(mode.k, H0, geom) : bvmsw_frequency(mode.k, H0, geom);
}

double field_for_frequency(double target_omega, const MagnetostaticMode& mode, const MaterialGeometry& geom)
{
    require(std::isfinite(target_omega) && target_omega > 0.0, "field_for_frequency: target must be positive");
    validate(geom);
    auto f = [&](double h) { return mode_frequency(mode, h, geom) - target_omega; };

    const double lo_limit = min_search_field;
    const double hi_limit = max_search_field;
    if (f(lo_limit) > 0.0 || f(hi_limit) < 0.0)
        fail(ErrorCode::OutOfBand, "target frequency " + std::to_string(ordinary(target_omega)) +
                                       " Hz is outside the band reachable with bias fields 1 mT .. 2 T");

    // Start from the Kittel inversion and widen until the root is bracketed.
    const double wM = geom.omega_M();
    const double w0_guess = 0.5 * (std::sqrt(wM * wM + 4.0 * target_omega * target_omega) - wM);
    const double guess = std::clamp(w0_guess / (two_pi * geom.gyro_over_2pi), lo_limit, hi_limit);
    double lo = std::max(lo_limit, guess / 1.25);
    double hi = std::min(hi_limit, guess * 1.25);
    while (f(lo) > 0.0)
        lo = std::max(lo_limit, lo * 0.5);
    while (f(hi) < 0.0)
        hi = std::min(hi_limit, hi * 2.0);

    const double omega_tol = two_pi * 1e3;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        const double slope = (f(hi) - f(lo)) / (hi - lo);
        const double field_tol = slope > 0.0 ? 1e-3 * omega_tol / slope : 0.0;
        if (std::abs(fm) <= omega_tol && hi - lo <= field_tol)
            return mid;
        if (mid <= lo || mid >= hi)
            break; // bracket exhausted at double resolution
        if (fm < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double mid = 0.5 * (lo + hi);
    if (std::abs(f(mid)) <= omega_tol)
        return mid;
    fail(ErrorCode::NonConvergence, "field_for_frequency: bisection did not reach tolerance");
}

std::vector<MagnetostaticMode> mode_catalog(const MaterialGeometry& geom, double H0, ModeFamily family,
                                            int max_index, WavevectorModel model)
{
    require(max_index >= 1, "mode_catalog: max_index must be at least 1");
    std::vector<MagnetostaticMode> modes;
    modes.reserve(static_cast<std::size_t>(max_index));
    for (int i = 1; i <= max_index; ++i) {
        MagnetostaticMode m = make_mode(family, i, geom, model);
        m.omega = mode_frequency(m, H0, geom);
        modes.push_back(m);
    }
    const bool ascending = family == ModeFamily::MSSW;
    std::stable_sort(modes.begin(), modes.end(), [ascending](const auto& a, const auto& b) {
        return ascending ? *a.omega < *b.omega : *a.omega > *b.omega;
    });
    return modes;
}

} // namespace magconv
