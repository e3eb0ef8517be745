#include "magconv/map_kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "magconv/error.hpp"
#include "magconv/units.hpp"

#ifdef MAGCONV_HAVE_OPENMP
#include <omp.h>
#endif

namespace magconv {

MapProblem prepare_map(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                       std::span<const MagnetostaticMode> mode_set, const SweepAxis& field_axis,
                       const SweepAxis& freq_axis, MapKind kind, const MapOptions& options)
{
    validate(field_axis);
    validate(freq_axis);
    validate(geom);
    require(!mode_set.empty(), "map_2d: mode set is empty");
    require(options.optical_mode < mode_set.size(), "map_2d: optical mode index outside the mode set");
    require(field_axis.start > 0.0, "map_2d: bias fields must be positive");

    MapProblem p;
    p.cfg = cfg_template;
    if (kind == MapKind::ConversionAS)
        p.cfg.process = Process::AntiStokes;
    else if (kind == MapKind::ConversionS)
        p.cfg.process = Process::Stokes;
    validate(p.cfg);
    p.kind = kind;
    p.x_axis = field_axis;
    p.y_axis = freq_axis;
    p.modes = mode_set.size();
    p.optical_mode = options.optical_mode;
    p.branches.reserve(static_cast<std::size_t>(field_axis.points) * p.modes);
    for (int ix = 0; ix < field_axis.points; ++ix) {
        const double h = field_axis.value(ix);
        for (const MagnetostaticMode& mode : mode_set)
            p.branches.push_back({mode_frequency(mode, h, geom), p.cfg.magnon.gamma_m,
                                  p.cfg.g_ma * options.profile.factor(mode)});
    }
    return p;
}

std::optional<cplx> evaluate_cell(const MapProblem& problem, int ix, int iy)
{
    const double omega = angular(problem.y_axis.value(iy));
    try {
        const ChainAmplitudes s =
            steady_state_solve_chain(omega, problem.cfg, problem.column(ix), problem.optical_mode);
        if (problem.kind == MapKind::Reflection)
            return s.a_out;
        return cplx(std::norm(s.b_out), 0.0);
    } catch (const Error&) {
        return std::nullopt;
    }
}

namespace {

SpectrumMap blank_map(const MapProblem& problem)
{
    SpectrumMap map;
    map.x_axis = problem.x_axis;
    map.y_axis = problem.y_axis;
    map.kind = problem.kind;
    const std::size_t n = static_cast<std::size_t>(problem.x_axis.points) * problem.y_axis.points;
    map.values.assign(n, cplx(0.0, 0.0));
    map.valid.assign(n, 0);
    return map;
}

void store(SpectrumMap& map, std::size_t idx, const std::optional<cplx>& v)
{
    if (v) {
        map.values[idx] = *v;
        map.valid[idx] = 1;
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        map.values[idx] = cplx(nan, nan);
        map.valid[idx] = 0;
    }
}

} // namespace

SpectrumMap evaluate_map_serial(const MapProblem& problem)
{
    SpectrumMap map = blank_map(problem);
    for (int ix = 0; ix < problem.x_axis.points; ++ix)
        for (int iy = 0; iy < problem.y_axis.points; ++iy)
            store(map, map.index(ix, iy), evaluate_cell(problem, ix, iy));
    return map;
}

SpectrumMap evaluate_map_openmp(const MapProblem& problem, int threads)
{
#ifdef MAGCONV_HAVE_OPENMP
    SpectrumMap map = blank_map(problem);
    const int nx = problem.x_axis.points;
    const int ny = problem.y_axis.points;
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for collapse(2) schedule(dynamic, 16) num_threads(team)
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            store(map, map.index(ix, iy), evaluate_cell(problem, ix, iy));
    return map;
#else
    (void)threads;
    return evaluate_map_serial(problem);
#endif
}

bool openmp_enabled() noexcept
{
#ifdef MAGCONV_HAVE_OPENMP
    return true;
#else
    return false;
#endif
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body)
{
    if (threads == 1 || n < 2 || !openmp_enabled()) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
#ifdef MAGCONV_HAVE_OPENMP
    std::vector<std::exception_ptr> errors(n);
    const int team = threads > 0 ? threads : omp_get_max_threads();
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
#endif
}

} // namespace magconv
