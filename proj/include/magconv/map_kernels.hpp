#pragma once

// Per-cell map evaluation and the two loop drivers over it. The serial
// driver is the reference; the OpenMP driver must reproduce it bit for bit,
// which holds because every cell is a pure function of its indices.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "magconv/sweep.hpp"

namespace magconv {

// Everything a cell needs, resolved once per map: the magnon branches of
// every field column laid out column by column.
struct MapProblem {
    TransducerConfig cfg;
    MapKind kind = MapKind::Reflection;
    SweepAxis x_axis;
    SweepAxis y_axis;
    std::size_t modes = 0;
    std::size_t optical_mode = 0;
    std::vector<MagnonBranch> branches; // x_axis.points * modes

    std::span<const MagnonBranch> column(int ix) const
    {
        return std::span(branches).subspan(static_cast<std::size_t>(ix) * modes, modes);
    }
};

MapProblem prepare_map(const TransducerConfig& cfg_template, const MaterialGeometry& geom,
                       std::span<const MagnetostaticMode> mode_set, const SweepAxis& field_axis,
                       const SweepAxis& freq_axis, MapKind kind, const MapOptions& options);

// Empty when the solve for this cell fails.
std::optional<cplx> evaluate_cell(const MapProblem& problem, int ix, int iy);

// Both drivers fill a map whose axes and kind come from the problem.
SpectrumMap evaluate_map_serial(const MapProblem& problem);
SpectrumMap evaluate_map_openmp(const MapProblem& problem, int threads = 0);

// True when the OpenMP driver was compiled with OpenMP; otherwise it runs the
// serial loop.
bool openmp_enabled() noexcept;

// Runs body(i) for i in [0, n). threads == 1 is a plain loop; otherwise the
// iterations are shared out by OpenMP (0 = runtime default). Exceptions
// escaping body are rethrown on the calling thread, lowest index first.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

} // namespace magconv
