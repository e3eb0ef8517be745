// Serial reference vs OpenMP map kernel on a five-mode reflection map.
// Usage: bench_map_kernels [field_points] [freq_points] [repeats]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "magconv/map_kernels.hpp"
#include "magconv/units.hpp"

using namespace magconv;

namespace {

template <class F>
double best_seconds(int repeats, F&& run)
{
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        run();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

} // namespace

int main(int argc, char** argv)
{
    const int nx = argc > 1 ? std::atoi(argv[1]) : 201;
    const int ny = argc > 2 ? std::atoi(argv[2]) : 401;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
    if (nx < 2 || ny < 2 || repeats < 1) {
        std::fprintf(stderr, "usage: bench_map_kernels [field_points>=2] [freq_points>=2] [repeats>=1]\n");
        return 2;
    }

    TransducerConfig cfg;
    cfg.microwave = {angular(4.6e9), angular(30e6), angular(5e6)};
    cfg.magnon = {angular(4.6e9), angular(1e6)};
    cfg.optical = {angular(speed_of_light / 1550e-9), angular(6.56e6), angular(25.14e6)};
    cfg.g_ma = angular(60e6);
    cfg.g_mb = angular(1e3);
    cfg = with_sideband_detuning(cfg, angular(4.66e9));

    const MaterialGeometry geom;
    std::vector<MagnetostaticMode> modes;
    for (int n = 1; n <= 3; ++n)
        modes.push_back(make_mode(ModeFamily::MSSW, n, geom));
    for (int n = 1; n <= 2; ++n)
        modes.push_back(make_mode(ModeFamily::BVMSW, n, geom));
    const SweepAxis fields{"field", 0.074, 0.124, nx};
    const SweepAxis freqs{"freq", 4.4e9, 4.8e9, ny};

    std::printf("map %d x %d, %zu modes, openmp %s\n", nx, ny, modes.size(), openmp_enabled() ? "on" : "off");
    std::printf("%-10s %8s %12s %9s %s\n", "kind", "threads", "seconds", "speedup", "bit-identical");
    bool all_same = true;
    for (MapKind kind : {MapKind::Reflection, MapKind::ConversionAS}) {
        const MapProblem problem = prepare_map(cfg, geom, modes, fields, freqs, kind, MapOptions{});
        SpectrumMap reference;
        const double serial = best_seconds(repeats, [&] { reference = evaluate_map_serial(problem); });
        const char* name = kind == MapKind::Reflection ? "reflection" : "conv-as";
        std::printf("%-10s %8s %12.4f %9.2f %s\n", name, "serial", serial, 1.0, "reference");
        for (int threads : {1, 2, 4, 0}) {
            SpectrumMap m;
            const double t = best_seconds(repeats, [&] { m = evaluate_map_openmp(problem, threads); });
            const bool same = same_map(m, reference);
            all_same = all_same && same;
            std::printf("%-10s %8s %12.4f %9.2f %s\n", name, threads == 0 ? "auto" : std::to_string(threads).c_str(),
                        t, serial / t, same ? "yes" : "NO");
        }
    }
    return all_same ? 0 : 1;
}
