#pragma once

// On-disk artifacts: map files with their validity-mask sidecar, trace CSV
// input, and all-or-nothing publication of a command's outputs.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "magconv/spectra_fit.hpp"
#include "magconv/sweep.hpp"

namespace magconv {

inline constexpr std::string_view na_token = "NA";

// "map2d.csv" -> "map2d.mask.csv"
std::filesystem::path mask_path(const std::filesystem::path& map_file);

// Header block (schema version, kind, axes, mask summary) followed by one
// row per cell in row-major order: field,freq,re,im for reflection maps and
// field,freq,efficiency for conversion maps. Poisoned cells carry "NA".
std::string map_text(const SpectrumMap& map, std::string_view mask_name = "none");
// Sidecar listing the poisoned cells as ix,iy rows.
std::string mask_text(const SpectrumMap& map, std::string_view map_name);

// Writes the map and, only if a cell is poisoned, its sidecar. A stale
// sidecar from an earlier run is removed.
void serialize_map(const SpectrumMap& map, const std::filesystem::path& path);

// Inverse of map_text/mask_text. The NA cells and the mask must agree.
SpectrumMap parse_map_text(std::string_view text, std::optional<std::string_view> mask = std::nullopt);
SpectrumMap parse_map(const std::filesystem::path& path);

// Two numeric columns (frequency in Hz, value); '#' comments and one
// non-numeric header line are skipped.
std::vector<std::pair<double, double>> read_xy_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

// Stages named outputs in memory and publishes them together: each is
// written to a temporary sibling and renamed into place. If anything fails,
// the temporaries and whatever was already renamed are removed.
class ArtifactSet {
public:
    explicit ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(std::string name, std::string contents);
    // Deleted on commit if present (stale sidecars).
    void remove_stale(std::string name);
    std::vector<std::filesystem::path> commit();

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::vector<std::string> stale_;
};

} // namespace magconv
