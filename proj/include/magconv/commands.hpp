#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "magconv/config.hpp"

namespace magconv {

enum class Command { Simulate, Map2d, FsrScan, Fit, Optimize, Dispersion, Report };

std::string_view to_string(Command c) noexcept;
std::optional<Command> parse_command(std::string_view s) noexcept;

struct RunContext {
    std::filesystem::path out_dir = ".";
    std::filesystem::path config_dir = "."; // base for relative fit inputs
    int threads = 0;                        // 0 = OpenMP default
    std::ostream* log = nullptr;            // progress lines; null for quiet
};

// Runs one command and publishes its artifacts into ctx.out_dir, returning
// their paths. All outputs are computed before anything is written; on
// failure nothing new is left behind. Errors keep their class and gain the
// command name as context.
std::vector<std::filesystem::path> run_command(const RunConfig& cfg, Command command, const RunContext& ctx = {});

// Output-directory override read by the CLI when --out is absent.
inline constexpr const char* out_dir_env = "MAGCONV_OUT_DIR";

} // namespace magconv
