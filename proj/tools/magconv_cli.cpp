// magconv: command-line front end. Data goes to files under --out; progress
// and errors go to stderr.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "magconv/artifacts.hpp"
#include "magconv/commands.hpp"
#include "magconv/config.hpp"
#include "magconv/error.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app{"Magnon-mediated microwave-to-optical conversion simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    int threads = 0;
    app.add_option("--config", config_path, "Run configuration document")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (default: $MAGCONV_OUT_DIR or .)");
    app.add_flag("--quiet", quiet, "Suppress progress messages");
    app.add_option("--threads", threads, "Worker threads, 0 = auto")->check(CLI::NonNegativeNumber);

    for (const char* name : {"simulate", "map2d", "fsrscan", "fit", "optimize", "dispersion", "report"})
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto command = magconv::parse_command(app.get_subcommands().front()->get_name());
    magconv::RunContext ctx;
    ctx.threads = threads;
    ctx.log = quiet ? nullptr : &std::cerr;
    ctx.config_dir = fs::path(config_path).parent_path();
    if (ctx.config_dir.empty())
        ctx.config_dir = ".";
    if (!out_dir.empty())
        ctx.out_dir = out_dir;
    else if (const char* env = std::getenv(magconv::out_dir_env); env && *env)
        ctx.out_dir = env;

    try {
        const magconv::RunConfig cfg = magconv::parse_config(magconv::read_text(config_path));
        for (const fs::path& p : magconv::run_command(cfg, *command, ctx))
            if (!quiet)
                std::cerr << "wrote " << p.string() << "\n";
    } catch (const magconv::Error& e) {
        std::cerr << "magconv: " << magconv::to_string(e.code()) << ": " << e.what() << "\n";
        return magconv::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "magconv: internal error: " << e.what() << "\n";
        return 70;
    }
    return 0;
}
