#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "magnon/commands.hpp"
#include "magnon/config.hpp"
#include "magnon/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitScience = 1;
constexpr int kExitUsage = 2;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magnon toolkit: ferromagnetic validation, self-consistent spin waves, exact oracle, magnon dynamics"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::string format = "json";
    int threads = 1;
    int sectors_n = 0;

    app.add_option("--config", config_path, "run configuration file (key = value)");
    app.add_option("--out", out_dir, "output directory (default: $MAGNON_OUT_DIR or .)");
    app.add_option("--format", format, "artifact format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);

    auto* validate = app.add_subcommand("validate", "check the ferromagnetic regime conditions");
    auto* solve = app.add_subcommand("solve", "solve the self-consistency equation for the magnetization");
    auto* oracle = app.add_subcommand("oracle", "exact finite-S convergence study");
    auto* dynamics = app.add_subcommand("dynamics", "evolve a Gaussian magnon state");
    auto* sectors = app.add_subcommand("sectors", "print the total-spin sector table for n copies");
    sectors->add_option("--n", sectors_n, "copy count n = 2S+1 (overrides sectors.n)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    magnon::cli::OutputOptions out;
    if (!out_dir.empty()) out.dir = out_dir;
    else if (const char* env = std::getenv("MAGNON_OUT_DIR"); env && *env) out.dir = env;
    out.format = format == "csv" ? magnon::cli::Format::Csv : magnon::cli::Format::Json;
    out.threads = threads;

    try {
        if (sectors->parsed() && config_path.empty()) {
            if (sectors_n == 0) throw magnon::InputError("sectors needs --n or --config");
            return magnon::cli::cmd_sectors(sectors_n, out);
        }
        if (config_path.empty()) throw magnon::InputError("--config is required");
        const magnon::RunConfig cfg = magnon::load_run_config(config_path);
        if (validate->parsed()) return magnon::cli::cmd_validate(cfg, out);
        if (solve->parsed()) return magnon::cli::cmd_solve(cfg, out);
        if (oracle->parsed()) return magnon::cli::cmd_oracle(cfg, out);
        if (dynamics->parsed()) return magnon::cli::cmd_dynamics(cfg, out);
        std::map<std::string, std::string> effective = cfg.effective;
        if (sectors_n != 0) effective["sectors.n"] = std::to_string(sectors_n);
        return magnon::cli::cmd_sectors(sectors_n != 0 ? sectors_n : cfg.sectors_n, out, effective);
    } catch (const magnon::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const magnon::RegimeError& e) {
        std::cerr << "regime failure: " << e.what() << '\n';
        return kExitScience;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
