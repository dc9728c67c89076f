// Command-line front end: runs a scenario config and writes the result
// table plus a metadata sidecar.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "pdcoh/pdcoh.hpp"

int main(int argc, char** argv) {
    CLI::App app{"temporal coherence transfer in parametric down-conversion"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "execute a scenario config");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    run_cmd->add_option("config", config_path, "scenario config file")->required();
    run_cmd->add_option("--seed", seed, "override the config seed");
    run_cmd->add_option("--out", out, "override the output table path");
    run_cmd->add_option("--threads", threads, "worker thread count (0 = auto)");

    CLI11_PARSE(app, argc, argv);

    try {
        pdcoh::ScenarioConfig cfg = pdcoh::ScenarioConfig::parse_file(config_path);
        pdcoh::RunReport report = pdcoh::run(cfg, out, seed, threads);
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << report.rows.size() << " rows written\n";
        return 0;
    } catch (const pdcoh::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical/domain error: " << e.what() << "\n";
        return 3;
    } catch (const pdcoh::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const pdcoh::unsupported_limit& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    }
}
