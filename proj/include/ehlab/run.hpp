#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ehlab {

// Everything a subcommand can consume. Unset fields fall back to the
// command default or the scenario default; a JSON config document fills
// fields first and explicit flags override it.
struct RunConfig {
    std::string command;
    std::optional<std::string> scenario;
    std::optional<std::string> connection;
    std::optional<std::string> metric;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;

    std::optional<double> y0, b0, t1, horizon, radius, tol_h, probe_horizon;
    std::optional<int> rounds, trials, grid, u_grid, k_max, starts, probe_trials,
        threads;
    std::optional<std::vector<double>> x0, v0;
};

// Parses a config document; throws ConfigError with origin:line:column on
// malformed JSON and on any unknown key.
RunConfig config_from_json_text(const std::string& text, const std::string& origin);

// fields set in `over` replace those in `base`
void merge_config(RunConfig& base, const RunConfig& over);

// Dispatches cfg.command, writes the artifact to cfg.out (or out_stream),
// and maps exceptions to exit codes: 0 success, 2 validation, 3 numerical.
// A lift that ends in blow-up is a reported outcome, exit 0.
int run_command(const RunConfig& cfg, std::ostream& out_stream,
                std::ostream& err_stream);

} // namespace ehlab
