#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehlab/errors.hpp"
#include "ehlab/io.hpp"
#include "ehlab/run.hpp"
#include "ehlab/scenarios.hpp"

namespace {

struct FlagSet {
    std::string config_path;
    std::string scenario, connection, metric, out;
    std::uint64_t seed = 0;
    double y0 = 0, b0 = 0, t1 = 0, horizon = 0, radius = 0, tol_h = 0,
           probe_horizon = 0;
    int rounds = 0, trials = 0, grid = 0, u_grid = 0, k_max = 0, starts = 0,
        probe_trials = 0, threads = 0;
    std::vector<double> x0, v0;
};

// only flags the user actually passed override the config document
ehlab::RunConfig overrides_from(const CLI::App& cmd, const FlagSet& f) {
    ehlab::RunConfig o;
    auto got = [&cmd](const std::string& name) {
        const CLI::Option* o = cmd.get_option_no_throw(name);
        return o && o->count() > 0;
    };
    if (got("--scenario")) o.scenario = f.scenario;
    if (got("--connection")) o.connection = f.connection;
    if (got("--metric")) o.metric = f.metric;
    if (got("--out")) o.out = f.out;
    if (got("--seed")) o.seed = f.seed;
    if (got("--y0")) o.y0 = f.y0;
    if (got("--b0")) o.b0 = f.b0;
    if (got("--t1")) o.t1 = f.t1;
    if (got("--horizon")) o.horizon = f.horizon;
    if (got("--radius")) o.radius = f.radius;
    if (got("--tol-h")) o.tol_h = f.tol_h;
    if (got("--probe-horizon")) o.probe_horizon = f.probe_horizon;
    if (got("--rounds")) o.rounds = f.rounds;
    if (got("--trials")) o.trials = f.trials;
    if (got("--grid")) o.grid = f.grid;
    if (got("--u-grid")) o.u_grid = f.u_grid;
    if (got("--k-max")) o.k_max = f.k_max;
    if (got("--starts")) o.starts = f.starts;
    if (got("--probe-trials")) o.probe_trials = f.probe_trials;
    if (got("--threads")) o.threads = f.threads;
    if (got("--x0")) o.x0 = f.x0;
    if (got("--v0")) o.v0 = f.v0;
    return o;
}

void add_common(CLI::App* cmd, FlagSet& f) {
    std::string names;
    for (const auto& n : ehlab::scenario_names()) {
        if (!names.empty()) names += ", ";
        names += n;
    }
    cmd->add_option("--scenario", f.scenario, "scenario name (" + names + ")");
    cmd->add_option("--config", f.config_path, "JSON config document");
    cmd->add_option("--seed", f.seed, "master random seed (default 0)");
    cmd->add_option("--out", f.out, "artifact path (default stdout)");
    cmd->add_option("--connection", f.connection, "named connection");
    cmd->add_option("--metric", f.metric, "named metric");
    cmd->add_option("--threads", f.threads,
                    "probe worker cap (also capped by EHRESMANN_LAB_THREADS)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for complete connections and fibered "
                 "complete metrics on fiber bundles"};
    app.require_subcommand(1);

    FlagSet f;
    struct Sub {
        CLI::App* cmd;
        const char* name;
    };
    std::vector<Sub> subs;
    auto sub = [&](const char* name, const char* desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, f);
        subs.push_back({cmd, name});
        return cmd;
    };

    CLI::App* lift = sub("lift", "integrate a horizontal lift, emit CSV");
    lift->add_option("--y0", f.y0, "start fiber coordinate (default 1)");
    lift->add_option("--b0", f.b0, "start base coordinate (default 0)");
    lift->add_option("--t1", f.t1, "curve end time (default 2)");

    CLI::App* transport = sub("transport", "parallel transport a fiber sample");
    transport->add_option("--b0", f.b0, "start base coordinate");
    transport->add_option("--t1", f.t1, "curve end time");
    transport->add_option("--starts", f.starts, "number of fiber starts (default 5)");
    transport->add_option("--y0", f.y0, "fix every start to this fiber value");

    CLI::App* construct = sub("construct", "run the tube/partition/blend "
                                           "construction, emit JSON");
    construct->add_option("--rounds", f.rounds, "tube rounds per chart");

    CLI::App* probe = sub("probe", "randomized completeness probe, emit JSON");
    probe->add_option("--trials", f.trials, "number of trials (default 100)");
    probe->add_option("--horizon", f.horizon, "curve horizon (default 10)");
    probe->add_option("--rounds", f.rounds, "rounds for the blended connection");

    CLI::App* geodesic = sub("geodesic", "shoot one geodesic, emit CSV");
    geodesic->add_option("--x0", f.x0, "start position (comma separated)")
        ->delimiter(',');
    geodesic->add_option("--v0", f.v0, "start velocity (comma separated)")
        ->delimiter(',');
    geodesic->add_option("--horizon", f.horizon, "integration time (default 1)");
    geodesic->add_option("--rounds", f.rounds, "rounds for the blended metric");

    CLI::App* length = sub("length", "descent-curve length refinement, emit JSON");
    length->add_option("--k-max", f.k_max, "hill-chain truncation (default 12)");

    CLI::App* mc = sub("metric-construct", "build the blended complete fibered "
                                           "metric, emit JSON");
    mc->add_option("--rounds", f.rounds, "band rounds per chart");
    mc->add_option("--probe-trials", f.probe_trials,
                   "geodesic probe trials (default 0 = skip)");
    mc->add_option("--probe-horizon", f.probe_horizon,
                   "geodesic probe horizon (default 10)");

    CLI::App* lemma = sub("check-lemma", "disconnecting-family check, emit JSON");
    lemma->add_option("--tol-h", f.tol_h, "horizontality tolerance (default 1e-12)");
    lemma->add_option("--grid", f.grid, "base grid points (default 101)");

    CLI::App* et = sub("exp-triv", "exponential trivialization table, emit JSON");
    et->add_option("--b0", f.b0, "center base point");
    et->add_option("--radius", f.radius, "base ball radius");
    et->add_option("--u-grid", f.u_grid, "radial grid points (default 21)");
    et->add_option("--rounds", f.rounds, "rounds for the blended metric");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        // CLI11 help paths return 0; anything else is a validation failure
        return code == 0 ? 0 : 2;
    }

    const CLI::App* active = nullptr;
    std::string command;
    for (const auto& s : subs)
        if (s.cmd->parsed()) {
            active = s.cmd;
            command = s.name;
        }

    ehlab::RunConfig cfg;
    try {
        if (active->count("--config") > 0)
            cfg = ehlab::config_from_json_text(ehlab::read_text_file(f.config_path),
                                               f.config_path);
        ehlab::RunConfig flags = overrides_from(*active, f);
        ehlab::merge_config(cfg, flags);
    } catch (const ehlab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    cfg.command = command;
    return ehlab::run_command(cfg, std::cout, std::cerr);
}
