#include "ehlab/run.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <json.hpp>

#include "ehlab/errors.hpp"
#include "ehlab/example3.hpp"
#include "ehlab/io.hpp"
#include "ehlab/scenarios.hpp"

namespace ehlab {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& origin, const std::string& text,
                             const json::parse_error& e) {
    // e.byte is 1-based position of the offending character
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + e.what());
}

double need_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

int need_int(const json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw ConfigError("config key '" + key + "' must be an integer");
    return v.get<int>();
}

std::string need_string(const json& v, const std::string& key) {
    if (!v.is_string())
        throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> need_array(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(need_number(e, key));
    return out;
}

} // namespace

RunConfig config_from_json_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        parse_fail(origin, text, e);
    }
    if (!doc.is_object()) throw ConfigError(origin + ": config must be a JSON object");

    RunConfig cfg;
    for (const auto& [key, v] : doc.items()) {
        if (key == "scenario") cfg.scenario = need_string(v, key);
        else if (key == "connection") cfg.connection = need_string(v, key);
        else if (key == "metric") cfg.metric = need_string(v, key);
        else if (key == "out") cfg.out = need_string(v, key);
        else if (key == "seed") {
            if (v.is_number_unsigned())
                cfg.seed = v.get<std::uint64_t>();
            else if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
                cfg.seed = static_cast<std::uint64_t>(v.get<std::int64_t>());
            else
                throw ConfigError("config key 'seed' must be a nonnegative integer");
        }
        else if (key == "y0") cfg.y0 = need_number(v, key);
        else if (key == "b0") cfg.b0 = need_number(v, key);
        else if (key == "t1") cfg.t1 = need_number(v, key);
        else if (key == "horizon") cfg.horizon = need_number(v, key);
        else if (key == "radius") cfg.radius = need_number(v, key);
        else if (key == "tol_h") cfg.tol_h = need_number(v, key);
        else if (key == "probe_horizon") cfg.probe_horizon = need_number(v, key);
        else if (key == "rounds") cfg.rounds = need_int(v, key);
        else if (key == "trials") cfg.trials = need_int(v, key);
        else if (key == "grid") cfg.grid = need_int(v, key);
        else if (key == "u_grid") cfg.u_grid = need_int(v, key);
        else if (key == "k_max") cfg.k_max = need_int(v, key);
        else if (key == "starts") cfg.starts = need_int(v, key);
        else if (key == "probe_trials") cfg.probe_trials = need_int(v, key);
        else if (key == "threads") cfg.threads = need_int(v, key);
        else if (key == "x0") cfg.x0 = need_array(v, key);
        else if (key == "v0") cfg.v0 = need_array(v, key);
        else
            throw ConfigError(origin + ": unknown config key '" + key + "'");
    }
    return cfg;
}

void merge_config(RunConfig& base, const RunConfig& over) {
    if (!over.command.empty()) base.command = over.command;
    auto m = [](auto& dst, const auto& src) {
        if (src) dst = src;
    };
    m(base.scenario, over.scenario);
    m(base.connection, over.connection);
    m(base.metric, over.metric);
    m(base.out, over.out);
    m(base.seed, over.seed);
    m(base.y0, over.y0);
    m(base.b0, over.b0);
    m(base.t1, over.t1);
    m(base.horizon, over.horizon);
    m(base.radius, over.radius);
    m(base.tol_h, over.tol_h);
    m(base.probe_horizon, over.probe_horizon);
    m(base.rounds, over.rounds);
    m(base.trials, over.trials);
    m(base.grid, over.grid);
    m(base.u_grid, over.u_grid);
    m(base.k_max, over.k_max);
    m(base.starts, over.starts);
    m(base.probe_trials, over.probe_trials);
    m(base.threads, over.threads);
    m(base.x0, over.x0);
    m(base.v0, over.v0);
}

namespace {

ojson jvec(const Vec& v) {
    ojson a = ojson::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec to_vec(const std::vector<double>& xs) {
    Vec v(static_cast<int>(xs.size()));
    for (size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
    return v;
}

int deepest_chart(const BundleAtlas& atlas, const Vec& b) {
    int best = -1;
    double best_margin = 0.0;
    for (const auto& c : atlas.charts) {
        double m = c.margin_u(b);
        if (m > best_margin) {
            best_margin = m;
            best = c.id;
        }
    }
    if (best < 0)
        throw NoChartContains("no chart contains the requested base point");
    return best;
}

struct Ctx {
    RunConfig cfg;
    Scenario sc;
    std::uint64_t seed = 0;
};

Ctx make_ctx(const RunConfig& cfg) {
    if (!cfg.scenario) throw ConfigError("a scenario name is required (--scenario)");
    Ctx c;
    c.cfg = cfg;
    c.seed = cfg.seed.value_or(0);
    c.sc = build_scenario(*cfg.scenario, c.seed, cfg.k_max.value_or(12));
    return c;
}

std::string connection_name(const Ctx& c) {
    std::string name = c.cfg.connection.value_or(c.sc.default_connection);
    if (name.empty())
        throw ConfigError("scenario '" + c.sc.name + "' has no connections");
    return name;
}

Connection pick_connection(const Ctx& c) {
    return c.sc.connection(connection_name(c));
}

void emit(const Ctx& c, const std::string& text, std::ostream& out) {
    if (c.cfg.out)
        write_text_file(*c.cfg.out, text);
    else
        out << text;
}

ojson header(const Ctx& c) {
    ojson j;
    j["schema_version"] = "1";
    j["command"] = c.cfg.command;
    j["scenario"] = c.sc.name;
    j["seed"] = c.seed;
    return j;
}

// --- lift / transport -------------------------------------------------

BaseCurve base_line(const Ctx& c, Vec& b0_out) {
    const int n = c.sc.atlas->base.dim;
    Vec b0 = Vec::Constant(n, c.cfg.b0.value_or(0.0));
    Vec dir = Vec::Zero(n);
    dir[0] = 1.0;
    b0_out = b0;
    return line_curve(b0, dir, 0.0, c.cfg.t1.value_or(2.0));
}

void cmd_lift(const Ctx& c, std::ostream& out) {
    Connection conn = pick_connection(c);
    Vec b0;
    BaseCurve curve = base_line(c, b0);
    const int m = c.sc.atlas->fiber.dim;
    BundlePoint start{deepest_chart(*c.sc.atlas, b0), b0,
                      Vec::Constant(m, c.cfg.y0.value_or(1.0))};
    LiftTrace tr = horizontal_lift(conn, curve, start);
    emit(c, lift_trace_csv(*c.sc.atlas, tr), out);
}

void cmd_transport(const Ctx& c, std::ostream& out) {
    Connection conn = pick_connection(c);
    Vec b0;
    BaseCurve curve = base_line(c, b0);
    const int m = c.sc.atlas->fiber.dim;
    const int chart = deepest_chart(*c.sc.atlas, b0);

    std::vector<BundlePoint> starts;
    const int count = c.cfg.starts.value_or(5);
    if (count < 1) throw ConfigError("starts must be >= 1");
    for (int i = 0; i < count; ++i) {
        double s = (i + 0.5) / count;
        Vec f = c.sc.probe_fiber_lo +
                s * (c.sc.probe_fiber_hi - c.sc.probe_fiber_lo);
        if (c.cfg.y0) f = Vec::Constant(m, *c.cfg.y0);
        starts.push_back({chart, b0, f});
    }

    auto results = parallel_transport(conn, curve, starts);
    ojson j = header(c);
    j["connection"] = connection_name(c);
    j["b0"] = jvec(b0);
    j["t1"] = curve.t1;
    ojson rows = ojson::array();
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        ojson row;
        row["f0"] = jvec(starts[i].f);
        row["status"] = lift_status_name(r.status);
        row["t_star"] = r.t_star;
        ojson end;
        end["chart"] = r.end.chart;
        end["b"] = jvec(r.end.b);
        end["f"] = jvec(r.end.f);
        end["height"] = height_of(*c.sc.atlas, r.end);
        row["end"] = end;
        rows.push_back(row);
    }
    j["starts"] = rows;
    emit(c, dump_json(j), out);
}

// --- construction records ----------------------------------------------

void cmd_construct(const Ctx& c, std::ostream& out) {
    if (!c.sc.complete_connection)
        throw ConfigError("scenario '" + c.sc.name + "' does not support construct");
    const int rounds = c.cfg.rounds.value_or(c.sc.default_rounds);
    ConstructOptions opt;
    opt.partition.seed = c.seed;
    auto cc = build_complete_connection(c.sc.atlas, rounds, opt);

    ojson j = header(c);
    j["rounds"] = rounds;
    ojson tubes = ojson::array();
    for (const auto& t : cc.record.tubes->tubes) {
        ojson tj;
        tj["chart"] = t.chart;
        tj["radius"] = t.radius;
        tj["round"] = t.round;
        tubes.push_back(tj);
    }
    j["tubes"] = tubes;
    ojson sep;
    sep["min_distance"] = cc.record.separation.min_distance;
    sep["pairs"] = cc.record.separation.pairs;
    sep["samples_per_tube"] = cc.record.separation.samples_per_tube;
    j["separation"] = sep;
    ojson part;
    part["samples"] = cc.record.partition.samples;
    part["min_weight_sum"] = cc.record.partition.min_weight_sum;
    part["max_weight_sum_err"] = cc.record.partition.max_weight_sum_err;
    part["max_offtube_weight"] = cc.record.partition.max_offtube_weight;
    part["gap_count"] = cc.record.partition.gap_count;
    j["partition"] = part;
    j["max_agreement_residual"] = cc.record.max_agreement_residual;
    j["covered_height"] = cc.record.covered_height;
    emit(c, dump_json(j), out);
}

void cmd_metric_construct(const Ctx& c, std::ostream& out) {
    if (!c.sc.complete_metric)
        throw ConfigError("scenario '" + c.sc.name +
                          "' does not support metric-construct");
    const int rounds = c.cfg.rounds.value_or(c.sc.metric_rounds);
    MetricConstructOptions opt;
    opt.partition.seed = c.seed;
    auto cfm = build_complete_fibered_metric(c.sc.atlas, rounds, opt);

    ojson j = header(c);
    j["rounds"] = rounds;
    ojson tubes = ojson::array();
    for (const auto& t : cfm.tubes->tubes) {
        ojson tj;
        tj["chart"] = t.chart;
        tj["radius"] = t.radius;
        tj["thickness"] = t.thickness;
        tj["round"] = t.round;
        tj["crossing_distance"] = t.crossing_distance;
        tubes.push_back(tj);
    }
    j["tubes"] = tubes;
    ojson part;
    part["samples"] = cfm.record.partition.samples;
    part["min_weight_sum"] = cfm.record.partition.min_weight_sum;
    part["max_weight_sum_err"] = cfm.record.partition.max_weight_sum_err;
    part["max_offtube_weight"] = cfm.record.partition.max_offtube_weight;
    part["gap_count"] = cfm.record.partition.gap_count;
    j["partition"] = part;
    j["max_agreement_residual"] = cfm.record.max_agreement_residual;
    j["covered_height"] = cfm.record.covered_height;
    j["min_crossing_distance"] = cfm.record.min_crossing_distance;

    const int ptrials = c.cfg.probe_trials.value_or(0);
    if (ptrials > 0) {
        MetricProbeOptions mo;
        mo.trials = ptrials;
        mo.horizon = c.cfg.probe_horizon.value_or(10.0);
        mo.seed = c.seed;
        mo.threads = c.cfg.threads.value_or(0);
        auto rep = metric_completeness_probe(cfm, mo);
        ojson pj;
        pj["trials"] = rep.trials;
        pj["completed"] = rep.completed;
        pj["escapes"] = rep.escapes;
        pj["left_domain"] = rep.left_domain;
        pj["crossings"] = rep.crossings;
        pj["min_crossing_arc"] = rep.min_crossing_arc;
        pj["max_height"] = rep.max_height;
        ojson recs = ojson::array();
        for (const auto& r : rep.records) {
            ojson rj;
            rj["trial"] = r.trial;
            rj["chart"] = r.chart;
            rj["band"] = ojson::array({r.band_lo, r.band_hi});
            rj["t_enter"] = r.t_enter;
            rj["t_exit"] = r.t_exit;
            rj["arc"] = r.arc;
            recs.push_back(rj);
        }
        pj["records"] = recs;
        j["probe"] = pj;
    }
    emit(c, dump_json(j), out);
}

// --- probes --------------------------------------------------------------

void cmd_probe(const Ctx& c, std::ostream& out) {
    const std::string name = connection_name(c);
    Connection conn;
    Vec flo = c.sc.probe_fiber_lo, fhi = c.sc.probe_fiber_hi;
    if (name == "blended" && c.sc.complete_connection) {
        auto cc = c.sc.complete_connection(c.cfg.rounds.value_or(c.sc.default_rounds));
        conn = cc.connection;
        // start window: fiber points below the covered height
        auto pts = c.sc.atlas->fiber.level_set(cc.record.covered_height);
        if (!pts.empty()) {
            double lo = pts.front()[0], hi = pts.front()[0];
            for (const auto& p : pts) {
                lo = std::min(lo, p[0]);
                hi = std::max(hi, p[0]);
            }
            flo = vec1(lo);
            fhi = vec1(hi);
        }
    } else {
        conn = pick_connection(c);
    }

    ProbeOptions po;
    po.trials = c.cfg.trials.value_or(100);
    po.horizon = c.cfg.horizon.value_or(10.0);
    po.seed = c.seed;
    po.fiber_lo = flo;
    po.fiber_hi = fhi;
    po.threads = c.cfg.threads.value_or(0);
    auto rep = completeness_probe(conn, po);

    ojson j = header(c);
    j["connection"] = name;
    j["trials"] = rep.trials;
    j["horizon"] = po.horizon;
    j["completed"] = rep.completed;
    j["blowups"] = rep.blowups;
    j["left_atlas"] = rep.left_atlas;
    j["underflow"] = rep.underflow;
    j["earliest_blowup"] = rep.earliest_blowup;
    j["earliest_blowup_trial"] = rep.earliest_blowup_trial;
    ojson rows = ojson::array();
    for (const auto& o : rep.outcomes) {
        ojson row;
        row["trial"] = o.trial;
        row["chart"] = o.start_chart;
        row["b0"] = jvec(o.b0);
        row["f0"] = jvec(o.f0);
        row["status"] = lift_status_name(o.status);
        row["t_star"] = o.t_star;
        rows.push_back(row);
    }
    j["outcomes"] = rows;
    emit(c, dump_json(j), out);
}

// --- metric commands -------------------------------------------------

Metric pick_metric(const Ctx& c, std::string& name_out) {
    std::string name = c.cfg.metric.value_or(c.sc.default_metric);
    if (name.empty())
        throw ConfigError("scenario '" + c.sc.name + "' has no metrics");
    name_out = name;
    if (name == "blended" && c.sc.complete_metric)
        return c.sc.complete_metric(c.cfg.rounds.value_or(c.sc.metric_rounds)).metric;
    if (!c.sc.metric)
        throw ConfigError("scenario '" + c.sc.name + "' has no metrics");
    return c.sc.metric(name);
}

void cmd_geodesic(const Ctx& c, std::ostream& out) {
    std::string mname;
    Metric m = pick_metric(c, mname);

    Vec x0 = c.cfg.x0 ? to_vec(*c.cfg.x0) : c.sc.geo_x0;
    Vec v0 = c.cfg.v0 ? to_vec(*c.cfg.v0) : c.sc.geo_v0;
    if (x0.size() != m.dim || v0.size() != m.dim)
        throw ConfigError("x0 and v0 must have " + std::to_string(m.dim) +
                          " components");
    int chart = 0;
    std::function<double(int, const Vec&)> height;
    if (m.atlas) {
        const int n = m.base_dim;
        chart = deepest_chart(*m.atlas, x0.head(n));
        auto atlas = m.atlas;
        height = [atlas, n](int ch, const Vec& x) {
            BundlePoint p{ch, x.head(n), x.tail(x.size() - n)};
            return height_of(*atlas, p);
        };
    } else {
        height = [&m](int, const Vec& x) { return x[x.size() - 1]; };
    }

    GeodesicOptions go;
    auto tr = geodesic(m, chart, x0, v0, c.cfg.horizon.value_or(1.0), go);
    emit(c, geodesic_trace_csv(tr, m.base_dim, height), out);
}

void cmd_length(const Ctx& c, std::ostream& out) {
    if (!c.sc.surface)
        throw ConfigError("scenario '" + c.sc.name +
                          "' has no surface metric to measure");
    std::string name = c.cfg.metric.value_or(c.sc.default_metric);
    SurfaceMetric sm = c.sc.surface(name);
    auto rep = example3_curve_length(sm, c.sc.k_max);

    ojson j = header(c);
    j["metric"] = name;
    j["k_max"] = c.sc.k_max;
    ojson stages = ojson::array();
    for (const auto& s : rep.refinement.stages) {
        ojson sj;
        sj["tol"] = s.tol;
        sj["value"] = s.value;
        sj["error_estimate"] = s.error_estimate;
        sj["evaluations"] = s.evaluations;
        stages.push_back(sj);
    }
    j["stages"] = stages;
    j["converged"] = rep.refinement.converged;
    j["last_delta"] = rep.refinement.last_delta;
    j["value"] = rep.value;
    emit(c, dump_json(j), out);
}

void cmd_check_lemma(const Ctx& c, std::ostream& out) {
    if (!c.sc.has_sections)
        throw ConfigError("scenario '" + c.sc.name + "' has no section families");
    Connection conn = pick_connection(c);
    const double tol_h = c.cfg.tol_h.value_or(1e-12);
    const int grid = c.cfg.grid.value_or(101);
    auto v = check_disconnecting(conn, c.sc.sections, tol_h, c.sc.window_lo,
                                 c.sc.window_hi, grid);

    ojson j = header(c);
    j["connection"] = connection_name(c);
    j["tol_h"] = tol_h;
    j["grid"] = grid;
    j["window"] = ojson::array({v.window_lo, v.window_hi});
    j["horizontal"] = v.horizontal;
    j["max_horizontal_residual"] = v.max_horizontal_residual;
    j["disconnecting"] = v.disconnecting;
    j["min_level"] = v.min_level;
    j["max_level"] = v.max_level;
    j["double_check"] = v.horizontal && v.disconnecting;
    emit(c, dump_json(j), out);
}

void cmd_exp_triv(const Ctx& c, std::ostream& out) {
    if (!c.sc.complete_metric)
        throw ConfigError("scenario '" + c.sc.name + "' does not support exp-triv");
    const int rounds = c.cfg.rounds.value_or(c.sc.metric_rounds);
    MetricConstructOptions opt;
    opt.partition.seed = c.seed;
    auto cfm = build_complete_fibered_metric(c.sc.atlas, rounds, opt);

    const double b0 = c.cfg.b0.value_or(c.sc.exp_b0);
    const double radius = c.cfg.radius.value_or(c.sc.exp_radius);
    const int u_grid = c.cfg.u_grid.value_or(21);
    std::vector<Vec> fiber_pts;
    for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) fiber_pts.push_back(vec1(f));
    auto base_exp = [b0](double u) { return vec1(b0 + u); };

    auto rep = exp_trivialization(cfm.metric, vec1(b0), radius, u_grid, fiber_pts,
                                  base_exp, 1.0);

    ojson j = header(c);
    j["rounds"] = rounds;
    j["b0"] = b0;
    j["radius"] = radius;
    j["u_grid"] = u_grid;
    ojson fps = ojson::array();
    for (const auto& f : fiber_pts) fps.push_back(jvec(f));
    j["fiber_points"] = fps;
    j["max_commute_residual"] = rep.max_commute_residual;
    j["min_jacobian_det"] = rep.min_jacobian_det;
    j["max_slice_residual"] = rep.max_slice_residual;
    ojson rows = ojson::array();
    for (const auto& r : rep.rows) {
        ojson rj;
        rj["u"] = r.u;
        rj["f0"] = jvec(r.f0);
        rj["chart"] = r.chart;
        rj["x"] = jvec(r.x);
        rows.push_back(rj);
    }
    j["rows"] = rows;
    emit(c, dump_json(j), out);
}

} // namespace

int run_command(const RunConfig& cfg, std::ostream& out_stream,
                std::ostream& err_stream) {
    try {
        Ctx c = make_ctx(cfg);
        if (cfg.command == "lift") cmd_lift(c, out_stream);
        else if (cfg.command == "transport") cmd_transport(c, out_stream);
        else if (cfg.command == "construct") cmd_construct(c, out_stream);
        else if (cfg.command == "probe") cmd_probe(c, out_stream);
        else if (cfg.command == "geodesic") cmd_geodesic(c, out_stream);
        else if (cfg.command == "length") cmd_length(c, out_stream);
        else if (cfg.command == "metric-construct") cmd_metric_construct(c, out_stream);
        else if (cfg.command == "check-lemma") cmd_check_lemma(c, out_stream);
        else if (cfg.command == "exp-triv") cmd_exp_triv(c, out_stream);
        else throw ConfigError("unknown command '" + cfg.command + "'");
        return 0;
    } catch (const ValidationError& e) {
        err_stream << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err_stream << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err_stream << "internal error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace ehlab
