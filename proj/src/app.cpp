#include "rssvar/app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "rssvar/campaign.hpp"
#include "rssvar/error.hpp"
#include "rssvar/etap.hpp"
#include "rssvar/ingest.hpp"
#include "rssvar/random.hpp"
#include "rssvar/simulator.hpp"
#include "rssvar/surface.hpp"
#include "rssvar/validation.hpp"

namespace rssvar {

namespace {

using nlohmann::json;

json grid_json(GridSpec const& g) { return g; }

json default_grid() { return grid_json(GridSpec{}); }

/// Keys shared by every command that builds a scenario.
json scenario_defaults()
{
    return {{"mechanism", "scatter"}, {"weight", 0.5},   {"dz", 0.1},      {"spacing", 2.0}, {"diameter", 0.3},
            {"eta", 1.0},             {"c_s", 1.0},      {"c_r", 1.0},     {"np", 3.0},      {"cap", nullptr},
            {"rel_tol", 1e-8},        {"max_evaluations", 100000}};
}

template <typename T>
T get(json const& cfg, std::string const& key)
{
    auto const it = cfg.find(key);
    if (it == cfg.end()) {
        throw UsageError("missing config key '" + key + "'");
    }
    try {
        return it->get<T>();
    } catch (json::exception const&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

std::filesystem::path out_path(json const& cfg, std::string const& suffix)
{
    return get<std::string>(cfg, "out") + suffix;
}

unsigned workers_of(json const& cfg)
{
    auto const w = get<long long>(cfg, "workers");
    if (w < 1 || w > 1024) {
        throw UsageError("workers must be between 1 and 1024");
    }
    return static_cast<unsigned>(w);
}

Mechanism mechanism_of(json const& cfg)
{
    auto const name = get<std::string>(cfg, "mechanism");
    if (name != "scatter" && name != "reflect" && name != "blend") {
        throw UsageError("mechanism must be scatter, reflect or blend, not '" + name + "'");
    }
    return Mechanism::parse(name, get<double>(cfg, "weight"));
}

PropagationParams params_of(json const& cfg)
{
    PropagationParams p;
    p.c_s = get<double>(cfg, "c_s");
    p.c_r = get<double>(cfg, "c_r");
    p.n_p = get<double>(cfg, "np");
    return p;
}

QuadratureSettings quad_of(json const& cfg)
{
    QuadratureSettings q;
    q.rel_tol = get<double>(cfg, "rel_tol");
    q.max_evaluations = get<std::size_t>(cfg, "max_evaluations");
    if (!cfg.at("cap").is_null()) {
        q.alpha_cap = get<double>(cfg, "cap");
        if (!(q.alpha_cap > 0.0)) {
            throw UsageError("cap must be positive");
        }
    }
    return q;
}

GridSpec grid_of(json const& cfg, std::string const& key = "grid")
{
    GridSpec g;
    try {
        g = cfg.at(key).get<GridSpec>();
    } catch (json::exception const&) {
        throw UsageError("config key '" + key + "' is not a grid");
    }
    g.validate();
    return g;
}

/// Reflection with n_p <= 2 only converges with a finite ray cap.
void require_cap(double n_p, Mechanism const& mech, QuadratureSettings const& quad)
{
    if (mech.kind != Mechanism::Kind::scatter && n_p <= 2.0 && std::isinf(quad.alpha_cap)) {
        throw Error(ErrorKind::divergent_tail, "reflection with n_p <= 2 diverges; set --cap");
    }
}

Scenario scenario_of(json const& cfg)
{
    double const half = 0.5 * get<double>(cfg, "spacing");
    Scenario scn{LinkGeometry::standard(get<double>(cfg, "dz"), half), Person(Vec2{0.0, 0.5 * half},
                 get<double>(cfg, "diameter")), params_of(cfg), get<double>(cfg, "eta")};
    scn.validate();
    return scn;
}

void write_json(std::filesystem::path const& path, json const& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace

json default_config(std::string_view command)
{
    json c;
    if (command == "etap") {
        c = scenario_defaults();
        c["grid"] = default_grid();
        c["format"] = "csv";
        c["out"] = "etap";
    } else if (command == "sweep") {
        c = scenario_defaults();
        c["param"] = "np";
        c["values"] = {2.0, 3.0, 4.0, 5.0};
        c["mechanism"] = "reflect";
        c["line"] = {{"x_min", -2.0}, {"x_max", 2.0}, {"step", 0.01}, {"y", 0.1}};
        c["out"] = "sweep";
    } else if (command == "validate") {
        ValidationOptions const o;
        c = {{"seed", o.seed},
             {"scale", "full"},
             {"checks", json::array()},
             {"closed_form_tol", o.closed_form_tol},
             {"gap_agreement_db", o.gap_agreement_db},
             {"mc_ratio_lo", o.mc_ratio_lo},
             {"mc_ratio_hi", o.mc_ratio_hi},
             {"min_r2", o.min_r2},
             {"min_spearman", o.min_spearman},
             {"out", nullptr}};
    } else if (command == "simulate") {
        CampaignSettings const cs;
        c = {{"seed", 1},
             {"mechanism", "scatter"},
             {"weight", 0.5},
             {"eta", cs.eta},
             {"diameter", cs.diameter},
             {"c_s", 1.0},
             {"c_r", 1.0},
             {"np", 3.0},
             {"side", 6.0},
             {"height", 0.5},
             {"nodes", nullptr},
             {"margin", cs.margin},
             {"sessions", cs.sessions},
             {"dwells", cs.dwells},
             {"samples_per_dwell", cs.samples_per_dwell},
             {"sample_period", cs.sample_period},
             {"reference_db", cs.reference_db},
             {"ensemble", {{"enabled", true}, {"realizations", 200}, {"samples", 300}, {"half_size", 6.0}}},
             {"out", "sim"}};
    } else if (command == "ingest") {
        c = scenario_defaults();
        c.erase("dz");
        c.erase("spacing");
        c["diameter"] = 0.4;
        c["measurements"] = nullptr;
        c["survey"] = nullptr;
        c["grid"] = grid_json(GridSpec{-2.0, 2.0, -2.0, 2.0, 0.2});
        c["min_count"] = 10;
        c["a1"] = nullptr;
        c["a2"] = nullptr;
        c["out"] = "ingest";
    } else {
        throw UsageError("unknown command '" + std::string(command) + "'");
    }
    c["workers"] = 1;
    return c;
}

json resolve_config(std::string_view command, std::optional<std::filesystem::path> const& file,
                    json const& overrides)
{
    json cfg = default_config(command);
    auto apply = [&cfg](json const& patch, std::string const& origin) {
        if (!patch.is_object()) {
            throw UsageError(origin + ": configuration must be a JSON object");
        }
        for (auto const& [key, value] : patch.items()) {
            if (!cfg.contains(key)) {
                throw UsageError(origin + ": unknown config key '" + key + "'");
            }
            if (cfg[key].is_object() && value.is_object()) {
                for (auto const& [sub, v] : value.items()) {
                    if (!cfg[key].contains(sub)) {
                        throw UsageError(origin + ": unknown config key '" + key + "." + sub + "'");
                    }
                    cfg[key][sub] = v;
                }
            } else {
                cfg[key] = value;
            }
        }
    };
    if (file) {
        if (!std::filesystem::exists(*file)) {
            throw UsageError("config file not found: " + file->string());
        }
        json parsed;
        try {
            parsed = json::parse(read_text_file(*file));
        } catch (json::parse_error const& e) {
            throw UsageError("config file " + file->string() + " is not valid JSON: " + e.what());
        } catch (Error const& e) {
            throw UsageError("config file " + file->string() + ": " + e.what());
        }
        apply(parsed, file->string());
    }
    if (!overrides.is_null()) {
        apply(overrides, "command line");
    }
    return cfg;
}

json provenance(std::string_view command, json const& config)
{
    json c = config;
    c.erase("workers");
    return {{"version", kVersion}, {"command", command}, {"config", c}};
}

int run_etap(json const& cfg, std::ostream& log)
{
    auto const scn = scenario_of(cfg);
    auto const grid = grid_of(cfg);
    auto const mech = mechanism_of(cfg);
    auto const quad = quad_of(cfg);
    auto const format = get<std::string>(cfg, "format");
    if (format != "csv" && format != "json") {
        throw UsageError("format must be csv or json");
    }
    require_cap(scn.params.n_p, mech, quad);
    auto const es = etap_surface(scn, grid, mech, quad, workers_of(cfg));
    SurfaceGrid surface = es.db();
    surface.metadata["provenance"] = provenance("etap", cfg);
    if (es.flagged_count() > 0 || es.hole_count() > 0) {
        log << "warning: " << es.flagged_count() << " flagged and " << es.hole_count()
            << " failed cells marked invalid\n";
    }
    if (format == "json") {
        export_grid(surface, out_path(cfg, ".json"), GridFormat::json);
    } else {
        export_grid(surface, out_path(cfg, ".csv"), GridFormat::csv);
        write_json(out_path(cfg, ".json"), {{"grid", grid}, {"metadata", surface.metadata}});
    }
    log << "peak at (" << surface.metadata["peak_x"].get<double>() << ", " << surface.metadata["peak_y"].get<double>()
        << ")\n";
    return kExitOk;
}

int run_sweep(json const& cfg, std::ostream& log)
{
    auto const param = get<std::string>(cfg, "param");
    auto const values = get<std::vector<double>>(cfg, "values");
    if (values.empty()) {
        throw UsageError("sweep needs at least one value");
    }
    if (param != "np" && param != "dz") {
        throw UsageError("param must be np or dz");
    }
    auto const scn = scenario_of(cfg);
    auto const quad = quad_of(cfg);
    GridLine line;
    try {
        auto const& l = cfg.at("line");
        line = {l.at("x_min").get<double>(), l.at("x_max").get<double>(), l.at("step").get<double>(),
                l.at("y").get<double>()};
    } catch (json::exception const&) {
        throw UsageError("config key 'line' needs numeric x_min, x_max, step, y");
    }
    for (double v : values) {
        require_cap(param == "np" ? v : scn.params.n_p, param == "np" ? Mechanism::reflect() : mechanism_of(cfg), quad);
    }
    auto const sweep = param == "np" ? sweep_np(scn, line, values, quad, workers_of(cfg))
                                     : sweep_dz(scn, line, values, mechanism_of(cfg), quad, workers_of(cfg));
    json meta = {{"parameter", param},
                 {"mechanism", sweep.mechanism.name()},
                 {"global_max", sweep.global_max},
                 {"files", json::array()},
                 {"provenance", provenance("sweep", cfg)}};
    for (std::size_t k = 0; k < sweep.cuts.size(); ++k) {
        auto const file = out_path(cfg, "_" + param + format_g6(sweep.cuts[k].parameter) + ".csv");
        export_cut(sweep, k, file);
        meta["files"].push_back(file.filename().string());
    }
    write_json(out_path(cfg, ".json"), meta);
    log << "wrote " << sweep.cuts.size() << " cuts\n";
    return kExitOk;
}

int run_validate(json const& cfg, std::ostream& out, std::ostream& log)
{
    ValidationOptions o;
    o.seed = get<std::uint64_t>(cfg, "seed");
    o.workers = workers_of(cfg);
    auto const scale = get<std::string>(cfg, "scale");
    if (scale != "full" && scale != "quick") {
        throw UsageError("scale must be full or quick");
    }
    o.quick = scale == "quick";
    o.closed_form_tol = get<double>(cfg, "closed_form_tol");
    o.gap_agreement_db = get<double>(cfg, "gap_agreement_db");
    o.mc_ratio_lo = get<double>(cfg, "mc_ratio_lo");
    o.mc_ratio_hi = get<double>(cfg, "mc_ratio_hi");
    o.min_r2 = get<double>(cfg, "min_r2");
    o.min_spearman = get<double>(cfg, "min_spearman");
    auto const ids = get<std::vector<int>>(cfg, "checks");
    for (int id : ids) {
        if (id < 1 || id > 7) throw UsageError("check ids run from 1 to 7");
    }
    auto const results = run_checks(o, ids);
    json report = validation_report(o, results);
    report["version"] = kVersion;
    for (auto const& r : results) {
        log << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.detail << '\n';
    }
    std::string const text = report.dump(2) + "\n";
    if (cfg.at("out").is_null()) {
        out << text;
    } else {
        write_text_file(get<std::string>(cfg, "out"), text);
    }
    return report["passed"].get<bool>() ? kExitOk : kExitCheckFailed;
}

int run_simulate(json const& cfg, std::ostream& log)
{
    CampaignSettings cs;
    cs.seed = get<std::uint64_t>(cfg, "seed");
    cs.workers = workers_of(cfg);
    cs.eta = get<double>(cfg, "eta");
    if (!(cs.eta > 0.0)) {
        throw Error(ErrorKind::no_scatterers, "scatterer density eta must be positive");
    }
    cs.diameter = get<double>(cfg, "diameter");
    cs.mechanism = mechanism_of(cfg);
    cs.params = params_of(cfg);
    cs.margin = get<double>(cfg, "margin");
    cs.sessions = get<std::size_t>(cfg, "sessions");
    cs.dwells = get<std::size_t>(cfg, "dwells");
    cs.samples_per_dwell = get<std::size_t>(cfg, "samples_per_dwell");
    cs.sample_period = get<double>(cfg, "sample_period");
    cs.reference_db = get<double>(cfg, "reference_db");
    if (cfg.at("nodes").is_null()) {
        cs.nodes = CampaignSettings::perimeter_nodes(get<double>(cfg, "side"), get<double>(cfg, "height"));
    } else {
        cs.nodes.clear();
        try {
            for (auto const& n : cfg.at("nodes")) {
                cs.nodes.emplace_back(n.at("id").get<std::string>(),
                                      Vec3{n.at("x").get<double>(), n.at("y").get<double>(), n.at("z").get<double>()});
            }
        } catch (json::exception const&) {
            throw UsageError("nodes must be a list of {id, x, y, z}");
        }
    }
    auto const campaign = generate_campaign(cs);
    write_measurements(out_path(cfg, "_measurements.csv"), campaign.records);
    write_survey(out_path(cfg, "_survey.csv"), campaign.survey);

    json report = {{"provenance", provenance("simulate", cfg)},
                   {"records", campaign.records.size()},
                   {"links", campaign.links},
                   {"median_separation", campaign.median_separation}};
    auto const& ens = cfg.at("ensemble");
    if (ens.at("enabled").get<bool>()) {
        // regression in the normalized frame of a median-length link
        auto const dep = normalized_deployment(campaign.survey);
        EnsembleSettings es;
        es.eta = cs.eta / (dep.scale * dep.scale);
        es.diameter = cs.diameter * dep.scale;
        double const half = ens.at("half_size").get<double>();
        es.region = Region::square({0.0, 0.0}, half);
        es.realizations = ens.at("realizations").get<std::size_t>();
        es.samples = ens.at("samples").get<std::size_t>();
        es.seed = derive_seed(cs.seed, 0xE5);
        es.workers = cs.workers;
        std::vector<Vec2> positions;
        for (double y : {0.2, 0.45, 0.7, 0.95, 1.2}) {
            for (double x : {-0.6, -0.2, 0.2, 0.6}) {
                positions.push_back({x, y});
            }
        }
        auto const rep = ensemble_regression(LinkGeometry::standard(dep.dz), positions, cs.mechanism, cs.params, es);
        report["ensemble"] = rep;
        report["ensemble"]["normalized_dz"] = dep.dz;
        report["ensemble"]["normalized_diameter"] = es.diameter;
        log << "ensemble fit: a1 " << rep.a1() << ", a2 " << rep.a2() << ", R^2 " << rep.fit.r2 << '\n';
    }
    write_json(out_path(cfg, "_report.json"), report);
    log << "wrote " << campaign.records.size() << " records from " << campaign.links << " links\n";
    return kExitOk;
}

int run_ingest(json const& cfg, std::ostream& log)
{
    if (cfg.at("measurements").is_null() || cfg.at("survey").is_null()) {
        throw UsageError("ingest needs --measurements and --survey");
    }
    if (cfg.at("a1").is_null() != cfg.at("a2").is_null()) {
        throw UsageError("give both a1 and a2, or neither");
    }
    auto const grid = grid_of(cfg);
    auto const min_count = get<std::size_t>(cfg, "min_count");
    if (min_count < 2) {
        throw UsageError("min_count must be at least 2");
    }
    std::filesystem::path const meas = get<std::string>(cfg, "measurements");
    std::filesystem::path const surv = get<std::string>(cfg, "survey");
    auto const survey = load_survey(surv);
    auto const load = load_measurements(meas, survey);
    auto const binned = build_variance_surface(load.records, survey, grid, min_count);
    if (!load.rejects.empty()) {
        write_rejects(out_path(cfg, "_rejects.json"), load.rejects);
        log << load.rejects.size() << " rows rejected, see " << out_path(cfg, "_rejects.json").string() << '\n';
    }
    log << "out-of-grid fraction: " << binned.out_of_grid_fraction() << '\n';

    auto const log_etap =
        pooled_log_etap_surface(load.records, survey, grid, mechanism_of(cfg), params_of(cfg),
                                get<double>(cfg, "diameter"), get<double>(cfg, "eta"), quad_of(cfg), workers_of(cfg));
    double a1 = 0.0;
    double a2 = 0.0;
    json mapping;
    if (cfg.at("a1").is_null()) {
        auto const m = fit_variance_mapping(binned, log_etap);
        a1 = m.a1;
        a2 = m.a2;
        mapping = {{"source", "fitted"}, {"a1", a1}, {"a2", a2}, {"r2", m.fit.r2}};
    } else {
        a1 = get<double>(cfg, "a1");
        a2 = get<double>(cfg, "a2");
        mapping = {{"source", "config"}, {"a1", a1}, {"a2", a2}};
    }
    auto model = predicted_variance_surface(log_etap, a1, a2);
    auto empirical = binned.as_surface();
    auto const prov = provenance("ingest", cfg);
    empirical.metadata["provenance"] = prov;
    model.metadata["provenance"] = prov;
    export_grid(empirical, out_path(cfg, "_variance.csv"), GridFormat::csv);
    write_json(out_path(cfg, "_variance.json"), {{"grid", grid}, {"metadata", empirical.metadata}});
    export_grid(model, out_path(cfg, "_model.csv"), GridFormat::csv);
    write_json(out_path(cfg, "_model.json"), {{"grid", grid}, {"metadata", model.metadata}});

    auto const cmp = compare_surfaces(binned, model);
    json report = {{"provenance", prov},
                   {"rows", load.rows},
                   {"records", load.records.size()},
                   {"rejects", load.rejects.size()},
                   {"in_grid", binned.in_grid},
                   {"out_of_grid", binned.out_of_grid},
                   {"out_of_grid_fraction", binned.out_of_grid_fraction()},
                   {"mapping", mapping},
                   {"comparison", cmp}};
    write_json(out_path(cfg, "_comparison.json"), report);
    log << "Spearman " << cmp.spearman << " over " << cmp.joint_bins << " bins\n";
    return kExitOk;
}

int run_cli(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"RSS variance and ETAP modelling toolkit", "rssvar"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    json overrides = json::object();
    std::optional<std::filesystem::path> config_file;

    auto set = [&overrides](std::string const& pointer) {
        return [&overrides, pointer](auto const& v) { overrides[json::json_pointer(pointer)] = v; };
    };
    auto common = [&](CLI::App* sub) {
        sub->add_option_function<std::string>(
            "--config", [&config_file](std::string const& p) { config_file = p; }, "JSON config file");
        sub->add_option_function<long long>("--workers", set("/workers"), "worker threads");
    };
    auto scenario = [&](CLI::App* sub) {
        sub->add_option_function<std::string>("--mechanism", set("/mechanism"), "scatter, reflect or blend");
        sub->add_option_function<double>("--weight", set("/weight"), "scatter share of a blend");
        sub->add_option_function<double>("--np", set("/np"), "path loss exponent of reflected paths");
        sub->add_option_function<double>("--cap", set("/cap"), "finite ray length for the shadow integral [m]");
        sub->add_option_function<double>("--diameter", set("/diameter"), "person diameter [m]");
        sub->add_option_function<double>("--eta", set("/eta"), "scatterer density [1/m^2]");
        sub->add_option_function<double>("--c-s", set("/c_s"), "scattering constant");
        sub->add_option_function<double>("--c-r", set("/c_r"), "reflection constant");
        sub->add_option_function<double>("--rel-tol", set("/rel_tol"), "quadrature relative tolerance");
        sub->add_option_function<std::string>("--out", set("/out"), "output path prefix");
    };
    auto link = [&](CLI::App* sub) {
        sub->add_option_function<double>("--dz", set("/dz"), "node height above the scatterer plane [m]");
        sub->add_option_function<double>("--spacing", set("/spacing"), "TX-RX distance [m]");
    };
    auto grid = [&](CLI::App* sub) {
        sub->add_option_function<double>("--x-min", set("/grid/x_min"), "grid x_min");
        sub->add_option_function<double>("--x-max", set("/grid/x_max"), "grid x_max");
        sub->add_option_function<double>("--y-min", set("/grid/y_min"), "grid y_min");
        sub->add_option_function<double>("--y-max", set("/grid/y_max"), "grid y_max");
        sub->add_option_function<double>("--step", set("/grid/step"), "grid cell size");
    };

    auto* etap_cmd = app.add_subcommand("etap", "ETAP surface over a grid");
    common(etap_cmd);
    scenario(etap_cmd);
    link(etap_cmd);
    grid(etap_cmd);
    etap_cmd->add_option_function<std::string>("--format", set("/format"), "csv or json");

    auto* sweep_cmd = app.add_subcommand("sweep", "1-D ETAP cuts over n_p or dz");
    common(sweep_cmd);
    scenario(sweep_cmd);
    link(sweep_cmd);
    sweep_cmd->add_option_function<std::string>("--param", set("/param"), "np or dz");
    sweep_cmd->add_option_function<std::string>(
        "--values",
        [&overrides](std::string const& text) {
            json list = json::array();
            std::stringstream ss(text);
            for (std::string item; std::getline(ss, item, ',');) {
                if (item.empty()) continue;
                try {
                    std::size_t used = 0;
                    list.push_back(std::stod(item, &used));
                    if (used != item.size()) throw std::invalid_argument(item);
                } catch (std::exception const&) {
                    throw CLI::ValidationError("--values", "not a number: '" + item + "'");
                }
            }
            overrides["values"] = list;
        },
        "comma separated values");
    sweep_cmd->add_option_function<double>("--y", set("/line/y"), "y of the cut");
    sweep_cmd->add_option_function<double>("--line-step", set("/line/step"), "x spacing of the cut");

    auto* validate_cmd = app.add_subcommand("validate", "run the acceptance checks");
    common(validate_cmd);
    validate_cmd->add_option_function<std::uint64_t>("--seed", set("/seed"), "master seed");
    validate_cmd->add_option_function<std::string>("--scale", set("/scale"), "full or quick");
    validate_cmd->add_option_function<std::vector<int>>("--checks", set("/checks"), "check ids to run")
        ->delimiter(',');
    validate_cmd->add_option_function<double>("--closed-form-tol", set("/closed_form_tol"), "relative tolerance");
    validate_cmd->add_option_function<double>("--gap-agreement", set("/gap_agreement_db"), "dB");
    validate_cmd->add_option_function<double>("--min-r2", set("/min_r2"), "regression R^2 threshold");
    validate_cmd->add_option_function<double>("--min-spearman", set("/min_spearman"), "rank correlation threshold");
    validate_cmd->add_option_function<std::string>("--out", set("/out"), "report file (default stdout)");

    auto* sim_cmd = app.add_subcommand("simulate", "synthetic measurement campaign and ensemble regression");
    common(sim_cmd);
    sim_cmd->add_option_function<std::uint64_t>("--seed", set("/seed"), "master seed");
    sim_cmd->add_option_function<std::string>("--mechanism", set("/mechanism"), "scatter, reflect or blend");
    sim_cmd->add_option_function<double>("--weight", set("/weight"), "scatter share of a blend");
    sim_cmd->add_option_function<double>("--np", set("/np"), "path loss exponent");
    sim_cmd->add_option_function<double>("--eta", set("/eta"), "scatterer density [1/m^2]");
    sim_cmd->add_option_function<double>("--diameter", set("/diameter"), "person diameter [m]");
    sim_cmd->add_option_function<double>("--height", set("/height"), "node height [m]");
    sim_cmd->add_option_function<double>("--side", set("/side"), "room side length [m]");
    sim_cmd->add_option_function<std::size_t>("--sessions", set("/sessions"), "independent field draws");
    sim_cmd->add_option_function<std::size_t>("--dwells", set("/dwells"), "person positions");
    sim_cmd->add_option_function<std::size_t>("--samples", set("/samples_per_dwell"), "samples per dwell");
    sim_cmd->add_option_function<std::string>("--out", set("/out"), "output path prefix");
    sim_cmd->add_flag_function(
        "--no-ensemble", [&overrides](std::int64_t) { overrides["ensemble"]["enabled"] = false; },
        "skip the ensemble regression");

    auto* ingest_cmd = app.add_subcommand("ingest", "bin measurements and compare with the ETAP model");
    common(ingest_cmd);
    scenario(ingest_cmd);
    grid(ingest_cmd);
    ingest_cmd->add_option_function<std::string>("--measurements", set("/measurements"), "measurement CSV");
    ingest_cmd->add_option_function<std::string>("--survey", set("/survey"), "node survey CSV");
    ingest_cmd->add_option_function<long long>("--min-count", set("/min_count"), "minimum samples per bin");
    ingest_cmd->add_option_function<double>("--a1", set("/a1"), "variance slope per dB of ETAP");
    ingest_cmd->add_option_function<double>("--a2", set("/a2"), "variance intercept");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kExitOk;
    } catch (CLI::CallForVersion const&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        auto* sub = app.get_subcommands().front();
        std::string const name = sub->get_name();
        json const cfg = resolve_config(name, config_file, overrides);
        if (name == "etap") return run_etap(cfg, err);
        if (name == "sweep") return run_sweep(cfg, err);
        if (name == "validate") return run_validate(cfg, out, err);
        if (name == "simulate") return run_simulate(cfg, err);
        return run_ingest(cfg, err);
    } catch (UsageError const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (Error const& e) {
        err << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::invalid_argument:
        case ErrorKind::divergent_tail:
        case ErrorKind::no_scatterers:
        case ErrorKind::schema_mismatch:
        case ErrorKind::unknown_node_id: return kExitUsage;
        default: return kExitRuntime;
        }
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace rssvar
