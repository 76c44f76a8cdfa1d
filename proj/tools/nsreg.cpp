// nsreg: scale-invariant partial-regularity diagnostics for the steady
// Navier-Stokes system, evaluated on analytic and manufactured fields.
//
// Commands: sweep, split-pressure, check-energy, detect, verify, schedule, gen.
// Exit codes: 0 success, 2 configuration/precondition error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "nsreg/config.hpp"
#include "nsreg/detector.hpp"
#include "nsreg/energy.hpp"
#include "nsreg/generators.hpp"
#include "nsreg/harness.hpp"
#include "nsreg/parallel.hpp"
#include "nsreg/pressure.hpp"
#include "nsreg/quantities.hpp"
#include "nsreg/report_io.hpp"
#include "nsreg/rng.hpp"

namespace {

using namespace nsreg;

struct CliOpts {
    std::string config_path;
    // common overrides mapped onto config keys
    std::string field, seed, samples, method, eps0, out, format, threads;
    bool reproducible = false;
    // command-specific overrides
    std::string center, r_max, levels, grid_n, lemma, alpha0, delta, per_axis, radius;
};

void add_common(CLI::App* cmd, CliOpts& o) {
    cmd->add_option("--config", o.config_path, "flat key = value config file");
    cmd->add_option("--field", o.field, "field spec, e.g. rotation:a=1");
    cmd->add_option("--seed", o.seed, "quadrature seed (u64)");
    cmd->add_option("--samples", o.samples, "Monte Carlo sample budget");
    cmd->add_option("--method", o.method, "monte_carlo | tensor_spherical");
    cmd->add_option("--eps0", o.eps0, "epsilon-regularity threshold");
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "csv | json");
    cmd->add_option("--threads", o.threads, "worker count (results are worker-count independent)");
    cmd->add_flag("--reproducible", o.reproducible, "suppress the timestamp header line");
}

RunConfig build_config(const CliOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) cfg = RunConfig::from_file(o.config_path);
    auto put = [&cfg](const char* key, const std::string& v) {
        if (!v.empty()) cfg.set(key, v);
    };
    put("field", o.field);
    put("quadrature.seed", o.seed);
    put("quadrature.samples", o.samples);
    put("quadrature.method", o.method);
    put("epsilon.eps0", o.eps0);
    put("output.path", o.out);
    put("output.format", o.format);
    put("threads", o.threads);
    if (o.reproducible) cfg.set("output.reproducible", "true");
    put("sweep.center", o.center);
    put("sweep.r_max", o.r_max);
    put("sweep.levels", o.levels);
    put("pressure.center", o.center);
    put("pressure.radius", o.radius);
    put("pressure.grid_n", o.grid_n);
    put("verify.lemma", o.lemma);
    put("verify.grid_n", o.grid_n);
    put("schedule.alpha0", o.alpha0);
    put("schedule.delta", o.delta);
    put("detect.per_axis", o.per_axis);
    put("detect.r_max", o.r_max);
    return cfg;
}

QuadratureConfig quad_from(const RunConfig& cfg) {
    QuadratureConfig q;
    const std::string method = cfg.get_string("quadrature.method", "monte_carlo");
    if (method == "monte_carlo")
        q.method = QuadMethod::monte_carlo;
    else if (method == "tensor_spherical")
        q.method = QuadMethod::tensor_spherical;
    else
        throw config_error("quadrature.method must be monte_carlo or tensor_spherical");
    q.samples = cfg.get_int("quadrature.samples", 2'000'000);
    q.seed = cfg.get_u64("quadrature.seed", 42);
    q.stratified = cfg.get_bool("quadrature.stratified", false);
    q.radial_nodes = static_cast<int>(cfg.get_int("quadrature.radial_nodes", 16));
    q.angular_nodes = static_cast<int>(cfg.get_int("quadrature.angular_nodes", 8));
    q.validate();
    return q;
}

EpsilonConfig eps_from(const RunConfig& cfg) {
    EpsilonConfig e;
    e.eps0 = cfg.get_double("epsilon.eps0", 0.01);
    e.eps1 = cfg.get_double("epsilon.eps1", 0.005);
    e.r_floor = cfg.get_double("epsilon.r_floor", 0.0);
    e.ladder_levels = static_cast<int>(cfg.get_int("epsilon.ladder_levels", 6));
    e.validate();
    return e;
}

struct OutputSink {
    std::string path;
    OutputFormat format = OutputFormat::csv;
    ReportHeader header;

    void deliver(const std::string& content) const {
        if (path.empty())
            std::fwrite(content.data(), 1, content.size(), stdout);
        else
            write_report(content, path);
    }
};

OutputSink sink_from(const RunConfig& cfg, const char* default_format) {
    OutputSink s;
    s.path = cfg.get_string("output.path", "");
    s.format = parse_format(cfg.get_string("output.format", default_format));
    s.header.reproducible = cfg.get_bool("output.reproducible", false);
    return s;
}

void apply_threads(const RunConfig& cfg) {
    set_worker_count(static_cast<int>(cfg.get_int("threads", 0)));
}

FieldTriple field_from(const RunConfig& cfg, const char* dflt) {
    return instantiate(parse_field_spec(cfg.get_string("field", dflt)));
}

int cmd_sweep(RunConfig& cfg) {
    apply_threads(cfg);
    const QuadratureConfig quad = quad_from(cfg);
    const FieldTriple t = field_from(cfg, "rotation:a=1");
    const Vec center = cfg.get_vec("sweep.center", Vec::zero(t.u.dim));
    const double r_max = cfg.get_double("sweep.r_max", t.u.domain.max_extent() / 8.0);
    const int levels = static_cast<int>(cfg.get_int("sweep.levels", 6));
    const bool with_pressure = cfg.get_bool("sweep.pressure", t.p.has_value());
    const int grid_n = static_cast<int>(cfg.get_int("sweep.grid_n", 8));
    OutputSink sink = sink_from(cfg, "csv");
    cfg.reject_unknown();
    sink.header.config_echo = cfg.echo();

    HMeanProvider h_means;
    if (with_pressure && t.p) h_means = make_decomposition_h_means(t, grid_n, quad);
    const SweepResult sweep = radius_sweep(t, center, r_max, levels, quad, h_means);
    sink.deliver(sink.format == OutputFormat::csv ? sweep_to_csv(sweep, sink.header)
                                                  : sweep_to_json(sweep, sink.header));
    return 0;
}

int cmd_split_pressure(RunConfig& cfg) {
    apply_threads(cfg);
    const QuadratureConfig quad = quad_from(cfg);
    const FieldTriple t = field_from(cfg, "taylor_green6:k=1");
    if (!t.p) throw config_error("split-pressure: the field spec has no pressure");
    const Vec center = cfg.get_vec("pressure.center", Vec::zero(t.u.dim));
    const double radius = cfg.get_double("pressure.radius", 0.5);
    DecompositionConfig dc;
    dc.grid_n = static_cast<int>(cfg.get_int("pressure.grid_n", 16));
    dc.pad = cfg.get_double("pressure.pad", 2.0);
    dc.memory_budget = cfg.get_u64("pressure.memory_budget", 2ull << 30);
    const int n_probes = static_cast<int>(cfg.get_int("pressure.probes", 20));
    const int n_mvc = static_cast<int>(cfg.get_int("pressure.mvc_pairs", 10));
    OutputSink sink = sink_from(cfg, "json");
    cfg.reject_unknown();
    sink.header.config_echo = cfg.echo();

    CutoffEta eta(center, radius);
    const PressureDecomposition dec =
        decompose_pressure(t.u, *t.p, t.f ? &*t.f : nullptr, eta, dc);

    nlohmann::ordered_json j = json_header(sink.header);
    j["schema"] = "nsreg.split_pressure.v1";
    j["meta"] = {{"grid_n", dec.meta.grid_n},
                 {"box_side", dec.meta.box_side},
                 {"pad", dec.meta.pad},
                 {"active_pairs", dec.meta.active_pairs},
                 {"active_f_comps", dec.meta.active_f_comps},
                 {"bytes", dec.meta.bytes}};
    j["h_osc"] = dec.h_osc;
    j["h_mean"] = dec.h_mean_on(Ball(center, radius), quad);

    nlohmann::ordered_json probe_rows = nlohmann::ordered_json::array();
    int made = 0;
    std::uint64_t idx = 0;
    while (made < n_probes && idx < 10000) {
        CounterStream cs(17, idx++, 0xB0B0u);
        Vec x(center.dim);
        for (int d = 0; d < center.dim; ++d)
            x[d] = center[d] + (2.0 * cs.next_double() - 1.0) * dec.region.radius;
        if ((x - center).norm() >= 0.95 * dec.region.radius) continue;
        nlohmann::ordered_json row;
        row["x"] = std::vector<double>(x.c.begin(), x.c.begin() + x.dim);
        row["p"] = t.p->eval(x);
        row["p_tilde"] = dec.p_tilde.eval(x);
        row["h"] = dec.h.eval(x);
        probe_rows.push_back(row);
        ++made;
    }
    j["probes"] = probe_rows;

    nlohmann::ordered_json mvc = nlohmann::ordered_json::array();
    QuadratureConfig mvq = quad;
    if (mvq.method == QuadMethod::monte_carlo && mvq.samples > 20000) mvq.samples = 20000;
    made = 0;
    idx = 0;
    while (made < n_mvc && idx < 10000) {
        CounterStream cs(19, idx++, 0xB1B1u);
        Vec x(center.dim);
        for (int d = 0; d < center.dim; ++d)
            x[d] = center[d] + (2.0 * cs.next_double() - 1.0) * dec.region.radius;
        const double max_s = dec.region.radius - (x - center).norm();
        if (max_s < 0.1 * dec.region.radius) continue;
        const double s = 0.5 * max_s;
        nlohmann::ordered_json row;
        row["x"] = std::vector<double>(x.c.begin(), x.c.begin() + x.dim);
        row["s"] = s;
        row["deviation"] = dec.mean_value_deviation(x, s, mvq);
        mvc.push_back(row);
        ++made;
    }
    j["mean_value_checks"] = mvc;
    sink.deliver(j.dump(2) + "\n");
    return 0;
}

int cmd_check_energy(RunConfig& cfg) {
    apply_threads(cfg);
    const QuadratureConfig quad = quad_from(cfg);
    const FieldTriple t = field_from(cfg, "taylor_green6:k=1");
    const int count = static_cast<int>(cfg.get_int("energy.count", 20));
    const double scale_min = cfg.get_double("energy.scale_min", 0.3);
    const double scale_max = cfg.get_double("energy.scale_max", 0.6);
    const double h_mean = cfg.get_double("energy.h_mean", 0.0);
    const std::uint64_t bat_seed = cfg.get_u64("energy.seed", 5);
    OutputSink sink = sink_from(cfg, "csv");
    cfg.reject_unknown();
    sink.header.config_echo = cfg.echo();

    Box inner = t.u.domain;
    for (int d = 0; d < inner.dim(); ++d) {
        inner.lo[d] += scale_max;
        inner.hi[d] -= scale_max;
    }
    const auto battery = test_function_battery(inner, count, scale_min, scale_max, bat_seed);
    std::vector<std::pair<TestFunction, EnergyResidual>> rows;
    for (const TestFunction& tf : battery)
        rows.push_back({tf, energy_residual(t.u, t.p ? &*t.p : nullptr, t.f ? &*t.f : nullptr,
                                            tf, t.p ? h_mean : 0.0, quad)});
    sink.deliver(energy_rows_to_csv(rows, sink.header));
    return 0;
}

int cmd_detect(RunConfig& cfg) {
    apply_threads(cfg);
    QuadratureConfig quad = quad_from(cfg);
    if (!cfg.has("quadrature.samples")) quad.samples = 20000; // per-ball, many balls
    const FieldTriple t = field_from(cfg, "singular_rotation:m=0.056855");
    const EpsilonConfig eps = eps_from(cfg);
    ProbeGridSpec grid;
    grid.box = t.u.domain;
    grid.per_axis = static_cast<int>(cfg.get_int("detect.per_axis", 5));
    grid.r_max = cfg.get_double("detect.r_max", 0.25);
    OutputSink sink = sink_from(cfg, "json");
    cfg.reject_unknown();
    sink.header.config_echo = cfg.echo();

    const SingularSetEstimate est = detect_singular_set(t, grid, eps, quad);
    sink.deliver(singular_set_to_json(est, sink.header));
    return 0;
}

int cmd_verify(RunConfig& cfg) {
    apply_threads(cfg);
    QuadratureConfig quad = quad_from(cfg);
    if (!cfg.has("quadrature.samples")) quad.samples = 200000;
    const LemmaId lemma = parse_lemma_id(cfg.get_string("verify.lemma", "L31_eq1135"));
    const int family_n = static_cast<int>(cfg.get_int("verify.family", 10));
    const int modes = static_cast<int>(cfg.get_int("verify.modes", 6));
    const double amplitude = cfg.get_double("verify.amplitude", 1.0);
    const int grid_n = static_cast<int>(cfg.get_int("verify.grid_n", 8));
    OutputSink sink = sink_from(cfg, "json");
    cfg.reject_unknown();
    sink.header.config_echo = cfg.echo();

    HarnessParams params;
    params.quad = quad;
    params.rhos = {0.5, 0.35, 0.25};
    params.centers = {Vec::zero(6), Vec{0.25, -0.125, 0.0625, 0.0, -0.25, 0.125}};

    std::vector<FieldTriple> family;
    for (int i = 0; i < family_n; ++i)
        family.push_back(make_random_triple(static_cast<std::uint64_t>(i + 1), modes, 6, amplitude));
    for (const FieldTriple& ft : family)
        params.h_means_per_field.push_back(make_decomposition_h_means(ft, grid_n, quad));

    const ConstantSweep sweep = sweep_constant(lemma, family, params);
    sink.deliver(sink.format == OutputFormat::csv ? constant_sweep_to_csv(sweep, sink.header)
                                                  : constant_sweep_to_json(sweep, sink.header));
    return 0;
}

int cmd_schedule(RunConfig& cfg) {
    const double alpha0 = cfg.get_double("schedule.alpha0", 0.5);
    const double delta = cfg.get_double("schedule.delta", 0.05);
    OutputSink sink = sink_from(cfg, "csv");
    cfg.reject_unknown();
    sink.header.config_echo = cfg.echo();

    const BootstrapSchedule sched = bootstrap_schedule(alpha0, delta);
    sink.deliver(sink.format == OutputFormat::csv ? schedule_to_csv(sched, sink.header)
                                                  : schedule_to_json(sched, sink.header));
    return 0;
}

int cmd_gen(RunConfig& cfg) {
    OutputSink sink = sink_from(cfg, "csv");
    cfg.reject_unknown();
    sink.deliver(field_spec_documentation());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsreg: partial-regularity diagnostics for steady Navier-Stokes fields"};
    app.require_subcommand(1);

    CliOpts o;
    CLI::App* sweep = app.add_subcommand("sweep", "dyadic radius sweep of A, E, C, D, F");
    add_common(sweep, o);
    sweep->add_option("--center", o.center, "sweep center, comma-separated");
    sweep->add_option("--r-max", o.r_max, "ladder top radius");
    sweep->add_option("--levels", o.levels, "ladder levels J");

    CLI::App* split = app.add_subcommand("split-pressure", "pressure decomposition p = p~ + h");
    add_common(split, o);
    split->add_option("--center", o.center, "decomposition center");
    split->add_option("--radius", o.radius, "decomposition radius r");
    split->add_option("--grid-n", o.grid_n, "spectral grid per axis (power of two)");

    CLI::App* energy = app.add_subcommand("check-energy", "local energy inequality battery");
    add_common(energy, o);

    CLI::App* detect = app.add_subcommand("detect", "epsilon-criterion scan + box counting");
    add_common(detect, o);
    detect->add_option("--per-axis", o.per_axis, "probe lattice points per axis");
    detect->add_option("--r-max", o.r_max, "ladder top radius at each probe");

    CLI::App* verify = app.add_subcommand("verify", "lemma best-constant sweep");
    add_common(verify, o);
    verify->add_option("--lemma", o.lemma, "lemma id (e.g. L31_eq1135, P37_decay)");
    verify->add_option("--grid-n", o.grid_n, "decomposition grid for [h] means");

    CLI::App* schedule = app.add_subcommand("schedule", "bootstrap exponent schedule");
    add_common(schedule, o);
    schedule->add_option("--alpha0", o.alpha0, "starting exponent in (0, 2]");
    schedule->add_option("--delta", o.delta, "target gap in (0, 1/10)");

    CLI::App* gen = app.add_subcommand("gen", "document available field specs");
    add_common(gen, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = build_config(o);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (split->parsed()) return cmd_split_pressure(cfg);
        if (energy->parsed()) return cmd_check_energy(cfg);
        if (detect->parsed()) return cmd_detect(cfg);
        if (verify->parsed()) return cmd_verify(cfg);
        if (schedule->parsed()) return cmd_schedule(cfg);
        if (gen->parsed()) return cmd_gen(cfg);
        std::fprintf(stderr, "no command\n");
        return 2;
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
