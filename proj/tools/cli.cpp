// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rough/billiard2d.hpp"
#include "rough/diskwall.hpp"
#include "rough/error.hpp"
#include "rough/geometry.hpp"
#include "rough/kernels.hpp"
#include "rough/parallel.hpp"
#include "rough/version.hpp"

namespace rough::cli {

namespace {

using nlohmann::json;

constexpr const char* tool_name = "rough-billiards";

std::string num(double v) { return fmt::format("{:.17g}", v); }

json read_json_arg(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') return json::parse(arg);
    std::ifstream in(arg);
    if (!in) throw Error(ErrorKind::InvalidParam, "cannot open wall spec '" + arg + "'");
    return json::parse(in);
}

WallSpec load_wall(const std::string& arg) { return wall_spec_from_json(read_json_arg(arg)); }

struct Output {
    std::ostream* stream;
    std::unique_ptr<std::ofstream> file;

    Output(const std::string& path, std::ostream& fallback) : stream(&fallback) {
        if (path.empty() || path == "-") return;
        file = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file) throw Error(ErrorKind::InvalidParam, "cannot write '" + path + "'");
        stream = file.get();
    }
    std::ostream& operator*() { return *stream; }
};

json meta_block(const json& config, std::optional<std::uint64_t> seed) {
    json m = {{"tool", tool_name}, {"version", version}, {"config_hash", config_hash(config)}};
    m["seed"] = seed ? json(*seed) : json(nullptr);
    return m;
}

void write_csv_meta(std::ostream& os, const json& config, std::optional<std::uint64_t> seed) {
    os << "# tool=" << tool_name << " version=" << version << " seed=" << (seed ? std::to_string(*seed) : "none")
       << " config_hash=" << config_hash(config) << '\n';
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double x = std::stod(item, &used);
        if (used != item.size()) throw Error(ErrorKind::InvalidParam, "bad number '" + item + "'");
        v.push_back(x);
    }
    if (v.empty()) throw Error(ErrorKind::InvalidParam, "empty list");
    return v;
}

// Options shared by several subcommands.
struct Options {
    std::string wall;
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    double theta = 1.0;
    double psi = 1.5707963267948966;
    double m = 1.0;
    double J = 1.0;
    double eps = 0.01;
    bool cyl = false;
    std::string family;
    std::string kernel;
    double r = 1.0;
    double groove = 1.5707963267948966;
    double xi = 1.0471975511965976;
    std::optional<double> params;
    int theta_grid = 16;
    double x0 = 0.0;
    double periods = 1.0;
    int samples_per_period = 64;
    std::string eps_list = "0.1,0.01,0.001";
    double L = 10.0;
    double theta0 = 1.5707963267948966;
    std::size_t runs = 1000;
    std::size_t max_bounces = 100000;
};

int cmd_wall(const Options& o, std::ostream& fallback) {
    const WallSpec spec = load_wall(o.wall);
    const Wall wall = build_wall(spec);
    const json config = {{"command", "wall"}, {"wall", to_json(spec)}, {"format", o.format},
                         {"x0", o.x0}, {"periods", o.periods}, {"samples_per_period", o.samples_per_period}};
    Output out(o.out, fallback);
    if (o.format == "csv") {
        write_csv_meta(*out, config, std::nullopt);
        *out << "x,y\n";
        for (const Vec2& p : wall.polyline(o.x0, o.x0 + o.periods * wall.period(), o.samples_per_period)) {
            *out << num(p.x) << ',' << num(p.y) << '\n';
        }
        return ExitCode::ok;
    }
    json segs = json::array();
    for (const Segment& s : wall.segments(0)) segs.push_back(to_json(s));
    const json doc = {{"meta", meta_block(config, std::nullopt)},
                      {"wall", to_json(spec)},
                      {"period", wall.period()},
                      {"segments", segs}};
    *out << doc.dump(2) << '\n';
    return ExitCode::ok;
}

int cmd_reflect(const Options& o, std::ostream& fallback) {
    WallSpec spec = load_wall(o.wall);
    spec.datum = Datum::half_plane;
    const Wall wall = build_wall(spec);
    const json config = {{"command", "reflect"}, {"wall", to_json(spec)}, {"theta", o.theta},
                         {"samples", o.samples}, {"seed", o.seed}, {"max_bounces", o.max_bounces}};
    std::vector<ReflState> in(o.samples);
    std::vector<MacroResult> res(o.samples);
    Limits lim;
    lim.max_bounces = o.max_bounces;
    parallel_for(o.samples, [&](std::size_t i) {
        Stream rng(o.seed, i);
        in[i] = {rng.uniform() * wall.period(), o.theta};
        res[i] = macro_reflection(wall, in[i], lim);
    });
    Output out(o.out, fallback);
    write_csv_meta(*out, config, o.seed);
    *out << "x,theta,x_out,theta_out,bounces,status\n";
    for (std::size_t i = 0; i < o.samples; ++i) {
        const bool ok = res[i].status == Status::returned;
        *out << num(in[i].x) << ',' << num(in[i].theta) << ',' << (ok ? num(res[i].out.x) : "nan") << ','
             << (ok ? num(res[i].out.theta) : "nan") << ',' << res[i].bounces << ',' << status_name(res[i].status)
             << '\n';
    }
    return ExitCode::ok;
}

Kernel kernel_from_family(const Options& o) {
    const std::string& f = o.family;
    if (f == "rect" || f == "rect_teeth") return Kernel::rect(o.params.value_or(o.r));
    if (f == "tri" || f == "tri_teeth") return Kernel::tri(o.params.value_or(o.groove));
    if (f == "circ" || f == "circ_arcs") return Kernel::circ(o.params.value_or(o.xi));
    return Kernel::parse(f);
}

int cmd_kernel(const Options& o, std::ostream& fallback) {
    const Kernel k = kernel_from_family(o);
    if (!k.atomic()) throw Error(ErrorKind::InvalidParam, "kernel " + k.name() + " has no atoms");
    if (o.theta_grid < 1) throw Error(ErrorKind::InvalidParam, "theta grid must be positive");
    const json config = {{"command", "kernel"}, {"kernel", k.name()}, {"theta_grid", o.theta_grid}};
    std::ostringstream body;
    for (int i = 0; i < o.theta_grid; ++i) {
        const double theta = (i + 0.5) * std::numbers::pi / o.theta_grid;
        for (const Atom& a : k.atoms(theta)) body << num(theta) << ',' << num(a.angle) << ',' << num(a.prob) << '\n';
    }
    Output out(o.out, fallback);
    write_csv_meta(*out, config, std::nullopt);
    *out << "theta,atom_angle,atom_prob\n" << body.str();
    return ExitCode::ok;
}

int cmd_collide(const Options& o, std::ostream& fallback) {
    WallSpec spec = load_wall(o.wall);
    spec.scale = o.eps;
    spec.datum = Datum::disk_wall;
    const Wall wall = build_wall(spec);
    const DiskParams params = DiskParams::from_rule(o.m, o.J, o.eps);
    const json config = {{"command", "collide"}, {"wall", to_json(spec)}, {"m", o.m}, {"J", o.J},
                         {"eps", o.eps}, {"theta", o.theta}, {"psi", o.psi}, {"samples", o.samples},
                         {"seed", o.seed}, {"cyl", o.cyl}, {"max_bounces", o.max_bounces}};
    struct Row {
        TiltedState in;
        TiltedState out;
        bool ok = false;
        std::size_t bounces = 0;
        Status status = Status::singular;
    };
    std::vector<Row> rows(o.samples);
    const Limits lim{o.max_bounces, 1e4};
    parallel_for(o.samples, [&](std::size_t i) {
        Stream rng(o.seed, i);
        const ConfigState s = random_incoming(wall, params, o.theta, o.psi, rng);
        Row& row = rows[i];
        row.in = to_tilted(s, params);
        const CollisionResult c = o.cyl ? collide_cyl(wall, params, s, lim) : collide(wall, params, s, lim);
        row.bounces = c.bounces;
        row.status = c.status;
        if (c.status != Status::returned) return;
        try {
            row.out = to_tilted(c.out, params);
            row.ok = true;
        } catch (const Error&) {
            row.status = Status::singular;
        }
    });
    Output out(o.out, fallback);
    write_csv_meta(*out, config, o.seed);
    *out << "y1,y3,theta,psi,y1',y3',theta',psi',bounces,status\n";
    for (const Row& r : rows) {
        *out << num(r.in.y1) << ',' << num(r.in.y3) << ',' << num(r.in.theta) << ',' << num(r.in.psi);
        if (r.ok) {
            *out << ',' << num(r.out.y1) << ',' << num(r.out.y3) << ',' << num(r.out.theta) << ',' << num(r.out.psi);
        } else {
            *out << ",nan,nan,nan,nan";
        }
        *out << ',' << r.bounces << ',' << status_name(r.status) << '\n';
    }
    return ExitCode::ok;
}

int cmd_converge(const Options& o, std::ostream& fallback) {
    StudyConfig cfg;
    cfg.spec = load_wall(o.wall);
    cfg.m = o.m;
    cfg.J = o.J;
    cfg.eps_list = parse_list(o.eps_list);
    cfg.theta = o.theta;
    cfg.psi = o.psi;
    cfg.n = o.samples;
    cfg.seed = o.seed;
    cfg.limits.max_bounces = o.max_bounces;
    WallSpec shown = cfg.spec;
    shown.scale = 1.0;
    const json config = {{"command", "converge"}, {"wall", to_json(shown)}, {"m", o.m}, {"J", o.J},
                         {"eps_list", cfg.eps_list}, {"theta", o.theta}, {"psi", o.psi}, {"samples", o.samples},
                         {"seed", o.seed}, {"max_bounces", o.max_bounces}};
    const StudyResult res = convergence_study(cfg);
    json doc = to_json(res);
    doc["meta"] = meta_block(config, o.seed);
    Output out(o.out, fallback);
    *out << doc.dump(2) << '\n';
    return ExitCode::ok;
}

int cmd_knudsen(const Options& o, std::ostream& fallback) {
    const Kernel k = Kernel::parse(o.kernel);
    if (!(o.L >= 0.0)) throw Error(ErrorKind::InvalidParam, "L must be non-negative");
    const json config = {{"command", "knudsen"}, {"kernel", k.name()}, {"L", o.L}, {"theta0", o.theta0},
                         {"runs", o.runs}, {"seed", o.seed}, {"max_bounces", o.max_bounces}};
    std::vector<KnudsenResult> res(o.runs);
    parallel_for(o.runs, [&](std::size_t i) {
        Stream rng(o.seed, i);
        res[i] = knudsen_exit_time(k, o.L, rng, o.theta0, o.max_bounces);
    });
    Output out(o.out, fallback);
    write_csv_meta(*out, config, o.seed);
    *out << "run,time,bounces,status\n";
    for (std::size_t i = 0; i < o.runs; ++i) {
        *out << i << ',' << num(res[i].time) << ',' << res[i].bounces << ',' << status_name(res[i].status) << '\n';
    }
    return ExitCode::ok;
}

int cmd_verify(const Options& o, std::ostream& fallback) {
    const json config = {{"command", "verify"}, {"seed", o.seed}};
    const std::vector<Report> reports = verify_suite(o.seed);
    json tests = json::array();
    bool pass = true;
    for (const Report& r : reports) {
        tests.push_back(to_json(r));
        pass = pass && r.pass;
    }
    const json doc = {{"meta", meta_block(config, o.seed)}, {"tests", tests}, {"verdict", pass ? "pass" : "fail"}};
    Output out(o.out, fallback);
    *out << doc.dump(2) << '\n';
    return pass ? ExitCode::ok : ExitCode::verify_failed;
}

}  // namespace

std::string config_hash(const json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Billiards on rough walls: reflection laws, kernels and disk collisions", tool_name};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    Options o;

    const auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output file (default stdout)"); };
    const auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "RNG seed")->required(); };

    auto* wall = app.add_subcommand("wall", "Emit the wall's period geometry (json) or a sampled polyline (csv)");
    wall->add_option("--wall", o.wall, "Wall spec JSON file or inline JSON")->required();
    wall->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    wall->add_option("--x0", o.x0, "Polyline start");
    wall->add_option("--periods", o.periods, "Polyline length in periods")->check(CLI::PositiveNumber);
    wall->add_option("--samples-per-period", o.samples_per_period, "Polyline resolution")->check(CLI::PositiveNumber);
    add_out(wall);

    auto* reflect = app.add_subcommand("reflect", "Macro-reflections with x uniform over one period");
    reflect->add_option("--wall", o.wall, "Wall spec JSON file or inline JSON")->required();
    reflect->add_option("--theta", o.theta, "Incidence angle in (0, pi)")->required();
    reflect->add_option("--samples", o.samples, "Number of samples");
    reflect->add_option("--max-bounces", o.max_bounces, "Bounce cap per trajectory");
    add_seed(reflect);
    add_out(reflect);

    auto* kernel = app.add_subcommand("kernel", "Atoms of an atomic kernel on a theta grid");
    kernel->add_option("--family", o.family, "rect, tri, specular, retro (circ, lambertian have no atoms)")->required();
    kernel->add_option("--r", o.r, "rect: tooth height / crevice width");
    kernel->add_option("--psi", o.groove, "tri: groove angle");
    kernel->add_option("--xi", o.xi, "circ: arc half-angle (non-atomic, rejected)");
    kernel->add_option("--params", o.params, "Family parameter (same as --r or --psi)");
    kernel->add_option("--theta-grid", o.theta_grid, "Grid size K, theta_i = (i + 1/2) pi / K");
    add_out(kernel);

    auto* collide = app.add_subcommand("collide", "Disk-wall collisions in tilted coordinates");
    collide->add_option("--wall", o.wall, "Wall spec JSON file or inline JSON")->required();
    collide->add_option("--m", o.m, "Disk mass");
    collide->add_option("--J", o.J, "Moment of inertia");
    collide->add_option("--eps", o.eps, "Roughness scale");
    collide->add_option("--theta", o.theta, "Tilted theta in (0, pi)")->required();
    collide->add_option("--psi", o.psi, "Tilted psi in (0, pi)")->required();
    collide->add_option("--samples", o.samples, "Number of samples");
    collide->add_option("--max-bounces", o.max_bounces, "Bounce cap per collision");
    collide->add_flag("--cyl", o.cyl, "Use the cylindrical collision law");
    add_seed(collide);
    add_out(collide);

    auto* converge = app.add_subcommand("converge", "Correspondence study along a decreasing eps ladder");
    converge->add_option("--wall", o.wall, "Wall spec JSON file or inline JSON")->required();
    converge->add_option("--eps-list", o.eps_list, "Comma-separated, strictly decreasing");
    converge->add_option("--m", o.m, "Disk mass");
    converge->add_option("--J", o.J, "Moment of inertia");
    converge->add_option("--theta", o.theta, "Tilted theta in (0, pi)");
    converge->add_option("--psi", o.psi, "Tilted psi in (0, pi)");
    converge->add_option("--samples", o.samples, "Samples per eps");
    converge->add_option("--max-bounces", o.max_bounces, "Bounce cap per collision");
    add_seed(converge);
    add_out(converge);

    auto* knudsen = app.add_subcommand("knudsen", "Exit times from a planar channel of length L");
    knudsen->add_option("--kernel", o.kernel, "specular, retro, lambertian, rect:R, tri:PSI, circ:XI")->required();
    knudsen->add_option("--L", o.L, "Channel length")->required();
    knudsen->add_option("--runs", o.runs, "Number of runs");
    knudsen->add_option("--theta0", o.theta0, "Entry incidence angle");
    knudsen->add_option("--max-bounces", o.max_bounces, "Bounce cap per run");
    add_seed(knudsen);
    add_out(knudsen);

    auto* verify = app.add_subcommand("verify", "Run the reduced verification suite");
    add_seed(verify);
    add_out(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::ok;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return ExitCode::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return ExitCode::usage;
    }

    try {
        if (wall->parsed()) return cmd_wall(o, out);
        if (reflect->parsed()) return cmd_reflect(o, out);
        if (kernel->parsed()) return cmd_kernel(o, out);
        if (collide->parsed()) return cmd_collide(o, out);
        if (converge->parsed()) return cmd_converge(o, out);
        if (knudsen->parsed()) return cmd_knudsen(o, out);
        if (verify->parsed()) return cmd_verify(o, out);
    } catch (const Error& e) {
        err << e.what() << '\n';
        return ExitCode::runtime;
    } catch (const json::exception& e) {
        err << "InvalidParam: " << e.what() << '\n';
        return ExitCode::runtime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::runtime;
    }
    err << app.help();
    return ExitCode::usage;
}

}  // namespace rough::cli
