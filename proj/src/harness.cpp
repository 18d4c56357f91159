#include "fracms/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fracms/error.hpp"

namespace fracms {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kSchemeNames{"fine", "cem", "enriched", "partial", "explicit"};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ParseError("config: '" + where + "' must be an object", 0);
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ParseError("config: unknown key '" + k + "' in " + where, 0);
}

std::string resolve(const std::string& path, const std::string& base) {
    if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base) / path).string();
}

Rect rect_from(const json& j) {
    if (!j.is_array() || j.size() != 4) throw ParseError("config: rectangles are [x0, x1, y0, y1]", 0);
    return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json rect_to(const Rect& r) { return json::array({r.x0, r.x1, r.y0, r.y1}); }

std::string csv_value(const std::optional<ErrorSeries>& e, bool l2, int k) {
    if (!e || k >= e->size()) return "nan";
    return format_double(l2 ? e->l2[k] : e->energy[k]);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// --- Config -----------------------------------------------------------------

int ExperimentConfig::steps() const { return integral_ratio(T, dt, "T / dt"); }

void ExperimentConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    steps();
    integral_ratio(dt, dt_fine, "dt / dt_fine");
    if (coarse_n < 2 || refine < 2) throw InvalidArgument("coarse_n and refine must be >= 2");
    if (spaces.layers < 0 || spaces.L < 1 || spaces.J < 0) throw InvalidArgument("invalid space parameters");
    for (const auto& s : schemes)
        if (!kSchemeNames.count(s)) throw InvalidArgument("unknown scheme '" + s + "'");
}

ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t end = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + end, '\n'));
        throw ParseError(std::string("config: ") + e.what(), line);
    }
    check_keys(j, {"alpha", "T", "dt", "dt_fine", "coarse_n", "refine", "spaces", "field", "forcing", "schemes",
                   "output_dir", "basis_cache"},
               "config");
    ExperimentConfig c;
    try {
        c.alpha = j.value("alpha", c.alpha);
        c.T = j.value("T", c.T);
        c.dt = j.value("dt", c.dt);
        c.dt_fine = j.value("dt_fine", c.dt);
        c.coarse_n = j.value("coarse_n", c.coarse_n);
        c.refine = j.value("refine", c.refine);
        if (j.contains("spaces")) {
            const json& s = j["spaces"];
            check_keys(s, {"layers", "L", "J"}, "spaces");
            c.spaces.layers = s.value("layers", c.spaces.layers);
            c.spaces.L = s.value("L", c.spaces.L);
            c.spaces.J = s.value("J", c.spaces.J);
        }
        if (j.contains("field")) {
            const json& f = j["field"];
            check_keys(f, {"kind", "contrast", "preset", "rects", "seed", "count", "size", "path"}, "field");
            const std::string kind = f.value("kind", std::string("channels"));
            if (kind == "channels") c.field.kind = FieldKind::channels;
            else if (kind == "inclusions") c.field.kind = FieldKind::inclusions;
            else if (kind == "file") c.field.kind = FieldKind::file;
            else throw ParseError("config: unknown field kind '" + kind + "'", 0);
            c.field.contrast = f.value("contrast", c.field.contrast);
            c.field.preset = f.value("preset", c.field.preset);
            if (f.contains("rects"))
                for (const json& r : f["rects"]) c.field.rects.push_back(rect_from(r));
            c.field.seed = f.value("seed", c.field.seed);
            c.field.count = f.value("count", c.field.count);
            c.field.size = f.value("size", c.field.size);
            c.field.path = resolve(f.value("path", std::string()), base_dir);
            if (c.field.kind == FieldKind::file && c.field.path.empty())
                throw ParseError("config: field kind 'file' needs a path", 0);
        }
        if (j.contains("forcing")) {
            const json& f = j["forcing"];
            check_keys(f, {"kind", "region", "inside", "outside", "files", "times"}, "forcing");
            const std::string kind = f.value("kind", std::string("smooth"));
            if (kind == "smooth") c.forcing.kind = ForcingKind::smooth;
            else if (kind == "discontinuous") c.forcing.kind = ForcingKind::discontinuous;
            else if (kind == "custom") c.forcing.kind = ForcingKind::custom;
            else throw ParseError("config: unknown forcing kind '" + kind + "'", 0);
            if (f.contains("region")) c.forcing.region = rect_from(f["region"]);
            c.forcing.inside = f.value("inside", c.forcing.inside);
            c.forcing.outside = f.value("outside", c.forcing.outside);
            if (f.contains("files"))
                for (const json& p : f["files"]) c.forcing.files.push_back(resolve(p.get<std::string>(), base_dir));
            if (f.contains("times")) c.forcing.times = f["times"].get<std::vector<double>>();
            if (c.forcing.kind == ForcingKind::custom && c.forcing.files.empty())
                throw ParseError("config: custom forcing needs at least one raster file", 0);
        }
        if (j.contains("schemes")) c.schemes = j["schemes"].get<std::vector<std::string>>();
        c.output_dir = resolve(j.value("output_dir", std::string()), base_dir);
        c.basis_cache = resolve(j.value("basis_cache", std::string()), base_dir);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what(), 0);
    }
    if (!j.contains("dt_fine")) c.dt_fine = c.dt / 5.0;
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return config_from_json(ss.str(), fs::path(path).parent_path().string());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.detail(), e.line());
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["alpha"] = c.alpha;
    j["T"] = c.T;
    j["dt"] = c.dt;
    j["dt_fine"] = c.dt_fine;
    j["coarse_n"] = c.coarse_n;
    j["refine"] = c.refine;
    j["spaces"] = {{"layers", c.spaces.layers}, {"L", c.spaces.L}, {"J", c.spaces.J}};
    json f;
    switch (c.field.kind) {
        case FieldKind::channels:
            f["kind"] = "channels";
            f["contrast"] = c.field.contrast;
            if (c.field.rects.empty()) {
                f["preset"] = c.field.preset;
            } else {
                f["rects"] = json::array();
                for (const Rect& r : c.field.rects) f["rects"].push_back(rect_to(r));
            }
            break;
        case FieldKind::inclusions:
            f = {{"kind", "inclusions"}, {"contrast", c.field.contrast}, {"seed", c.field.seed},
                 {"count", c.field.count}, {"size", c.field.size}};
            break;
        case FieldKind::file:
            f = {{"kind", "file"}, {"path", c.field.path}};
            break;
    }
    j["field"] = f;
    json g;
    switch (c.forcing.kind) {
        case ForcingKind::smooth: g["kind"] = "smooth"; break;
        case ForcingKind::discontinuous:
            g = {{"kind", "discontinuous"}, {"region", rect_to(c.forcing.region)}, {"inside", c.forcing.inside},
                 {"outside", c.forcing.outside}};
            break;
        case ForcingKind::custom:
            g = {{"kind", "custom"}, {"files", c.forcing.files}, {"times", c.forcing.times}};
            break;
    }
    j["forcing"] = g;
    j["schemes"] = c.schemes;
    j["output_dir"] = c.output_dir;
    j["basis_cache"] = c.basis_cache;
    return j.dump(2);
}

ExperimentConfig experiment_preset(int which, double alpha) {
    if (which != 1 && which != 2) throw InvalidArgument("experiment must be 1 or 2");
    ExperimentConfig c;
    c.alpha = alpha;
    c.field.kind = FieldKind::channels;
    c.field.preset = which;
    c.field.contrast = 1e5;
    c.forcing.kind = which == 1 ? ForcingKind::smooth : ForcingKind::discontinuous;
    c.validate();
    return c;
}

// --- Errors -----------------------------------------------------------------

ErrorSeries error_series(const Trajectory& traj, const ReducedBasis& basis, const Trajectory& reference,
                         const SparseSym& stiffness, const SparseSym& mass) {
    if (basis.size() != traj.dim() || basis.dofs() != reference.dim())
        throw InvalidArgument("error_series: trajectory, basis and reference dimensions disagree");
    if (std::abs(traj.dt() - reference.dt()) > 1e-12 * traj.dt())
        throw InvalidArgument("error_series: reference is not sampled at the trajectory time step");
    ErrorSeries e;
    const int n = std::min(traj.size(), reference.size());
    for (int k = 0; k < n; ++k) {
        const Vector ref = reference.state(k);
        const Vector diff = basis.lift(Vector(traj.state(k))) - ref;
        const double rm = std::sqrt(mass.quad(ref)), ra = std::sqrt(stiffness.quad(ref));
        const double dm = std::sqrt(std::max(0.0, mass.quad(diff))), da = std::sqrt(std::max(0.0, stiffness.quad(diff)));
        const bool absolute = rm == 0.0 || ra == 0.0;
        e.l2.push_back(absolute ? dm : dm / rm);
        e.energy.push_back(absolute ? da : da / ra);
        e.absolute.push_back(absolute);
    }
    return e;
}

// --- Experiment -------------------------------------------------------------

const SchemeOutcome* ExperimentResult::find(const std::string& name) const {
    const auto it = schemes.find(name);
    return it == schemes.end() ? nullptr : &it->second;
}

std::optional<std::pair<double, double>> ExperimentResult::final_errors(const std::string& name) const {
    const SchemeOutcome* s = find(name);
    if (!s || s->diverged || !s->errors || s->errors->size() != config.steps() + 1) return std::nullopt;
    return std::make_pair(s->errors->l2.back(), s->errors->energy.back());
}

Raster node_raster(const GridHierarchy& grid, const Vector& fine) {
    const int nn = grid.fine_n() + 1;
    Raster r{nn, nn, std::vector<double>(static_cast<std::size_t>(nn) * nn, 0.0)};
    for (int d = 0; d < grid.num_dofs(); ++d) r.values[grid.node_of_dof(d)] = fine[d];
    return r;
}

namespace {

void write_outputs(const ExperimentResult& res, const GridHierarchy& grid) {
    const ExperimentConfig& c = res.config;
    fs::create_directories(c.output_dir);
    const fs::path dir(c.output_dir);

    write_raster_file((dir / "kappa.txt").string(), res.kappa.to_raster());
    write_report_file((dir / "stability.txt").string(), res.stability);

    const int n = c.steps();
    {
        std::ofstream out(dir / "errors.csv");
        out << "step,time,err_L2_cem,err_en_cem,err_L2_tildeU,err_en_tildeU,err_L2_scem,err_en_scem\n";
        auto errs = [&](const char* name) -> std::optional<ErrorSeries> {
            const SchemeOutcome* s = res.find(name);
            return s ? s->errors : std::nullopt;
        };
        const auto cem = errs("cem"), tilde = errs("enriched"), scem = errs("partial");
        for (int k = 0; k <= n; ++k)
            out << k << ',' << format_double(k * c.dt) << ',' << csv_value(cem, true, k) << ',' << csv_value(cem, false, k)
                << ',' << csv_value(tilde, true, k) << ',' << csv_value(tilde, false, k) << ','
                << csv_value(scem, true, k) << ',' << csv_value(scem, false, k) << '\n';
        if (!out) throw Error("write failed for errors.csv");
    }

    json summary;
    summary["config"] = json::parse(config_to_json(c));
    summary["build_seconds"] = res.build_seconds;
    summary["stability"] = {{"lambda_max_full", res.stability.lambda_max_full},
                            {"lambda_max_v2", res.stability.lambda_max_v2},
                            {"gamma", res.stability.gamma},
                            {"min_ratio", res.stability.min_ratio},
                            {"dt_max_explicit", finite_or_null(res.stability.dt_max_explicit)},
                            {"dt_max_partial", finite_or_null(res.stability.dt_max_partial)}};
    for (const auto& [name, s] : res.schemes) {
        s.trajectory.write_file((dir / ("traj_" + name + ".bin")).string());
        write_raster_file((dir / ("final_" + name + ".txt")).string(),
                          node_raster(grid, s.basis.lift(Vector(s.trajectory.back()))));
        json js = {{"dimension", s.trajectory.dim()},
                   {"steps_completed", s.trajectory.steps()},
                   {"diverged", s.diverged},
                   {"seconds", s.seconds},
                   {"history_terms", s.history_terms}};
        if (s.diverged) {
            js["diverged_step"] = s.diverged_step;
            js["diagnostic"] = s.diagnostic;
        }
        if (const auto fe = res.final_errors(name)) js["final_errors"] = {{"l2", fe->first}, {"energy", fe->second}};
        summary["schemes"][name] = js;
    }
    std::ofstream out(dir / "summary.json");
    out << summary.dump(2) << '\n';
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const Logger& log) {
    config.validate();
    auto say = [&log](const std::string& m) {
        if (log) log(m);
    };
    auto stage = [](const std::string& name, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw Error("stage '" + name + "' failed: " + e.what());
        }
    };

    ExperimentResult res;
    res.config = config;
    const int n = config.steps();
    const auto t_build = std::chrono::steady_clock::now();
    const GridHierarchy grid = stage("grid", [&] { return build_grids(config.coarse_n, config.refine); });
    res.kappa = stage("field", [&] { return gen_field(config.field, grid.fine_n()); });
    const FineOperators ops = stage("assembly", [&] { return assemble_fine(grid, res.kappa); });
    const Forcing forcing = stage("forcing", [&] { return gen_forcing(config.forcing, grid.fine_n()); });
    const FineLoad load = forcing.load(grid);
    const Vector u0 = Vector::Zero(grid.num_dofs());
    say("grid " + std::to_string(config.coarse_n) + "x" + std::to_string(config.coarse_n) + " coarse, " +
        std::to_string(grid.num_dofs()) + " fine dofs, contrast " + format_double(res.kappa.contrast()));

    const auto wants = [&](const std::string& s) {
        return std::find(config.schemes.begin(), config.schemes.end(), s) != config.schemes.end();
    };

    BasisPair bases = stage("spaces", [&] {
        if (!config.basis_cache.empty() && fs::exists(config.basis_cache)) {
            say("reading basis cache " + config.basis_cache);
            return read_basis_cache(config.basis_cache, grid, res.kappa, config.spaces);
        }
        MultiscaleSpaces sp = build_spaces(grid, res.kappa, ops, config.spaces);
        if (!config.basis_cache.empty()) write_basis_cache(config.basis_cache, grid, res.kappa, config.spaces, sp.cem, sp.v2);
        return BasisPair{std::move(sp.cem), std::move(sp.v2)};
    });
    const ReducedBasis combined = ReducedBasis::concat(bases.cem, bases.v2);
    const ReducedSystem sys_cem = stage("reduce", [&] { return reduce(ops.stiffness, ops.mass, bases.cem); });
    const ReducedSystem sys_h = stage("reduce", [&] { return reduce(ops.stiffness, ops.mass, combined, bases.cem.size()); });
    res.stability = stage("stability", [&] { return analyze(sys_h, config.alpha, config.dt); });
    res.build_seconds = seconds_since(t_build);
    say("spaces: " + std::to_string(bases.cem.size()) + " cem + " + std::to_string(bases.v2.size()) +
        " second-space functions (" + format_double(res.build_seconds) + " s); dt_max_partial = " +
        format_double(res.stability.dt_max_partial) + ", gamma = " + format_double(res.stability.gamma));

    std::optional<FineReference> ref;
    if (wants("fine")) {
        const auto t0 = std::chrono::steady_clock::now();
        ref = stage("fine reference", [&] {
            return fine_reference(ops.stiffness, ops.mass, config.alpha, config.dt, config.dt_fine, n, load, u0);
        });
        SchemeOutcome o;
        o.name = "fine";
        o.trajectory = ref->samples;
        o.basis = ReducedBasis::identity(grid.num_dofs());
        o.diverged = ref->diverged;
        o.history_terms = static_cast<long long>(ref->fine_steps) * (ref->fine_steps + 1) / 2;
        o.seconds = seconds_since(t0);
        say("fine reference: " + std::to_string(ref->fine_steps) + " steps (" + format_double(o.seconds) + " s)");
        res.schemes["fine"] = std::move(o);
    }

    const L1Kernel kernel(config.alpha, config.dt, n);
    auto run = [&](const std::string& name, Scheme scheme, const ReducedSystem& sys) {
        const auto t0 = std::chrono::steady_clock::now();
        RunResult r = stage(name, [&] {
            return run_scheme(scheme, sys, kernel, sys.project_initial(u0, ops.mass), load, name);
        });
        SchemeOutcome o;
        o.name = name;
        o.trajectory = std::move(r.trajectory);
        o.basis = sys.basis;
        o.diverged = r.diverged;
        o.diverged_step = r.diverged_step;
        o.diagnostic = r.diagnostic;
        o.history_terms = r.history_terms;
        if (ref) o.errors = error_series(o.trajectory, o.basis, ref->samples, ops.stiffness, ops.mass);
        o.seconds = seconds_since(t0);
        std::string msg = name + ": " + (o.diverged ? o.diagnostic : "completed " + std::to_string(n) + " steps");
        if (o.errors && !o.diverged)
            msg += ", final errors L2 " + format_double(o.errors->l2.back()) + " energy " + format_double(o.errors->energy.back());
        say(msg);
        res.schemes[name] = std::move(o);
    };
    if (wants("cem")) run("cem", Scheme::implicit, sys_cem);
    if (wants("enriched")) run("enriched", Scheme::implicit, sys_h);
    if (wants("partial")) run("partial", Scheme::partial, sys_h);
    if (wants("explicit")) run("explicit", Scheme::explicit_euler, sys_h);

    if (!config.output_dir.empty()) stage("output", [&] {
        write_outputs(res, grid);
        return 0;
    });
    return res;
}

}  // namespace fracms
