// Command-line front end: solve, basis, stability, experiment, field.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fracms/error.hpp"
#include "fracms/harness.hpp"
#include "fracms/kernels.hpp"
#include "fracms/raster.hpp"

using namespace fracms;

namespace {

void log_line(const std::string& m) { std::cerr << "[fracms] " << m << '\n'; }

void print_result(const ExperimentResult& r) {
    std::cout << "dt_max_partial=" << format_double(r.stability.dt_max_partial)
              << " dt_max_explicit=" << format_double(r.stability.dt_max_explicit)
              << " gamma=" << format_double(r.stability.gamma) << '\n';
    for (const auto& [name, s] : r.schemes) {
        std::cout << name << ": ";
        if (s.diverged) {
            std::cout << "diverged at step " << s.diverged_step;
        } else if (const auto fe = r.final_errors(name); fe && name != "fine") {
            std::cout << "final relative errors L2=" << format_double(fe->first)
                      << " energy=" << format_double(fe->second);
        } else {
            std::cout << s.trajectory.steps() << " steps";
        }
        std::cout << '\n';
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional diffusion in high-contrast media with multiscale coarse spaces"};
    app.require_subcommand(1);
    bool quiet = false;
    bool scalar = false;
    app.add_flag("-q,--quiet", quiet, "Suppress progress messages");
    app.add_flag("--scalar-kernels", scalar, "Use the scalar reference kernels");

    std::string config_path, out_path;

    auto* solve = app.add_subcommand("solve", "Run the schemes of a configuration");
    solve->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);

    auto* basis = app.add_subcommand("basis", "Build the multiscale bases and write a cache file");
    basis->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    basis->add_option("--out", out_path, "Cache file")->required();

    bool with_fine = false;
    std::string sweep, sweep_csv;
    auto* stab = app.add_subcommand("stability", "Print the stability report of a configuration");
    stab->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    stab->add_flag("--fine", with_fine, "Also compute the largest eigenvalue of the fine operators");
    stab->add_option("--sweep", sweep, "Comma-separated contrasts for a sweep over the configured geometry");
    stab->add_option("--csv", sweep_csv, "Write the sweep table to this file");

    int which = 1;
    double alpha = 0.9;
    std::string cache;
    auto* exp = app.add_subcommand("experiment", "Run a bundled full-size experiment");
    exp->add_option("which", which, "Experiment number")->required()->check(CLI::IsMember({1, 2}));
    exp->add_option("--alpha", alpha, "Fractional order")->check(CLI::Range(0.0, 1.0));
    exp->add_option("--out", out_path, "Output directory");
    exp->add_option("--cache", cache, "Basis cache file");

    int preset = 1, n = 100;
    double contrast = 1e5;
    auto* field = app.add_subcommand("field", "Write a bundled channel field as a raster");
    field->add_option("--preset", preset, "Channel geometry")->check(CLI::IsMember({1, 2}));
    field->add_option("--n", n, "Fine cells per side")->check(CLI::PositiveNumber);
    field->add_option("--contrast", contrast, "Channel value (background 1)");
    field->add_option("--out", out_path, "Raster file")->required();

    CLI11_PARSE(app, argc, argv);
    if (scalar) kernels::set_force_scalar(true);
    const Logger log = quiet ? Logger{} : Logger{log_line};

    try {
        if (*solve) {
            print_result(run_experiment(load_config(config_path), log));
        } else if (*basis) {
            const ExperimentConfig c = load_config(config_path);
            const GridHierarchy grid(c.coarse_n, c.refine);
            const PermeabilityField kappa = gen_field(c.field, grid.fine_n());
            const FineOperators ops = assemble_fine(grid, kappa);
            const MultiscaleSpaces sp = build_spaces(grid, kappa, ops, c.spaces);
            write_basis_cache(out_path, grid, kappa, c.spaces, sp.cem, sp.v2);
            std::cout << "wrote " << sp.cem.size() << " cem and " << sp.v2.size() << " second-space columns to "
                      << out_path << '\n';
        } else if (*stab) {
            const ExperimentConfig c = load_config(config_path);
            const GridHierarchy grid(c.coarse_n, c.refine);
            const PermeabilityField kappa = gen_field(c.field, grid.fine_n());
            if (!sweep.empty()) {
                if (c.field.kind == FieldKind::file) throw InvalidArgument("a sweep needs a generated field geometry");
                std::vector<double> mask(kappa.num_cells());
                for (int i = 0; i < kappa.num_cells(); ++i) mask[i] = kappa[i] != 1.0 ? 1.0 : 0.0;
                const auto rows = contrast_sweep(grid, mask, parse_list(sweep), c.alpha, c.spaces);
                write_sweep_csv(std::cout, rows);
                if (!sweep_csv.empty()) {
                    std::ofstream out(sweep_csv);
                    write_sweep_csv(out, rows);
                }
            } else {
                const FineOperators ops = assemble_fine(grid, kappa);
                const MultiscaleSpaces sp = build_spaces(grid, kappa, ops, c.spaces);
                const ReducedSystem sys = reduce(ops.stiffness, ops.mass, ReducedBasis::concat(sp.cem, sp.v2), sp.cem.size());
                StabilityReport r = analyze(sys, c.alpha, c.dt);
                if (with_fine) {
                    r.lambda_max_fine = lambda_max(ops.stiffness, ops.mass);
                    r.dt_max_fine_explicit = dt_max_explicit(c.alpha, r.lambda_max_fine);
                }
                write_report(std::cout, r);
            }
        } else if (*exp) {
            ExperimentConfig c = experiment_preset(which, alpha);
            std::ostringstream dir;
            dir << "experiment" << which << "_alpha" << alpha;
            c.output_dir = out_path.empty() ? dir.str() : out_path;
            c.basis_cache = cache;
            print_result(run_experiment(c, log));
            std::cout << "outputs in " << c.output_dir << '\n';
        } else if (*field) {
            FieldSpec spec;
            spec.kind = FieldKind::channels;
            spec.preset = preset;
            spec.contrast = contrast;
            write_raster_file(out_path, gen_field(spec, n).to_raster());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
