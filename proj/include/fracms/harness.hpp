#pragma once

// Experiment driver: builds the grid, field, spaces and reference solution
// for one configuration, runs the requested schemes and writes plot-ready
// outputs.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracms/fields.hpp"
#include "fracms/schemes.hpp"
#include "fracms/spaces.hpp"
#include "fracms/stability.hpp"

namespace fracms {

struct ExperimentConfig {
    double alpha = 0.9;
    double T = 0.01;
    double dt = 2e-5;
    double dt_fine = 4e-6;
    int coarse_n = 10;
    int refine = 10;
    SpaceParams spaces{6, 3, 1};
    FieldSpec field;
    ForcingSpec forcing;
    /// Any of "fine", "cem", "enriched", "partial", "explicit".
    std::vector<std::string> schemes{"fine", "cem", "enriched", "partial"};
    std::string output_dir;
    std::string basis_cache;  // read if present, written otherwise

    int steps() const;
    void validate() const;
};

/// Parses the JSON configuration format (see configs/ for examples);
/// relative file paths are resolved against `base_dir`.
ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir = {});
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& c);

/// Full-size experiment presets (1: smooth forcing, 2: discontinuous).
ExperimentConfig experiment_preset(int which, double alpha);

struct ErrorSeries {
    std::vector<double> l2;
    std::vector<double> energy;
    /// Levels where the reference vanishes and absolute errors are reported.
    std::vector<bool> absolute;
    int size() const noexcept { return static_cast<int>(l2.size()); }
};

/// Errors of R u^k against the reference samples at coincident levels.
/// A trajectory that stopped early yields a shorter series.
ErrorSeries error_series(const Trajectory& traj, const ReducedBasis& basis, const Trajectory& reference,
                         const SparseSym& stiffness, const SparseSym& mass);

struct SchemeOutcome {
    std::string name;
    Trajectory trajectory;
    ReducedBasis basis;
    bool diverged = false;
    int diverged_step = -1;
    std::string diagnostic;
    long long history_terms = 0;
    std::optional<ErrorSeries> errors;
    double seconds = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    PermeabilityField kappa;
    StabilityReport stability;
    std::map<std::string, SchemeOutcome> schemes;
    double build_seconds = 0.0;

    const SchemeOutcome* find(const std::string& name) const;
    /// Final-level errors of a scheme, if it ran to completion and a
    /// reference exists.
    std::optional<std::pair<double, double>> final_errors(const std::string& name) const;
};

using Logger = std::function<void(const std::string&)>;

/// When config.output_dir is set, also writes errors.csv, traj_<scheme>.bin,
/// final_<scheme>.txt, stability.txt, kappa.txt and summary.json there.
ExperimentResult run_experiment(const ExperimentConfig& config, const Logger& log = {});

/// Node-lattice raster ((fine_n+1)^2 values, zero on the boundary) of a
/// fine DOF vector.
Raster node_raster(const GridHierarchy& grid, const Vector& fine);

}  // namespace fracms
