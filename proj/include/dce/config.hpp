#pragma once

// Run configuration as read from JSON. Frequencies and couplings are entered
// as cyclic frequencies in GHz and converted to rad/ns (x 2 pi); times are in
// ns and normalized speeds nu in 1/ns.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dce/dynamics.hpp"
#include "dce/hamiltonian.hpp"
#include "dce/trajectory.hpp"

namespace dce {

using Json = nlohmann::ordered_json;

struct SystemSpec {
    double omega_c1 = 0.0; // GHz
    double omega_c2 = 0.0;
    double omega_q1 = 0.0;
    double omega_q2 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double g0 = 0.0;
    double omega_d = 0.0;
    CouplingModel coupling_model = CouplingModel::squeezing;
    int squeeze_phase_sign = -1;
    bool drop_zero_point = true;
    bool allow_detuned_drive = false;

    SystemParams to_params() const;
};

struct HilbertSpec {
    bool automatic = false; // "n_fock": "auto" runs the truncation ladder
    int n_fock = 10;
    int start = 4;
    double tol = 1e-3;
    int max_n = 12;
};

struct TrajectorySpec {
    TrajectoryKind type = TrajectoryKind::stationary;
    double u0 = 0.0;
    double nu = 0.0;
    int n = 1;
    double tau_ns = 0.0;
    double shift_ns = 0.0;
    bool mirrored = false;
    bool apply_bounce_sign = true;
    std::vector<double> times_ns; // sampled only
    std::vector<double> u;

    Trajectory build() const;
};

struct GridSpec {
    double t_end_ns = 200.0;
    std::size_t n_samples = 2001;
};

struct IntegratorSpec {
    StepperKind method = StepperKind::dormand_prince45;
    double rtol = 1e-8;
    double atol = 1e-10;
    double fixed_step_ns = 1e-3;
    double max_step_ns = 0.0;
};

struct OutputSpec {
    bool series = true;  // timeseries.csv
    bool summary = true; // summary.json
};

struct RunConfig {
    std::string name = "run";
    SystemSpec system;
    HilbertSpec hilbert;
    std::array<TrajectorySpec, 2> trajectories;
    NoiseParams noise;
    GridSpec grid;
    IntegratorSpec integrator;
    OutputSpec outputs;
    std::int64_t seed = 0; // reserved; the pipeline is deterministic

    /// Physical run description; fixed truncation is taken from hilbert.
    RunSpec to_run_spec() const;
};

/// Throws ConfigError whose field() is the dotted path of the offending entry.
RunConfig parse_run_config(const Json& j);
Json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

std::string to_string(StepperKind kind);
StepperKind stepper_from_string(const std::string& name);

Json read_json_file(const std::filesystem::path& path);

struct SweepAxis {
    std::string path;          // dotted path into the base config, e.g. trajectories.1.shift_ns
    std::vector<Json> values;
};

struct SweepConfig {
    Json base;                 // unparsed so that axes can patch any field
    std::vector<SweepAxis> axes;
    std::size_t max_cells = 10000;

    std::size_t cells() const;
    /// Base with the axis values of cell `index` applied; lexicographic order
    /// with the first axis outermost.
    Json cell(std::size_t index) const;
    std::vector<Json> cell_values(std::size_t index) const;
};

SweepConfig parse_sweep_config(const Json& j);

/// Sets the value at a dotted path (array elements by index). Throws
/// ConfigError naming the path when a component does not exist.
void set_path(Json& j, const std::string& path, const Json& value);

} // namespace dce
