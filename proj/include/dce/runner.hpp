#pragma once

// Execution of run configurations and the files they produce.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dce/analysis.hpp"
#include "dce/config.hpp"
#include "dce/presets.hpp"

namespace dce {

struct RunOutput {
    TimeSeries series;
    Peak peak;
    int n_fock_used = 0;
    StepStats stats;
    std::vector<int> ladder;  // truncations tried when hilbert.n_fock is "auto"
    double residual = 0.0;
};

/// Simulates and analyzes one configuration. Throws NumericalError on
/// integration or convergence failure and StateError if a row breaks the
/// observable invariants.
RunOutput execute(const RunConfig& config);

/// 12 significant digits, '.' separator, no negative zero.
std::string format_number(double x);

inline const char* series_header =
    "t_ns,concurrence,phi_plus,phi_minus,psi_plus,psi_minus,n1,n2,pe1,pe2";

std::string series_csv(const TimeSeries& series);
Json summary_json(const RunConfig& config, const RunOutput& out);

/// Writes dir/timeseries.csv and dir/summary.json as requested by
/// config.outputs, then re-reads the CSV through validate_series_csv.
void write_run(const RunConfig& config, const RunOutput& out, const std::filesystem::path& dir);

/// Re-reads a time-series file and checks every row: concurrence in [0, 1],
/// Bell populations non-negative and summing to 1 within 1e-6, photon
/// numbers non-negative, excitation probabilities in [0, 1]. Throws
/// StateError naming the row.
void validate_series_csv(const std::filesystem::path& path, std::size_t expected_rows = 0);

std::string table_csv(const TrajectoryTable& table);

/// Writes one JSON config per run and one CSV per table; with `exec`, also
/// runs every config into dir/<name>/.
void write_preset(const Preset& preset, const std::filesystem::path& dir, bool exec);

struct SweepResult {
    std::string csv;
    std::size_t failures = 0;
    std::size_t cells = 0;
};

/// One row per cell in lexicographic axis order; per-cell failures go to the
/// error column. The text does not depend on `jobs`.
SweepResult run_sweep(const SweepConfig& sweep, int jobs);

/// "a,b,c" or "start:stop:step" (stop included when hit within 1e-9 step).
/// An empty string gives an empty list.
std::vector<double> parse_time_list(const std::string& text);

/// Columns t_ns,C_oracle,C_closed_form,rel_diff. The closed form is chosen
/// from the trajectories (static, resonant constant velocity, aligned arccos
/// pairs); the two last columns are blank when none applies.
std::string perturbative_csv(const RunConfig& config, const std::vector<double>& times);

} // namespace dce
