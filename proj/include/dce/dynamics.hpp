#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dce/hamiltonian.hpp"
#include "dce/statespace.hpp"
#include "dce/trajectory.hpp"

namespace dce {

struct NoiseParams {
    std::optional<double> t1_q;   // qubit relaxation time, ns
    std::optional<double> tphi_q; // qubit pure-dephasing time, ns
    std::optional<double> t_cav;  // cavity energy decay time, ns

    bool empty() const noexcept { return !t1_q && !tphi_q && !t_cav; }
    void validate() const;
};

enum class StepperKind { dormand_prince45, rk4_fixed };

/// How the state is represented while integrating. `interaction` removes the
/// diagonal static part exactly (y = e^{i H0 t} psi) and is the default;
/// snapshots are always returned in the lab frame.
enum class Frame { interaction, lab };

struct IntegratorOptions {
    StepperKind stepper = StepperKind::dormand_prince45;
    Frame frame = Frame::interaction;
    double rtol = 1e-8;
    double atol = 1e-10;
    double fixed_step_ns = 1e-3;   // rk4_fixed only
    double initial_step_ns = 0.0;  // 0 picks a value from the first segment
    double max_step_ns = 0.0;      // 0 means unlimited
    double min_step_ns = 1e-12;
    std::size_t max_steps = 50'000'000;
    bool store_states = true;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    double max_error_estimate = 0.0; // largest accepted scaled local error
    double max_norm_drift = 0.0;     // max | ||psi||^2 - 1 | or | tr rho - 1 | over snapshots
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<QuantumState> states; // empty unless IntegratorOptions::store_states
    StepStats stats;
};

using SnapshotObserver = std::function<void(std::size_t index, double t, const QuantumState& state)>;

/// i d(psi)/dt = H(t) psi. `grid` must start at 0 and increase strictly.
EvolutionResult evolve_schrodinger(const QuantumState& psi0, const HamiltonianTerms& terms,
                                   std::span<const double> grid,
                                   const IntegratorOptions& options = {},
                                   const SnapshotObserver& observer = {});

/// d(rho)/dt = -i[H, rho] + sum_k (L rho L^+ - {L^+ L, rho} / 2) with
/// sigma_-(i) at 1/t1_q, sigma_z(i) at 1/(2 tphi_q) and a_i at 1/t_cav.
EvolutionResult evolve_lindblad(const QuantumState& rho0, const HamiltonianTerms& terms,
                                const NoiseParams& noise, std::span<const double> grid,
                                const IntegratorOptions& options = {},
                                const SnapshotObserver& observer = {});

/// Uniform grid of n_samples points on [0, t_end].
std::vector<double> uniform_grid(double t_end, std::size_t n_samples);

struct RunSpec {
    SystemParams system;
    Trajectory traj1 = Trajectory::stationary(0.0);
    Trajectory traj2 = Trajectory::stationary(0.0);
    NoiseParams noise;
    std::vector<double> grid;
    IntegratorOptions integrator;
};

/// Evolve |0, 0, g, g> under spec at truncation cfg: Schrodinger when the
/// noise is empty, Lindblad otherwise.
EvolutionResult simulate(const RunSpec& spec, const HilbertConfig& cfg,
                         const SnapshotObserver& observer = {});

using SnapshotProbe = std::function<double(const QuantumState&, const HilbertConfig&)>;

struct ConvergedRun {
    int n_fock = 0;
    EvolutionResult result;
    double residual = 0.0;            // max_t |probe_n - probe_{n+2}|
    std::vector<int> ladder;          // truncations that were run
};

/// Runs n = start_n, start_n + 2, ... until the probe series of two
/// consecutive truncations agree within tol; returns the smaller of the pair.
ConvergedRun converge_fock(const RunSpec& spec, int start_n, double tol,
                           const SnapshotProbe& probe, int max_n = 12);

} // namespace dce
