#pragma once

// Named configurations behind the figures: fig4 / fig6 / fig7 are dynamics
// runs, fig2 / fig3 / fig5 are trajectory tables only.

#include <string>
#include <vector>

#include "dce/config.hpp"

namespace dce {

struct TrajectoryTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Preset {
    std::string name;
    std::vector<RunConfig> runs;
    std::vector<TrajectoryTable> tables;
};

/// Drive-sum speed used by the constant-velocity presets: k |v| = 1e-4 wd,
/// i.e. nu = 1e-4 wd / pi in 1/ns.
double fig4_speed();

/// Flight time of the n = 100 bounce presets, ns.
constexpr double bounce_preset_tau_ns = 50.0;

/// Two 4 / 5 GHz cavity-qubit pairs with g0 = 0.001 w1, g1 = g2 = 0.04 w2,
/// static qubits at u = 0, 200 ns sampled every 0.1 ns, n_fock = 10.
RunConfig fig4_base();

std::vector<std::string> preset_names();

/// Throws ConfigError (field "name") for unknown names.
Preset make_preset(const std::string& name);

} // namespace dce
