#include "dce/presets.hpp"

#include <numbers>
#include <sstream>

#include "dce/errors.hpp"

namespace dce {

namespace {

TrajectorySpec stationary(double u0) {
    TrajectorySpec t;
    t.type = TrajectoryKind::stationary;
    t.u0 = u0;
    return t;
}

TrajectorySpec moving(double u0, double nu) {
    TrajectorySpec t;
    t.type = TrajectoryKind::constant_velocity;
    t.u0 = u0;
    t.nu = nu;
    return t;
}

// The bounce family writes positions directly for every traversal, so the
// path is continuous and the coupling keeps its sign.
TrajectorySpec bounce(double shift_ns) {
    TrajectorySpec t;
    t.type = TrajectoryKind::arccos_bounce;
    t.n = 100;
    t.tau_ns = bounce_preset_tau_ns;
    t.shift_ns = shift_ns;
    t.apply_bounce_sign = false;
    return t;
}

RunConfig variant(const std::string& name, TrajectorySpec a, TrajectorySpec b) {
    RunConfig c = fig4_base();
    c.name = name;
    c.trajectories = {std::move(a), std::move(b)};
    return c;
}

std::vector<RunConfig> fig4_runs() {
    const double nu = fig4_speed();
    return {
        variant("fig4-static", stationary(0.0), stationary(0.0)),
        variant("fig4-opposite", moving(0.0, nu), moving(0.0, -nu)),
        variant("fig4-half", moving(0.0, nu), moving(0.5, -nu)),
        variant("fig4-mirror", moving(0.0, nu), moving(1.0, -nu)),
    };
}

std::vector<RunConfig> bounce_runs(const std::string& prefix) {
    const double tau = bounce_preset_tau_ns;
    return {
        variant(prefix + "-shift0", bounce(0.0), bounce(0.0)),
        variant(prefix + "-shift0.1tau", bounce(0.0), bounce(0.1 * tau)),
        variant(prefix + "-shift0.5tau", bounce(0.0), bounce(0.5 * tau)),
    };
}

// u and signed modulation of both qubits on the run grid.
TrajectoryTable table_for(const RunConfig& c) {
    TrajectoryTable t;
    t.name = c.name;
    t.columns = {"t_ns", "u1", "u2", "m1", "m2"};
    const Trajectory a = c.trajectories[0].build();
    const Trajectory b = c.trajectories[1].build();
    for (double s : uniform_grid(c.grid.t_end_ns, c.grid.n_samples)) {
        t.rows.push_back({s, a.position(s), b.position(s), a.modulation(s).value, b.modulation(s).value});
    }
    return t;
}

// Single traversal of the arccos family on t / tau in [0, 1]; the second
// qubit runs on the negative side of its cavity.
TrajectoryTable arccos_table(int n) {
    TrajectoryTable t;
    t.name = "fig2-n" + std::to_string(n);
    t.columns = {"t_over_tau", "x1_over_L1", "x2_over_L2"};
    const Trajectory path = Trajectory::arccos_bounce(n, 1.0, false);
    const int samples = 1001;
    for (int i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / (samples - 1);
        // branch of the first traversal, including its end point
        const double x = path.position(s, 0.5);
        t.rows.push_back({s, x, -x});
    }
    return t;
}

} // namespace

double fig4_speed() {
    const double omega_d = 2.0 * std::numbers::pi * (4.0 + 5.0);
    return 1e-4 * omega_d / std::numbers::pi;
}

RunConfig fig4_base() {
    RunConfig c;
    c.name = "fig4";
    const double w1 = 4.0, w2 = 5.0;
    c.system.omega_c1 = w1;
    c.system.omega_c2 = w2;
    c.system.omega_q1 = w1;
    c.system.omega_q2 = w2;
    c.system.g0 = 0.001 * w1;
    c.system.g1 = 0.04 * w2;
    c.system.g2 = 0.04 * w2;
    c.system.omega_d = w1 + w2;
    c.hilbert.n_fock = 10;
    c.trajectories = {stationary(0.0), stationary(0.0)};
    c.grid = {200.0, 2001};
    return c;
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}; }

Preset make_preset(const std::string& name) {
    Preset p;
    p.name = name;
    if (name == "fig2") {
        for (int n : {1, 2, 5, 10, 100}) p.tables.push_back(arccos_table(n));
    } else if (name == "fig3") {
        for (const auto& c : fig4_runs()) {
            p.tables.push_back(table_for(c));
            p.tables.back().name = "fig3" + c.name.substr(4);
        }
    } else if (name == "fig4") {
        p.runs = fig4_runs();
    } else if (name == "fig5") {
        for (const auto& c : bounce_runs("fig5")) p.tables.push_back(table_for(c));
    } else if (name == "fig6" || name == "fig7") {
        p.runs = bounce_runs(name);
    } else {
        std::ostringstream msg;
        msg << "unknown preset '" << name << "' (known:";
        for (const auto& n : preset_names()) msg << ' ' << n;
        msg << ')';
        throw ConfigError(msg.str(), "name");
    }
    return p;
}

} // namespace dce
