#include "dce/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "dce/errors.hpp"

namespace dce {

std::string to_string(CouplingModel model) {
    return model == CouplingModel::squeezing ? "squeezing" : "full_drive";
}

CouplingModel coupling_model_from_string(const std::string& name) {
    if (name == "squeezing") return CouplingModel::squeezing;
    if (name == "full_drive") return CouplingModel::full_drive;
    throw ConfigError("unknown coupling model '" + name + "'", "system.coupling_model");
}

void SystemParams::validate() const {
    const auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("must be a positive finite frequency", std::string("system.") + field);
        }
    };
    positive(omega_c1, "omega_c1");
    positive(omega_c2, "omega_c2");
    positive(omega_q1, "omega_q1");
    positive(omega_q2, "omega_q2");
    positive(omega_d, "omega_d");
    if (!std::isfinite(g1)) throw ConfigError("must be finite", "system.g1");
    if (!std::isfinite(g2)) throw ConfigError("must be finite", "system.g2");
    if (!(g0 >= 0.0) || !std::isfinite(g0)) {
        throw ConfigError("must be a non-negative finite coupling", "system.g0");
    }
    if (squeeze_phase_sign != 1 && squeeze_phase_sign != -1) {
        throw ConfigError("must be +1 or -1", "system.squeeze_phase_sign");
    }
    if (coupling_model == CouplingModel::squeezing && !allow_detuned_drive) {
        const double sum = omega_c1 + omega_c2;
        if (std::abs(omega_d - sum) > 1e-9 * sum) {
            throw ConfigError("squeezing model requires omega_d == omega_c1 + omega_c2 "
                              "(set allow_detuned_drive to override)",
                              "system.omega_d");
        }
    }
}

HamiltonianTerms::HamiltonianTerms(HilbertConfig cfg, Operator static_part,
                                   std::vector<DrivenTerm> driven,
                                   std::vector<Trajectory> trajectories)
    : cfg_(cfg), static_(std::move(static_part)), driven_(std::move(driven)),
      trajectories_(std::move(trajectories)) {
    if (static_.dim() != cfg_.dim()) throw ShapeError("static Hamiltonian has wrong dimension");
    if (!static_.is_hermitian()) throw StateError("static Hamiltonian is not Hermitian");
    for (const auto& term : driven_) {
        if (term.op.dim() != cfg_.dim()) {
            throw ShapeError("driven term '" + term.label + "' has wrong dimension");
        }
        if (!term.coefficient) throw ConfigError("driven term '" + term.label + "' has no coefficient");
        if (term.self_adjoint && !term.op.is_hermitian()) {
            throw StateError("self-adjoint term '" + term.label + "' has a non-Hermitian operator");
        }
    }
}

Operator HamiltonianTerms::evaluate(double t, double t_branch) const {
    DenseMatrix h = static_.matrix();
    for (const auto& term : driven_) {
        const Complex c = term.coefficient(t, t_branch);
        if (term.self_adjoint) {
            h += c.real() * term.op.matrix();
        } else {
            const DenseMatrix part = c * term.op.matrix();
            h += part;
            h += part.adjoint();
        }
    }
    return Operator(std::move(h));
}

std::vector<double> HamiltonianTerms::breakpoints(double t_end) const {
    std::vector<double> out;
    for (const auto& traj : trajectories_) {
        const auto b = traj.breakpoints(t_end);
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }),
              out.end());
    return out;
}

HamiltonianTerms build_hamiltonian(const SystemParams& params, const Trajectory& traj1,
                                   const Trajectory& traj2, const HilbertConfig& cfg) {
    params.validate();
    const int n = cfg.n_fock();
    const Operator a = annihilation(n);
    const Operator ad = a.adjoint();
    const Operator num = ad * a;
    const Operator sx = pauli(Pauli::x);
    const Operator sz = pauli(Pauli::z);

    const Operator a1 = embed(a, Subsystem::cavity1, cfg);
    const Operator a2 = embed(a, Subsystem::cavity2, cfg);
    const Operator ad1 = a1.adjoint();
    const Operator ad2 = a2.adjoint();

    const double zp = params.drop_zero_point ? 0.0 : 0.5;
    const Operator id = Operator::identity(cfg.dim());
    Operator h0 = params.omega_c1 * (embed(num, Subsystem::cavity1, cfg) + zp * id) +
                  params.omega_c2 * (embed(num, Subsystem::cavity2, cfg) + zp * id) +
                  (0.5 * params.omega_q1) * embed(sz, Subsystem::qubit1, cfg) +
                  (0.5 * params.omega_q2) * embed(sz, Subsystem::qubit2, cfg);

    std::vector<DrivenTerm> driven;
    driven.push_back({"qubit1-cavity1",
                      [g = params.g1, traj1](double t, double tb) {
                          return Complex(g * traj1.modulation(t, tb).value, 0.0);
                      },
                      embed(sx, Subsystem::qubit1, cfg) * (ad1 + a1), true});
    driven.push_back({"qubit2-cavity2",
                      [g = params.g2, traj2](double t, double tb) {
                          return Complex(g * traj2.modulation(t, tb).value, 0.0);
                      },
                      embed(sx, Subsystem::qubit2, cfg) * (ad2 + a2), true});

    if (params.coupling_model == CouplingModel::squeezing) {
        const double phase_rate = params.squeeze_phase_sign * params.omega_d;
        driven.push_back({"two-mode squeezing",
                          [g0 = params.g0, phase_rate](double t, double) {
                              return 0.5 * g0 * std::exp(Complex(0.0, phase_rate * t));
                          },
                          ad1 * ad2, false});
    } else {
        driven.push_back({"parametric drive",
                          [g0 = params.g0, wd = params.omega_d](double t, double) {
                              return Complex(g0 * std::cos(wd * t), 0.0);
                          },
                          (ad1 + a1) * (ad2 + a2), true});
    }
    return HamiltonianTerms(cfg, std::move(h0), std::move(driven), {traj1, traj2});
}

} // namespace dce
