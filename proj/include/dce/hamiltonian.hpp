#pragma once

// H(t) = sum_i [w_ci (a_i^+ a_i + 1/2) + (w_qi / 2) sz_i]
//      + sum_i g_i m_i(t) sx_i (a_i^+ + a_i)
//      + cavity-cavity drive,
// with hbar = 1, energies in rad/ns and times in ns. The drive is either the
// two-mode squeezing term (g0/2)(a1^+ a2^+ e^{+-i wd t} + h.c.) or the bare
// parametric coupling g0 cos(wd t)(a1^+ + a1)(a2^+ + a2).

#include <functional>
#include <string>
#include <vector>

#include "dce/statespace.hpp"
#include "dce/trajectory.hpp"

namespace dce {

enum class CouplingModel { squeezing, full_drive };

std::string to_string(CouplingModel model);
CouplingModel coupling_model_from_string(const std::string& name);

struct SystemParams {
    double omega_c1 = 0.0;
    double omega_c2 = 0.0;
    double omega_q1 = 0.0;
    double omega_q2 = 0.0;
    double g1 = 0.0;  // signed; g -> -g is the bounce partner of u -> 1 - u
    double g2 = 0.0;
    double g0 = 0.0;
    double omega_d = 0.0;
    CouplingModel coupling_model = CouplingModel::squeezing;
    bool drop_zero_point = true;
    /// Sign s of the phase on a1^+ a2^+ in the squeezing term, e^{i s wd t}.
    int squeeze_phase_sign = -1;
    /// Skip the wd == wc1 + wc2 check of the squeezing model.
    bool allow_detuned_drive = false;

    void validate() const;
};

/// One time-dependent term. The physical contribution is
/// coefficient(t) * op            when self_adjoint (real coefficient, Hermitian op),
/// coefficient(t) * op + h.c.     otherwise.
struct DrivenTerm {
    std::string label;
    std::function<Complex(double t, double t_branch)> coefficient;
    Operator op;
    bool self_adjoint = true;
};

class HamiltonianTerms {
public:
    HamiltonianTerms(HilbertConfig cfg, Operator static_part, std::vector<DrivenTerm> driven,
                     std::vector<Trajectory> trajectories = {});

    const HilbertConfig& config() const noexcept { return cfg_; }
    const Operator& static_part() const noexcept { return static_; }
    const std::vector<DrivenTerm>& driven_terms() const noexcept { return driven_; }
    Index dim() const noexcept { return static_.dim(); }

    Operator evaluate(double t) const { return evaluate(t, t); }

    /// H(t) with trajectory branches taken at t_branch (see Trajectory::position).
    Operator evaluate(double t, double t_branch) const;

    /// Sorted, de-duplicated non-smooth instants of the coefficients in (0, t_end).
    std::vector<double> breakpoints(double t_end) const;

private:
    HilbertConfig cfg_;
    Operator static_;
    std::vector<DrivenTerm> driven_;
    std::vector<Trajectory> trajectories_;
};

HamiltonianTerms build_hamiltonian(const SystemParams& params, const Trajectory& traj1,
                                   const Trajectory& traj2, const HilbertConfig& cfg);

} // namespace dce
