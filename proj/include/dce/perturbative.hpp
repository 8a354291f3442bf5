#pragma once

// Third-order amplitude of |00ee> from |00gg>:
//
//   A(t) = int_0^t dt1 int_0^t1 dt2 int_0^t2 dt3
//            [ m1(t1) m2(t2) + m1(t2) m2(t1) ] e^{i wd t3},
//
// with m_i = cos(f_i) the coupling modulation of qubit i; the concurrence is
// g0 g1 g2 |A|. The t3 integral is done analytically.

#include <complex>
#include <functional>
#include <vector>

namespace dce {

using RealFunction = std::function<double(double)>;

struct Couplings {
    double g0 = 1.0;
    double g1 = 1.0;
    double g2 = 1.0;

    double product() const noexcept { return g0 * g1 * g2; }
};

struct QuadratureOptions {
    int n_start = 64;
    int n_max = 1 << 20;
    double rel_tol = 1e-4;
};

struct PerturbativeResult {
    std::complex<double> amplitude;
    double concurrence = 0.0;
    double t = 0.0;
    int n_grid = 0;          // intervals of the accepted grid
    double rel_change = 0.0; // |A_n - A_{n/2}| / |A_n| at acceptance
};

/// Oracle on phase functions f_i (modulation cos f_i).
PerturbativeResult triple_integral(const RealFunction& f1, const RealFunction& f2, double omega_d,
                                   double t, const Couplings& g = {},
                                   const QuadratureOptions& opt = {});

/// Oracle on the modulations m_i directly (allows signed or synthetic modulations).
PerturbativeResult triple_integral_modulated(const RealFunction& m1, const RealFunction& m2,
                                             double omega_d, double t, const Couplings& g = {},
                                             const QuadratureOptions& opt = {});

/// Uniform-grid evaluation with n intervals, no refinement.
std::complex<double> triple_integral_fixed(const RealFunction& m1, const RealFunction& m2,
                                           double omega_d, double t, int n);

enum class ClosedFormKind { stationary, both_resonant, first_resonant, arccos };

struct ClosedFormParams {
    Couplings g;
    double omega_d = 0.0;
    double kv = 0.0;   // first_resonant: k|v| of the non-resonant qubit, rad/ns
    int n = 0;         // arccos exponent
    double tau_ns = 0.0; // arccos flight time; v/L is taken as 1/tau
};

/// Leading-order concurrence envelopes:
///   stationary      g0 g1 g2 t^2 / wd
///   both_resonant   g0 g1 g2 |sin(wd t)| t / wd^2
///   first_resonant  g0 g1 g2 |sin(kv t)| t / (2 wd kv)
///   arccos          4 g0 g1 g2 t^(2n+2) / (wd (n+1)^2 tau^(2n))
double closed_form(ClosedFormKind kind, const ClosedFormParams& params, double t);

struct ResonanceReport {
    bool condition1_q1 = false; // pi |nu1| == wd
    bool condition1_q2 = false; // pi |nu2| == wd
    bool condition2 = false;    // |nu1| == |nu2|
};

ResonanceReport resonance_check(double nu1, double nu2, double omega_d, double rel_tol = 1e-9);

struct LinearityReport {
    std::vector<double> concurrence; // C(m tau), m = 1..n_bounces
    std::vector<double> ratios;      // C(m tau) / C(tau)
    double max_rel_deviation = 0.0;  // max_m |ratio_m - m| / m
};

LinearityReport bounce_linearity_check(const RealFunction& f1, const RealFunction& f2,
                                       double omega_d, double tau_ns, int n_bounces,
                                       const Couplings& g = {}, const QuadratureOptions& opt = {});

} // namespace dce
