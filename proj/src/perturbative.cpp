#include "dce/perturbative.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dce/errors.hpp"

namespace dce {

using Complex = std::complex<double>;

Complex triple_integral_fixed(const RealFunction& m1, const RealFunction& m2, double omega_d,
                              double t, int n) {
    if (n < 1) throw ConfigError("quadrature needs at least one interval");
    if (t == 0.0) return {0.0, 0.0};
    const double h = t / n;
    const Complex i_wd(0.0, omega_d);

    // inner(s) = int_0^s e^{i wd u} du
    const auto inner = [&](double s) {
        return omega_d == 0.0 ? Complex(s, 0.0) : (std::exp(i_wd * s) - 1.0) / i_wd;
    };

    // G_k(s) = int_0^s m_k(u) inner(u) du by cumulative trapezoid; the outer
    // integrals of both orderings are accumulated on the fly.
    Complex g1(0.0, 0.0), g2(0.0, 0.0), outer(0.0, 0.0);
    double m1_prev = m1(0.0), m2_prev = m2(0.0);
    Complex in_prev = inner(0.0);
    Complex integrand_prev(0.0, 0.0); // m1 G2 + m2 G1 at the previous node
    for (int k = 1; k <= n; ++k) {
        const double s = k == n ? t : k * h;
        const double a = m1(s), b = m2(s);
        const Complex in = inner(s);
        g1 += 0.5 * h * (m1_prev * in_prev + a * in);
        g2 += 0.5 * h * (m2_prev * in_prev + b * in);
        const Complex integrand = a * g2 + b * g1;
        outer += 0.5 * h * (integrand_prev + integrand);
        integrand_prev = integrand;
        m1_prev = a;
        m2_prev = b;
        in_prev = in;
    }
    return outer;
}

PerturbativeResult triple_integral_modulated(const RealFunction& m1, const RealFunction& m2,
                                             double omega_d, double t, const Couplings& g,
                                             const QuadratureOptions& opt) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("time must be non-negative", "t");
    if (opt.n_start < 64) throw ConfigError("quadrature grid must start at >= 64 intervals");
    PerturbativeResult out;
    out.t = t;
    if (t == 0.0) {
        out.n_grid = opt.n_start;
        return out;
    }
    int n = opt.n_start;
    Complex prev = triple_integral_fixed(m1, m2, omega_d, t, n);
    while (true) {
        if (n > opt.n_max / 2) {
            std::ostringstream msg;
            msg << "triple integral did not converge at t = " << t << " with " << n << " intervals";
            throw QuadratureError(msg.str());
        }
        n *= 2;
        const Complex cur = triple_integral_fixed(m1, m2, omega_d, t, n);
        const double scale = std::abs(cur);
        const double change = std::abs(cur - prev);
        const double rel = scale > 0.0 ? change / scale : change;
        if (rel < opt.rel_tol || (scale == 0.0 && change == 0.0)) {
            out.amplitude = cur;
            out.n_grid = n;
            out.rel_change = rel;
            out.concurrence = std::abs(g.product()) * std::abs(cur);
            return out;
        }
        prev = cur;
    }
}

PerturbativeResult triple_integral(const RealFunction& f1, const RealFunction& f2, double omega_d,
                                   double t, const Couplings& g, const QuadratureOptions& opt) {
    return triple_integral_modulated([&f1](double s) { return std::cos(f1(s)); },
                                     [&f2](double s) { return std::cos(f2(s)); }, omega_d, t, g,
                                     opt);
}

double closed_form(ClosedFormKind kind, const ClosedFormParams& p, double t) {
    if (!(p.omega_d > 0.0)) throw ConfigError("omega_d must be positive", "omega_d");
    if (!(t >= 0.0)) throw ConfigError("time must be non-negative", "t");
    const double gg = std::abs(p.g.product());
    const double wd = p.omega_d;
    switch (kind) {
    case ClosedFormKind::stationary:
        return gg * t * t / wd;
    case ClosedFormKind::both_resonant:
        return gg * std::abs(std::sin(wd * t)) * t / (wd * wd);
    case ClosedFormKind::first_resonant:
        if (!(p.kv > 0.0)) throw ConfigError("first_resonant needs k v > 0 of the other qubit", "kv");
        return gg * std::abs(std::sin(p.kv * t)) * t / (2.0 * wd * p.kv);
    case ClosedFormKind::arccos: {
        if (p.n < 1) throw ConfigError("arccos closed form needs n >= 1", "n");
        if (!(p.tau_ns > 0.0)) throw ConfigError("arccos closed form needs tau > 0", "tau_ns");
        const double np1 = p.n + 1.0;
        return 4.0 * gg / (wd * np1 * np1) * std::pow(t / p.tau_ns, 2 * p.n) * t * t;
    }
    }
    throw ConfigError("unknown closed form kind");
}

ResonanceReport resonance_check(double nu1, double nu2, double omega_d, double rel_tol) {
    const auto close = [rel_tol](double a, double b) {
        return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
    };
    ResonanceReport r;
    r.condition1_q1 = close(std::numbers::pi * std::abs(nu1), omega_d);
    r.condition1_q2 = close(std::numbers::pi * std::abs(nu2), omega_d);
    r.condition2 = close(std::abs(nu1), std::abs(nu2));
    return r;
}

LinearityReport bounce_linearity_check(const RealFunction& f1, const RealFunction& f2,
                                       double omega_d, double tau_ns, int n_bounces,
                                       const Couplings& g, const QuadratureOptions& opt) {
    if (n_bounces < 1) throw ConfigError("need at least one bounce", "n_bounces");
    if (!(tau_ns > 0.0)) throw ConfigError("flight time must be positive", "tau_ns");
    LinearityReport r;
    for (int m = 1; m <= n_bounces; ++m) {
        r.concurrence.push_back(triple_integral(f1, f2, omega_d, m * tau_ns, g, opt).concurrence);
    }
    const double first = r.concurrence.front();
    for (int m = 1; m <= n_bounces; ++m) {
        const double ratio = first > 0.0 ? r.concurrence[m - 1] / first : 0.0;
        r.ratios.push_back(ratio);
        r.max_rel_deviation = std::max(r.max_rel_deviation, std::abs(ratio - m) / m);
    }
    return r;
}

} // namespace dce
