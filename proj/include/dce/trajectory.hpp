#pragma once

// Simulated qubit paths in normalized cavity coordinates u = x / L in [0, 1].
// The coupling modulation is cos(pi u), i.e. cos(k x) with k = pi / L.

#include <functional>
#include <string>
#include <vector>

namespace dce {

enum class TrajectoryKind { stationary, constant_velocity, arccos_bounce, sampled };

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

struct Modulation {
    double value = 1.0;  // in [-1, 1]
    int sign_flips = 0;  // bounces so far
};

class Trajectory {
public:
    static Trajectory stationary(double u0);

    /// Triangle-wave motion u0 + nu t folded into [0, 1]. nu in 1/ns, signed.
    static Trajectory constant_velocity(double u0, double nu, bool apply_bounce_sign = true);

    /// u = arccos(2 s^n - 1) / pi on even traversals and 1 - that on odd ones,
    /// with s = t/tau - floor(t/tau). Starts at u = 1 and reaches 0 at tau.
    static Trajectory arccos_bounce(int n, double tau_ns, bool apply_bounce_sign = true);

    /// Piecewise-linear path through (t, u) samples; held constant past the end.
    static Trajectory sampled(std::vector<double> times_ns, std::vector<double> u);

    /// Same path evaluated at t + shift_ns.
    Trajectory shifted(double shift_ns) const;

    /// u -> 1 - u.
    Trajectory mirrored() const;

    TrajectoryKind kind() const noexcept { return kind_; }
    double u0() const noexcept { return u0_; }
    double nu() const noexcept { return nu_; }
    int n() const noexcept { return n_; }
    double tau_ns() const noexcept { return tau_; }
    double shift_ns() const noexcept { return shift_; }
    bool is_mirrored() const noexcept { return mirrored_; }
    bool applies_bounce_sign() const noexcept { return apply_bounce_sign_; }
    const std::vector<double>& sample_times() const noexcept { return sample_t_; }
    const std::vector<double>& sample_values() const noexcept { return sample_u_; }

    /// Traversal time (time between bounces), or +inf for paths that never bounce.
    double traversal_time() const noexcept;

    double position(double t) const { return position(t, t); }

    /// Position on the branch (traversal) that contains `t_branch`. Integrators
    /// pass an interior point of the current step interval so that a step
    /// ending exactly on a bounce sees the left limit.
    double position(double t, double t_branch) const;

    Modulation modulation(double t) const { return modulation(t, t); }
    Modulation modulation(double t, double t_branch) const;

    /// t -> pi * position(t); cos of it is the unsigned modulation.
    std::function<double(double)> phase_function() const;

    /// t -> modulation(t).value, including bounce signs.
    std::function<double(double)> modulation_function() const;

    /// Times in (0, t_end) where the path is not smooth (bounces, samples).
    std::vector<double> breakpoints(double t_end) const;

private:
    Trajectory() = default;
    void check() const;

    struct Branch {
        double u = 0.0;
        int bounces = 0;
    };
    Branch evaluate(double t, double t_branch) const;

    TrajectoryKind kind_ = TrajectoryKind::stationary;
    double u0_ = 0.0;
    double nu_ = 0.0;
    int n_ = 1;
    double tau_ = 1.0;
    double shift_ = 0.0;
    bool mirrored_ = false;
    bool apply_bounce_sign_ = true;
    std::vector<double> sample_t_;
    std::vector<double> sample_u_;
};

} // namespace dce
