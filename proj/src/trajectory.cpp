#include "dce/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dce/errors.hpp"

namespace dce {

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
    case TrajectoryKind::stationary:
        return "static";
    case TrajectoryKind::constant_velocity:
        return "constant_velocity";
    case TrajectoryKind::arccos_bounce:
        return "arccos_bounce";
    case TrajectoryKind::sampled:
        return "sampled";
    }
    return "unknown";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
    if (name == "static") return TrajectoryKind::stationary;
    if (name == "constant_velocity") return TrajectoryKind::constant_velocity;
    if (name == "arccos_bounce") return TrajectoryKind::arccos_bounce;
    if (name == "sampled") return TrajectoryKind::sampled;
    throw ConfigError("unknown trajectory type '" + name + "'");
}

Trajectory Trajectory::stationary(double u0) {
    Trajectory t;
    t.kind_ = TrajectoryKind::stationary;
    t.u0_ = u0;
    t.check();
    return t;
}

Trajectory Trajectory::constant_velocity(double u0, double nu, bool apply_bounce_sign) {
    Trajectory t;
    t.kind_ = TrajectoryKind::constant_velocity;
    t.u0_ = u0;
    t.nu_ = nu;
    t.apply_bounce_sign_ = apply_bounce_sign;
    t.check();
    return t;
}

Trajectory Trajectory::arccos_bounce(int n, double tau_ns, bool apply_bounce_sign) {
    Trajectory t;
    t.kind_ = TrajectoryKind::arccos_bounce;
    t.n_ = n;
    t.tau_ = tau_ns;
    t.u0_ = 1.0;
    t.apply_bounce_sign_ = apply_bounce_sign;
    t.check();
    return t;
}

Trajectory Trajectory::sampled(std::vector<double> times_ns, std::vector<double> u) {
    Trajectory t;
    t.kind_ = TrajectoryKind::sampled;
    t.sample_t_ = std::move(times_ns);
    t.sample_u_ = std::move(u);
    if (!t.sample_u_.empty()) t.u0_ = t.sample_u_.front();
    t.apply_bounce_sign_ = false;
    t.check();
    return t;
}

Trajectory Trajectory::shifted(double shift_ns) const {
    if (!(shift_ns >= 0.0) || !std::isfinite(shift_ns)) {
        throw ConfigError("trajectory shift must be finite and non-negative", "shift_ns");
    }
    Trajectory t = *this;
    t.shift_ += shift_ns;
    return t;
}

Trajectory Trajectory::mirrored() const {
    Trajectory t = *this;
    t.mirrored_ = !t.mirrored_;
    return t;
}

void Trajectory::check() const {
    const auto in_unit = [](double u) { return std::isfinite(u) && u >= 0.0 && u <= 1.0; };
    switch (kind_) {
    case TrajectoryKind::stationary:
        if (!in_unit(u0_)) throw ConfigError("u0 must lie in [0, 1]", "u0");
        break;
    case TrajectoryKind::constant_velocity:
        if (!in_unit(u0_)) throw ConfigError("u0 must lie in [0, 1]", "u0");
        if (!std::isfinite(nu_)) throw ConfigError("nu must be finite", "nu");
        break;
    case TrajectoryKind::arccos_bounce:
        if (n_ < 1) throw ConfigError("arccos exponent n must be >= 1", "n");
        if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
            throw ConfigError("flight time tau must be positive", "tau_ns");
        }
        break;
    case TrajectoryKind::sampled:
        if (sample_t_.empty() || sample_t_.size() != sample_u_.size()) {
            throw ConfigError("sampled trajectory needs equal, non-empty time and u arrays",
                              "samples");
        }
        for (std::size_t i = 0; i < sample_t_.size(); ++i) {
            if (!in_unit(sample_u_[i])) throw ConfigError("sample u must lie in [0, 1]", "samples");
            if (!std::isfinite(sample_t_[i]) || (i > 0 && !(sample_t_[i] > sample_t_[i - 1]))) {
                throw ConfigError("sample times must be finite and strictly increasing", "samples");
            }
        }
        break;
    }
}

double Trajectory::traversal_time() const noexcept {
    switch (kind_) {
    case TrajectoryKind::constant_velocity:
        return nu_ == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(nu_);
    case TrajectoryKind::arccos_bounce:
        return tau_;
    default:
        return std::numeric_limits<double>::infinity();
    }
}

namespace {

bool is_odd(long long k) { return (k % 2 + 2) % 2 == 1; }

// Fold branch of the unfolded coordinate x: [k, k+1) when moving up,
// (k, k+1] when moving down, so a point exactly on a wall belongs to the
// traversal that starts there.
long long cv_branch(double x, double nu) {
    return nu >= 0.0 ? static_cast<long long>(std::floor(x))
                     : static_cast<long long>(std::ceil(x)) - 1;
}

} // namespace

Trajectory::Branch Trajectory::evaluate(double t, double t_branch) const {
    const double te = t + shift_;
    const double tb = t_branch + shift_;
    Branch out;
    switch (kind_) {
    case TrajectoryKind::stationary:
        out.u = u0_;
        break;
    case TrajectoryKind::constant_velocity: {
        if (nu_ == 0.0) {
            out.u = u0_;
            break;
        }
        const double x = u0_ + nu_ * te;
        const long long k = cv_branch(u0_ + nu_ * tb, nu_);
        const long long k0 = cv_branch(u0_, nu_);
        const double local = x - static_cast<double>(k);
        out.u = is_odd(k) ? 1.0 - local : local;
        out.bounces = static_cast<int>(std::llabs(k - k0));
        break;
    }
    case TrajectoryKind::arccos_bounce: {
        const long long k = static_cast<long long>(std::floor(tb / tau_));
        const double s = std::clamp(te / tau_ - static_cast<double>(k), 0.0, 1.0);
        const double arg = std::clamp(2.0 * std::pow(s, n_) - 1.0, -1.0, 1.0);
        const double f = std::acos(arg) / std::numbers::pi;
        out.u = is_odd(k) ? 1.0 - f : f;
        out.bounces = static_cast<int>(std::llabs(k));
        break;
    }
    case TrajectoryKind::sampled: {
        if (te <= sample_t_.front()) {
            out.u = sample_u_.front();
        } else if (te >= sample_t_.back()) {
            out.u = sample_u_.back();
        } else {
            const auto it = std::upper_bound(sample_t_.begin(), sample_t_.end(), te);
            const auto i = static_cast<std::size_t>(it - sample_t_.begin());
            const double w = (te - sample_t_[i - 1]) / (sample_t_[i] - sample_t_[i - 1]);
            out.u = (1.0 - w) * sample_u_[i - 1] + w * sample_u_[i];
        }
        break;
    }
    }
    out.u = std::clamp(out.u, 0.0, 1.0);
    if (mirrored_) out.u = 1.0 - out.u;
    return out;
}

double Trajectory::position(double t, double t_branch) const {
    if (!(t >= 0.0)) throw ConfigError("trajectory evaluated at negative time");
    return evaluate(t, t_branch).u;
}

Modulation Trajectory::modulation(double t, double t_branch) const {
    if (!(t >= 0.0)) throw ConfigError("trajectory evaluated at negative time");
    const Branch b = evaluate(t, t_branch);
    Modulation m;
    m.sign_flips = b.bounces;
    m.value = std::cos(std::numbers::pi * b.u);
    if (apply_bounce_sign_ && b.bounces % 2 == 1) m.value = -m.value;
    return m;
}

std::function<double(double)> Trajectory::phase_function() const {
    return [traj = *this](double t) { return std::numbers::pi * traj.position(t); };
}

std::function<double(double)> Trajectory::modulation_function() const {
    return [traj = *this](double t) { return traj.modulation(t).value; };
}

std::vector<double> Trajectory::breakpoints(double t_end) const {
    std::vector<double> out;
    switch (kind_) {
    case TrajectoryKind::constant_velocity: {
        if (nu_ == 0.0) break;
        // unfolded x(t) = u0 + nu (t + shift) crosses integers
        const double x_start = u0_ + nu_ * shift_;
        const double x_end = u0_ + nu_ * (t_end + shift_);
        const double lo = std::min(x_start, x_end);
        const double hi = std::max(x_start, x_end);
        for (double j = std::floor(lo) + 1.0; j < hi; j += 1.0) {
            const double t = (j - u0_) / nu_ - shift_;
            if (t > 0.0 && t < t_end) out.push_back(t);
        }
        break;
    }
    case TrajectoryKind::arccos_bounce: {
        for (double k = std::floor(shift_ / tau_) + 1.0;; k += 1.0) {
            const double t = k * tau_ - shift_;
            if (t >= t_end) break;
            if (t > 0.0) out.push_back(t);
        }
        break;
    }
    case TrajectoryKind::sampled:
        for (double s : sample_t_) {
            const double t = s - shift_;
            if (t > 0.0 && t < t_end) out.push_back(t);
        }
        break;
    case TrajectoryKind::stationary:
        break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace dce
