#include "dce/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dce/errors.hpp"

namespace dce {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Reads one JSON object, remembering which keys were consumed so that typos
// are reported instead of silently ignored.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "config" : path_);
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const Json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError("required field missing", join(path_, key));
        return j_.at(key);
    }

    double number(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_number()) throw ConfigError("expected a number", join(path_, key));
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError("must be finite", join(path_, key));
        return x;
    }

    double number(const std::string& key, double fallback) {
        used_.insert(key);
        return has(key) ? number(key) : fallback;
    }

    std::int64_t integer(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError("expected an integer", join(path_, key));
        return v.get<std::int64_t>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        used_.insert(key);
        return has(key) ? integer(key) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError("expected true or false", join(path_, key));
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError("expected a string", join(path_, key));
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_array()) throw ConfigError("expected an array of numbers", join(path_, key));
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ConfigError("expected a number", join(path_, key) + "." + std::to_string(i));
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    void mark(const std::string& key) { used_.insert(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError("unknown field", join(path_, it.key()));
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// Re-raise a ConfigError from a lower layer with its field under `prefix`.
template <class F>
auto with_prefix(const std::string& prefix, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(e.message(), e.field().empty() ? prefix : prefix + "." + e.field());
    }
}

SystemSpec parse_system(const Json& j) {
    ObjectReader r(j, "system");
    SystemSpec s;
    s.omega_c1 = r.number("omega_c1");
    s.omega_c2 = r.number("omega_c2");
    s.omega_q1 = r.number("omega_q1");
    s.omega_q2 = r.number("omega_q2");
    s.g1 = r.number("g1");
    s.g2 = r.number("g2");
    s.g0 = r.number("g0");
    s.omega_d = r.number("omega_d");
    s.coupling_model = coupling_model_from_string(r.string("coupling_model", "squeezing"));
    s.squeeze_phase_sign = static_cast<int>(r.integer("squeeze_phase_sign", -1));
    s.drop_zero_point = r.boolean("drop_zero_point", true);
    s.allow_detuned_drive = r.boolean("allow_detuned_drive", false);
    r.finish();
    s.to_params().validate();
    return s;
}

HilbertSpec parse_hilbert(const Json& j) {
    ObjectReader r(j, "hilbert");
    HilbertSpec h;
    const Json& n = r.raw("n_fock");
    if (n.is_string()) {
        if (n.get<std::string>() != "auto") throw ConfigError("expected an integer or \"auto\"", "hilbert.n_fock");
        h.automatic = true;
    } else if (n.is_number_integer()) {
        h.n_fock = n.get<int>();
        if (h.n_fock < 2) throw ConfigError("must be at least 2", "hilbert.n_fock");
    } else {
        throw ConfigError("expected an integer or \"auto\"", "hilbert.n_fock");
    }
    h.start = static_cast<int>(r.integer("start", 4));
    h.tol = r.number("tol", 1e-3);
    h.max_n = static_cast<int>(r.integer("max", 12));
    r.finish();
    if (h.start < 2) throw ConfigError("must be at least 2", "hilbert.start");
    if (!(h.tol > 0.0)) throw ConfigError("must be positive", "hilbert.tol");
    if (h.max_n < h.start) throw ConfigError("must not be below start", "hilbert.max");
    return h;
}

TrajectorySpec parse_trajectory(const Json& j, const std::string& path) {
    ObjectReader r(j, path);
    TrajectorySpec t;
    t.type = with_prefix(r.path("type"), [&] { return trajectory_kind_from_string(r.string("type", "static")); });
    t.u0 = r.number("u0", 0.0);
    t.nu = r.number("nu", 0.0);
    t.n = static_cast<int>(r.integer("n", 1));
    t.tau_ns = r.number("tau_ns", 0.0);
    t.shift_ns = r.number("shift_ns", 0.0);
    t.mirrored = r.boolean("mirrored", false);
    t.apply_bounce_sign = r.boolean("apply_bounce_sign", true);
    if (t.type == TrajectoryKind::sampled) {
        t.times_ns = r.numbers("times_ns");
        t.u = r.numbers("u");
    }
    r.finish();
    if (t.type == TrajectoryKind::constant_velocity && !r.has("nu")) {
        throw ConfigError("required field missing", r.path("nu"));
    }
    if (t.type == TrajectoryKind::arccos_bounce && !r.has("tau_ns")) {
        throw ConfigError("required field missing", r.path("tau_ns"));
    }
    if (t.shift_ns < 0.0) throw ConfigError("must be non-negative", r.path("shift_ns"));
    with_prefix(path, [&] { return t.build(); });
    return t;
}

NoiseParams parse_noise(const Json& j) {
    NoiseParams n;
    if (j.is_null()) return n;
    ObjectReader r(j, "noise");
    if (r.has("t1_q")) n.t1_q = r.number("t1_q");
    if (r.has("tphi_q")) n.tphi_q = r.number("tphi_q");
    if (r.has("t_cav")) n.t_cav = r.number("t_cav");
    r.mark("t1_q"), r.mark("tphi_q"), r.mark("t_cav");
    r.finish();
    n.validate();
    return n;
}

GridSpec parse_grid(const Json& j) {
    ObjectReader r(j, "grid");
    GridSpec g;
    g.t_end_ns = r.number("t_end_ns");
    const std::int64_t n = r.integer("n_samples");
    r.finish();
    if (!(g.t_end_ns > 0.0)) throw ConfigError("must be positive", "grid.t_end_ns");
    if (n < 2 || n > 10'000'000) throw ConfigError("must be between 2 and 1e7", "grid.n_samples");
    g.n_samples = static_cast<std::size_t>(n);
    return g;
}

IntegratorSpec parse_integrator(const Json& j) {
    ObjectReader r(j, "integrator");
    IntegratorSpec s;
    s.method = with_prefix("integrator.method", [&] {
        return stepper_from_string(r.string("method", to_string(StepperKind::dormand_prince45)));
    });
    s.rtol = r.number("rtol", s.rtol);
    s.atol = r.number("atol", s.atol);
    s.fixed_step_ns = r.number("fixed_step_ns", s.fixed_step_ns);
    s.max_step_ns = r.number("max_step_ns", s.max_step_ns);
    r.finish();
    if (!(s.rtol > 0.0)) throw ConfigError("must be positive", "integrator.rtol");
    if (!(s.atol > 0.0)) throw ConfigError("must be positive", "integrator.atol");
    if (!(s.fixed_step_ns > 0.0)) throw ConfigError("must be positive", "integrator.fixed_step_ns");
    if (s.max_step_ns < 0.0) throw ConfigError("must be non-negative", "integrator.max_step_ns");
    return s;
}

OutputSpec parse_outputs(const Json& j) {
    ObjectReader r(j, "outputs");
    OutputSpec o;
    o.series = r.boolean("series", true);
    o.summary = r.boolean("summary", true);
    r.finish();
    return o;
}

Json trajectory_json(const TrajectorySpec& t) {
    Json j;
    j["type"] = to_string(t.type);
    switch (t.type) {
    case TrajectoryKind::stationary:
        j["u0"] = t.u0;
        break;
    case TrajectoryKind::constant_velocity:
        j["u0"] = t.u0;
        j["nu"] = t.nu;
        break;
    case TrajectoryKind::arccos_bounce:
        j["n"] = t.n;
        j["tau_ns"] = t.tau_ns;
        break;
    case TrajectoryKind::sampled:
        j["times_ns"] = t.times_ns;
        j["u"] = t.u;
        break;
    }
    j["shift_ns"] = t.shift_ns;
    j["mirrored"] = t.mirrored;
    j["apply_bounce_sign"] = t.apply_bounce_sign;
    return j;
}

std::optional<std::size_t> parse_index(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
}

} // namespace

SystemParams SystemSpec::to_params() const {
    SystemParams p;
    p.omega_c1 = two_pi * omega_c1;
    p.omega_c2 = two_pi * omega_c2;
    p.omega_q1 = two_pi * omega_q1;
    p.omega_q2 = two_pi * omega_q2;
    p.g1 = two_pi * g1;
    p.g2 = two_pi * g2;
    p.g0 = two_pi * g0;
    p.omega_d = two_pi * omega_d;
    p.coupling_model = coupling_model;
    p.squeeze_phase_sign = squeeze_phase_sign;
    p.drop_zero_point = drop_zero_point;
    p.allow_detuned_drive = allow_detuned_drive;
    return p;
}

Trajectory TrajectorySpec::build() const {
    Trajectory t = [&] {
        switch (type) {
        case TrajectoryKind::stationary:
            return Trajectory::stationary(u0);
        case TrajectoryKind::constant_velocity:
            return Trajectory::constant_velocity(u0, nu, apply_bounce_sign);
        case TrajectoryKind::arccos_bounce:
            return Trajectory::arccos_bounce(n, tau_ns, apply_bounce_sign);
        case TrajectoryKind::sampled:
            return Trajectory::sampled(times_ns, u);
        }
        throw ConfigError("unknown trajectory type", "type");
    }();
    if (shift_ns != 0.0) t = t.shifted(shift_ns);
    if (mirrored) t = t.mirrored();
    return t;
}

RunSpec RunConfig::to_run_spec() const {
    RunSpec spec;
    spec.system = system.to_params();
    spec.traj1 = trajectories[0].build();
    spec.traj2 = trajectories[1].build();
    spec.noise = noise;
    spec.grid = uniform_grid(grid.t_end_ns, grid.n_samples);
    spec.integrator.stepper = integrator.method;
    spec.integrator.rtol = integrator.rtol;
    spec.integrator.atol = integrator.atol;
    spec.integrator.fixed_step_ns = integrator.fixed_step_ns;
    spec.integrator.max_step_ns = integrator.max_step_ns;
    spec.integrator.store_states = false;
    return spec;
}

std::string to_string(StepperKind kind) {
    return kind == StepperKind::dormand_prince45 ? "dormand_prince45" : "rk4_fixed";
}

StepperKind stepper_from_string(const std::string& name) {
    if (name == "dormand_prince45") return StepperKind::dormand_prince45;
    if (name == "rk4_fixed") return StepperKind::rk4_fixed;
    throw ConfigError("unknown integrator method '" + name + "'");
}

RunConfig parse_run_config(const Json& j) {
    ObjectReader r(j, "");
    RunConfig c;
    c.name = r.string("name", "run");
    c.system = parse_system(r.raw("system"));
    if (r.has("hilbert")) c.hilbert = parse_hilbert(r.raw("hilbert"));
    const Json& trajs = r.raw("trajectories");
    if (!trajs.is_array() || trajs.size() != 2) {
        throw ConfigError("expected an array of two trajectory records", "trajectories");
    }
    for (std::size_t i = 0; i < 2; ++i) {
        c.trajectories[i] = parse_trajectory(trajs[i], "trajectories." + std::to_string(i));
    }
    if (j.contains("noise")) c.noise = parse_noise(r.raw("noise"));
    if (r.has("grid")) c.grid = parse_grid(r.raw("grid"));
    if (r.has("integrator")) c.integrator = parse_integrator(r.raw("integrator"));
    if (r.has("outputs")) c.outputs = parse_outputs(r.raw("outputs"));
    for (const char* key : {"hilbert", "grid", "integrator", "outputs"}) r.mark(key);
    c.seed = r.integer("seed", 0);
    r.finish();
    return c;
}

Json to_json(const RunConfig& c) {
    Json j;
    j["name"] = c.name;
    Json s;
    s["omega_c1"] = c.system.omega_c1;
    s["omega_c2"] = c.system.omega_c2;
    s["omega_q1"] = c.system.omega_q1;
    s["omega_q2"] = c.system.omega_q2;
    s["g1"] = c.system.g1;
    s["g2"] = c.system.g2;
    s["g0"] = c.system.g0;
    s["omega_d"] = c.system.omega_d;
    s["coupling_model"] = to_string(c.system.coupling_model);
    s["squeeze_phase_sign"] = c.system.squeeze_phase_sign;
    s["drop_zero_point"] = c.system.drop_zero_point;
    s["allow_detuned_drive"] = c.system.allow_detuned_drive;
    j["system"] = s;
    Json h;
    if (c.hilbert.automatic) {
        h["n_fock"] = "auto";
        h["start"] = c.hilbert.start;
        h["tol"] = c.hilbert.tol;
        h["max"] = c.hilbert.max_n;
    } else {
        h["n_fock"] = c.hilbert.n_fock;
    }
    j["hilbert"] = h;
    j["trajectories"] = Json::array({trajectory_json(c.trajectories[0]), trajectory_json(c.trajectories[1])});
    if (c.noise.empty()) {
        j["noise"] = nullptr;
    } else {
        Json n = Json::object();
        if (c.noise.t1_q) n["t1_q"] = *c.noise.t1_q;
        if (c.noise.tphi_q) n["tphi_q"] = *c.noise.tphi_q;
        if (c.noise.t_cav) n["t_cav"] = *c.noise.t_cav;
        j["noise"] = n;
    }
    j["grid"] = {{"t_end_ns", c.grid.t_end_ns}, {"n_samples", c.grid.n_samples}};
    j["integrator"] = {{"method", to_string(c.integrator.method)},
                       {"rtol", c.integrator.rtol},
                       {"atol", c.integrator.atol},
                       {"fixed_step_ns", c.integrator.fixed_step_ns},
                       {"max_step_ns", c.integrator.max_step_ns}};
    j["outputs"] = {{"series", c.outputs.series}, {"summary", c.outputs.summary}};
    j["seed"] = c.seed;
    return j;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string(), "config");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what(), "config");
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json_file(path));
}

void set_path(Json& j, const std::string& path, const Json& value) {
    if (path.empty()) throw ConfigError("empty path", "axes.path");
    Json* cur = &j;
    std::string walked;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& key = parts[i];
        walked = join(walked, key);
        const bool last = i + 1 == parts.size();
        if (cur->is_array()) {
            const auto idx = parse_index(key);
            if (!idx || *idx >= cur->size()) throw ConfigError("no such array element", walked);
            cur = &(*cur)[*idx];
        } else {
            if (cur->is_null()) *cur = Json::object();
            if (!cur->is_object()) throw ConfigError("not an object", walked);
            if (!last && !cur->contains(key)) throw ConfigError("no such field", walked);
            cur = &(*cur)[key];
        }
    }
    *cur = value;
}

std::size_t SweepConfig::cells() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<Json> SweepConfig::cell_values(std::size_t index) const {
    std::vector<Json> out(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const std::size_t m = axes[k].values.size();
        out[k] = axes[k].values[index % m];
        index /= m;
    }
    return out;
}

Json SweepConfig::cell(std::size_t index) const {
    Json j = base;
    const auto values = cell_values(index);
    for (std::size_t k = 0; k < axes.size(); ++k) set_path(j, axes[k].path, values[k]);
    return j;
}

SweepConfig parse_sweep_config(const Json& j) {
    ObjectReader r(j, "");
    SweepConfig s;
    s.base = r.raw("base");
    if (!s.base.is_object()) throw ConfigError("expected an object", "base");
    const std::int64_t cap = r.integer("max_cells", 10000);
    if (cap < 1) throw ConfigError("must be positive", "max_cells");
    s.max_cells = static_cast<std::size_t>(cap);
    if (r.has("axes")) {
        const Json& axes = r.raw("axes");
        if (!axes.is_array()) throw ConfigError("expected an array", "axes");
        if (axes.size() > 2) throw ConfigError("at most two axes are supported", "axes");
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const std::string p = "axes." + std::to_string(i);
            ObjectReader a(axes[i], p);
            SweepAxis axis;
            const Json& path = a.raw("path");
            if (!path.is_string()) throw ConfigError("expected a string", p + ".path");
            axis.path = path.get<std::string>();
            const Json& values = a.raw("values");
            if (!values.is_array() || values.empty()) throw ConfigError("expected a non-empty array", p + ".values");
            axis.values.assign(values.begin(), values.end());
            a.finish();
            Json probe = s.base;
            with_prefix(p + ".path", [&] { set_path(probe, axis.path, axis.values.front()); return 0; });
            s.axes.push_back(std::move(axis));
        }
    }
    r.mark("axes");
    r.finish();
    if (s.cells() > s.max_cells) {
        throw ConfigError("sweep has " + std::to_string(s.cells()) + " cells, above the cap of " +
                              std::to_string(s.max_cells),
                          "axes");
    }
    return s;
}

} // namespace dce
