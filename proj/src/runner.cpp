#include "dce/runner.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "dce/errors.hpp"
#include "dce/perturbative.hpp"

namespace dce {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string axis_value_text(const Json& v) {
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_string()) return csv_quote(v.get<std::string>());
    return csv_quote(v.dump());
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError("not a number: '" + s + "'", what);
    return v;
}

} // namespace

std::string format_number(double x) {
    if (x == 0.0) x = 0.0; // drops the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

RunOutput execute(const RunConfig& config) {
    const RunSpec spec = config.to_run_spec();
    RunOutput out;
    if (!config.hilbert.automatic) {
        const HilbertConfig cfg(config.hilbert.n_fock);
        out.series.reserve(spec.grid.size());
        const EvolutionResult r = simulate(spec, cfg, [&](std::size_t, double t, const QuantumState& s) {
            out.series.append(observe(t, s, cfg));
        });
        out.stats = r.stats;
        out.n_fock_used = config.hilbert.n_fock;
        out.ladder = {config.hilbert.n_fock};
    } else {
        // every truncation of the ladder keeps its own series; the probe
        // sees snapshots in grid order
        std::map<int, TimeSeries> by_n;
        const SnapshotProbe probe = [&](const QuantumState& s, const HilbertConfig& cfg) {
            TimeSeries& ts = by_n[cfg.n_fock()];
            ts.append(observe(spec.grid[ts.size()], s, cfg));
            return ts.concurrence.back();
        };
        ConvergedRun run = converge_fock(spec, config.hilbert.start, config.hilbert.tol, probe,
                                         config.hilbert.max_n);
        out.series = std::move(by_n[run.n_fock]);
        out.stats = run.result.stats;
        out.n_fock_used = run.n_fock;
        out.ladder = run.ladder;
        out.residual = run.residual;
    }
    out.series.check_invariants();
    out.peak = find_max(out.series);
    return out;
}

std::string series_csv(const TimeSeries& s) {
    std::string out = series_header;
    out += '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& b = s.bell[i];
        const double row[] = {s.times[i],         s.concurrence[i],   b.phi_plus,
                              b.phi_minus,        b.psi_plus,         b.psi_minus,
                              s.photons[i][0],    s.photons[i][1],    s.qubit_pops[i][0],
                              s.qubit_pops[i][1]};
        for (std::size_t k = 0; k < std::size(row); ++k) {
            if (k) out += ',';
            out += format_number(row[k]);
        }
        out += '\n';
    }
    return out;
}

Json summary_json(const RunConfig& config, const RunOutput& out) {
    Json j;
    j["C_max"] = out.peak.value;
    j["t_max_ns"] = out.peak.time;
    j["n_fock_used"] = out.n_fock_used;
    j["integrator_stats"] = {{"method", to_string(config.integrator.method)},
                             {"accepted_steps", out.stats.accepted},
                             {"rejected_steps", out.stats.rejected},
                             {"rhs_evaluations", out.stats.rhs_evaluations},
                             {"max_error_estimate", out.stats.max_error_estimate},
                             {"max_norm_drift", out.stats.max_norm_drift}};
    if (config.hilbert.automatic) {
        j["convergence"] = {{"ladder", out.ladder}, {"residual", out.residual}};
    }
    j["config_echo"] = to_json(config);
    return j;
}

void write_run(const RunConfig& config, const RunOutput& out, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (config.outputs.series) {
        const auto path = dir / "timeseries.csv";
        write_text(path, series_csv(out.series));
        validate_series_csv(path, out.series.size());
    }
    if (config.outputs.summary) write_text(dir / "summary.json", summary_json(config, out).dump(2) + "\n");
}

void validate_series_csv(const std::filesystem::path& path, std::size_t expected_rows) {
    std::ifstream in(path);
    if (!in) throw StateError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != series_header) {
        throw StateError(path.string() + ": unexpected header");
    }
    std::size_t row = 0;
    constexpr double eps = 1e-9;
    while (std::getline(in, line)) {
        ++row;
        const auto cells = split(line, ',');
        const auto fail = [&](const std::string& what) {
            throw StateError(path.string() + " row " + std::to_string(row) + ": " + what);
        };
        if (cells.size() != 10) fail("expected 10 columns");
        double v[10];
        for (int k = 0; k < 10; ++k) {
            try {
                v[k] = parse_double(cells[k], "csv");
            } catch (const ConfigError&) {
                fail("unparseable value '" + cells[k] + "'");
            }
            if (!std::isfinite(v[k])) fail("non-finite value");
        }
        if (v[1] < -eps || v[1] > 1.0 + eps) fail("concurrence outside [0, 1]");
        double sum = 0.0;
        for (int k = 2; k < 6; ++k) {
            if (v[k] < -1e-6) fail("negative Bell population");
            sum += v[k];
        }
        if (std::abs(sum - 1.0) > 1e-6) fail("Bell populations sum to " + format_number(sum));
        if (v[6] < -eps || v[7] < -eps) fail("negative photon number");
        if (v[8] < -eps || v[8] > 1.0 + eps || v[9] < -eps || v[9] > 1.0 + eps) {
            fail("excitation probability outside [0, 1]");
        }
    }
    if (expected_rows && row != expected_rows) {
        throw StateError(path.string() + ": expected " + std::to_string(expected_rows) + " rows, found " +
                         std::to_string(row));
    }
}

std::string table_csv(const TrajectoryTable& table) {
    std::string out;
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
        if (k) out += ',';
        out += table.columns[k];
    }
    out += '\n';
    for (const auto& r : table.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k) out += ',';
            out += format_number(r[k]);
        }
        out += '\n';
    }
    return out;
}

void write_preset(const Preset& preset, const std::filesystem::path& dir, bool exec) {
    std::filesystem::create_directories(dir);
    for (const auto& t : preset.tables) write_text(dir / (t.name + ".csv"), table_csv(t));
    for (const auto& c : preset.runs) write_text(dir / (c.name + ".json"), to_json(c).dump(2) + "\n");
    if (!exec) return;
    for (const auto& c : preset.runs) write_run(c, execute(c), dir / c.name);
}

SweepResult run_sweep(const SweepConfig& sweep, int jobs) {
    struct Cell {
        std::optional<RunOutput> out;
        std::string error;
    };
    const std::size_t n = sweep.cells();
    std::vector<Cell> cells(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const RunConfig c = parse_run_config(sweep.cell(i));
                RunOutput out = execute(c);
                out.series.times.shrink_to_fit();
                cells[i].out = std::move(out);
            } catch (const std::exception& e) {
                cells[i].error = e.what();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs < 1 ? 1 : jobs, n));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }

    SweepResult r;
    r.cells = n;
    r.csv = "cell";
    for (const auto& a : sweep.axes) r.csv += "," + csv_quote(a.path);
    r.csv += ",C_max,t_max_ns,phi_plus,phi_minus,psi_plus,psi_minus,n_fock_used,error\n";
    for (std::size_t i = 0; i < n; ++i) {
        r.csv += std::to_string(i);
        for (const auto& v : sweep.cell_values(i)) r.csv += "," + axis_value_text(v);
        const Cell& c = cells[i];
        if (c.out) {
            const auto& b = c.out->series.bell.back();
            for (double x : {c.out->peak.value, c.out->peak.time, b.phi_plus, b.phi_minus, b.psi_plus,
                             b.psi_minus}) {
                r.csv += "," + format_number(x);
            }
            r.csv += "," + std::to_string(c.out->n_fock_used) + ",\n";
        } else {
            ++r.failures;
            r.csv += ",,,,,,,," + csv_quote(c.error) + "\n";
        }
    }
    return r;
}

std::vector<double> parse_time_list(const std::string& text) {
    std::vector<double> out;
    if (text.find_first_not_of(" \t") == std::string::npos) return out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("range must be start:stop:step", "t");
        const double a = parse_double(parts[0], "t"), b = parse_double(parts[1], "t"),
                     h = parse_double(parts[2], "t");
        if (!(h > 0.0) || b < a) throw ConfigError("range needs step > 0 and stop >= start", "t");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
        if (count > 10'000'000) throw ConfigError("range has too many points", "t");
        for (std::size_t i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * h);
    } else {
        for (const auto& p : split(text, ',')) out.push_back(parse_double(p, "t"));
    }
    for (double t : out) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("times must be finite and non-negative", "t");
    }
    return out;
}

std::string perturbative_csv(const RunConfig& config, const std::vector<double>& times) {
    const SystemParams p = config.system.to_params();
    const Trajectory a = config.trajectories[0].build();
    const Trajectory b = config.trajectories[1].build();
    const Couplings g{p.g0, p.g1, p.g2};
    const RealFunction m1 = a.modulation_function();
    const RealFunction m2 = b.modulation_function();

    // closed form, when one applies
    ClosedFormKind kind = ClosedFormKind::stationary;
    bool has_form = false;
    ClosedFormParams cf;
    cf.g = g;
    cf.omega_d = p.omega_d;
    const TrajectorySpec& s1 = config.trajectories[0];
    const TrajectorySpec& s2 = config.trajectories[1];
    // the resonant envelopes assume m = +-cos(pi nu t) throughout, i.e. a
    // wall start and no bounce sign
    const auto at_end = [](const TrajectorySpec& s) {
        return s.shift_ns == 0.0 && (s.u0 == 0.0 || s.u0 == 1.0) && !s.apply_bounce_sign;
    };
    if (s1.type == TrajectoryKind::stationary && s2.type == TrajectoryKind::stationary) {
        has_form = true;
        cf.g.g1 *= a.modulation(0.0).value;
        cf.g.g2 *= b.modulation(0.0).value;
    } else if (s1.type == TrajectoryKind::constant_velocity && s2.type == TrajectoryKind::constant_velocity &&
               at_end(s1) && at_end(s2)) {
        const ResonanceReport r = resonance_check(s1.nu, s2.nu, p.omega_d);
        if (r.condition1_q1 && r.condition1_q2) {
            kind = ClosedFormKind::both_resonant;
            has_form = true;
        } else if (r.condition1_q1 != r.condition1_q2) {
            kind = ClosedFormKind::first_resonant;
            cf.kv = std::numbers::pi * std::abs(r.condition1_q1 ? s2.nu : s1.nu);
            has_form = cf.kv > 0.0;
        }
    } else if (s1.type == TrajectoryKind::arccos_bounce && s2.type == TrajectoryKind::arccos_bounce &&
               s1.n == s2.n && s1.tau_ns == s2.tau_ns && s1.shift_ns == 0.0 && s2.shift_ns == 0.0) {
        kind = ClosedFormKind::arccos;
        has_form = true;
        cf.n = s1.n;
        cf.tau_ns = s1.tau_ns;
    }

    std::string out = "t_ns,C_oracle,C_closed_form,rel_diff\n";
    for (double t : times) {
        const double c = triple_integral_modulated(m1, m2, p.omega_d, t, g).concurrence;
        out += format_number(t) + "," + format_number(c) + ",";
        if (has_form) {
            const double ref = closed_form(kind, cf, t);
            out += format_number(ref) + ",";
            if (ref != 0.0) out += format_number(std::abs(c - ref) / ref);
        } else {
            out += ",";
        }
        out += "\n";
    }
    return out;
}

} // namespace dce
