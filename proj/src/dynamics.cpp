#include "dce/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <Eigen/Sparse>

#include "dce/errors.hpp"

namespace dce {

void NoiseParams::validate() const {
    const auto check = [](const std::optional<double>& v, const char* field) {
        if (v && (!(*v > 0.0) || !std::isfinite(*v))) {
            throw ConfigError("must be a positive time in ns", std::string("noise.") + field);
        }
    };
    check(t1_q, "t1_q");
    check(tphi_q, "tphi_q");
    check(t_cav, "t_cav");
}

std::vector<double> uniform_grid(double t_end, std::size_t n_samples) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("must be positive", "grid.t_end_ns");
    if (n_samples < 2) throw ConfigError("need at least 2 samples", "grid.n_samples");
    std::vector<double> grid(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        grid[i] = t_end * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    }
    grid.back() = t_end;
    return grid;
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
using State = DenseMatrix; // column vector for pure states, square for density matrices

// H(t) expressed in the chosen frame as a sparse matrix with a fixed pattern.
// In the interaction frame every entry (r, c) of a driven term picks up the
// phase e^{i (E_r - E_c) t}; those rates are cached and evaluated once per call.
class Generator {
public:
    // `position` relabels basis index k as position[k] (identity when empty).
    Generator(const HamiltonianTerms& terms, Frame frame, const std::vector<Index>& position = {})
        : terms_(&terms) {
        const Index dim = terms.dim();
        const bool interaction = frame == Frame::interaction && terms.static_part().is_diagonal();
        energies_ = Eigen::VectorXd::Zero(dim);
        if (interaction) energies_ = terms.static_part().matrix().diagonal().real();
        const auto pos = [&](Index k) { return position.empty() ? k : position[k]; };

        struct Raw {
            Index row, col;
            int coef;
            Complex value;
        };
        std::vector<Raw> raw;
        const auto collect = [&](const DenseMatrix& m, int coef) {
            for (Index c = 0; c < m.cols(); ++c) {
                for (Index r = 0; r < m.rows(); ++r) {
                    if (m(r, c) != Complex(0.0, 0.0)) raw.push_back({r, c, coef, m(r, c)});
                }
            }
        };
        if (!interaction) collect(terms.static_part().matrix(), 0);
        const auto& driven = terms.driven_terms();
        for (std::size_t j = 0; j < driven.size(); ++j) {
            const int base = 1 + 2 * static_cast<int>(j);
            collect(driven[j].op.matrix(), base);
            if (!driven[j].self_adjoint) collect(driven[j].op.matrix().adjoint(), base + 1);
        }

        std::vector<Eigen::Triplet<Complex>> pattern;
        pattern.reserve(raw.size());
        for (const auto& r : raw) pattern.emplace_back(pos(r.row), pos(r.col), Complex(1.0, 0.0));
        h_.resize(dim, dim);
        h_.setFromTriplets(pattern.begin(), pattern.end());
        h_.makeCompressed();

        std::map<double, int> rate_index;
        contributions_.reserve(raw.size());
        for (const auto& r : raw) {
            const double rate = energies_(r.row) - energies_(r.col);
            auto [it, inserted] = rate_index.try_emplace(rate, static_cast<int>(rates_.size()));
            if (inserted) rates_.push_back(rate);
            contributions_.push_back({slot(pos(r.row), pos(r.col)), r.coef, it->second, r.value});
        }
        coefs_.assign(1 + 2 * driven.size(), Complex(1.0, 0.0));
        phases_.resize(rates_.size());
    }

    const SparseMatrix& at(double t, double t_branch) {
        const auto& driven = terms_->driven_terms();
        for (std::size_t j = 0; j < driven.size(); ++j) {
            const Complex c = driven[j].coefficient(t, t_branch);
            coefs_[1 + 2 * j] = driven[j].self_adjoint ? Complex(c.real(), 0.0) : c;
            coefs_[2 + 2 * j] = std::conj(c);
        }
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            phases_[k] = rates_[k] == 0.0 ? Complex(1.0, 0.0)
                                          : Complex(std::cos(rates_[k] * t), std::sin(rates_[k] * t));
        }
        Complex* values = h_.valuePtr();
        std::fill(values, values + h_.nonZeros(), Complex(0.0, 0.0));
        for (const auto& c : contributions_) {
            values[c.slot] += coefs_[c.coef] * phases_[c.rate] * c.value;
        }
        return h_;
    }

    /// Static energies in the original basis order (zero in the lab frame).
    const Eigen::VectorXd& energies() const noexcept { return energies_; }
    bool interaction() const noexcept { return energies_.cwiseAbs().maxCoeff() > 0.0; }

private:
    struct Contribution {
        Index slot;
        int coef;
        int rate;
        Complex value;
    };

    Index slot(Index row, Index col) const {
        const auto* outer = h_.outerIndexPtr();
        const auto* inner = h_.innerIndexPtr();
        const auto* begin = inner + outer[col];
        const auto* end = inner + outer[col + 1];
        const auto* it = std::lower_bound(begin, end, static_cast<int>(row));
        return static_cast<Index>(it - inner);
    }

    const HamiltonianTerms* terms_;
    Eigen::VectorXd energies_;
    SparseMatrix h_;
    std::vector<Contribution> contributions_;
    std::vector<double> rates_;
    std::vector<Complex> coefs_;
    std::vector<Complex> phases_;
};

using Rhs = std::function<void(double t, double t_branch, const State& y, State& dy)>;
using Emit = std::function<void(std::size_t index, double t, const State& y)>;

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw ConfigError("time grid is empty", "grid");
    if (grid.front() != 0.0) throw ConfigError("time grid must start at 0", "grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]) || !std::isfinite(grid[i])) {
            throw ConfigError("time grid must be finite and strictly increasing", "grid");
        }
    }
}

// Segment boundaries: 0, interior breakpoints, t_end.
std::vector<double> segments(const HamiltonianTerms& terms, double t_end) {
    std::vector<double> b{0.0};
    for (double t : terms.breakpoints(t_end)) {
        if (t > b.back() + 1e-12 && t < t_end - 1e-12) b.push_back(t);
    }
    b.push_back(t_end);
    return b;
}

double scaled_rms(const State& e, const State& y0, const State& y1, double atol, double rtol) {
    const auto scale = atol + rtol * y0.array().abs().max(y1.array().abs());
    return std::sqrt((e.array().abs() / scale).square().mean());
}

// Dormand-Prince 5(4) with the 4th-order continuous extension.
namespace dp {
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
} // namespace dp

void integrate_dopri(const State& y0, std::span<const double> grid,
                     const std::vector<double>& bounds, const Rhs& f,
                     const IntegratorOptions& opt, StepStats& stats, const Emit& emit) {
    State y = y0;
    State k1(y.rows(), y.cols()), k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1;
    State tmp = k1, y1 = k1, err = k1;
    std::size_t next = 0;
    emit(next++, 0.0, y);

    double h = opt.initial_step_ns;
    std::size_t steps = 0;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const double a = bounds[s];
        const double b = bounds[s + 1];
        const double tb = 0.5 * (a + b);
        double t = a;
        f(t, tb, y, k1);
        ++stats.rhs_evaluations;
        if (h <= 0.0) {
            const double d0 = y.norm();
            const double d1 = k1.norm();
            h = (d1 > 0.0 && d0 > 0.0) ? 0.01 * d0 / d1 : 1e-3 * (b - a);
        }
        bool last_rejected = false;
        while (t < b) {
            if (opt.max_step_ns > 0.0) h = std::min(h, opt.max_step_ns);
            const double h_proposed = h;
            bool final_step = false;
            if (t + h >= b || (b - (t + h)) < 1e-12 * std::max(1.0, b)) {
                h = b - t;
                final_step = true;
            }
            if (h < opt.min_step_ns * std::max(1.0, std::abs(t))) {
                std::ostringstream msg;
                msg << "step size underflow at t = " << t << " ns (h = " << h
                    << " ns); the problem may be stiff or the tolerance too tight";
                throw StiffnessError(msg.str());
            }
            if (++steps > opt.max_steps) throw StiffnessError("maximum number of steps exceeded");

            tmp = y + h * dp::a21 * k1;
            f(t + dp::c2 * h, tb, tmp, k2);
            tmp = y + h * (dp::a31 * k1 + dp::a32 * k2);
            f(t + dp::c3 * h, tb, tmp, k3);
            tmp = y + h * (dp::a41 * k1 + dp::a42 * k2 + dp::a43 * k3);
            f(t + dp::c4 * h, tb, tmp, k4);
            tmp = y + h * (dp::a51 * k1 + dp::a52 * k2 + dp::a53 * k3 + dp::a54 * k4);
            f(t + dp::c5 * h, tb, tmp, k5);
            tmp = y + h * (dp::a61 * k1 + dp::a62 * k2 + dp::a63 * k3 + dp::a64 * k4 + dp::a65 * k5);
            const double t_new = final_step ? b : t + h;
            f(t_new, tb, tmp, k6);
            y1 = y + h * (dp::a71 * k1 + dp::a73 * k3 + dp::a74 * k4 + dp::a75 * k5 + dp::a76 * k6);
            f(t_new, tb, y1, k7);
            stats.rhs_evaluations += 6;

            err = h * (dp::e1 * k1 + dp::e3 * k3 + dp::e4 * k4 + dp::e5 * k5 + dp::e6 * k6 +
                       dp::e7 * k7);
            const double e = scaled_rms(err, y, y1, opt.atol, opt.rtol);
            if (!std::isfinite(e)) {
                std::ostringstream msg;
                msg << "non-finite state at t = " << t << " ns";
                throw DivergenceError(msg.str());
            }
            if (e <= 1.0) {
                ++stats.accepted;
                stats.max_error_estimate = std::max(stats.max_error_estimate, e);
                // grid points inside (t, t_new]
                if (next < grid.size() && grid[next] <= t_new) {
                    const State ydiff = y1 - y;
                    const State bspl = h * k1 - ydiff;
                    const State r4 = ydiff - h * k7 - bspl;
                    const State r5 = h * (dp::d1 * k1 + dp::d3 * k3 + dp::d4 * k4 + dp::d5 * k5 +
                                          dp::d6 * k6 + dp::d7 * k7);
                    while (next < grid.size() && grid[next] <= t_new) {
                        const double tg = grid[next];
                        if (tg == t_new) {
                            emit(next, tg, y1);
                        } else {
                            const double th = (tg - t) / h;
                            const double th1 = 1.0 - th;
                            tmp = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
                            emit(next, tg, tmp);
                        }
                        ++next;
                    }
                }
                y.swap(y1);
                k1.swap(k7);
                t = t_new;
                double fac = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
                // a step shortened to land on the segment end does not shrink the next one
                h = final_step ? std::max(h * fac, h_proposed) : h * fac;
                last_rejected = false;
            } else {
                ++stats.rejected;
                h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
                last_rejected = true;
            }
        }
    }
    while (next < grid.size()) emit(next, grid[next], y), ++next;
}

void integrate_rk4(const State& y0, std::span<const double> grid, const std::vector<double>& bounds,
                   const Rhs& f, const IntegratorOptions& opt, StepStats& stats, const Emit& emit) {
    if (!(opt.fixed_step_ns > 0.0)) throw ConfigError("fixed step must be positive", "integrator.fixed_step_ns");
    State y = y0;
    State k1(y.rows(), y.cols()), k2 = k1, k3 = k1, k4 = k1, tmp = k1;
    std::size_t next = 0;
    emit(next++, 0.0, y);
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const double a = bounds[s];
        const double b = bounds[s + 1];
        const double tb = 0.5 * (a + b);
        // stops: grid points inside the segment, then b
        std::vector<double> stops;
        for (std::size_t i = next; i < grid.size() && grid[i] <= b; ++i) stops.push_back(grid[i]);
        if (stops.empty() || stops.back() < b) stops.push_back(b);
        double t = a;
        for (double stop : stops) {
            const double len = stop - t;
            if (len <= 0.0) continue;
            const auto n = static_cast<std::size_t>(std::ceil(len / opt.fixed_step_ns - 1e-9));
            const double h = len / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double ti = t + static_cast<double>(i) * h;
                const double te = i + 1 == n ? stop : ti + h;
                f(ti, tb, y, k1);
                tmp = y + 0.5 * h * k1;
                f(ti + 0.5 * h, tb, tmp, k2);
                tmp = y + 0.5 * h * k2;
                f(ti + 0.5 * h, tb, tmp, k3);
                tmp = y + h * k3;
                f(te, tb, tmp, k4);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                stats.rhs_evaluations += 4;
                ++stats.accepted;
            }
            if (!y.allFinite()) throw DivergenceError("non-finite state in fixed-step integration");
            t = stop;
            while (next < grid.size() && grid[next] <= t) emit(next, grid[next], y), ++next;
        }
    }
    while (next < grid.size()) emit(next, grid[next], y), ++next;
}

void integrate(const State& y0, std::span<const double> grid, const std::vector<double>& bounds,
               const Rhs& f, const IntegratorOptions& opt, StepStats& stats, const Emit& emit) {
    if (opt.stepper == StepperKind::rk4_fixed) {
        integrate_rk4(y0, grid, bounds, f, opt, stats, emit);
    } else {
        integrate_dopri(y0, grid, bounds, f, opt, stats, emit);
    }
}

Eigen::VectorXcd frame_phases(const Eigen::VectorXd& energies, double t) {
    Eigen::VectorXcd p(energies.size());
    for (Index k = 0; k < energies.size(); ++k) {
        p(k) = Complex(std::cos(energies(k) * t), -std::sin(energies(k) * t));
    }
    return p;
}

constexpr double snapshot_tolerance = 1e-4;

} // namespace

EvolutionResult evolve_schrodinger(const QuantumState& psi0, const HamiltonianTerms& terms,
                                   std::span<const double> grid, const IntegratorOptions& options,
                                   const SnapshotObserver& observer) {
    if (!psi0.is_pure()) throw StateError("evolve_schrodinger needs a pure initial state");
    if (psi0.dim() != terms.dim()) throw ShapeError("initial state dimension does not match Hamiltonian");
    psi0.validate();
    check_grid(grid);

    Generator gen(terms, options.frame);
    const Complex minus_i(0.0, -1.0);
    const Rhs rhs = [&](double t, double tb, const State& y, State& dy) {
        dy.noalias() = gen.at(t, tb) * y;
        dy *= minus_i;
    };

    EvolutionResult out;
    out.times.assign(grid.begin(), grid.end());
    if (options.store_states) out.states.reserve(grid.size());
    const Emit emit = [&](std::size_t index, double t, const State& y) {
        StateVector psi = gen.interaction() ? StateVector(frame_phases(gen.energies(), t).cwiseProduct(y.col(0)))
                                            : StateVector(y.col(0));
        const double drift = std::abs(psi.squaredNorm() - 1.0);
        out.stats.max_norm_drift = std::max(out.stats.max_norm_drift, drift);
        if (drift > snapshot_tolerance || !all_finite(psi)) {
            std::ostringstream msg;
            msg << "norm drift " << drift << " at t = " << t << " ns exceeds " << snapshot_tolerance;
            throw IntegrationQualityError(msg.str());
        }
        QuantumState state = QuantumState::pure(std::move(psi), snapshot_tolerance);
        if (observer) observer(index, t, state);
        if (options.store_states) out.states.push_back(std::move(state));
    };

    State y0 = psi0.vector();
    integrate(y0, grid, segments(terms, grid.back()), rhs, options, out.stats, emit);
    return out;
}

EvolutionResult evolve_lindblad(const QuantumState& rho0, const HamiltonianTerms& terms,
                                const NoiseParams& noise, std::span<const double> grid,
                                const IntegratorOptions& options, const SnapshotObserver& observer) {
    if (rho0.dim() != terms.dim()) throw ShapeError("initial state dimension does not match Hamiltonian");
    noise.validate();
    rho0.validate();
    check_grid(grid);
    const HilbertConfig& cfg = terms.config();
    const Index dim = cfg.dim();

    // Each collapse operator maps basis states across a single energy gap, so
    // the dissipator is unchanged by the interaction-frame transformation.
    // All channels used here have at most one nonzero per column and a
    // diagonal L^+ L, which lets L rho L^+ be applied as a scatter.
    struct Jump {
        std::vector<Index> target; // row of the nonzero in each column, -1 if empty
        std::vector<Complex> value;
        std::vector<Index> active; // columns with a nonzero
        bool diagonal = true;
    };
    std::vector<Jump> jumps;
    Eigen::VectorXd half_decay = Eigen::VectorXd::Zero(dim);
    const auto add_channel = [&](const Operator& local, Subsystem s, double rate) {
        const DenseMatrix l = embed(local, s, cfg).matrix() * std::sqrt(rate);
        Jump j{std::vector<Index>(dim, -1), std::vector<Complex>(dim), {}, true};
        for (Index c = 0; c < dim; ++c) {
            for (Index r = 0; r < dim; ++r) {
                if (l(r, c) == Complex(0.0, 0.0)) continue;
                if (j.target[c] >= 0) throw ConfigError("collapse operator has more than one entry per column");
                j.target[c] = r;
                j.value[c] = l(r, c);
                j.active.push_back(c);
                j.diagonal = j.diagonal && r == c;
                half_decay(c) += 0.5 * std::norm(l(r, c));
            }
        }
        jumps.push_back(std::move(j));
    };
    if (noise.t1_q) {
        add_channel(sigma_minus(), Subsystem::qubit1, 1.0 / *noise.t1_q);
        add_channel(sigma_minus(), Subsystem::qubit2, 1.0 / *noise.t1_q);
    }
    if (noise.tphi_q) {
        add_channel(pauli(Pauli::z), Subsystem::qubit1, 1.0 / (2.0 * *noise.tphi_q));
        add_channel(pauli(Pauli::z), Subsystem::qubit2, 1.0 / (2.0 * *noise.tphi_q));
    }
    if (noise.t_cav) {
        add_channel(annihilation(cfg.n_fock()), Subsystem::cavity1, 1.0 / *noise.t_cav);
        add_channel(annihilation(cfg.n_fock()), Subsystem::cavity2, 1.0 / *noise.t_cav);
    }

    // Parity of the total excitation number n1 + n2 + q1 + q2 is conserved by
    // every term of the model, and each collapse operator either keeps or
    // flips it. A density matrix without coherences between the two parity
    // sectors keeps that shape, so it is stored as two blocks side by side:
    // S = [rho_even | rho_odd], columns labelled by the relabelled basis.
    std::vector<int> parity(dim);
    for (Index k = 0; k < dim; ++k) {
        const Index cav = k / 4;
        parity[k] = static_cast<int>((cav / cfg.n_fock() + cav % cfg.n_fock() + k / 2 % 2 + k % 2) % 2);
    }
    const auto keeps_parity = [&](const DenseMatrix& m) {
        for (Index c = 0; c < dim; ++c)
            for (Index r = 0; r < dim; ++r)
                if (m(r, c) != Complex(0.0, 0.0) && parity[r] != parity[c]) return false;
        return true;
    };
    bool blocked = keeps_parity(terms.static_part().matrix()) && keeps_parity(rho0.density());
    for (const auto& term : terms.driven_terms()) blocked = blocked && keeps_parity(term.op.matrix());
    for (const auto& j : jumps) {
        int flip = -1;
        for (Index c : j.active) {
            const int f = parity[c] ^ parity[j.target[c]];
            if (flip >= 0 && f != flip) blocked = false;
            flip = f;
        }
    }
    const Index blocks = blocked ? 2 : 1;
    const Index d = dim / blocks;
    std::vector<Index> position(dim), original(dim);
    {
        Index next = 0;
        for (int p = 0; p < 2; ++p)
            for (Index k = 0; k < dim; ++k)
                if (!blocked ? p == 0 : parity[k] == p) original[next] = k, position[k] = next++;
    }

    Generator gen(terms, options.frame, position);

    // diagonal collapse operators act as an elementwise weight on S
    DenseMatrix diag_weight;
    // one entry list per source block; only pairs inside a block carry weight
    struct Scatter {
        std::vector<Index> column;     // source column of S
        std::vector<Index> row;        // source row within its block
        std::vector<Index> out_column; // target column of S
        std::vector<Index> out_row;    // target row within its block
        std::vector<Complex> value;
    };
    std::vector<Scatter> scatter;
    Eigen::VectorXd half_decay_s(dim);
    for (Index k = 0; k < dim; ++k) half_decay_s(position[k]) = half_decay(k);
    for (const auto& j : jumps) {
        if (j.diagonal) {
            if (diag_weight.size() == 0) diag_weight = DenseMatrix::Zero(d, dim);
            for (Index l : j.active) {
                for (Index k : j.active) {
                    const Index pk = position[k], pl = position[l];
                    if (pk / d == pl / d) diag_weight(pk % d, pl) += j.value[k] * std::conj(j.value[l]);
                }
            }
            continue;
        }
        std::vector<Scatter> per_block(blocks);
        for (Index c : j.active) {
            Scatter& sc = per_block[position[c] / d];
            sc.column.push_back(position[c]);
            sc.row.push_back(position[c] % d);
            sc.out_column.push_back(position[j.target[c]]);
            sc.out_row.push_back(position[j.target[c]] % d);
            sc.value.push_back(j.value[c]);
        }
        for (auto& sc : per_block) scatter.push_back(std::move(sc));
    }

    const Complex plus_i(0.0, 1.0);
    State work(d, dim);
    const Rhs rhs = [&](double t, double tb, const State& s, State& ds) {
        // W = i rho H_eff^+ = i rho H - rho D / 2 with D = sum L^+ L, so that
        // drho = W + W^+ + sum L rho L^+. Dense times sparse is the fast order,
        // and with block-diagonal H the product acts on each block separately.
        work.noalias() = s * gen.at(t, tb);
        work *= plus_i;
        if (!jumps.empty()) work.noalias() -= s * half_decay_s.asDiagonal();
        for (Index b = 0; b < blocks; ++b) {
            ds.middleCols(b * d, d).noalias() = work.middleCols(b * d, d) + work.middleCols(b * d, d).adjoint();
        }
        if (diag_weight.size() != 0) ds += diag_weight.cwiseProduct(s);
        for (const auto& sc : scatter) {
            const std::size_t n = sc.value.size();
            for (std::size_t a = 0; a < n; ++a) {
                const Index l = sc.column[a];
                const Complex vl = std::conj(sc.value[a]);
                Complex* out = &ds(0, sc.out_column[a]);
                const Complex* in = &s(0, l);
                for (std::size_t b = 0; b < n; ++b) out[sc.out_row[b]] += sc.value[b] * in[sc.row[b]] * vl;
            }
        }
    };

    EvolutionResult out;
    out.times.assign(grid.begin(), grid.end());
    if (options.store_states) out.states.reserve(grid.size());
    const Emit emit = [&](std::size_t index, double t, const State& y) {
        DenseMatrix rho = DenseMatrix::Zero(dim, dim);
        for (Index j = 0; j < dim; ++j) {
            const Index base = (j / d) * d;
            for (Index i = 0; i < d; ++i) rho(original[base + i], original[j]) = y(i, j);
        }
        if (gen.interaction()) {
            const Eigen::VectorXcd p = frame_phases(gen.energies(), t);
            rho = p.asDiagonal() * rho * p.conjugate().asDiagonal();
        }
        const double drift = std::abs(rho.trace().real() - 1.0);
        out.stats.max_norm_drift = std::max(out.stats.max_norm_drift, drift);
        if (drift > snapshot_tolerance || !all_finite(rho)) {
            std::ostringstream msg;
            msg << "trace drift " << drift << " at t = " << t << " ns exceeds " << snapshot_tolerance;
            throw IntegrationQualityError(msg.str());
        }
        QuantumState state = QuantumState::mixed(std::move(rho), snapshot_tolerance);
        if (observer) observer(index, t, state);
        if (options.store_states) out.states.push_back(std::move(state));
    };

    const DenseMatrix& full0 = rho0.density();
    State y0(d, dim);
    for (Index j = 0; j < dim; ++j) {
        const Index base = (j / d) * d;
        for (Index i = 0; i < d; ++i) y0(i, j) = full0(original[base + i], original[j]);
    }
    integrate(y0, grid, segments(terms, grid.back()), rhs, options, out.stats, emit);
    return out;
}

EvolutionResult simulate(const RunSpec& spec, const HilbertConfig& cfg,
                         const SnapshotObserver& observer) {
    const HamiltonianTerms terms = build_hamiltonian(spec.system, spec.traj1, spec.traj2, cfg);
    const QuantumState ground = QuantumState::basis(cfg, 0, 0, QubitLevel::g, QubitLevel::g);
    if (spec.noise.empty()) {
        return evolve_schrodinger(ground, terms, spec.grid, spec.integrator, observer);
    }
    return evolve_lindblad(QuantumState::mixed(ground.density()), terms, spec.noise, spec.grid,
                           spec.integrator, observer);
}

ConvergedRun converge_fock(const RunSpec& spec, int start_n, double tol, const SnapshotProbe& probe,
                           int max_n) {
    if (start_n < 2) throw ConfigError("start truncation must be at least 2", "hilbert.n_fock");
    if (!probe) throw ConfigError("converge_fock needs a probe");
    const auto run = [&](int n, std::vector<double>& series) {
        const HilbertConfig cfg(n);
        series.assign(spec.grid.size(), 0.0);
        return simulate(spec, cfg, [&](std::size_t i, double, const QuantumState& s) {
            series[i] = probe(s, cfg);
        });
    };

    ConvergedRun out;
    std::vector<double> prev_series;
    out.n_fock = start_n;
    out.result = run(start_n, prev_series);
    out.ladder.push_back(start_n);
    if (!std::isfinite(tol)) return out;

    double residual = std::numeric_limits<double>::infinity();
    for (int n = start_n + 2; n <= max_n; n += 2) {
        std::vector<double> series;
        EvolutionResult result = run(n, series);
        out.ladder.push_back(n);
        residual = 0.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            residual = std::max(residual, std::abs(series[i] - prev_series[i]));
        }
        if (residual < tol) {
            out.residual = residual;
            return out;
        }
        out.n_fock = n;
        out.result = std::move(result);
        prev_series = std::move(series);
    }
    std::ostringstream msg;
    msg << "Fock truncation did not converge by n_fock = " << max_n << " (residual " << residual
        << ", tolerance " << tol << ")";
    throw NonConvergenceError(msg.str(), residual);
}

} // namespace dce
