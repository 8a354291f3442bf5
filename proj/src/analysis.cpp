#include "dce/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "dce/errors.hpp"

namespace dce {

namespace {

void check_two_qubit(const QubitMatrix& rho) {
    if (!rho.allFinite()) throw StateError("two-qubit matrix has non-finite entries");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
        throw StateError("two-qubit matrix is not Hermitian");
    }
    if (std::abs(rho.trace().real() - 1.0) > 1e-6) {
        throw StateError("two-qubit matrix trace is " + std::to_string(rho.trace().real()));
    }
}

} // namespace

double concurrence(const QubitMatrix& rho_in) {
    check_two_qubit(rho_in);
    const QubitMatrix rho = 0.5 * (rho_in + rho_in.adjoint());

    Eigen::SelfAdjointEigenSolver<QubitMatrix> es(rho);
    Eigen::Vector4d w = es.eigenvalues();
    if (w.minCoeff() < -1e-8) {
        throw StateError("two-qubit matrix has negative eigenvalue " + std::to_string(w.minCoeff()));
    }
    w = w.cwiseMax(0.0);

    // rho = W W^+ with W = V sqrt(w). The Wootters lambdas are the singular
    // values of W^T (sy sy) W, which avoids square roots of eigenvalue dust.
    const QubitMatrix W = es.eigenvectors() * w.cwiseSqrt().asDiagonal();
    QubitMatrix yy = QubitMatrix::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const QubitMatrix tau = W.transpose() * yy * W;
    const Eigen::Vector4d lambda = Eigen::JacobiSVD<QubitMatrix>(tau).singularValues(); // descending
    const double c = lambda(0) - lambda(1) - lambda(2) - lambda(3);
    return std::clamp(c, 0.0, 1.0);
}

BellPopulations bell_populations(const QubitMatrix& rho) {
    check_two_qubit(rho);
    constexpr int ee = qubit_pair_index(QubitLevel::e, QubitLevel::e);
    constexpr int eg = qubit_pair_index(QubitLevel::e, QubitLevel::g);
    constexpr int ge = qubit_pair_index(QubitLevel::g, QubitLevel::e);
    constexpr int gg = qubit_pair_index(QubitLevel::g, QubitLevel::g);
    const double r = 1.0 / std::numbers::sqrt2;
    const auto pop = [&](int a, int b, double sign) {
        Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
        v(a) = r;
        v(b) = sign * r;
        return v.dot(rho * v).real();
    };
    BellPopulations out;
    out.phi_plus = pop(gg, ee, 1.0);
    out.phi_minus = pop(gg, ee, -1.0);
    out.psi_plus = pop(ge, eg, 1.0);
    out.psi_minus = pop(ge, eg, -1.0);
    return out;
}

Observables observe(double t, const QuantumState& state, const HilbertConfig& cfg) {
    Observables o;
    o.t = t;
    // normalized so that integrator drift (bounded by the evolution checks)
    // does not trip the strict density-matrix validation
    QubitMatrix rho2 = partial_trace_to_qubits(state, cfg);
    rho2 /= rho2.trace().real();
    o.concurrence = concurrence(rho2);
    o.bell = bell_populations(rho2);
    o.excited[0] = (rho2(qubit_pair_index(QubitLevel::e, QubitLevel::e), qubit_pair_index(QubitLevel::e, QubitLevel::e)) +
                    rho2(qubit_pair_index(QubitLevel::e, QubitLevel::g), qubit_pair_index(QubitLevel::e, QubitLevel::g)))
                       .real();
    o.excited[1] = (rho2(qubit_pair_index(QubitLevel::e, QubitLevel::e), qubit_pair_index(QubitLevel::e, QubitLevel::e)) +
                    rho2(qubit_pair_index(QubitLevel::g, QubitLevel::e), qubit_pair_index(QubitLevel::g, QubitLevel::e)))
                       .real();

    // photon numbers from the diagonal: index = ((n1 * N + n2) * 2 + q1) * 2 + q2
    const int n = cfg.n_fock();
    const DenseMatrix* rho = state.is_pure() ? nullptr : &state.matrix();
    double n1 = 0.0, n2 = 0.0;
    for (Index k = 0; k < cfg.dim(); ++k) {
        const double p = rho ? (*rho)(k, k).real() : std::norm(state.vector()(k));
        const Index cav = k / 4;
        n1 += p * static_cast<double>(cav / n);
        n2 += p * static_cast<double>(cav % n);
    }
    o.photons = {n1, n2};
    return o;
}

void TimeSeries::reserve(std::size_t n) {
    times.reserve(n);
    concurrence.reserve(n);
    bell.reserve(n);
    photons.reserve(n);
    qubit_pops.reserve(n);
}

void TimeSeries::append(const Observables& o) {
    times.push_back(o.t);
    concurrence.push_back(o.concurrence);
    bell.push_back(o.bell);
    photons.push_back(o.photons);
    qubit_pops.push_back(o.excited);
}

void TimeSeries::check_invariants(double bell_tol) const {
    for (std::size_t i = 0; i < size(); ++i) {
        const std::string at = " at t = " + std::to_string(times[i]) + " ns";
        if (!(concurrence[i] >= 0.0 && concurrence[i] <= 1.0)) {
            throw StateError("concurrence outside [0, 1]" + at);
        }
        if (std::abs(bell[i].sum() - 1.0) > bell_tol) throw StateError("Bell populations do not sum to 1" + at);
        if (photons[i][0] < -1e-9 || photons[i][1] < -1e-9) throw StateError("negative photon number" + at);
    }
}

TimeSeries analyze(const EvolutionResult& evolution, const HilbertConfig& cfg) {
    if (evolution.states.size() != evolution.times.size()) {
        throw StateError("evolution result carries no stored states to analyze");
    }
    TimeSeries series;
    series.reserve(evolution.times.size());
    for (std::size_t i = 0; i < evolution.times.size(); ++i) {
        series.append(observe(evolution.times[i], evolution.states[i], cfg));
    }
    return series;
}

Peak find_max(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.empty() || times.size() != values.size()) {
        throw ConfigError("find_max needs a non-empty series with matching time grid");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    Peak peak{values[best], times[best]};
    if (best == 0 || best + 1 == values.size()) return peak;

    const double t0 = times[best - 1], t1 = times[best], t2 = times[best + 1];
    const double y0 = values[best - 1], y1 = values[best], y2 = values[best + 1];
    // Lagrange parabola through the three points
    const double d01 = (y1 - y0) / (t1 - t0);
    const double d12 = (y2 - y1) / (t2 - t1);
    const double curv = (d12 - d01) / (t2 - t0);
    if (!(curv < 0.0)) return peak;
    const double tv = 0.5 * (t0 + t1) - d01 / (2.0 * curv);
    if (tv < t0 || tv > t2) return peak;
    const double yv = y0 + d01 * (tv - t0) + curv * (tv - t0) * (tv - t1);
    return {yv, tv};
}

double StructureReport::max_residual() const noexcept {
    return std::max({rho22, rho33, max_other_offdiag});
}

StructureReport appendix_a_structure(const QubitMatrix& rho, double coupling_scale, double threshold) {
    StructureReport r;
    r.coupling_scale = coupling_scale;
    r.threshold = threshold;
    r.rho14 = std::abs(rho(0, 3));
    r.rho22 = std::abs(rho(1, 1));
    r.rho33 = std::abs(rho(2, 2));
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i == j || (i == 0 && j == 3) || (i == 3 && j == 0)) continue;
            r.max_other_offdiag = std::max(r.max_other_offdiag, std::abs(rho(i, j)));
        }
    }
    r.holds = r.max_residual() < threshold * r.rho14 || r.max_residual() == 0.0;
    return r;
}

AntiCorrelationReport psi_rise_vs_concurrence(const TimeSeries& series, double window_ns,
                                              double rise_threshold) {
    if (!(window_ns > 0.0)) throw ConfigError("window must be positive");
    AntiCorrelationReport out;
    const std::size_t n = series.size();
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (j < n && series.times[j] < series.times[i] + window_ns) ++j;
        if (j >= n) break;
        const double d_psi = series.bell[j].psi_plus - series.bell[i].psi_plus;
        if (d_psi <= rise_threshold) continue;
        ++out.rise_windows;
        if (series.concurrence[j] < series.concurrence[i]) ++out.with_concurrence_fall;
    }
    return out;
}

} // namespace dce
