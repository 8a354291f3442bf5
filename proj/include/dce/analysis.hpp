#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dce/dynamics.hpp"
#include "dce/statespace.hpp"

namespace dce {

/// Wootters concurrence. Throws StateError for matrices that are not
/// Hermitian, unit-trace and positive within 1e-8.
double concurrence(const QubitMatrix& rho);

/// Populations of |phi+->, |psi+-> with phi+- = (|gg> +- |ee>)/sqrt2 and
/// psi+- = (|ge> +- |eg>)/sqrt2.
struct BellPopulations {
    double phi_plus = 0.0;
    double phi_minus = 0.0;
    double psi_plus = 0.0;
    double psi_minus = 0.0;

    double sum() const noexcept { return phi_plus + phi_minus + psi_plus + psi_minus; }
};

BellPopulations bell_populations(const QubitMatrix& rho);

struct Observables {
    double t = 0.0;
    double concurrence = 0.0;
    BellPopulations bell;
    std::array<double, 2> photons{};    // <n1>, <n2>
    std::array<double, 2> excited{};    // <e1>, <e2>
};

Observables observe(double t, const QuantumState& state, const HilbertConfig& cfg);

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> concurrence;
    std::vector<BellPopulations> bell;
    std::vector<std::array<double, 2>> photons;
    std::vector<std::array<double, 2>> qubit_pops;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
    void reserve(std::size_t n);
    void append(const Observables& o);
    /// Throws StateError if a row breaks the concurrence range, the Bell sum
    /// or photon positivity invariants.
    void check_invariants(double bell_tol = 1e-6) const;
};

TimeSeries analyze(const EvolutionResult& evolution, const HilbertConfig& cfg);

struct Peak {
    double value = 0.0;
    double time = 0.0;
};

/// Grid maximum (earliest on ties) refined by a parabola through the three
/// samples around it.
Peak find_max(const std::vector<double>& times, const std::vector<double>& values);
inline Peak find_max(const TimeSeries& series) { return find_max(series.times, series.concurrence); }

/// Residuals of a two-qubit state against the X shape with empty |eg>, |ge>
/// populations that third-order perturbation theory predicts.
struct StructureReport {
    double coupling_scale = 0.0;
    double rho14 = 0.0;              // |<ee|rho|gg>|
    double rho22 = 0.0;              // <eg|rho|eg>
    double rho33 = 0.0;              // <ge|rho|ge>
    double max_other_offdiag = 0.0;  // largest |rho_ij|, i != j, outside (1,4), (4,1)
    double threshold = 0.1;
    bool holds = false;              // all residuals < threshold * |rho14|

    double max_residual() const noexcept;
};

StructureReport appendix_a_structure(const QubitMatrix& rho, double coupling_scale,
                                     double threshold = 0.1);

/// Sign test between windowed rises of <psi+> and falls of the concurrence.
struct AntiCorrelationReport {
    std::size_t rise_windows = 0;       // windows where <psi+> rose by more than the threshold
    std::size_t with_concurrence_fall = 0;
    bool anticorrelated() const noexcept {
        return rise_windows > 0 && 2 * with_concurrence_fall > rise_windows;
    }
};

AntiCorrelationReport psi_rise_vs_concurrence(const TimeSeries& series, double window_ns,
                                              double rise_threshold = 0.05);

} // namespace dce
