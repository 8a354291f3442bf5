#pragma once

// Dense operators and states on the truncated space
// cavity1 (x) cavity2 (x) qubit1 (x) qubit2.
//
// Flat index of |n1, n2, q1, q2> is ((n1 * n_fock + n2) * 2 + q1) * 2 + q2
// with qubit level g = 0, e = 1.

#include <cmath>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace dce {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using QubitMatrix = Eigen::Matrix4cd;
using Index = Eigen::Index;

enum class Subsystem : int { cavity1 = 0, cavity2 = 1, qubit1 = 2, qubit2 = 3 };

enum class QubitLevel : int { g = 0, e = 1 };

class HilbertConfig {
public:
    explicit HilbertConfig(int n_fock);

    int n_fock() const noexcept { return n_fock_; }
    Index dim() const noexcept { return 4 * static_cast<Index>(n_fock_) * n_fock_; }
    Index local_dim(Subsystem s) const noexcept;
    Index index(int n1, int n2, QubitLevel q1, QubitLevel q2) const;

    friend bool operator==(const HilbertConfig&, const HilbertConfig&) = default;

private:
    int n_fock_;
};

/// Square complex matrix with finite entries.
class Operator {
public:
    Operator() = default;
    explicit Operator(DenseMatrix m);

    static Operator identity(Index dim);
    static Operator zero(Index dim);

    Index dim() const noexcept { return m_.rows(); }
    const DenseMatrix& matrix() const noexcept { return m_; }
    Complex operator()(Index row, Index col) const { return m_(row, col); }

    Operator adjoint() const { return Operator(m_.adjoint()); }
    bool is_hermitian(double tol = 1e-12) const;
    bool is_diagonal(double tol = 0.0) const;

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(Complex s);

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(Operator a, Complex s) { return a *= s; }
    friend Operator operator*(Complex s, Operator a) { return a *= s; }
    friend Operator operator*(const Operator& a, const Operator& b);

private:
    DenseMatrix m_;
};

Operator annihilation(int n_fock);
Operator creation(int n_fock);

enum class Pauli { x, y, z };

/// Pauli matrix in the (|g>, |e>) basis, sigma_z |e> = +|e>.
Operator pauli(Pauli which);

/// |g><e|, the qubit lowering operator.
Operator sigma_minus();

/// Tensor op into the full space at `subsystem`, identity elsewhere.
Operator embed(const Operator& op, Subsystem subsystem, const HilbertConfig& cfg);

/// Cheap finiteness test: any inf or nan entry makes the sum non-finite.
template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    const auto total = m.sum();
    return std::isfinite(total.real()) && std::isfinite(total.imag());
}

class QuantumState {
public:
    enum class Kind { pure, mixed };

    static constexpr double default_tolerance = 1e-9;

    /// Throws StateError unless | ||psi|| - 1 | <= tol.
    static QuantumState pure(StateVector psi, double tol = default_tolerance);

    /// Throws StateError unless rho is Hermitian and |tr rho - 1| <= tol.
    /// Positivity is checked by validate(), which costs an eigensolve.
    static QuantumState mixed(DenseMatrix rho, double tol = default_tolerance);

    static QuantumState basis(const HilbertConfig& cfg, int n1, int n2, QubitLevel q1,
                              QubitLevel q2);

    Kind kind() const noexcept { return kind_; }
    bool is_pure() const noexcept { return kind_ == Kind::pure; }
    Index dim() const noexcept;

    const StateVector& vector() const;
    const DenseMatrix& matrix() const;

    /// rho for mixed states, |psi><psi| for pure ones.
    DenseMatrix density() const;

    /// ||psi||^2 or tr rho.
    double trace() const;

    /// Smallest eigenvalue of the density matrix (0 for pure states).
    double min_eigenvalue() const;

    /// Full invariant check including positivity (eigenvalues >= -neg_tol).
    void validate(double tol = default_tolerance, double neg_tol = 1e-8) const;

    Complex expectation(const Operator& op) const;

private:
    QuantumState(Kind kind, StateVector psi, DenseMatrix rho)
        : kind_(kind), psi_(std::move(psi)), rho_(std::move(rho)) {}

    Kind kind_ = Kind::pure;
    StateVector psi_;
    DenseMatrix rho_;
};

/// Reduced two-qubit state in the basis order (|ee>, |eg>, |ge>, |gg>),
/// so entry (0, 3) is <ee|rho|gg>.
QubitMatrix partial_trace_to_qubits(const QuantumState& state, const HilbertConfig& cfg);

/// Position of a two-qubit basis ket in the (ee, eg, ge, gg) ordering.
constexpr int qubit_pair_index(QubitLevel q1, QubitLevel q2) noexcept {
    return 3 - (2 * static_cast<int>(q1) + static_cast<int>(q2));
}

} // namespace dce
