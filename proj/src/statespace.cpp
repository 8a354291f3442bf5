#include "dce/statespace.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "dce/errors.hpp"

namespace dce {

HilbertConfig::HilbertConfig(int n_fock) : n_fock_(n_fock) {
    if (n_fock < 2) {
        throw ConfigError("Fock truncation must be at least 2, got " + std::to_string(n_fock),
                          "hilbert.n_fock");
    }
}

Index HilbertConfig::local_dim(Subsystem s) const noexcept {
    switch (s) {
    case Subsystem::cavity1:
    case Subsystem::cavity2:
        return n_fock_;
    case Subsystem::qubit1:
    case Subsystem::qubit2:
        return 2;
    }
    return 0;
}

Index HilbertConfig::index(int n1, int n2, QubitLevel q1, QubitLevel q2) const {
    if (n1 < 0 || n2 < 0 || n1 >= n_fock_ || n2 >= n_fock_) {
        throw ShapeError("Fock index out of range for truncation " + std::to_string(n_fock_));
    }
    return ((static_cast<Index>(n1) * n_fock_ + n2) * 2 + static_cast<int>(q1)) * 2 +
           static_cast<int>(q2);
}

Operator::Operator(DenseMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
        throw ShapeError("operator must be square, got " + std::to_string(m_.rows()) + "x" +
                         std::to_string(m_.cols()));
    }
    if (!m_.allFinite()) {
        throw StateError("operator has non-finite entries");
    }
}

Operator Operator::identity(Index dim) { return Operator(DenseMatrix::Identity(dim, dim)); }

Operator Operator::zero(Index dim) { return Operator(DenseMatrix::Zero(dim, dim)); }

bool Operator::is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool Operator::is_diagonal(double tol) const {
    for (Index j = 0; j < m_.cols(); ++j) {
        for (Index i = 0; i < m_.rows(); ++i) {
            if (i != j && std::abs(m_(i, j)) > tol) return false;
        }
    }
    return true;
}

Operator& Operator::operator+=(const Operator& rhs) {
    if (rhs.dim() != dim()) throw ShapeError("operator dimension mismatch in addition");
    m_ += rhs.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
    if (rhs.dim() != dim()) throw ShapeError("operator dimension mismatch in subtraction");
    m_ -= rhs.m_;
    return *this;
}

Operator& Operator::operator*=(Complex s) {
    m_ *= s;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw ShapeError("operator dimension mismatch in product");
    return Operator(a.m_ * b.m_);
}

Operator annihilation(int n_fock) {
    if (n_fock < 2) {
        throw ConfigError("Fock truncation must be at least 2, got " + std::to_string(n_fock));
    }
    DenseMatrix a = DenseMatrix::Zero(n_fock, n_fock);
    for (int m = 0; m + 1 < n_fock; ++m) {
        a(m, m + 1) = std::sqrt(static_cast<double>(m + 1));
    }
    return Operator(std::move(a));
}

Operator creation(int n_fock) { return annihilation(n_fock).adjoint(); }

Operator pauli(Pauli which) {
    DenseMatrix s(2, 2);
    switch (which) {
    case Pauli::x:
        s << 0.0, 1.0, 1.0, 0.0;
        break;
    case Pauli::y:
        // basis (g, e) with sigma_z = diag(-1, +1): sigma_y = i[sigma_z, sigma_x] / 2
        s << 0.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 0.0;
        break;
    case Pauli::z:
        s << -1.0, 0.0, 0.0, 1.0;
        break;
    }
    return Operator(std::move(s));
}

Operator sigma_minus() {
    DenseMatrix s = DenseMatrix::Zero(2, 2);
    s(0, 1) = 1.0;
    return Operator(std::move(s));
}

namespace {

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

} // namespace

Operator embed(const Operator& op, Subsystem subsystem, const HilbertConfig& cfg) {
    const Index local = cfg.local_dim(subsystem);
    if (op.dim() != local) {
        throw ShapeError("embed: operator of dimension " + std::to_string(op.dim()) +
                         " does not match subsystem dimension " + std::to_string(local));
    }
    constexpr Subsystem order[] = {Subsystem::cavity1, Subsystem::cavity2, Subsystem::qubit1,
                                   Subsystem::qubit2};
    DenseMatrix out = DenseMatrix::Identity(1, 1);
    for (Subsystem s : order) {
        const DenseMatrix factor =
            s == subsystem ? op.matrix()
                           : DenseMatrix::Identity(cfg.local_dim(s), cfg.local_dim(s)).eval();
        out = kron(out, factor);
    }
    return Operator(std::move(out));
}

QuantumState QuantumState::pure(StateVector psi, double tol) {
    if (!psi.allFinite()) throw StateError("state vector has non-finite entries");
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > tol) {
        throw StateError("state vector is not normalized (norm " + std::to_string(norm) + ")");
    }
    return QuantumState(Kind::pure, std::move(psi), {});
}

QuantumState QuantumState::mixed(DenseMatrix rho, double tol) {
    if (rho.rows() != rho.cols()) throw ShapeError("density matrix must be square");
    if (!all_finite(rho)) throw StateError("density matrix has non-finite entries");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol) {
        throw StateError("density matrix is not Hermitian (max deviation " +
                         std::to_string(herm) + ")");
    }
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > tol) {
        throw StateError("density matrix trace is " + std::to_string(tr));
    }
    return QuantumState(Kind::mixed, {}, std::move(rho));
}

QuantumState QuantumState::basis(const HilbertConfig& cfg, int n1, int n2, QubitLevel q1,
                                 QubitLevel q2) {
    StateVector psi = StateVector::Zero(cfg.dim());
    psi(cfg.index(n1, n2, q1, q2)) = 1.0;
    return pure(std::move(psi));
}

Index QuantumState::dim() const noexcept { return is_pure() ? psi_.size() : rho_.rows(); }

const StateVector& QuantumState::vector() const {
    if (!is_pure()) throw StateError("mixed state has no state vector");
    return psi_;
}

const DenseMatrix& QuantumState::matrix() const {
    if (is_pure()) throw StateError("pure state stores a vector; use density()");
    return rho_;
}

DenseMatrix QuantumState::density() const {
    if (is_pure()) return psi_ * psi_.adjoint();
    return rho_;
}

double QuantumState::trace() const {
    return is_pure() ? psi_.squaredNorm() : rho_.trace().real();
}

double QuantumState::min_eigenvalue() const {
    if (is_pure()) return 0.0;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void QuantumState::validate(double tol, double neg_tol) const {
    if (is_pure()) {
        if (std::abs(psi_.norm() - 1.0) > tol) throw StateError("state vector is not normalized");
        return;
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol) {
        throw StateError("density matrix is not Hermitian");
    }
    if (std::abs(rho_.trace().real() - 1.0) > tol) throw StateError("density matrix trace != 1");
    const double lo = min_eigenvalue();
    if (lo < -neg_tol) {
        throw StateError("density matrix has negative eigenvalue " + std::to_string(lo));
    }
}

Complex QuantumState::expectation(const Operator& op) const {
    if (op.dim() != dim()) throw ShapeError("expectation: operator dimension mismatch");
    if (is_pure()) return psi_.dot(op.matrix() * psi_);
    return (op.matrix() * rho_).trace();
}

QubitMatrix partial_trace_to_qubits(const QuantumState& state, const HilbertConfig& cfg) {
    if (state.dim() != cfg.dim()) {
        throw ShapeError("partial trace: state dimension " + std::to_string(state.dim()) +
                         " does not match configuration dimension " + std::to_string(cfg.dim()));
    }
    const Index cav = static_cast<Index>(cfg.n_fock()) * cfg.n_fock();
    // natural order: qubit index q = 2 * q1 + q2, (gg, ge, eg, ee)
    QubitMatrix natural = QubitMatrix::Zero();
    if (state.is_pure()) {
        const StateVector& psi = state.vector();
        if (!psi.allFinite() || std::abs(psi.squaredNorm() - 1.0) > 1e-4) {
            throw StateError("partial trace: state vector is not normalized");
        }
        // column-major map: element (q, c) is psi[c * 4 + q]
        Eigen::Map<const Eigen::Matrix<Complex, 4, Eigen::Dynamic>> amps(psi.data(), 4, cav);
        natural = amps * amps.adjoint();
    } else {
        const DenseMatrix& rho = state.matrix();
        if (!all_finite(rho) || std::abs(rho.trace().real() - 1.0) > 1e-4) {
            throw StateError("partial trace: density matrix trace is not 1");
        }
        for (Index c = 0; c < cav; ++c) {
            natural += rho.block<4, 4>(c * 4, c * 4);
        }
    }
    QubitMatrix out;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) out(i, j) = natural(3 - i, 3 - j);
    }
    return out;
}

} // namespace dce
