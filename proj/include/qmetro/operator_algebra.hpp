#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qmetro/errors.hpp"

namespace qmetro {

using complexd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Max-norm distance from Hermiticity, |M - M^dag|_max.
double hermiticity_defect(const ComplexMatrix& m);

/// Dense Hermitian operator. Everything dimensionless, hbar = 1.
/// Construction validates |M - M^dag|_max <= 1e-12 (1 + |M|_max).
class HermitianOperator {
  public:
    explicit HermitianOperator(ComplexMatrix m);

    const ComplexMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

  private:
    ComplexMatrix m_;
};

/// Unitary matrix; construction validates |U^dag U - I|_max <= 1e-10.
class Unitary {
  public:
    explicit Unitary(ComplexMatrix m);

    const ComplexMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    Unitary adjoint() const;

  private:
    ComplexMatrix m_;
};

/// Normalized pure state, |psi|_2 = 1 within 1e-12.
class PureState {
  public:
    explicit PureState(ComplexVector amplitudes);
    static PureState normalized(ComplexVector amplitudes);

    const ComplexVector& amplitudes() const { return a_; }
    Eigen::Index dim() const { return a_.size(); }

  private:
    ComplexVector a_;
};

struct EigResult {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // orthonormal columns, vectors.col(k) <-> values[k]
    bool degenerate;        // some adjacent gap below 1e-10 (1 + |lambda|_max)
};

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
/// Throws NoConvergence if the iteration fails.
EigResult eig_hermitian(const HermitianOperator& H);

/// exp(-i H s). Exact 2x2 closed form for qubits, eigendecomposition otherwise;
/// unitary by construction either way.
Unitary expm_i(const HermitianOperator& H, double s);

enum class PauliAxis { X, Y, Z };

HermitianOperator pauli(PauliAxis axis);

/// Raw Pauli matrices (2x2), for assembling qubit Hamiltonians.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

namespace detail {

// exp(-i H s) on the raw matrix, no invariant wrapping. Scalar-generic so the
// extended-precision paths can reuse it.
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> expmi_raw(
    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& H, Real s);

}  // namespace detail

}  // namespace qmetro
