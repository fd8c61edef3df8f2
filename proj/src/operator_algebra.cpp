#include "qmetro/operator_algebra.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qmetro {

double hermiticity_defect(const ComplexMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
        throw NotHermitian("operator must be square and nonempty");
    if (!m_.allFinite())
        throw NotHermitian("operator has non-finite entries");
    const double scale = m_.cwiseAbs().maxCoeff();
    if (hermiticity_defect(m_) > 1e-12 * (1.0 + scale))
        throw NotHermitian("Hermiticity defect exceeds 1e-12 (1 + |M|_max)");
}

Unitary::Unitary(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
        throw NotUnitary("matrix must be square and nonempty");
    if (!m_.allFinite())
        throw NotUnitary("matrix has non-finite entries");
    ComplexMatrix g = m_.adjoint() * m_;
    g.diagonal().array() -= 1.0;
    if (g.cwiseAbs().maxCoeff() > 1e-10)
        throw NotUnitary("|U^dag U - I|_max exceeds 1e-10");
}

Unitary Unitary::adjoint() const { return Unitary(m_.adjoint()); }

PureState::PureState(ComplexVector amplitudes) : a_(std::move(amplitudes)) {
    if (a_.size() == 0 || !a_.allFinite())
        throw NotNormalized("state must be nonempty and finite");
    if (std::abs(a_.norm() - 1.0) > 1e-12)
        throw NotNormalized("|psi|_2 deviates from 1 by more than 1e-12");
}

PureState PureState::normalized(ComplexVector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw NotNormalized("cannot normalize the zero vector");
    return PureState(amplitudes / n);
}

EigResult eig_hermitian(const HermitianOperator& H) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(H.matrix());
    if (solver.info() != Eigen::Success)
        throw NoConvergence("Hermitian eigensolver failed to converge");
    EigResult r{solver.eigenvalues(), solver.eigenvectors(), false};
    const double scale = r.values.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k + 1 < r.values.size(); ++k)
        if (r.values[k + 1] - r.values[k] <= 1e-10 * (1.0 + scale)) r.degenerate = true;
    return r;
}

namespace detail {

template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> expmi_raw(
    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& H, Real s) {
    using C = std::complex<Real>;
    using Mat = Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index d = H.rows();
    if (d == 2) {
        // Bloch form: H = a0 I + a.sigma, exp(-iHs) = e^{-i a0 s}(cos(|a|s) I - i sin(|a|s) a^.sigma)
        const Real a0 = (H(0, 0).real() + H(1, 1).real()) / 2;
        const Real az = (H(0, 0).real() - H(1, 1).real()) / 2;
        const Real ax = (H(0, 1).real() + H(1, 0).real()) / 2;
        const Real ay = (H(1, 0).imag() - H(0, 1).imag()) / 2;
        const Real r = std::sqrt(ax * ax + ay * ay + az * az);
        const C ph(std::cos(a0 * s), -std::sin(a0 * s));
        Mat U(2, 2);
        if (r == Real(0)) {
            U << ph, C(0), C(0), ph;
            return U;
        }
        const Real c = std::cos(r * s);
        const C mis(Real(0), -std::sin(r * s) / r);
        U(0, 0) = ph * (c + mis * az);
        U(0, 1) = ph * (mis * C(ax, -ay));
        U(1, 0) = ph * (mis * C(ax, ay));
        U(1, 1) = ph * (c - mis * az);
        return U;
    }
    Eigen::SelfAdjointEigenSolver<Mat> solver(H);
    if (solver.info() != Eigen::Success)
        throw NoConvergence("Hermitian eigensolver failed in expm");
    Eigen::Matrix<C, Eigen::Dynamic, 1> phases(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const Real a = solver.eigenvalues()[k] * s;
        phases[k] = C(std::cos(a), -std::sin(a));
    }
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

template ComplexMatrix expmi_raw<double>(const ComplexMatrix&, double);
template Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>
expmi_raw<long double>(
    const Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>&,
    long double);

}  // namespace detail

Unitary expm_i(const HermitianOperator& H, double s) {
    if (!std::isfinite(s)) throw Error("expm_i: s must be finite");
    return Unitary(detail::expmi_raw<double>(H.matrix(), s));
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << complexd(0, 0), complexd(0, -1), complexd(0, 1), complexd(0, 0);
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

HermitianOperator pauli(PauliAxis axis) {
    switch (axis) {
        case PauliAxis::X: return HermitianOperator(pauli_x());
        case PauliAxis::Y: return HermitianOperator(pauli_y());
        default: return HermitianOperator(pauli_z());
    }
}

}  // namespace qmetro
