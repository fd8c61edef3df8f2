#include "qmetro/fisher.hpp"

#include <cmath>

namespace qmetro {

namespace {

double clamp_variance(double v) {
    if (v >= 0.0) return v;
    if (v >= -1e-10) return 0.0;
    throw NumericalError("variance below -1e-10, inputs inconsistent");
}

}  // namespace

double qfi_from_state(const PureState& psi, const ComplexVector& dpsi) {
    if (psi.dim() != dpsi.size()) throw DimMismatch("qfi_from_state: dim mismatch");
    const double dd = dpsi.squaredNorm();
    const complexd pd = psi.amplitudes().dot(dpsi);
    return 4.0 * clamp_variance(dd - std::norm(pd));
}

double qfi_from_generator(const HermitianOperator& h, const PureState& psi0) {
    if (h.dim() != psi0.dim()) throw DimMismatch("qfi_from_generator: dim mismatch");
    const ComplexVector hp = h.matrix() * psi0.amplitudes();
    const double h2 = hp.squaredNorm();
    const double h1 = psi0.amplitudes().dot(hp).real();
    return 4.0 * clamp_variance(h2 - h1 * h1);
}

double qfi_max_from_generator(const HermitianOperator& h) {
    const EigResult e = eig_hermitian(h);
    const double gap = e.values[e.values.size() - 1] - e.values[0];
    return gap * gap;
}

namespace detail {

double gap_integral(const HamiltonianFamily& fam, double g, const TimeGrid& grid) {
    double acc = 0.0;
    const double dt = grid.dt();
    for (int j = 0; j < grid.steps; ++j) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> s(
            fam.evaluate_dg(grid.midpoint(j), g).matrix(), Eigen::EigenvaluesOnly);
        if (s.info() != Eigen::Success) throw NoConvergence("gap_integral eigensolver failed");
        const auto& w = s.eigenvalues();
        acc += (w[w.size() - 1] - w[0]) * dt;
    }
    return acc;
}

}  // namespace detail

double qfi_upper_bound(const HamiltonianFamily& fam, double g, const TimeGrid& grid) {
    const double gi = detail::gap_integral(fam, g, grid);
    return gi * gi;
}

double qfi_fidelity_fd(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                       const PureState& psi0, double delta) {
    if (delta <= 0.0) throw Error("qfi_fidelity_fd: delta must be positive");
    using CV = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, 1>;
    const CV p0 = psi0.amplitudes().cast<std::complex<long double>>();
    const CV a = detail::propagate_raw<long double>(fam, g, grid) * p0;
    const CV b = detail::propagate_raw<long double>(fam, g + delta, grid) * p0;
    long double f = 0;
    {
        std::complex<long double> ovl = 0;
        for (Eigen::Index i = 0; i < a.size(); ++i) ovl += std::conj(a[i]) * b[i];
        f = std::abs(ovl);
    }
    const long double q = 8.0L * (1.0L - f) / (static_cast<long double>(delta) * delta);
    return static_cast<double>(q);
}

PureState optimal_initial_state(const HamiltonianFamily& fam, double g, double t_eval) {
    EigResult e = eig_hermitian(fam.evaluate_dg(t_eval, g));
    const Eigen::Index d = e.values.size();
    if (d < 2) throw DegenerateExtremes("need at least two levels");
    const double scale = e.values.cwiseAbs().maxCoeff();
    const double tol = 1e-10 * (1.0 + scale);
    if (e.values[1] - e.values[0] <= tol || e.values[d - 1] - e.values[d - 2] <= tol)
        throw DegenerateExtremes("extreme eigenvalue of dH/dg has multiplicity > 1");
    ComplexVector vmin = e.vectors.col(0);
    ComplexVector vmax = e.vectors.col(d - 1);
    // gauge: largest-magnitude component made real positive
    auto fix_phase = [](ComplexVector& v) {
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        const complexd z = v[imax];
        if (std::abs(z) > 0) v *= std::conj(z) / std::abs(z);
    };
    fix_phase(vmin);
    fix_phase(vmax);
    return PureState::normalized(vmax + vmin);
}

QfiReport report_generator(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                           const PureState& psi0) {
    const HermitianOperator h = generator_h(fam, g, grid);
    QfiReport r{qfi_from_generator(h, psi0), qfi_upper_bound(fam, g, grid), grid.t1 - grid.t0,
                QfiMethod::generator_variance};
    if (r.value > r.upper_bound * (1.0 + 1e-8))
        throw NumericalError("QFI exceeds the eigenvalue-gap bound");
    return r;
}

}  // namespace qmetro
