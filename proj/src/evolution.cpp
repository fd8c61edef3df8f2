#include "qmetro/evolution.hpp"

#include <cmath>

namespace qmetro {

TimeGrid::TimeGrid(double t0_, double t1_, int steps_) : t0(t0_), t1(t1_), steps(steps_) {
    if (!(t1 > t0)) throw Error("TimeGrid: t1 must exceed t0");
    if (steps < 1) throw Error("TimeGrid: steps must be >= 1");
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw Error("TimeGrid: bounds must be finite");
}

HamiltonianFamily::HamiltonianFamily(Eigen::Index dim, Eval hamiltonian, Eval derivative)
    : dim_(dim), h_(std::move(hamiltonian)), dh_(std::move(derivative)) {
    if (dim_ < 1) throw Error("HamiltonianFamily: dim must be positive");
}

HamiltonianFamily HamiltonianFamily::with_fd_derivative(Eigen::Index dim, Eval hamiltonian) {
    Eval h = hamiltonian;
    Eval dh = [h](double t, double g) {
        const double step = 1e-6 * (1.0 + std::abs(g));
        ComplexMatrix d =
            (h(t, g + step).matrix() - h(t, g - step).matrix()) / (2.0 * step);
        return HermitianOperator((d + d.adjoint().eval()) / 2.0);
    };
    HamiltonianFamily fam(dim, std::move(h), std::move(dh));
    fam.fd_derivative_ = true;
    return fam;
}

HermitianOperator HamiltonianFamily::evaluate(double t, double g) const {
    HermitianOperator op = h_(t, g);
    if (op.dim() != dim_) throw DimMismatch("HamiltonianFamily: evaluator dim mismatch");
    return op;
}

HermitianOperator HamiltonianFamily::evaluate_dg(double t, double g) const {
    HermitianOperator op = dh_(t, g);
    if (op.dim() != dim_) throw DimMismatch("HamiltonianFamily: derivative dim mismatch");
    return op;
}

namespace detail {

template <typename Real>
CMat<Real> propagate_raw(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                         Sampling sampling) {
    using Mat = CMat<Real>;
    const Real dt = static_cast<Real>(grid.t1 - grid.t0) / grid.steps;
    Mat U = Mat::Identity(fam.dim(), fam.dim());
    for (int j = 0; j < grid.steps; ++j) {
        const double ts = sampling == Sampling::midpoint ? grid.midpoint(j) : grid.node(j);
        Mat H = fam.evaluate(ts, g).matrix().template cast<std::complex<Real>>();
        U = (expmi_raw<Real>(H, dt) * U).eval();
    }
    return U;
}

template CMat<double> propagate_raw<double>(const HamiltonianFamily&, double,
                                            const TimeGrid&, Sampling);
template CMat<long double> propagate_raw<long double>(const HamiltonianFamily&, double,
                                                      const TimeGrid&, Sampling);

}  // namespace detail

Unitary propagate(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                  Sampling sampling) {
    return Unitary(detail::propagate_raw<double>(fam, g, grid, sampling));
}

std::vector<PureState> propagate_states(const HamiltonianFamily& fam, double g,
                                        const TimeGrid& grid, const PureState& psi0,
                                        Sampling sampling) {
    if (psi0.dim() != fam.dim()) throw DimMismatch("propagate_states: state dim mismatch");
    const double dt = grid.dt();
    std::vector<PureState> out;
    out.reserve(grid.steps + 1);
    out.push_back(psi0);
    ComplexVector psi = psi0.amplitudes();
    for (int j = 0; j < grid.steps; ++j) {
        const double ts = sampling == Sampling::midpoint ? grid.midpoint(j) : grid.node(j);
        psi = detail::expmi_raw<double>(fam.evaluate(ts, g).matrix(), dt) * psi;
        out.push_back(PureState::normalized(psi));
    }
    return out;
}

ComplexMatrix dg_propagator(const HamiltonianFamily& fam, double g, const TimeGrid& grid) {
    const double dt = grid.dt();
    const Eigen::Index d = fam.dim();
    ComplexMatrix U = ComplexMatrix::Identity(d, d);
    ComplexMatrix S = ComplexMatrix::Zero(d, d);
    for (int j = 0; j < grid.steps; ++j) {
        const double tm = grid.midpoint(j);
        const ComplexMatrix H = fam.evaluate(tm, g).matrix();
        const ComplexMatrix dH = fam.evaluate_dg(tm, g).matrix();
        const ComplexMatrix half = detail::expmi_raw<double>(H, dt / 2);
        // S accumulates sum_k U(t_k* -> t_{j+1}) dH(t_k*) U(0 -> t_k*) dt
        S = half * (half * S + (dH * (half * U)) * dt);
        U = (half * half) * U;
    }
    return complexd(0, -1) * S;
}

HermitianOperator generator_h(const HamiltonianFamily& fam, double g, const TimeGrid& grid) {
    const double dt = grid.dt();
    const Eigen::Index d = fam.dim();
    ComplexMatrix U = ComplexMatrix::Identity(d, d);
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (int j = 0; j < grid.steps; ++j) {
        const double tm = grid.midpoint(j);
        const ComplexMatrix H = fam.evaluate(tm, g).matrix();
        const ComplexMatrix dH = fam.evaluate_dg(tm, g).matrix();
        const ComplexMatrix half = detail::expmi_raw<double>(H, dt / 2);
        const ComplexMatrix W = half * U;
        h.noalias() += (W.adjoint() * dH * W) * dt;
        U = half * W;
    }
    return HermitianOperator((h + h.adjoint().eval()) / 2.0);
}

int default_steps(const HamiltonianFamily& fam, double g, double t0, double t1,
                  int steps_per_unit) {
    double norm_est = 0.0;
    for (double t : {t0, 0.5 * (t0 + t1), t1}) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> s(fam.evaluate(t, g).matrix(),
                                                       Eigen::EigenvaluesOnly);
        norm_est = std::max(norm_est, s.eigenvalues().cwiseAbs().maxCoeff());
    }
    const double n = std::ceil((t1 - t0) * steps_per_unit * std::max(1.0, norm_est) - 1e-9);
    return std::max(1, static_cast<int>(n));
}

}  // namespace qmetro
