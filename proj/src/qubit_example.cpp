#include "qmetro/qubit_example.hpp"

#include <array>
#include <cmath>

#include "qmetro/fisher.hpp"

namespace qmetro::qubit {

namespace {

ComplexMatrix field_matrix(double B, double omega, double t) {
    ComplexMatrix m(2, 2);
    const double c = B * std::cos(omega * t);
    const double s = B * std::sin(omega * t);
    m << -s, -c, -c, s;  // -B (cos sx + sin sz)
    return m;
}

}  // namespace

RotatingFieldParams::RotatingFieldParams(double B_, double omega_, double omega_c_)
    : B(B_), omega(omega_), omega_c(omega_c_) {
    if (!(B > 0.0) || !std::isfinite(B) || !std::isfinite(omega) || !std::isfinite(omega_c))
        throw Error("RotatingFieldParams: need finite parameters and B > 0");
}

HamiltonianFamily hamiltonian(const RotatingFieldParams& p, Parameter which) {
    if (which == Parameter::B) {
        const double omega = p.omega;
        return HamiltonianFamily(
            2,
            [omega](double t, double g) { return HermitianOperator(field_matrix(g, omega, t)); },
            [omega](double t, double) {
                return HermitianOperator(field_matrix(1.0, omega, t));
            });
    }
    const double B = p.B;
    return HamiltonianFamily(
        2,
        [B](double t, double g) { return HermitianOperator(field_matrix(B, g, t)); },
        [B](double t, double g) {
            // dH/dw = t B (sin(wt) sx - cos(wt) sz)
            ComplexMatrix m(2, 2);
            const double sx = t * B * std::sin(g * t);
            const double sz = -t * B * std::cos(g * t);
            m << sz, sx, sx, -sz;
            return HermitianOperator(std::move(m));
        });
}

Unitary closed_form_unitary_nocontrol(const RotatingFieldParams& p, double t) {
    const ComplexMatrix a = detail::expmi_raw<double>(pauli_y() * (p.omega / 2.0), -t);
    const ComplexMatrix inner = p.B * pauli_x() - (p.omega / 2.0) * pauli_y();
    const ComplexMatrix b = detail::expmi_raw<double>(inner, -t);
    return Unitary(a * b);
}

double qfi_B_optimal(const RotatingFieldParams&, double T) { return 4.0 * T * T; }

double qfi_B_nocontrol(const RotatingFieldParams& p, double T) {
    const double o2 = 4.0 * p.B * p.B + p.omega * p.omega;
    const double to = T * std::sqrt(o2);
    return 16.0 * p.B * p.B * T * T / o2 +
           8.0 * p.omega * p.omega * (1.0 - std::cos(to)) / (o2 * o2);
}

double qfi_omega_optimal(const RotatingFieldParams& p, double T) {
    return p.B * p.B * T * T * T * T;
}

double qfi_omega_nocontrol(const RotatingFieldParams& p, double T) {
    const double B2 = p.B * p.B;
    const double o2 = 4.0 * B2 + p.omega * p.omega;
    const double to = T * std::sqrt(o2);
    return 4.0 * B2 * T * T / o2 - 8.0 * B2 * T * std::sin(to) / std::pow(o2, 1.5) +
           8.0 * B2 * (1.0 - std::cos(to)) / (o2 * o2);
}

double qfi_omega_detuned(const RotatingFieldParams& p, double T) {
    const double dw = p.omega_c - p.omega;
    return p.B * p.B * std::pow(T, 4) * (1.0 - T * T * dw * dw / 18.0);
}

HermitianOperator h_omega_detuned_expansion(const RotatingFieldParams& p, double T) {
    const double dw = p.omega_c - p.omega;
    const double B = p.B;
    ComplexMatrix m = -(B * T * T / 2.0) * pauli_z();
    m += -(B * std::pow(T, 3) / 3.0) * dw * pauli_x();
    m += (4.0 * B * B * std::pow(T, 5) / 15.0 * pauli_y() +
          B * std::pow(T, 4) / 4.0 * pauli_z()) * (dw * dw / 2.0);
    return HermitianOperator(std::move(m));
}

ControlSchedule control_for_B(const RotatingFieldParams& p, const TimeGrid& grid) {
    const double omega = p.omega;
    ControlSchedule s(grid);
    s.analytic = [omega](double) { return (-omega / 2.0) * pauli_y(); };
    s.base.reserve(grid.steps + 1);
    for (int j = 0; j <= grid.steps; ++j) s.base.push_back(s.analytic(grid.node(j)));
    return s;
}

ControlSchedule control_for_omega(const RotatingFieldParams& p, const TimeGrid& grid) {
    const double B = p.B;
    const double wc = p.omega_c;
    ControlSchedule s(grid);
    s.analytic = [B, wc](double t) {
        return (-field_matrix(B, wc, t) - (wc / 2.0) * pauli_y()).eval();
    };
    s.base.reserve(grid.steps + 1);
    for (int j = 0; j <= grid.steps; ++j) s.base.push_back(s.analytic(grid.node(j)));
    return s;
}

TimeGrid pipeline_grid(double T, int steps_per_unit) {
    const int steps = std::max(1, static_cast<int>(std::ceil(T * steps_per_unit)));
    return TimeGrid(0.0, T, steps);
}

double qfi_B_nocontrol_pipeline(const RotatingFieldParams& p, double T, int steps_per_unit) {
    const TimeGrid grid = pipeline_grid(T, steps_per_unit);
    return qfi_max_from_generator(generator_h(hamiltonian(p, Parameter::B), p.B, grid));
}

double qfi_omega_nocontrol_pipeline(const RotatingFieldParams& p, double T, int steps_per_unit) {
    const TimeGrid grid = pipeline_grid(T, steps_per_unit);
    return qfi_max_from_generator(generator_h(hamiltonian(p, Parameter::omega), p.omega, grid));
}

double qfi_B_optimal_pipeline(const RotatingFieldParams& p, double T, int steps_per_unit) {
    const TimeGrid grid = pipeline_grid(T, steps_per_unit);
    const HamiltonianFamily fam = hamiltonian(p, Parameter::B);
    const HamiltonianFamily tot = total_hamiltonian(fam, control_for_B(p, grid));
    return qfi_max_from_generator(generator_h(tot, p.B, grid));
}

double qfi_omega_controlled_pipeline(const RotatingFieldParams& p, double T,
                                     int steps_per_unit) {
    const TimeGrid grid = pipeline_grid(T, steps_per_unit);
    const HamiltonianFamily fam = hamiltonian(p, Parameter::omega);
    const HamiltonianFamily tot = total_hamiltonian(fam, control_for_omega(p, grid));
    return qfi_max_from_generator(generator_h(tot, p.omega, grid));
}

double qfi_omega_controlled_pipeline_synth(const RotatingFieldParams& p, double T,
                                           int steps_per_unit) {
    const TimeGrid grid = pipeline_grid(T, steps_per_unit);
    const HamiltonianFamily fam = hamiltonian(p, Parameter::omega);
    const ControlSchedule sched = optimal_control(fam, p.omega_c, grid, GaugeChoice::zero());
    const HamiltonianFamily tot = total_hamiltonian(fam, sched);
    return qfi_max_from_generator(generator_h(tot, p.omega, grid));
}

double qfi_B_optimal_pipeline_synth(const RotatingFieldParams& p, double T,
                                    int steps_per_unit) {
    const TimeGrid grid = pipeline_grid(T, steps_per_unit);
    const HamiltonianFamily fam = hamiltonian(p, Parameter::B);
    const ControlSchedule sched =
        optimal_control(fam, p.B, grid, GaugeChoice::cancel_diagonal());
    const HamiltonianFamily tot = total_hamiltonian(fam, sched);
    return qfi_max_from_generator(generator_h(tot, p.B, grid));
}

// ---------------------------------------------------------------------------
// extended-precision controlled pipeline

namespace {

using ld = long double;
using cld = std::complex<ld>;
using Mat2 = std::array<cld, 4>;  // row major 2x2

Mat2 mul(const Mat2& a, const Mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 dagger(const Mat2& a) {
    return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}

// exp(-i H s) for Hermitian 2x2 via the Bloch closed form
Mat2 expmi2(const Mat2& H, ld s) {
    const ld a0 = (H[0].real() + H[3].real()) / 2;
    const ld az = (H[0].real() - H[3].real()) / 2;
    const ld ax = (H[1].real() + H[2].real()) / 2;
    const ld ay = (H[2].imag() - H[1].imag()) / 2;
    const ld r = std::sqrt(ax * ax + ay * ay + az * az);
    const cld ph(std::cos(a0 * s), -std::sin(a0 * s));
    if (r == 0.0L) return {ph, cld(0), cld(0), ph};
    const ld c = std::cos(r * s);
    const cld mis(0.0L, -std::sin(r * s) / r);
    return {ph * (c + mis * az), ph * (mis * cld(ax, -ay)),
            ph * (mis * cld(ax, ay)), ph * (c - mis * az)};
}

// squared eigenvalue gap of the controlled generator, all long double
ld controlled_gap2_ld(ld B, ld w, ld wc, ld T, long n) {
    const ld dt = T / n;
    Mat2 U{cld(1), cld(0), cld(0), cld(1)};
    Mat2 h{cld(0), cld(0), cld(0), cld(0)};
    for (long j = 0; j < n; ++j) {
        const ld t = (j + 0.5L) * dt;
        const ld cw = std::cos(w * t), sw = std::sin(w * t);
        const ld cc = std::cos(wc * t), sc = std::sin(wc * t);
        // H_tot = -B(cos w t sx + sin w t sz) + B(cos wc t sx + sin wc t sz) - wc/2 sy
        const Mat2 H{cld(-B * sw + B * sc), cld(-B * cw + B * cc, wc / 2),
                     cld(-B * cw + B * cc, -wc / 2), cld(B * sw - B * sc)};
        // dH/dw = t B (sin w t sx - cos w t sz)
        const Mat2 dH{cld(-t * B * cw), cld(t * B * sw), cld(t * B * sw), cld(t * B * cw)};
        const Mat2 half = expmi2(H, dt / 2);
        const Mat2 W = mul(half, U);
        const Mat2 integ = mul(dagger(W), mul(dH, W));
        for (int i = 0; i < 4; ++i) h[i] += integ[i] * dt;
        U = mul(half, W);
    }
    const ld hz = (h[0].real() - h[3].real()) / 2;
    const ld hx = (h[1].real() + h[2].real()) / 2;
    const ld hy = (h[2].imag() - h[1].imag()) / 2;
    const ld r = std::sqrt(hx * hx + hy * hy + hz * hz);
    return 4 * r * r;
}

}  // namespace

double qfi_omega_controlled_pipeline_precise(const RotatingFieldParams& p, double T,
                                             int steps) {
    const ld f1 = controlled_gap2_ld(p.B, p.omega, p.omega_c, T, steps);
    const ld f2 = controlled_gap2_ld(p.B, p.omega, p.omega_c, T, 2L * steps);
    return static_cast<double>((4.0L * f2 - f1) / 3.0L);  // Richardson in dt^2
}

Observable optimal_observable_for_omega(const RotatingFieldParams& p, double T) {
    // tracks of dH/dw at omega_c: psi_max = sin(wc t/2)|0> + cos(wc t/2)|1>,
    // psi_min = cos(wc t/2)|0> - sin(wc t/2)|1>, zero gauge
    const double half = p.omega_c * T / 2.0;
    ComplexVector vmax(2), vmin(2);
    vmax << std::sin(half), std::cos(half);
    vmin << std::cos(half), -std::sin(half);
    return make_observable(PureState::normalized(vmax + vmin),
                           PureState::normalized(vmax - vmin));
}

PureState optimal_initial_state_for_omega() {
    ComplexVector v(2);
    v << 1.0, 1.0;
    return PureState::normalized(v);
}

}  // namespace qmetro::qubit
