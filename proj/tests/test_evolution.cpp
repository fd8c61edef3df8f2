#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmetro/evolution.hpp"
#include "qmetro/fisher.hpp"
#include "qmetro/qubit_example.hpp"

using namespace qmetro;

namespace {

double maxdiff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

HamiltonianFamily zero_family() {
    return HamiltonianFamily(
        2, [](double, double) { return HermitianOperator(ComplexMatrix::Zero(2, 2)); },
        [](double, double) { return HermitianOperator(ComplexMatrix::Zero(2, 2)); });
}

// H = g H0 with H0 time independent
HamiltonianFamily multiplicative_family(const ComplexMatrix& H0) {
    return HamiltonianFamily(
        H0.rows(),
        [H0](double, double g) { return HermitianOperator((g * H0).eval()); },
        [H0](double, double) { return HermitianOperator(H0); });
}

// centered finite difference of the propagator, Richardson extrapolated
ComplexMatrix fd_dg_propagator(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                               double delta) {
    auto diff = [&](double d) {
        return ((propagate(fam, g + d, grid).matrix() - propagate(fam, g - d, grid).matrix()) /
                (2.0 * d))
            .eval();
    };
    const ComplexMatrix d1 = diff(delta);
    const ComplexMatrix d2 = diff(2.0 * delta);
    return (4.0 * d1 - d2) / 3.0;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 4), Error);
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), Error);
    const TimeGrid g(0.0, 2.0, 4);
    CHECK(g.dt() == doctest::Approx(0.5));
    CHECK(g.node(3) == doctest::Approx(1.5));
    CHECK(g.midpoint(0) == doctest::Approx(0.25));
}

TEST_CASE("zero Hamiltonian propagates to the identity") {
    const Unitary u = propagate(zero_family(), 0.0, TimeGrid(0.0, 3.0, 64));
    CHECK(maxdiff(u.matrix(), ComplexMatrix::Identity(2, 2)) == doctest::Approx(0.0));
}

TEST_CASE("constant Hamiltonian reduces to a single exponential") {
    const HamiltonianFamily fam = multiplicative_family(pauli_z());
    const Unitary u = propagate(fam, 1.0, TimeGrid(0.0, 0.7, 128));
    const Unitary ref = expm_i(pauli(PauliAxis::Z), 0.7);
    CHECK(maxdiff(u.matrix(), ref.matrix()) <= 1e-12);
}

TEST_CASE("rotating-field qubit matches the closed-form unitary") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    const Unitary u = propagate(fam, 1.0, TimeGrid(0.0, 1.0, 4096));
    const Unitary ref = qubit::closed_form_unitary_nocontrol(p, 1.0);
    CHECK(maxdiff(u.matrix(), ref.matrix()) <= 1e-6);
}

TEST_CASE("midpoint sampling converges at order two") {
    const qubit::RotatingFieldParams p(1.0, 2.0, 2.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    const ComplexMatrix ref = qubit::closed_form_unitary_nocontrol(p, 1.0).matrix();
    double prev = -1.0;
    for (int steps : {256, 512, 1024}) {
        const double err = maxdiff(propagate(fam, 1.0, TimeGrid(0.0, 1.0, steps)).matrix(), ref);
        if (prev > 0.0) CHECK(prev / err >= 3.5);
        prev = err;
    }
}

TEST_CASE("left-endpoint mode is retained and first order") {
    const qubit::RotatingFieldParams p(1.0, 2.0, 2.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    const ComplexMatrix ref = qubit::closed_form_unitary_nocontrol(p, 1.0).matrix();
    const double e1 =
        maxdiff(propagate(fam, 1.0, TimeGrid(0.0, 1.0, 512), Sampling::left_endpoint).matrix(),
                ref);
    const double e2 =
        maxdiff(propagate(fam, 1.0, TimeGrid(0.0, 1.0, 1024), Sampling::left_endpoint).matrix(),
                ref);
    CHECK(e1 / e2 >= 1.8);
    CHECK(e1 / e2 <= 2.4);
}

TEST_CASE("dg_propagator closed forms and finite-difference oracle") {
    SUBCASE("multiplicative: dU = -i sz exp(-i g sz)") {
        const HamiltonianFamily fam = multiplicative_family(pauli_z());
        const TimeGrid grid(0.0, 1.0, 512);
        const double g = 0.8;
        const ComplexMatrix dU = dg_propagator(fam, g, grid);
        const ComplexMatrix ref =
            complexd(0, -1) * pauli_z() * detail::expmi_raw<double>((g * pauli_z()).eval(), 1.0);
        CHECK(maxdiff(dU, ref) <= 1e-8);
    }
    SUBCASE("zero family gives the zero matrix") {
        CHECK(dg_propagator(zero_family(), 0.3, TimeGrid(0.0, 1.0, 32)).cwiseAbs().maxCoeff() ==
              doctest::Approx(0.0));
    }
    SUBCASE("matched-control frequency derivative") {
        // with the field control at omega_c = omega the total Hamiltonian is
        // -(w/2) sy and dU/dw = (i/2) B T^2 (-sin(wT/2) sx + cos(wT/2) sz)
        const double B = 1.0, w = 1.0, T = 1.0;
        const qubit::RotatingFieldParams p(B, w, w);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
        const TimeGrid grid(0.0, T, 4096);
        const HamiltonianFamily tot =
            total_hamiltonian(fam, qubit::control_for_omega(p, grid));
        const ComplexMatrix dU = dg_propagator(tot, w, grid);
        const ComplexMatrix ref = complexd(0, 0.5) * B * T * T *
                                  (-std::sin(w * T / 2) * pauli_x() +
                                   std::cos(w * T / 2) * pauli_z());
        CHECK(maxdiff(dU, ref) <= 1e-7);
        CHECK(maxdiff(dU, fd_dg_propagator(tot, w, grid, 1e-6)) <= 1e-7);
    }
    SUBCASE("uncontrolled qubit agrees with the finite difference") {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
        const TimeGrid grid(0.0, 2.0, 8192);
        CHECK(maxdiff(dg_propagator(fam, 1.0, grid), fd_dg_propagator(fam, 1.0, grid, 1e-6)) <=
              1e-7);
    }
}

TEST_CASE("generator closed forms") {
    SUBCASE("multiplicative parameter: h = T H0") {
        const ComplexMatrix H0 = (pauli_x() + 0.3 * pauli_z()).eval();
        const HamiltonianFamily fam = multiplicative_family(H0);
        const TimeGrid grid(0.0, 1.3, 512);
        const HermitianOperator h = generator_h(fam, 0.7, grid);
        CHECK(maxdiff(h.matrix(), (1.3 * H0).eval()) <= 1e-10);
    }
    SUBCASE("uncontrolled qubit h_B sigma_x coefficient") {
        // -(4 B^2 T/(4B^2+w^2) + w^2 sin(T sqrt(4B^2+w^2))/(4B^2+w^2)^{3/2})
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
        const HermitianOperator h = generator_h(fam, 1.0, TimeGrid(0.0, 1.0, 8192));
        const double frozen = -0.87036898157513980;
        CHECK(h.matrix()(0, 1).real() == doctest::Approx(frozen).epsilon(1e-7));
    }
    SUBCASE("matched control: h_w = -(B T^2/2) sz") {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
        const TimeGrid grid(0.0, 2.0, 8192);
        const HamiltonianFamily tot =
            total_hamiltonian(fam, qubit::control_for_omega(p, grid));
        const HermitianOperator h = generator_h(tot, 1.0, grid);
        CHECK(maxdiff(h.matrix(), (-2.0 * pauli_z()).eval()) <= 1e-8);
    }
}

TEST_CASE("generator equals i U^dag dU and stays Hermitian at any resolution") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
    for (int steps : {16, 64, 256, 1024}) {
        const TimeGrid grid(0.0, 1.5, steps);
        const HermitianOperator h = generator_h(fam, 1.0, grid);
        CHECK(hermiticity_defect(h.matrix()) <= 1e-12);
        const ComplexMatrix viaU = complexd(0, 1) * propagate(fam, 1.0, grid).matrix().adjoint() *
                                   dg_propagator(fam, 1.0, grid);
        CHECK(maxdiff(h.matrix(), viaU) <= 1e-8);
    }
}

TEST_CASE("generator variance agrees with the fidelity finite difference") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
    for (double T : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const TimeGrid grid = qubit::pipeline_grid(T);
        const HermitianOperator h = generator_h(fam, 1.0, grid);
        const EigResult e = eig_hermitian(h);
        const PureState psi0 =
            PureState::normalized(e.vectors.col(0) + e.vectors.col(h.dim() - 1));
        const double qg = qfi_from_generator(h, psi0);
        const double qf = qfi_fidelity_fd(fam, 1.0, grid, psi0, 1e-4);
        CHECK(std::abs(qf / qg - 1.0) <= 1e-4);
    }
}

TEST_CASE("propagate_states tracks the unitary node by node") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    const TimeGrid grid(0.0, 1.0, 64);
    ComplexVector v0(2);
    v0 << 1.0, 0.0;
    const auto states = propagate_states(fam, 1.0, grid, PureState(v0));
    REQUIRE(states.size() == 65);
    const Unitary u = propagate(fam, 1.0, grid);
    CHECK((states.back().amplitudes() - u.matrix() * v0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("default step count scales with time span and spectral norm") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    CHECK(default_steps(fam, 1.0, 0.0, 2.0) == 2 * 4096);  // |H| = B = 1
    const HamiltonianFamily strong = qubit::hamiltonian({3.0, 1.0, 1.0}, qubit::Parameter::B);
    CHECK(default_steps(strong, 3.0, 0.0, 1.0) == 3 * 4096);
    CHECK(default_steps(fam, 1.0, 0.0, 0.5, 512) == 256);
}

TEST_CASE("finite-difference derivative fallback is flagged and accurate") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily exact = qubit::hamiltonian(p, qubit::Parameter::omega);
    const HamiltonianFamily fd = HamiltonianFamily::with_fd_derivative(
        2, [](double t, double g) {
            ComplexMatrix m(2, 2);
            const double c = std::cos(g * t), s = std::sin(g * t);
            m << -s, -c, -c, s;
            return HermitianOperator(std::move(m));
        });
    CHECK(fd.derivative_is_fd());
    CHECK_FALSE(exact.derivative_is_fd());
    for (double t : {0.2, 1.1}) {
        CHECK(maxdiff(fd.evaluate_dg(t, 1.0).matrix(), exact.evaluate_dg(t, 1.0).matrix()) <=
              1e-8);
    }
}
