#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmetro/control.hpp"
#include "qmetro/fisher.hpp"
#include "qmetro/qubit_example.hpp"

using namespace qmetro;

namespace {

double maxdiff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

HamiltonianFamily diag_family(double a0, double a1, double b0, double b1, double c0, double c1) {
    // dH/dg = diag(a0 + a1 t, b0 + b1 t, c0 + c1 t), H = g dH
    auto dH = [=](double t) {
        Eigen::Vector3cd d(a0 + a1 * t, b0 + b1 * t, c0 + c1 * t);
        return ComplexMatrix(d.asDiagonal().toDenseMatrix());
    };
    return HamiltonianFamily(
        3, [dH](double t, double g) { return HermitianOperator((g * dH(t)).eval()); },
        [dH](double t, double) { return HermitianOperator(dH(t)); });
}

HamiltonianFamily diag2_family() {
    return HamiltonianFamily(
        2,
        [](double t, double g) {
            Eigen::Vector2cd d(g * (1.0 - t), g * t);
            return HermitianOperator(d.asDiagonal().toDenseMatrix());
        },
        [](double t, double) {
            Eigen::Vector2cd d(1.0 - t, t);
            return HermitianOperator(d.asDiagonal().toDenseMatrix());
        });
}

}  // namespace

TEST_CASE("tracks of a time-independent derivative are constant") {
    const ComplexMatrix H0 = (0.4 * pauli_x() + pauli_z()).eval();
    const HamiltonianFamily fam(
        2, [H0](double, double g) { return HermitianOperator((g * H0).eval()); },
        [H0](double, double) { return HermitianOperator(H0); });
    const TimeGrid grid(0.0, 2.0, 64);
    const double fconst = 0.37;
    const SpectralTracks tr = build_tracks(
        fam, 1.0, grid, GaugeChoice::custom([fconst](int, double, double) { return fconst; }));
    for (int j = 0; j <= grid.steps; ++j) {
        CHECK(maxdiff(tr.vectors[j], tr.vectors[0]) <= 1e-12);
        CHECK(tr.mu(0, j) == doctest::Approx(tr.mu(0, 0)));
    }
    CHECK(tr.theta(0, grid.steps) == doctest::Approx(fconst * 2.0).epsilon(1e-12));
    CHECK(tr.theta(1, grid.steps) == doctest::Approx(fconst * 2.0).epsilon(1e-12));
    CHECK(tr.lipschitz <= 1e-12);
}

TEST_CASE("qubit amplitude tracks match the analytic eigenstates") {
    // cos(wt/2)|+> + sin(wt/2)|-> and sin(wt/2)|+> - cos(wt/2)|->
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    const TimeGrid grid(0.0, 2.0, 1024);
    const SpectralTracks tr = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
    for (int j = 0; j <= grid.steps; j += 128) {
        const double t = grid.node(j);
        ComplexVector plus(2), minus(2);
        plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
        const ComplexVector a = std::cos(t / 2.0) * plus + std::sin(t / 2.0) * minus;
        const ComplexVector b = std::sin(t / 2.0) * plus - std::cos(t / 2.0) * minus;
        // a has dH eigenvalue -1, b has +1; compare as projectors
        CHECK(std::abs(a.dot(tr.vectors[j].col(0))) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(b.dot(tr.vectors[j].col(1))) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(tr.mu(0, j) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(tr.mu(1, j) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("qubit frequency tracks match the analytic eigenstates") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
    const TimeGrid grid(0.0, 2.0, 1024);
    const SpectralTracks tr = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
    CHECK(tr.had_degenerate_nodes);  // dH vanishes at t = 0
    for (int j = 64; j <= grid.steps; j += 128) {
        const double t = grid.node(j);
        ComplexVector up(2), dn(2);
        up << std::sin(t / 2.0), std::cos(t / 2.0);   // eigenvalue +tB
        dn << std::cos(t / 2.0), -std::sin(t / 2.0);  // eigenvalue -tB
        CHECK(std::abs(dn.dot(tr.vectors[j].col(0))) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(up.dot(tr.vectors[j].col(1))) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(tr.mu(1, j) == doctest::Approx(t).epsilon(1e-12));
    }
}

TEST_CASE("optimal control closed forms") {
    SUBCASE("multiplicative time-independent parameter: H_c = 0") {
        const ComplexMatrix H0 = (0.8 * pauli_z() + 0.1 * pauli_x()).eval();
        const HamiltonianFamily fam(
            2, [H0](double, double g) { return HermitianOperator((g * H0).eval()); },
            [H0](double, double) { return HermitianOperator(H0); });
        const TimeGrid grid(0.0, 1.0, 256);
        const ControlSchedule s =
            optimal_control(fam, 0.9, grid, GaugeChoice::cancel_diagonal());
        for (const auto& m : s.base) CHECK(m.cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("general time-independent Hamiltonian with f = 0: H_c = -H") {
        // H(t,g) = sx + g sz so dH = sz does not commute with H
        const HamiltonianFamily fam(
            2,
            [](double, double g) {
                return HermitianOperator((pauli_x() + g * pauli_z()).eval());
            },
            [](double, double) { return HermitianOperator(pauli_z()); });
        const TimeGrid grid(0.0, 1.0, 128);
        const ControlSchedule s = optimal_control(fam, 0.4, grid, GaugeChoice::zero());
        const ComplexMatrix expected = (-(pauli_x() + 0.4 * pauli_z())).eval();
        for (const auto& m : s.base) CHECK(maxdiff(m, expected) <= 1e-10);
    }
    SUBCASE("qubit amplitude control: H_c = -(w/2) sy") {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
        const TimeGrid grid(0.0, 1.0, 4096);
        const ControlSchedule s =
            optimal_control(fam, 1.0, grid, GaugeChoice::cancel_diagonal());
        const ComplexMatrix expected = (-0.5 * pauli_y()).eval();
        double worst = 0.0;
        for (const auto& m : s.base) worst = std::max(worst, maxdiff(m, expected));
        CHECK(worst <= 1e-8);
        CHECK(s.presym_defect <= 1e-6);
    }
    SUBCASE("qubit frequency control matches the closed-form schedule") {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.3);  // detuned trial frequency
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
        const TimeGrid grid(0.0, 1.0, 4096);
        const ControlSchedule synth = optimal_control(fam, 1.3, grid, GaugeChoice::zero());
        const ControlSchedule closed = qubit::control_for_omega(p, grid);
        double worst = 0.0;
        for (int j = 0; j <= grid.steps; ++j)
            worst = std::max(worst, maxdiff(synth.base[j], closed.base[j]));
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("crossing detection") {
    SUBCASE("rotating-field qubit has no crossings") {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        for (auto which : {qubit::Parameter::B, qubit::Parameter::omega}) {
            const SpectralTracks tr = build_tracks(qubit::hamiltonian(p, which), 1.0,
                                                   TimeGrid(0.0, 2.0, 512), GaugeChoice::zero());
            CHECK(detect_crossings(tr).empty());
        }
    }
    SUBCASE("linear two-level crossing at tau = 1/2") {
        const SpectralTracks tr =
            build_tracks(diag2_family(), 1.0, TimeGrid(0.0, 1.0, 512), GaugeChoice::zero());
        const auto cs = detect_crossings(tr);
        REQUIRE(cs.size() == 1);
        CHECK(cs[0].tau == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(cs[0].actionable);
    }
    SUBCASE("three levels, two crossings, time ordered") {
        // mu = 1 - t, t, t - 0.2: crossings of (1-t, t) at 0.5 and (1-t, t-0.2) at 0.6
        const HamiltonianFamily fam = diag_family(1.0, -1.0, 0.0, 1.0, -0.2, 1.0);
        const TimeGrid grid(0.0, 1.0, 640);
        const SpectralTracks tr = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
        const auto cs = detect_crossings(tr);
        REQUIRE(cs.size() == 2);
        CHECK(cs[0].tau == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(cs[1].tau == doctest::Approx(0.6).epsilon(1e-9));
        // oracle: dense sign scan at 10x resolution on the analytic
        // eigenvalues, sample points offset so crossings never land on them
        int found = 0;
        const int fine = 6400;
        auto mu = [](int which, double t) {
            return which == 0 ? 1.0 - t : (which == 1 ? t : t - 0.2);
        };
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                for (int j = 0; j + 1 < fine; ++j) {
                    const double t0 = (j + 0.37) / double(fine);
                    const double t1 = (j + 1.37) / double(fine);
                    if ((mu(a, t0) - mu(b, t0)) * (mu(a, t1) - mu(b, t1)) < 0.0) ++found;
                }
        CHECK(found == static_cast<int>(cs.size()));
    }
}

TEST_CASE("crossing pulse construction") {
    // 4000 slices make the 0.05 window commensurate with the grid
    const SpectralTracks tr =
        build_tracks(diag2_family(), 1.0, TimeGrid(0.0, 1.0, 4000), GaugeChoice::zero());
    SUBCASE("flat profile amplitude is area / width = 10 pi for l = 0") {
        const CrossingPulse p = crossing_pulse(tr, 0.5, 0, 1, 0.05, 0, PulseProfile::flat);
        CHECK(p.amplitude * p.scale ==
              doctest::Approx(10.0 * std::acos(-1.0)).epsilon(1e-12));
        CHECK(p.area() == doctest::Approx(0.5 * std::acos(-1.0)).epsilon(1e-12));
        CHECK(p.t_hi - p.t_lo == doctest::Approx(0.05).epsilon(1e-12));
    }
    SUBCASE("area condition is enforced") {
        for (long l : {0L, 1L, 5L}) {
            const CrossingPulse p =
                crossing_pulse(tr, 0.5, 0, 1, 0.05, l, PulseProfile::raised_cosine);
            CHECK(std::abs(p.area() - (l + 0.5) * std::acos(-1.0)) <= 1e-9);
        }
        CHECK_THROWS_AS(
            crossing_pulse_with_area(tr, 0.5, 0, 1, 0.05, std::acos(-1.0), PulseProfile::flat),
            InvalidPulseArea);
    }
    SUBCASE("window escaping the grid is rejected") {
        CHECK_THROWS_AS(crossing_pulse(tr, 0.01, 0, 1, 0.05, 0, PulseProfile::flat), Error);
    }
    SUBCASE("nonpositive width selects the ten-slice default window") {
        const CrossingPulse p = crossing_pulse(tr, 0.5, 0, 1, 0.0, 0, PulseProfile::flat);
        CHECK(p.t_hi - p.t_lo == doctest::Approx(10.0 * tr.grid.dt()).epsilon(1e-12));
        CHECK(std::abs(p.area() - 0.5 * std::acos(-1.0)) <= 1e-9);
    }
    SUBCASE("overlapping pulse windows are rejected") {
        ControlSchedule s(tr.grid);
        s.add_pulse(crossing_pulse(tr, 0.5, 0, 1, 0.05, 0, PulseProfile::flat));
        CHECK_THROWS_AS(
            s.add_pulse(crossing_pulse(tr, 0.52, 0, 1, 0.05, 0, PulseProfile::flat)),
            WindowOverlap);
        // disjoint window is fine
        s.add_pulse(crossing_pulse(tr, 0.7, 0, 1, 0.05, 0, PulseProfile::flat));
        CHECK(s.pulses.size() == 2);
    }
}

TEST_CASE("total Hamiltonian") {
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
    SUBCASE("zero schedule leaves the family unchanged") {
        const HamiltonianFamily tot =
            total_hamiltonian(fam, ControlSchedule::zero(TimeGrid(0.0, 1.0, 16)));
        for (double t : {0.1, 0.9})
            CHECK(maxdiff(tot.evaluate(t, 1.0).matrix(), fam.evaluate(t, 1.0).matrix()) == 0.0);
    }
    SUBCASE("matched control collapses the total Hamiltonian to -(w/2) sy") {
        const TimeGrid grid(0.0, 1.0, 256);
        const HamiltonianFamily tot = total_hamiltonian(fam, qubit::control_for_omega(p, grid));
        for (double t : {0.0, 0.37, 1.0})
            CHECK(maxdiff(tot.evaluate(t, 1.0).matrix(), (-0.5 * pauli_y()).eval()) <= 1e-12);
        const Unitary U = propagate(tot, 1.0, grid);
        const ComplexMatrix ref = detail::expmi_raw<double>((0.5 * pauli_y()).eval(), -1.0);
        CHECK(maxdiff(U.matrix(), ref) <= 1e-12);
    }
    SUBCASE("schedule is frozen in the estimated parameter") {
        const TimeGrid grid(0.0, 1.0, 64);
        const HamiltonianFamily tot = total_hamiltonian(fam, qubit::control_for_omega(p, grid));
        for (double g : {0.9, 1.0, 1.1}) {
            const ComplexMatrix sched_part =
                tot.evaluate(0.3, g).matrix() - fam.evaluate(0.3, g).matrix();
            const ComplexMatrix sched_ref =
                tot.evaluate(0.3, 1.0).matrix() - fam.evaluate(0.3, 1.0).matrix();
            CHECK(maxdiff(sched_part, sched_ref) == 0.0);
            CHECK(maxdiff(tot.evaluate_dg(0.3, g).matrix(), fam.evaluate_dg(0.3, g).matrix()) ==
                  0.0);
        }
    }
    SUBCASE("dimension mismatch is rejected") {
        const TimeGrid grid(0.0, 1.0, 8);
        ControlSchedule s(grid);
        for (int j = 0; j <= 8; ++j) s.base.push_back(ComplexMatrix::Zero(3, 3));
        CHECK_THROWS_AS(total_hamiltonian(fam, s), DimMismatch);
    }
}

TEST_CASE("controlled generator is diagonal in the initial tracks") {
    // eigenvalues of h are Int mu_k dt (+-B T^2/2 for the frequency case)
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    const double T = 2.0;
    const TimeGrid grid = qubit::pipeline_grid(T, 2048);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
    const SpectralTracks tr = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
    const HamiltonianFamily tot = total_hamiltonian(fam, optimal_control(tr, fam, 1.0));
    const HermitianOperator h = generator_h(tot, 1.0, grid);
    const EigResult e = eig_hermitian(h);
    const double dt = grid.dt();
    double i0 = 0.0, i1 = 0.0;
    for (int j = 0; j < grid.steps; ++j) {
        i0 += 0.5 * (tr.mu(0, j) + tr.mu(0, j + 1)) * dt;
        i1 += 0.5 * (tr.mu(1, j) + tr.mu(1, j + 1)) * dt;
    }
    CHECK(e.values[0] == doctest::Approx(std::min(i0, i1)).epsilon(1e-6));
    CHECK(e.values[1] == doctest::Approx(std::max(i0, i1)).epsilon(1e-6));
    CHECK(e.values[1] == doctest::Approx(T * T / 2.0).epsilon(1e-6));
}

TEST_CASE("tracking ambiguity on a discontinuous family") {
    // dH jumps from sz to sx: no dominant assignment survives the jump
    const HamiltonianFamily fam(
        2,
        [](double t, double g) {
            return HermitianOperator((g * (t < 0.5 ? pauli_z() : pauli_x())).eval());
        },
        [](double t, double) {
            return HermitianOperator(t < 0.5 ? pauli_z() : pauli_x());
        });
    CHECK_THROWS_AS(build_tracks(fam, 1.0, TimeGrid(0.0, 1.0, 64), GaugeChoice::zero()),
                    TrackingAmbiguity);
}

TEST_CASE("schedule JSON round trip") {
    const SpectralTracks tr =
        build_tracks(diag2_family(), 1.0, TimeGrid(0.0, 1.0, 200), GaugeChoice::zero());
    ControlSchedule s = optimal_control(tr, diag2_family(), 1.0);
    s.add_pulse(crossing_pulse(tr, 0.5, 0, 1, 0.05, 1, PulseProfile::raised_cosine));
    const std::string text = schedule_to_json(s);
    const ControlSchedule back = schedule_from_json(text);
    REQUIRE(back.base.size() == s.base.size());
    for (size_t j = 0; j < s.base.size(); ++j) CHECK(maxdiff(back.base[j], s.base[j]) == 0.0);
    REQUIRE(back.pulses.size() == 1);
    CHECK(back.pulses[0].l == 1);
    CHECK(back.pulses[0].scale == s.pulses[0].scale);
    for (double t : {0.13, 0.497, 0.51, 0.86})
        CHECK(maxdiff(back(t), s(t)) <= 1e-14);
    // second serialization is byte-identical
    CHECK(schedule_to_json(back) == text);
}
