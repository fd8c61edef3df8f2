#include "qmetro/verify.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "qmetro/adaptive.hpp"
#include "qmetro/fisher.hpp"
#include "qmetro/measurement.hpp"
#include "qmetro/qubit_example.hpp"

namespace qmetro::verify {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void for_each_indexed(int count, const std::function<void(int)>& job) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const int n = std::min<int>(hw, count);
    if (n <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

HamiltonianFamily diag_crossing_family() {
    return HamiltonianFamily(
        2,
        [](double t, double g) {
            ComplexMatrix m = ComplexMatrix::Zero(2, 2);
            m(0, 0) = g * (1.0 - t);
            m(1, 1) = g * t;
            return HermitianOperator(std::move(m));
        },
        [](double t, double) {
            ComplexMatrix m = ComplexMatrix::Zero(2, 2);
            m(0, 0) = 1.0 - t;
            m(1, 1) = t;
            return HermitianOperator(std::move(m));
        });
}

// diag(1-t, t) conjugated by a slow y-rotation; eigenvectors genuinely move
HamiltonianFamily rotated_crossing_family(double rate) {
    auto dH = [rate](double t) {
        const ComplexMatrix R = detail::expmi_raw<double>(pauli_y(), rate * t);
        ComplexMatrix D = ComplexMatrix::Zero(2, 2);
        D(0, 0) = 1.0 - t;
        D(1, 1) = t;
        return (R * D * R.adjoint()).eval();
    };
    return HamiltonianFamily(
        2, [dH](double t, double g) { return HermitianOperator((g * dH(t)).eval()); },
        [dH](double t, double) { return HermitianOperator(dH(t)); });
}

struct Check {
    bool ok = true;
    double worst = 0.0;
    void track(double err, double tol) {
        worst = std::max(worst, err);
        if (err > tol) ok = false;
    }
};

CriterionResult criterion1() {
    const auto t_start = std::chrono::steady_clock::now();
    const double omegas[] = {0.5, 1.0, 2.0, 5.0};
    const double times[] = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    struct Job { double w, T; };
    std::vector<Job> jobs;
    for (double w : omegas)
        for (double T : times) jobs.push_back({w, T});
    std::vector<double> errB(jobs.size()), errW(jobs.size());
    for_each_indexed(static_cast<int>(jobs.size()), [&](int i) {
        const qubit::RotatingFieldParams p(1.0, jobs[i].w, jobs[i].w);
        errB[i] = std::abs(qubit::qfi_B_nocontrol_pipeline(p, jobs[i].T) /
                               qubit::qfi_B_nocontrol(p, jobs[i].T) - 1.0);
        errW[i] = std::abs(qubit::qfi_omega_nocontrol_pipeline(p, jobs[i].T) /
                               qubit::qfi_omega_nocontrol(p, jobs[i].T) - 1.0);
    });
    double worst = 0.0;
    for (size_t i = 0; i < jobs.size(); ++i) worst = std::max({worst, errB[i], errW[i]});
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    const bool ok = worst <= 1e-6 && secs <= 60.0;
    return {1, "closed-form oracle equality (uncontrolled pipelines)", ok,
            "max rel err " + fmt(worst) + " (tol 1e-6), runtime " + fmt(secs) + " s (limit 60)",
            secs};
}

CriterionResult criterion2() {
    const auto t_start = std::chrono::steady_clock::now();
    Check qfi;
    for (double T : {1.0, 2.0, 5.0}) {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        qfi.track(std::abs(qubit::qfi_B_optimal_pipeline_synth(p, T) / (4.0 * T * T) - 1.0),
                  1e-6);
        qfi.track(std::abs(qubit::qfi_omega_controlled_pipeline_synth(p, T) / std::pow(T, 4) -
                           1.0),
                  1e-6);
    }
    // generator of the omega-controlled family against -(B T^2 / 2) sz
    Check hchk;
    for (double T : {1.0, 2.0}) {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const TimeGrid grid = qubit::pipeline_grid(T);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
        const ControlSchedule sched = optimal_control(fam, 1.0, grid, GaugeChoice::zero());
        const HermitianOperator h = generator_h(total_hamiltonian(fam, sched), 1.0, grid);
        const ComplexMatrix ref = -(T * T / 2.0) * pauli_z();
        hchk.track((h.matrix() - ref).cwiseAbs().maxCoeff(), 1e-8);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {2, "bound saturation under synthesized control", qfi.ok && hchk.ok,
            "max QFI rel err " + fmt(qfi.worst) + " (tol 1e-6), max |h - (-BT^2/2)sz| " +
                fmt(hchk.worst) + " (tol 1e-8)",
            secs};
}

CriterionResult criterion3() {
    const auto t_start = std::chrono::steady_clock::now();
    const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
    std::vector<double> lt, lf;
    const int n_ctrl = 7;
    std::vector<double> vals_ctrl(n_ctrl), Ts_ctrl(n_ctrl);
    for_each_indexed(n_ctrl, [&](int i) {
        const double T = std::exp(std::log(1.0) +
                                  (std::log(20.0) - std::log(1.0)) * i / (n_ctrl - 1.0));
        Ts_ctrl[i] = T;
        vals_ctrl[i] = qubit::qfi_omega_controlled_pipeline_synth(p, T);
    });
    for (int i = 0; i < n_ctrl; ++i) {
        lt.push_back(std::log(Ts_ctrl[i]));
        lf.push_back(std::log(vals_ctrl[i]));
    }
    const double slope_ctrl = fit_slope(lt, lf);

    const int n_un = 16;
    std::vector<double> vals_un(n_un), Ts_un(n_un);
    for_each_indexed(n_un, [&](int i) {
        const double T = std::exp(std::log(10.0) +
                                  (std::log(40.0) - std::log(10.0)) * i / (n_un - 1.0));
        Ts_un[i] = T;
        vals_un[i] = qubit::qfi_omega_nocontrol_pipeline(p, T);
    });
    lt.clear();
    lf.clear();
    for (int i = 0; i < n_un; ++i) {
        lt.push_back(std::log(Ts_un[i]));
        lf.push_back(std::log(vals_un[i]));
    }
    const double slope_un = fit_slope(lt, lf);

    const bool ok = std::abs(slope_ctrl - 4.0) <= 0.01 && std::abs(slope_un - 2.0) <= 0.05;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {3, "T^4 and T^2 time scaling", ok,
            "controlled slope " + fmt(slope_ctrl) + " (4 +- 0.01), uncontrolled slope " +
                fmt(slope_un) + " (2 +- 0.05)",
            secs};
}

CriterionResult criterion4() {
    const auto t_start = std::chrono::steady_clock::now();
    const double T = 2.0;
    std::vector<double> ld, lr;
    for (double tdw : {1e-3, 2e-3, 4e-3}) {
        const double dw = tdw / T;
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0 + dw);
        const double pipeline = qubit::qfi_omega_controlled_pipeline_precise(p, T, 4096);
        const double approx = qubit::qfi_omega_detuned(p, T);
        ld.push_back(std::log(dw));
        lr.push_back(std::log(std::abs(pipeline - approx)));
    }
    const double slope = fit_slope(ld, lr);
    const bool ok = std::abs(slope - 4.0) <= 0.3;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {4, "detuned expansion residual scales as dw^4", ok,
            "residual fit exponent " + fmt(slope) + " (4 +- 0.3)", secs};
}

CriterionResult criterion5() {
    const auto t_start = std::chrono::steady_clock::now();
    Check c;
    for (double w : {0.5, 1.0, 2.0}) {
        const qubit::RotatingFieldParams p(1.0, w, w);
        const double T = 200.0 / std::sqrt(4.0 + w * w);
        const double ratio = qubit::qfi_B_optimal(p, T) / qubit::qfi_B_nocontrol(p, T);
        const double limit = 1.0 + w * w / 4.0;
        c.track(std::abs(ratio / limit - 1.0), 0.01);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {5, "control-gain ratio limit 1 + w^2/(4B^2)", c.ok,
            "max rel deviation " + fmt(c.worst) + " (tol 1e-2)", secs};
}

CriterionResult criterion6() {
    const auto t_start = std::chrono::steady_clock::now();
    const double B = 1.0, w = 1.0, T = 2.0;
    const qubit::RotatingFieldParams p(B, w, w);
    const TimeGrid grid(0.0, T, 2048);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
    const SpectralTracks tracks = build_tracks(fam, w, grid, GaugeChoice::zero());
    const double bound = qfi_upper_bound(fam, w, grid);
    const double ev = estimator_variance(tracks, T, 0.0);
    const bool exact = (1.0 / ev) == bound;

    // Monte-Carlo estimator variance at mid fringe
    const double gap = tracks.gap_integral_mid;
    const double dg = std::numbers::pi / 4.0 / gap;
    const qubit::RotatingFieldParams run_p(B, w + dg, w);  // true omega detuned from control
    const HamiltonianFamily tot =
        total_hamiltonian(qubit::hamiltonian(run_p, qubit::Parameter::omega),
                          qubit::control_for_omega(run_p, grid));
    const Unitary U = propagate(tot, w + dg, grid);
    const PureState psi0 = qubit::optimal_initial_state_for_omega();
    const PureState psiT = PureState::normalized(U.matrix() * psi0.amplitudes());
    const Observable obs = qubit::optimal_observable_for_omega(run_p, T);
    const EstimatorStats st = estimator_stats(psiT, obs);
    const double p_plus = std::clamp((st.mean / st.in_span_weight + 1.0) / 2.0, 0.0, 1.0);

    const long shots = 100000;
    const int reps = 2000;
    std::vector<double> est(reps);
    for_each_indexed(reps, [&](int r) {
        const auto counts = detail::bernoulli_counts(p_plus, shots, 777 + 1315423911ULL * r);
        est[r] = invert_mean(counts.mean(), gap);
    });
    double mean_est = 0.0;
    for (double e : est) mean_est += e;
    mean_est /= reps;
    // estimator variance about the sample mean; the detuning's systematic
    // offset is a calibration constant, not statistical error
    double var = 0.0;
    for (double e : est) var += (e - mean_est) * (e - mean_est);
    var /= (reps - 1);
    const double target = 1.0 / (static_cast<double>(shots) * bound);
    const double mc_dev = std::abs(var / target - 1.0);

    const bool ok = exact && mc_dev <= 0.05;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {6, "measurement saturation (exact reciprocal + Monte Carlo)", ok,
            std::string("reciprocal exact: ") + (exact ? "yes" : "NO") + ", MC var deviation " +
                fmt(mc_dev) + " (tol 0.05)",
            secs};
}

CriterionResult criterion7() {
    const auto t_start = std::chrono::steady_clock::now();
    Check closed;
    for (long N : {1L, 100L}) {
        double I = 4.0;
        for (int n = 1; n <= 6; ++n) {
            const auto s = adaptive::recursion_step(I, 1.0, N);
            closed.track(std::abs(s.T_next / adaptive::closed_form_T(4.0, 1.0, N, n) - 1.0),
                         1e-12);
            closed.track(std::abs(s.I_next / adaptive::closed_form_I(4.0, 1.0, N, n) - 1.0),
                         1e-12);
            I = s.I_next;
        }
    }
    // trace columns reproduce the closed forms
    adaptive::AdaptiveConfig noiseless;
    noiseless.I0 = 4.0;
    noiseless.N = 100;
    noiseless.B = 1.0;
    noiseless.rounds = 4;
    noiseless.replicas = 1;
    noiseless.noiseless = true;
    noiseless.seed = 3;
    const auto trace = adaptive::simulate_protocol(noiseless);
    for (const auto& r : trace.replicas[0].rounds) {
        closed.track(
            std::abs(r.T_n / adaptive::closed_form_T(4.0, 1.0, 100, r.n) - 1.0), 1e-12);
        closed.track(
            std::abs(r.I_analytic / adaptive::closed_form_I(4.0, 1.0, 100, r.n) - 1.0), 1e-12);
    }

    // empirical variance across replicas
    adaptive::AdaptiveConfig mc;
    mc.I0 = 4.0;
    mc.N = 10000;
    mc.B = 1.0;
    mc.rounds = 3;
    mc.replicas = 400;
    mc.seed = 20240817;
    const auto study = adaptive::simulate_protocol(mc);
    const double I3 = study.replicas[0].rounds[2].I_analytic;
    double var = 0.0;
    for (const auto& t : study.replicas) {
        const double d = t.final_estimate - mc.omega_true;
        var += d * d;
    }
    var /= mc.replicas;
    const double mc_dev = std::abs(var * static_cast<double>(mc.N) * I3 - 1.0);

    // rounds_needed against direct recursion
    std::mt19937_64 rng(99);
    auto uni = [&rng](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    int mismatches = 0;
    for (int k = 0; k < 50; ++k) {
        adaptive::AdaptiveConfig c;
        c.B = uni(0.5, 2.0);
        c.N = 1 + static_cast<long>(uni(0.0, 1000.0));
        c.I0 = adaptive::threshold_I0(c.B, c.N) * 1.02 + uni(0.0, 10.0);
        c.target_T = uni(2.0, 1e4);
        const int formula = adaptive::rounds_needed(c);
        int direct = 1;
        double I = c.I0;
        while (std::sqrt(I) < c.target_T && direct < 200) {
            I = adaptive::recursion_step(I, c.B, c.N).I_next;
            ++direct;
        }
        if (formula != direct) ++mismatches;
    }

    // threshold behavior on both sides
    bool monotone_ok = true;
    for (double side : {1.0 + 1e-6, 1.0 - 1e-6}) {
        double I = adaptive::threshold_I0(1.0, 10) * side;
        bool increasing = true, decreasing = true;
        for (int n = 0; n < 5; ++n) {
            const double next = adaptive::recursion_step(I, 1.0, 10).I_next;
            increasing &= next > I;
            decreasing &= next < I;
            I = next;
        }
        if (side > 1.0 && !increasing) monotone_ok = false;
        if (side < 1.0 && !decreasing) monotone_ok = false;
    }

    const bool ok = closed.ok && mc_dev <= 0.2 && mismatches == 0 && monotone_ok;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {7, "adaptive recursion, replicas, rounds formula, threshold", ok,
            "closed-form err " + fmt(closed.worst) + " (tol 1e-12), MC var dev " + fmt(mc_dev) +
                " (tol 0.2), rounds mismatches " + std::to_string(mismatches) +
                ", threshold monotone " + (monotone_ok ? "yes" : "NO"),
            secs};
}

CriterionResult criterion8() {
    const auto t_start = std::chrono::steady_clock::now();
    Check pop, phase, frame;

    {
        const HamiltonianFamily fam = diag_crossing_family();
        const TimeGrid grid(0.0, 1.0, 4096);
        const SpectralTracks tracks = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
        const auto crossings = detect_crossings(tracks);
        const Crossing cx = crossings.front();
        for (long l : {0L, 1L, 2L}) {
            for (PulseProfile prof : {PulseProfile::flat, PulseProfile::raised_cosine}) {
                ControlSchedule sched = optimal_control(tracks, fam, 1.0);
                sched.add_pulse(crossing_pulse(tracks, cx.tau, cx.n, cx.m, 0.05, l, prof));
                const HamiltonianFamily tot = total_hamiltonian(fam, sched);
                const int start = tracks.max_track_at(0);
                const int other = start == cx.n ? cx.m : cx.n;
                const PureState psi0(tracks.vectors[0].col(start));
                const ComplexVector psiT =
                    propagate(tot, 1.0, grid).matrix() * psi0.amplitudes();
                const complexd amp = tracks.vectors[grid.steps].col(other).dot(psiT);
                const complexd expected = (l % 2 == 0) ? complexd(0, -1) : complexd(0, 1);
                pop.track(1.0 - std::norm(amp), 1e-6);
                phase.track(std::abs(amp - expected), 1e-6);
            }
        }
    }

    // rotating-frame conjugation: V (H + Hc + Ha) V^dag + i dV V^dag = h(t) s_mn
    {
        const HamiltonianFamily fam = rotated_crossing_family(0.3);
        const TimeGrid grid(0.0, 1.0, 4096);
        const SpectralTracks tracks = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
        const auto crossings = detect_crossings(tracks);
        const Crossing cx = crossings.front();
        ControlSchedule sched = optimal_control(tracks, fam, 1.0);
        const CrossingPulse pulse =
            crossing_pulse(tracks, cx.tau, cx.n, cx.m, 0.05, 0, PulseProfile::flat);
        const int d = tracks.dim;
        for (int j = 0; j <= grid.steps; ++j) {
            const double t = grid.node(j);
            ComplexMatrix V = ComplexMatrix::Zero(d, d);
            ComplexMatrix dV = ComplexMatrix::Zero(d, d);
            for (int k = 0; k < d; ++k) {
                V.row(k) = tracks.vectors[j].col(k).adjoint();
                dV.row(k) = tracks.vector_derivative(k, j).adjoint();
            }
            ComplexMatrix Htot = fam.evaluate(t, 1.0).matrix() + sched.base[j];
            const double h = pulse.amplitude_at(t);
            ComplexMatrix ref = ComplexMatrix::Zero(d, d);
            if (h != 0.0) {
                Htot += pulse.at(t);
                ref(cx.n, cx.m) = h;
                ref(cx.m, cx.n) = h;
            }
            const ComplexMatrix Hp =
                complexd(0, 1) * (dV * V.adjoint()) + V * Htot * V.adjoint();
            frame.track((Hp - ref).cwiseAbs().maxCoeff(), 1e-8);
        }
    }

    const bool ok = pop.ok && phase.ok && frame.ok;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {8, "level-crossing pulse transfer, phase, rotating frame", ok,
            "max 1-pop " + fmt(pop.worst) + " (tol 1e-6), max phase err " + fmt(phase.worst) +
                " (tol 1e-6), max frame err " + fmt(frame.worst) + " (tol 1e-8)",
            secs};
}

CriterionResult criterion9() {
    const auto t_start = std::chrono::steady_clock::now();
    Check unitarity, hermiticity, gauge, dominance, transport;

    for (double w : {0.5, 2.0}) {
        const qubit::RotatingFieldParams p(1.0, w, w);
        for (double T : {1.0, 5.0}) {
            const TimeGrid grid = qubit::pipeline_grid(T, 1024);
            for (auto which : {qubit::Parameter::B, qubit::Parameter::omega}) {
                const HamiltonianFamily fam = qubit::hamiltonian(p, which);
                const double g = which == qubit::Parameter::B ? p.B : p.omega;
                const Unitary U = propagate(fam, g, grid);
                ComplexMatrix gram = U.matrix().adjoint() * U.matrix();
                gram.diagonal().array() -= 1.0;
                unitarity.track(gram.cwiseAbs().maxCoeff(), 1e-10);
                const HermitianOperator h = generator_h(fam, g, grid);
                hermiticity.track(hermiticity_defect(h.matrix()), 1e-12);
                dominance.track(qfi_max_from_generator(h) - qfi_upper_bound(fam, g, grid),
                                1e-8 * (1.0 + qfi_upper_bound(fam, g, grid)));
            }
        }
    }

    // gauge smoothness and per-node orthonormality of tracks
    {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const TimeGrid grid(0.0, 2.0, 4096);
        for (const HamiltonianFamily& fam :
             {qubit::hamiltonian(p, qubit::Parameter::omega), rotated_crossing_family(0.3)}) {
            const SpectralTracks tr = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
            for (int j = 0; j <= grid.steps; ++j) {
                ComplexMatrix gram = tr.vectors[j].adjoint() * tr.vectors[j];
                gram.diagonal().array() -= 1.0;
                gauge.track(gram.cwiseAbs().maxCoeff(), 1e-10);
                if (j < grid.steps)
                    for (int k = 0; k < tr.dim; ++k) {
                        const double re =
                            tr.vectors[j].col(k).dot(tr.vectors[j + 1].col(k)).real();
                        gauge.track(-re, 0.0);  // must be nonnegative
                    }
            }
        }
    }

    // eigenstate transport under the synthesized optimal schedule
    {
        const qubit::RotatingFieldParams p(1.0, 1.0, 1.0);
        const double T = 5.0;
        const TimeGrid grid = qubit::pipeline_grid(T);
        const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::omega);
        const SpectralTracks tracks = build_tracks(fam, p.omega, grid, GaugeChoice::zero());
        const HamiltonianFamily tot =
            total_hamiltonian(fam, optimal_control(tracks, fam, p.omega));
        for (int k : {tracks.max_track_at(grid.steps), tracks.min_track_at(grid.steps)}) {
            const PureState psi0(tracks.vectors[0].col(k));
            const auto states = propagate_states(tot, p.omega, grid, psi0);
            for (int j = 0; j <= grid.steps; ++j) {
                const double ovl =
                    std::abs(tracks.vectors[j].col(k).dot(states[j].amplitudes()));
                transport.track(1.0 - ovl, 1e-6);
            }
        }
    }

    const bool ok =
        unitarity.ok && hermiticity.ok && gauge.ok && dominance.ok && transport.ok;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {9, "structural invariants across the test matrix", ok,
            "unitarity " + fmt(unitarity.worst) + ", hermiticity " + fmt(hermiticity.worst) +
                ", gauge " + fmt(gauge.worst) + ", dominance excess " + fmt(dominance.worst) +
                ", transport deficit " + fmt(transport.worst),
            secs};
}

}  // namespace

Report run_all(std::ostream& os) {
    Report report;
    CriterionResult (*criteria[])() = {criterion1, criterion2, criterion3,
                                       criterion4, criterion5, criterion6,
                                       criterion7, criterion8, criterion9};
    report.all_passed = true;
    for (auto* fn : criteria) {
        CriterionResult r = fn();
        os << (r.passed ? "[PASS]" : "[FAIL]") << " criterion " << r.id << ": " << r.name
           << " -- " << r.detail << " [" << fmt(r.seconds) << " s]\n";
        os.flush();
        report.all_passed &= r.passed;
        report.criteria.push_back(std::move(r));
    }
    os << (report.all_passed ? "ACCEPTANCE: all criteria passed\n"
                             : "ACCEPTANCE: FAILURES present\n");
    return report;
}

}  // namespace qmetro::verify
