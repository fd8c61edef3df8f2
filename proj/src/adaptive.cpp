#include "qmetro/adaptive.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "qmetro/fisher.hpp"

namespace qmetro::adaptive {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double loss_factor(long N) { return 1.0 - 1.0 / (18.0 * static_cast<double>(N)); }

// Deterministic standard normal (Box-Muller on the raw 64-bit stream).
double draw_normal(std::mt19937_64& rng) {
    double u1 = qmetro::detail::uniform01(rng());
    while (u1 <= 0.0) u1 = qmetro::detail::uniform01(rng());
    const double u2 = qmetro::detail::uniform01(rng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

void AdaptiveConfig::validate() const {
    if (!(I0 > 0.0)) throw Error("AdaptiveConfig: I0 must be positive");
    if (N < 1) throw Error("AdaptiveConfig: N must be >= 1");
    if (!(B > 0.0)) throw Error("AdaptiveConfig: B must be positive");
    if (rounds <= 0 && !(target_T > 0.0))
        throw Error("AdaptiveConfig: need target_T > 0 or explicit rounds");
    if (replicas < 1) throw Error("AdaptiveConfig: replicas must be >= 1");
    if (steps_per_unit < 8) throw Error("AdaptiveConfig: steps_per_unit too small");
}

RecursionStep recursion_step(double I_prev, double B, long N) {
    if (!(I_prev > 0.0)) throw Error("recursion_step: I_prev must be positive");
    const double T = std::sqrt(I_prev);
    return RecursionStep{T, B * B * I_prev * I_prev * loss_factor(N)};
}

double closed_form_T(double I0, double B, long N, int n) {
    const double K = B * B * loss_factor(N);
    const double e = std::exp2(n - 2);  // 2^(n-2)
    return std::pow(I0, e) * std::pow(K, e - 0.5);
}

double closed_form_I(double I0, double B, long N, int n) {
    const double K = B * B * loss_factor(N);
    const double e = std::exp2(n);
    return std::pow(I0, e) * std::pow(K, e - 1.0);
}

double threshold_I0(double B, long N) { return 1.0 / (B * B * loss_factor(N)); }

int rounds_needed(const AdaptiveConfig& cfg) {
    cfg.validate();
    if (!(cfg.target_T > 0.0)) throw Error("rounds_needed: target_T must be positive");
    if (cfg.I0 <= threshold_I0(cfg.B, cfg.N))
        throw BelowThreshold("initial Fisher information below the feedback threshold");
    const double K = loss_factor(cfg.N);
    const double num = std::log(cfg.B * cfg.target_T * std::sqrt(K));
    const double den = std::log(cfg.B * cfg.B * cfg.I0 * K);
    if (num <= 0.0) return 1;  // horizon already inside the first round
    const int n = static_cast<int>(std::ceil(std::log2(num / den))) + 2;
    return std::max(1, n);
}

ProtocolStudy simulate_protocol(const AdaptiveConfig& cfg) {
    cfg.validate();
    const double thr = threshold_I0(cfg.B, cfg.N);
    const bool below = cfg.I0 <= thr;
    if (below && !cfg.allow_below_threshold)
        throw BelowThreshold("I0 below threshold; set allow_below_threshold to simulate anyway");

    const int R = cfg.replicas;
    const int rounds = cfg.rounds > 0 ? cfg.rounds : rounds_needed(cfg);
    // time cost of the uncontrolled stage, from I0 = 4 B^2 T^2/(4B^2 + w^2)
    const double o2 = 4.0 * cfg.B * cfg.B + cfg.omega_true * cfg.omega_true;
    const double T_init = std::sqrt(cfg.I0 * o2) / (2.0 * cfg.B);

    ProtocolStudy study;
    study.cfg = cfg;
    study.replicas.reserve(R);

    const qubit::RotatingFieldParams base(cfg.B, cfg.omega_true, cfg.omega_true);
    const HamiltonianFamily fam = qubit::hamiltonian(base, qubit::Parameter::omega);
    const PureState psi0 = qubit::optimal_initial_state_for_omega();

    for (int r = 0; r < R; ++r) {
        std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * (r + 1));
        AdaptiveTrace trace;
        trace.below_threshold = below;

        double est = cfg.noiseless
                         ? cfg.omega_true
                         : cfg.omega_true + draw_normal(rng) / std::sqrt(cfg.N * cfg.I0);
        trace.initial_estimate = est;
        double I_prev = cfg.I0;
        double elapsed = static_cast<double>(cfg.N) * T_init;

        for (int n = 1; n <= rounds; ++n) {
            const auto step = recursion_step(I_prev, cfg.B, cfg.N);
            const double T = step.T_next;
            const double gap_integral = cfg.B * T * T;  // Int 2 t B dt
            // deliberate fringe offset keeps arccos on a single branch; the
            // noiseless limit has no sign ambiguity to guard against
            const double x0 =
                cfg.noiseless
                    ? 0.0
                    : std::min(6.0 * cfg.B * T / std::sqrt(static_cast<double>(cfg.N)) + 0.05,
                               1.0);
            const double omega_c = est - x0 / gap_integral;
            if (std::abs(cfg.omega_true - omega_c) * gap_integral >= std::numbers::pi)
                throw FringeAmbiguity("detuning exceeds the estimator window; raise N or I0");

            const int steps = std::max(8, static_cast<int>(std::ceil(T * cfg.steps_per_unit)));
            const TimeGrid grid(0.0, T, steps);
            const qubit::RotatingFieldParams round_p(cfg.B, cfg.omega_true, omega_c);
            const HamiltonianFamily tot =
                total_hamiltonian(fam, qubit::control_for_omega(round_p, grid));
            const Unitary U = propagate(tot, cfg.omega_true, grid);
            const PureState psiT = PureState::normalized(U.matrix() * psi0.amplitudes());
            const Observable obs = qubit::optimal_observable_for_omega(round_p, T);

            double mean;
            if (cfg.noiseless) {
                mean = estimator_stats(psiT, obs).mean;
            } else {
                const EstimatorStats st = estimator_stats(psiT, obs);
                if (1.0 - st.in_span_weight > 1e-6)
                    throw ProjectionLoss("adaptive round leaks outside the measured span");
                const double p = std::clamp((st.mean / st.in_span_weight + 1.0) / 2.0, 0.0, 1.0);
                const auto counts = qmetro::detail::bernoulli_counts(
                    p, cfg.N, rng());
                mean = counts.mean();
            }
            const double x_hat = std::acos(std::clamp(mean, -1.0, 1.0));
            est = omega_c + x_hat / gap_integral;
            elapsed += static_cast<double>(cfg.N) * T;

            trace.rounds.push_back(
                {n, T, step.I_next, kNaN, omega_c, est, elapsed});
            I_prev = step.I_next;
        }
        trace.final_estimate = est;
        study.replicas.push_back(std::move(trace));
    }

    // empirical per-measurement Fisher information across replicas
    study.I_empirical.assign(rounds, kNaN);
    if (R >= 2) {
        for (int n = 0; n < rounds; ++n) {
            double var = 0.0;
            for (const auto& t : study.replicas) {
                const double d = t.rounds[n].estimate - cfg.omega_true;
                var += d * d;
            }
            var /= R;
            study.I_empirical[n] = 1.0 / (static_cast<double>(cfg.N) * var);
            for (auto& t : study.replicas) t.rounds[n].I_empirical = study.I_empirical[n];
        }
    }
    return study;
}

void write_trace_csv(std::ostream& os, const ProtocolStudy& study) {
    os << "replica,round,T_n,omega_c,estimate,I_analytic\n";
    char buf[64];
    auto num = [&buf](double v) {
        snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (size_t r = 0; r < study.replicas.size(); ++r)
        for (const auto& round : study.replicas[r].rounds)
            os << r << ',' << round.n << ',' << num(round.T_n) << ',' << num(round.omega_c)
               << ',' << num(round.estimate) << ',' << num(round.I_analytic) << '\n';
}

}  // namespace qmetro::adaptive
