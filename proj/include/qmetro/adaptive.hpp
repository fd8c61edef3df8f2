#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qmetro/qubit_example.hpp"

namespace qmetro::adaptive {

/// Feedback-protocol configuration. I0 is the per-measurement Fisher
/// information of the initial (uncontrolled) estimation stage.
struct AdaptiveConfig {
    double I0 = 4.0;
    long N = 10000;        // measurements per round
    double B = 1.0;
    double target_T = 0.0; // horizon for rounds_needed; ignored when rounds > 0
    std::uint64_t seed = 1;

    double omega_true = 1.0;
    int rounds = 0;            // explicit round count; 0 derives it from target_T
    int replicas = 200;        // independent protocol runs for empirical Fisher info
    int steps_per_unit = 512;  // propagation resolution inside each round
    bool noiseless = false;    // exact means instead of sampling (analytic limit)
    bool allow_below_threshold = false;

    void validate() const;
};

/// T_{n} = sqrt(I_{n-1}), I_n = B^2 I_{n-1}^2 (1 - 1/(18N)).
struct RecursionStep {
    double T_next;
    double I_next;
};
RecursionStep recursion_step(double I_prev, double B, long N);

/// Closed forms T_n, I_n of the recursion started at I0.
double closed_form_T(double I0, double B, long N, int n);
double closed_form_I(double I0, double B, long N, int n);

/// Minimum I0 for the feedback to increase the Fisher information.
double threshold_I0(double B, long N);

/// Rounds to reach target_T via the ceiling formula; 1 when the formula is
/// nonpositive. Throws BelowThreshold below threshold_I0.
int rounds_needed(const AdaptiveConfig& cfg);

struct AdaptiveRound {
    int n;
    double T_n;
    double I_analytic;
    double I_empirical;  // NaN unless filled by a replica study
    double omega_c;      // control frequency used this round (offset included)
    double estimate;     // omega estimate after the round
    double elapsed_total;
};

struct AdaptiveTrace {
    std::vector<AdaptiveRound> rounds;
    double initial_estimate;
    double final_estimate;
    bool below_threshold;
};

/// All replicas of the protocol plus per-round empirical Fisher information
/// 1 / (N Var(estimate)) across replicas.
struct ProtocolStudy {
    AdaptiveConfig cfg;
    std::vector<AdaptiveTrace> replicas;
    std::vector<double> I_empirical;  // per round, per-measurement units
};

/// Simulates the full estimate -> control -> measure loop: round 0 draws the
/// initial estimate with variance 1/(N I0); each round evolves under the
/// omega control at the current estimate (with a small deliberate fringe
/// offset so the arccos inversion is single valued), measures the optimal
/// observable N times and inverts.
ProtocolStudy simulate_protocol(const AdaptiveConfig& cfg);

/// CSV: replica,round,T_n,omega_c,estimate,I_analytic.
void write_trace_csv(std::ostream& os, const ProtocolStudy& study);

}  // namespace qmetro::adaptive
