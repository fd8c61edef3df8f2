#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qmetro/control.hpp"
#include "qmetro/operator_algebra.hpp"

namespace qmetro {

/// Two-outcome projective observable O = |+><+| - |-><-|.
struct Observable {
    HermitianOperator op;
    PureState basis_plus;
    PureState basis_minus;
};

Observable make_observable(const PureState& plus, const PureState& minus);

/// Projective measurement along (e^{-i th_max} |psi_max(T)> +- e^{-i th_min}
/// |psi_min(T)>)/sqrt(2) built from the tracks' final node. Crossing-pulse
/// phases (-1)^{l+1} i are folded into the basis when pulses are supplied.
Observable optimal_observable(const SpectralTracks& tracks, double T,
                              const std::vector<CrossingPulse>& pulses = {});

struct EstimatorStats {
    double mean;      // <O>, in [-1, 1]
    double variance;  // <O^2> - <O>^2
    double in_span_weight;  // p_+ + p_-
    bool degenerate;        // state (numerically) orthogonal to both outcomes
};

EstimatorStats estimator_stats(const PureState& psi, const Observable& obs);

/// Saturated estimator variance 1 / [Int (mu_max - mu_min) dt]^2; the
/// reciprocal of the eigenvalue-gap QFI bound on the same quadrature.
double estimator_variance(const SpectralTracks& tracks, double T, double delta_g);

/// Seeded two-outcome sampling after projecting psi onto span{+,-}.
/// Deterministic for a fixed seed. Throws ProjectionLoss when more than 1e-6
/// of the state lies outside the measured span.
std::vector<std::int8_t> sample_outcomes(const PureState& psi, const Observable& obs,
                                         long shots, std::uint64_t seed);

struct OutcomeCounts {
    long plus = 0;
    long minus = 0;
    double mean() const { return static_cast<double>(plus - minus) / (plus + minus); }
};

OutcomeCounts count_outcomes(const std::vector<std::int8_t>& outcomes);

/// Principal-branch inversion g_hat - g_c = arccos(mean) / Int gap dt, valid
/// on |delta_g| Int gap dt < pi.
double invert_mean(double mean, double gap_integral);

/// CSV rows "round,shot,outcome" (RFC 4180, LF endings).
void write_outcomes_csv(std::ostream& os, int round, const std::vector<std::int8_t>& outcomes,
                        bool header = true);

namespace detail {

// Deterministic uniform in [0,1) from the raw 64-bit stream.
double uniform01(std::uint64_t word);

// Counts without materializing the outcome sequence (hot Monte-Carlo paths).
OutcomeCounts bernoulli_counts(double p_plus, long shots, std::uint64_t seed);

}  // namespace detail

}  // namespace qmetro
