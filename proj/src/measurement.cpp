#include "qmetro/measurement.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace qmetro {

Observable make_observable(const PureState& plus, const PureState& minus) {
    if (plus.dim() != minus.dim()) throw DimMismatch("observable basis dim mismatch");
    if (std::abs(plus.amplitudes().dot(minus.amplitudes())) > 1e-10)
        throw Error("observable basis states must be orthogonal");
    ComplexMatrix op = plus.amplitudes() * plus.amplitudes().adjoint() -
                       minus.amplitudes() * minus.amplitudes().adjoint();
    return Observable{HermitianOperator(std::move(op)), plus, minus};
}

Observable optimal_observable(const SpectralTracks& tracks, double T,
                              const std::vector<CrossingPulse>& pulses) {
    const TimeGrid& grid = tracks.grid;
    const int j = static_cast<int>(std::lround((T - grid.t0) / grid.dt()));
    if (j < 0 || j > grid.steps ||
        std::abs(grid.node(j) - T) > 1e-9 * (1.0 + std::abs(grid.t1 - grid.t0)))
        throw Error("optimal_observable: T must sit on a grid node");
    int kmax = tracks.max_track_at(j);
    int kmin = tracks.min_track_at(j);
    if (kmax == kmin) throw DegenerateExtremes("extreme tracks coincide at T");
    const double tol = 1e-10 * (1.0 + tracks.mu.col(j).cwiseAbs().maxCoeff());
    for (int k = 0; k < tracks.dim; ++k) {
        if (k != kmax && tracks.mu(kmax, j) - tracks.mu(k, j) <= tol)
            throw DegenerateExtremes("maximal eigenvalue degenerate at T");
        if (k != kmin && tracks.mu(k, j) - tracks.mu(kmin, j) <= tol)
            throw DegenerateExtremes("minimal eigenvalue degenerate at T");
    }

    complexd phase_max = std::exp(complexd(0, -tracks.theta(kmax, j)));
    complexd phase_min = std::exp(complexd(0, -tracks.theta(kmin, j)));
    // a crossing pulse hands the extreme path to the partner track and tags it
    // with (-1)^{l+1} i
    for (const auto& p : pulses) {
        if (p.tau > T) continue;
        const complexd tag = complexd(0, (p.l % 2 == 0) ? -1.0 : 1.0);
        if (p.track_n == kmax || p.track_m == kmax) phase_max *= tag;
        if (p.track_n == kmin || p.track_m == kmin) phase_min *= tag;
    }

    const ComplexVector vmax = phase_max * tracks.vectors[j].col(kmax);
    const ComplexVector vmin = phase_min * tracks.vectors[j].col(kmin);
    return make_observable(PureState::normalized(vmax + vmin),
                           PureState::normalized(vmax - vmin));
}

EstimatorStats estimator_stats(const PureState& psi, const Observable& obs) {
    if (psi.dim() != obs.op.dim()) throw DimMismatch("estimator_stats: dim mismatch");
    const double pp = std::norm(obs.basis_plus.amplitudes().dot(psi.amplitudes()));
    const double pm = std::norm(obs.basis_minus.amplitudes().dot(psi.amplitudes()));
    const double mean = pp - pm;
    const double w = pp + pm;
    return EstimatorStats{mean, w - mean * mean, w, w < 1e-12};
}

double estimator_variance(const SpectralTracks& tracks, double T, double delta_g) {
    if (std::abs(T - tracks.grid.t1) > 1e-9 * (1.0 + std::abs(tracks.grid.t1)))
        throw Error("estimator_variance: tracks were built for a different horizon");
    const double gi = tracks.gap_integral_mid;
    if (!(gi > 0.0)) throw ZeroGap("gap integral vanishes, estimator undefined");
    (void)delta_g;  // the saturated variance is delta_g independent
    return 1.0 / (gi * gi);
}

namespace detail {

double uniform01(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

OutcomeCounts bernoulli_counts(double p_plus, long shots, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    OutcomeCounts c;
    for (long s = 0; s < shots; ++s) {
        if (uniform01(rng()) < p_plus)
            ++c.plus;
        else
            ++c.minus;
    }
    return c;
}

}  // namespace detail

std::vector<std::int8_t> sample_outcomes(const PureState& psi, const Observable& obs,
                                         long shots, std::uint64_t seed) {
    if (shots < 1) throw Error("sample_outcomes: shots must be >= 1");
    const EstimatorStats st = estimator_stats(psi, obs);
    if (1.0 - st.in_span_weight > 1e-6)
        throw ProjectionLoss("state leaks outside the measured span by more than 1e-6");
    const double p = std::clamp((st.mean / st.in_span_weight + 1.0) / 2.0, 0.0, 1.0);
    std::mt19937_64 rng(seed);
    std::vector<std::int8_t> out(static_cast<size_t>(shots));
    for (auto& o : out) o = detail::uniform01(rng()) < p ? 1 : -1;
    return out;
}

OutcomeCounts count_outcomes(const std::vector<std::int8_t>& outcomes) {
    OutcomeCounts c;
    for (auto o : outcomes) (o > 0 ? c.plus : c.minus)++;
    return c;
}

double invert_mean(double mean, double gap_integral) {
    if (!(gap_integral > 0.0)) throw ZeroGap("invert_mean: gap integral must be positive");
    return std::acos(std::clamp(mean, -1.0, 1.0)) / gap_integral;
}

void write_outcomes_csv(std::ostream& os, int round, const std::vector<std::int8_t>& outcomes,
                        bool header) {
    if (header) os << "round,shot,outcome\n";
    for (size_t s = 0; s < outcomes.size(); ++s)
        os << round << ',' << s << ',' << int(outcomes[s]) << '\n';
}

}  // namespace qmetro
