#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmetro/evolution.hpp"
#include "qmetro/operator_algebra.hpp"

namespace qmetro {

/// Gauge functions f_k(t) fixing each track's phase freedom.
struct GaugeChoice {
    enum class Kind { zero, cancel_diagonal, custom };
    Kind kind = Kind::zero;
    // used when kind == custom; (track, t, mu_k) -> f_k(t)
    std::function<double(int, double, double)> f;

    static GaugeChoice zero() { return {Kind::zero, nullptr}; }
    static GaugeChoice cancel_diagonal() { return {Kind::cancel_diagonal, nullptr}; }
    static GaugeChoice custom(std::function<double(int, double, double)> fn) {
        return {Kind::custom, std::move(fn)};
    }
};

/// Per-node eigenvalues and gauge-smoothed eigenvectors of dH/dg along the
/// grid, with the accumulated gauge phases theta_k.
class SpectralTracks {
  public:
    TimeGrid grid;
    int dim;
    // mu(k, j): eigenvalue of track k at node j; tracks follow eigenvector
    // continuity, so their eigenvalue curves may cross.
    Eigen::MatrixXd mu;
    // vectors[j].col(k): unit eigenvector of track k at node j
    std::vector<ComplexMatrix> vectors;
    Eigen::MatrixXd theta;    // theta(k, j) = Int_0^{t_j} f_k
    Eigen::MatrixXd f_value;  // gauge function sampled at nodes
    double lipschitz;         // max |mu(k,j+1)-mu(k,j)| / dt over tracks
    double gap_integral_mid;  // Int (mu_max - mu_min) dt, midpoint sampled
    bool had_degenerate_nodes;

    SpectralTracks(TimeGrid g, int d);

    // track indices holding the largest / smallest eigenvalue at node j
    int max_track_at(int j) const;
    int min_track_at(int j) const;

    /// Centered-difference time derivative of track k at node j (one-sided,
    /// second order, at the endpoints).
    ComplexVector vector_derivative(int k, int j) const;
};

enum class PulseProfile { raised_cosine, flat };

/// One level-crossing pulse: an sx-like coupling between two tracks over a
/// short window around the crossing, with pulse area (l + 1/2) pi.
class CrossingPulse {
  public:
    double tau;         // crossing time
    double delta_t;     // requested window width
    int track_n;
    int track_m;
    long l;
    PulseProfile profile;
    double t_lo, t_hi;  // window snapped to slice boundaries
    double amplitude;   // peak amplitude before the discrete-area rescale
    double scale;       // rescale making the grid quadrature area exact
    TimeGrid grid;
    int j_lo, j_hi;                  // covered slices [j_lo, j_hi)
    int op_node_lo;                  // first node with a sampled direction op
    std::vector<ComplexMatrix> ops;  // e^{i(th_m - th_n)} |n><m| + h.c. per node

    double area() const;                 // discrete midpoint area, = (l+1/2) pi
    double amplitude_at(double t) const; // h(t), zero outside the window
    ComplexMatrix at(double t) const;    // h(t) times the interpolated direction op
    bool overlaps(const CrossingPulse& other) const;
};

/// Time-gridded control Hamiltonian plus crossing pulses. When an analytic
/// evaluator is present it is used instead of node interpolation.
class ControlSchedule {
  public:
    TimeGrid grid;
    std::vector<ComplexMatrix> base;  // steps+1 nodes; empty means zero
    std::function<ComplexMatrix(double)> analytic;
    std::vector<CrossingPulse> pulses;
    double presym_defect = 0.0;  // max |M - M^dag|/2 before symmetrization

    explicit ControlSchedule(TimeGrid g) : grid(g) {}

    static ControlSchedule zero(const TimeGrid& g) { return ControlSchedule(g); }

    void add_pulse(CrossingPulse pulse);  // throws WindowOverlap
    ComplexMatrix operator()(double t) const;
    Eigen::Index dim() const;
    bool is_zero() const { return base.empty() && !analytic && pulses.empty(); }
};

/// Eigen-decomposes dH/dg(t, g_c) at every node, matches tracks by maximal
/// overlap and fixes the parallel-transport gauge. Degenerate clusters are
/// crossed by projecting extrapolated track vectors onto the cluster span.
SpectralTracks build_tracks(const HamiltonianFamily& fam, double g_c, const TimeGrid& grid,
                            const GaugeChoice& gauge = GaugeChoice::zero());

/// H_c(t_j) = sum_k f_k |psi_k><psi_k| - H(t_j, g_c) + i sum_k |d_t psi_k><psi_k|,
/// symmetrized; throws if the pre-symmetrization defect exceeds 1e-6.
ControlSchedule optimal_control(const HamiltonianFamily& fam, double g_c, const TimeGrid& grid,
                                const GaugeChoice& gauge = GaugeChoice::zero());
ControlSchedule optimal_control(const SpectralTracks& tracks, const HamiltonianFamily& fam,
                                double g_c);

struct Crossing {
    double tau;
    int n, m;         // tracks whose eigenvalue curves cross
    bool actionable;  // involves the extreme (max or min) track at the crossing
};

/// Sign changes of mu_n - mu_m located by linear interpolation, time ordered.
std::vector<Crossing> detect_crossings(const SpectralTracks& tracks);

/// Pulse between tracks n and m around tau; window snapped to slice
/// boundaries, amplitude scaled so the grid-quadrature area is (l+1/2) pi.
/// delta_t <= 0 selects the default window of ten grid slices.
CrossingPulse crossing_pulse(const SpectralTracks& tracks, double tau, int n, int m,
                             double delta_t, long l,
                             PulseProfile profile = PulseProfile::raised_cosine);

/// As above with an explicit area; must equal (l+1/2) pi for some integer l.
CrossingPulse crossing_pulse_with_area(const SpectralTracks& tracks, double tau, int n, int m,
                                       double delta_t, double area, PulseProfile profile);

/// Family evaluating H(t, g) + H_c(t) + pulses; the schedule is frozen, so
/// the parameter derivative is dH/dg alone.
HamiltonianFamily total_hamiltonian(const HamiltonianFamily& fam, const ControlSchedule& schedule);

/// JSON round trip for schedules (grid, node matrices as flat [re, im]
/// arrays, pulse records). Analytic evaluators do not survive the round
/// trip; deserialized schedules evaluate by interpolation.
std::string schedule_to_json(const ControlSchedule& schedule);
ControlSchedule schedule_from_json(const std::string& text);

namespace detail {

// cubic (4-point Lagrange) interpolation of node-sampled matrices
ComplexMatrix interpolate_nodes(const TimeGrid& grid, const std::vector<ComplexMatrix>& nodes,
                                double t);

}  // namespace detail

}  // namespace qmetro
