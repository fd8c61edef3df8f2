#include "qmetro/control.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <json.hpp>

#include "qmetro/fisher.hpp"

namespace qmetro {

namespace {

constexpr double kClusterTol = 1e-8;     // relative eigenvalue clustering tolerance
constexpr double kDefectLimit = 1e-6;    // allowed pre-symmetrization defect
constexpr double kAreaTol = 1e-9;

// Eigen-decompose dH/dg(t, g_c); returns ascending values and vectors.
EigResult node_eig(const HamiltonianFamily& fam, double g_c, double t) {
    return eig_hermitian(fam.evaluate_dg(t, g_c));
}

bool spectrum_degenerate(const RealVector& w) {
    const double tol = kClusterTol * (1.0 + w.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k + 1 < w.size(); ++k)
        if (w[k + 1] - w[k] <= tol) return true;
    return false;
}

}  // namespace

SpectralTracks::SpectralTracks(TimeGrid g, int d)
    : grid(g),
      dim(d),
      mu(Eigen::MatrixXd::Zero(d, g.steps + 1)),
      theta(Eigen::MatrixXd::Zero(d, g.steps + 1)),
      f_value(Eigen::MatrixXd::Zero(d, g.steps + 1)),
      lipschitz(0.0),
      gap_integral_mid(0.0),
      had_degenerate_nodes(false) {
    vectors.assign(g.steps + 1, ComplexMatrix::Zero(d, d));
}

int SpectralTracks::max_track_at(int j) const {
    Eigen::Index k = 0;
    mu.col(j).maxCoeff(&k);
    return static_cast<int>(k);
}

int SpectralTracks::min_track_at(int j) const {
    Eigen::Index k = 0;
    mu.col(j).minCoeff(&k);
    return static_cast<int>(k);
}

ComplexVector SpectralTracks::vector_derivative(int k, int j) const {
    const double dt = grid.dt();
    const int n = grid.steps;
    if (n == 1) return (vectors[1].col(k) - vectors[0].col(k)) / dt;
    if (j == 0)
        return (-3.0 * vectors[0].col(k) + 4.0 * vectors[1].col(k) - vectors[2].col(k)) /
               (2.0 * dt);
    if (j == n)
        return (3.0 * vectors[n].col(k) - 4.0 * vectors[n - 1].col(k) + vectors[n - 2].col(k)) /
               (2.0 * dt);
    return (vectors[j + 1].col(k) - vectors[j - 1].col(k)) / (2.0 * dt);
}

SpectralTracks build_tracks(const HamiltonianFamily& fam, double g_c, const TimeGrid& grid,
                            const GaugeChoice& gauge) {
    const int d = static_cast<int>(fam.dim());
    const int n = grid.steps;
    SpectralTracks tr(grid, d);

    // node 0: if the spectrum is degenerate there (e.g. dH vanishes at t0),
    // take the eigenbasis a vanishing fraction of a step later; the offset
    // must stay tiny because finite differences amplify it by 1/dt
    EigResult e0 = node_eig(fam, g_c, grid.node(0));
    tr.mu.col(0) = e0.values;
    if (spectrum_degenerate(e0.values)) {
        tr.had_degenerate_nodes = true;
        EigResult shifted = node_eig(fam, g_c, grid.node(0) + 1e-9 * grid.dt());
        tr.vectors[0] = shifted.vectors;
    } else {
        tr.vectors[0] = e0.vectors;
    }

    // predicted continuation of track k into node j (quadratic extrapolation)
    auto predict = [&tr](int k, int j) -> ComplexVector {
        if (j >= 3)
            return 3.0 * tr.vectors[j - 1].col(k) - 3.0 * tr.vectors[j - 2].col(k) +
                   tr.vectors[j - 3].col(k);
        if (j == 2) return 2.0 * tr.vectors[j - 1].col(k) - tr.vectors[j - 2].col(k);
        return tr.vectors[j - 1].col(k);
    };

    for (int j = 1; j <= n; ++j) {
        EigResult e = node_eig(fam, g_c, grid.node(j));
        const double tol = kClusterTol * (1.0 + e.values.cwiseAbs().maxCoeff());

        std::vector<std::vector<int>> clusters;
        clusters.push_back({0});
        for (int c = 1; c < d; ++c) {
            if (e.values[c] - e.values[c - 1] <= tol)
                clusters.back().push_back(c);
            else
                clusters.push_back({c});
        }
        if (clusters.size() != static_cast<size_t>(d)) tr.had_degenerate_nodes = true;

        // each track picks the cluster holding most of its overlap mass
        std::vector<std::vector<int>> members(clusters.size());
        for (int k = 0; k < d; ++k) {
            const ComplexVector prev = tr.vectors[j - 1].col(k);
            double best = -1.0;
            size_t best_ci = 0;
            for (size_t ci = 0; ci < clusters.size(); ++ci) {
                double mass = 0.0;
                for (int c : clusters[ci]) mass += std::norm(e.vectors.col(c).dot(prev));
                if (mass > best) {
                    best = mass;
                    best_ci = ci;
                }
            }
            if (best < 0.25)
                throw TrackingAmbiguity("no dominant eigenvector assignment; refine the grid");
            members[best_ci].push_back(k);
        }
        for (size_t ci = 0; ci < clusters.size(); ++ci)
            if (members[ci].size() != clusters[ci].size())
                throw TrackingAmbiguity("eigenvector assignment is not a permutation near t = " +
                                        std::to_string(grid.node(j)));

        for (size_t ci = 0; ci < clusters.size(); ++ci) {
            const auto& cl = clusters[ci];
            const auto& ks = members[ci];
            if (cl.size() == 1) {
                const int k = ks[0];
                ComplexVector v = e.vectors.col(cl[0]);
                const complexd ph = tr.vectors[j - 1].col(k).dot(v);
                if (std::abs(ph) > 0.0) v *= std::conj(ph) / std::abs(ph);
                tr.vectors[j].col(k) = v;
                tr.mu(k, j) = e.values[cl[0]];
            } else {
                // degenerate cluster: transport the extrapolated track vectors
                // through the subspace instead of trusting solver columns
                double mean = 0.0;
                for (int c : cl) mean += e.values[c];
                mean /= static_cast<double>(cl.size());
                ComplexMatrix P = ComplexMatrix::Zero(d, d);
                for (int c : cl) P += e.vectors.col(c) * e.vectors.col(c).adjoint();
                std::vector<ComplexVector> placed;
                for (int k : ks) {
                    ComplexVector v = P * predict(k, j);
                    for (const auto& u : placed) v -= u * u.dot(v);
                    const double nv = v.norm();
                    if (nv < 1e-6)
                        throw TrackingAmbiguity("degenerate-subspace transport collapsed");
                    v /= nv;
                    const complexd ph = tr.vectors[j - 1].col(k).dot(v);
                    if (std::abs(ph) > 0.0) v *= std::conj(ph) / std::abs(ph);
                    placed.push_back(v);
                    tr.vectors[j].col(k) = v;
                    tr.mu(k, j) = mean;
                }
            }
        }
    }

    for (int k = 0; k < d; ++k)
        for (int j = 0; j < n; ++j)
            tr.lipschitz = std::max(tr.lipschitz,
                                    std::abs(tr.mu(k, j + 1) - tr.mu(k, j)) / grid.dt());

    // gauge functions at nodes and the accumulated phases (trapezoid)
    for (int j = 0; j <= n; ++j) {
        for (int k = 0; k < d; ++k) {
            double f = 0.0;
            switch (gauge.kind) {
                case GaugeChoice::Kind::zero: f = 0.0; break;
                case GaugeChoice::Kind::cancel_diagonal: {
                    const ComplexVector v = tr.vectors[j].col(k);
                    f = (v.dot(fam.evaluate(grid.node(j), g_c).matrix() * v)).real();
                    break;
                }
                case GaugeChoice::Kind::custom:
                    if (!gauge.f) throw Error("custom gauge requires a function");
                    f = gauge.f(k, grid.node(j), tr.mu(k, j));
                    break;
            }
            tr.f_value(k, j) = f;
        }
    }
    for (int k = 0; k < d; ++k)
        for (int j = 1; j <= n; ++j)
            tr.theta(k, j) = tr.theta(k, j - 1) +
                             0.5 * (tr.f_value(k, j - 1) + tr.f_value(k, j)) * grid.dt();

    tr.gap_integral_mid = detail::gap_integral(fam, g_c, grid);
    return tr;
}

ControlSchedule optimal_control(const SpectralTracks& tracks, const HamiltonianFamily& fam,
                                double g_c) {
    const int d = tracks.dim;
    const int n = tracks.grid.steps;
    ControlSchedule sched(tracks.grid);
    sched.base.reserve(n + 1);
    double defect = 0.0;
    for (int j = 0; j <= n; ++j) {
        ComplexMatrix M = -fam.evaluate(tracks.grid.node(j), g_c).matrix();
        for (int k = 0; k < d; ++k) {
            const ComplexVector v = tracks.vectors[j].col(k);
            M.noalias() += complexd(0, 1) * (tracks.vector_derivative(k, j) * v.adjoint());
            if (tracks.f_value(k, j) != 0.0)
                M.noalias() += tracks.f_value(k, j) * (v * v.adjoint());
        }
        defect = std::max(defect, hermiticity_defect(M) / 2.0);
        sched.base.push_back(((M + M.adjoint().eval()) / 2.0).eval());
    }
    if (defect > kDefectLimit)
        throw NumericalError("control synthesis defect " + std::to_string(defect) +
                             " exceeds 1e-6; refine the grid");
    sched.presym_defect = defect;
    return sched;
}

ControlSchedule optimal_control(const HamiltonianFamily& fam, double g_c, const TimeGrid& grid,
                                const GaugeChoice& gauge) {
    return optimal_control(build_tracks(fam, g_c, grid, gauge), fam, g_c);
}

std::vector<Crossing> detect_crossings(const SpectralTracks& tracks) {
    std::vector<Crossing> out;
    const int d = tracks.dim;
    const int n = tracks.grid.steps;
    const double zero_tol = 1e-12 * (1.0 + tracks.mu.cwiseAbs().maxCoeff());
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            int last_sign = 0;
            int last_node = -1;
            for (int j = 0; j <= n; ++j) {
                const double diff = tracks.mu(a, j) - tracks.mu(b, j);
                const int sign = diff > zero_tol ? 1 : (diff < -zero_tol ? -1 : 0);
                if (sign == 0) continue;
                if (last_sign != 0 && sign != last_sign) {
                    const double da = tracks.mu(a, last_node) - tracks.mu(b, last_node);
                    const double db = diff;
                    const double frac = da / (da - db);
                    const double tau = tracks.grid.node(last_node) +
                                       frac * (tracks.grid.node(j) - tracks.grid.node(last_node));
                    const int jref = last_node;
                    const int mx = tracks.max_track_at(jref);
                    const int mn = tracks.min_track_at(jref);
                    const bool actionable = (a == mx || b == mx || a == mn || b == mn);
                    out.push_back({tau, a, b, actionable});
                }
                last_sign = sign;
                last_node = j;
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) {
        return x.tau < y.tau;
    });
    return out;
}

double CrossingPulse::area() const {
    double acc = 0.0;
    for (int j = j_lo; j < j_hi; ++j) acc += amplitude_at(grid.midpoint(j)) * grid.dt();
    return acc;
}

double CrossingPulse::amplitude_at(double t) const {
    if (t <= t_lo || t >= t_hi) return 0.0;
    if (profile == PulseProfile::flat) return amplitude * scale;
    const double width = t_hi - t_lo;
    const double u = (t - 0.5 * (t_lo + t_hi)) / width;
    return amplitude * scale * (1.0 + std::cos(2.0 * std::numbers::pi * u));
}

ComplexMatrix CrossingPulse::at(double t) const {
    const double h = amplitude_at(t);
    const Eigen::Index d = ops.empty() ? 0 : ops.front().rows();
    if (h == 0.0) return ComplexMatrix::Zero(d, d);
    // cubic interpolation over the pulse's own sampled nodes
    const double dt = grid.dt();
    const int local = static_cast<int>(std::floor((t - grid.node(op_node_lo)) / dt));
    const int count = static_cast<int>(ops.size());
    int i0 = std::clamp(local - 1, 0, std::max(0, count - 4));
    const int pts = std::min(4, count);
    ComplexMatrix M = ComplexMatrix::Zero(d, d);
    for (int a = 0; a < pts; ++a) {
        double w = 1.0;
        const double ta = grid.node(op_node_lo + i0 + a);
        for (int b = 0; b < pts; ++b) {
            if (b == a) continue;
            const double tb = grid.node(op_node_lo + i0 + b);
            w *= (t - tb) / (ta - tb);
        }
        M += w * ops[i0 + a];
    }
    return h * M;
}

bool CrossingPulse::overlaps(const CrossingPulse& other) const {
    return t_lo < other.t_hi && other.t_lo < t_hi;
}

CrossingPulse crossing_pulse_with_area(const SpectralTracks& tracks, double tau, int n, int m,
                                       double delta_t, double area, PulseProfile profile) {
    const double l_real = area / std::numbers::pi - 0.5;
    const long l = std::lround(l_real);
    if (std::abs(area - (l + 0.5) * std::numbers::pi) > kAreaTol)
        throw InvalidPulseArea("pulse area must be (l + 1/2) pi");

    const TimeGrid& grid = tracks.grid;
    if (n < 0 || m < 0 || n >= tracks.dim || m >= tracks.dim || n == m)
        throw Error("crossing_pulse: invalid track indices");
    if (tau - delta_t / 2 < grid.t0 - 1e-12 || tau + delta_t / 2 > grid.t1 + 1e-12)
        throw Error("crossing_pulse: window leaves the grid span");

    CrossingPulse p{tau, delta_t, n, m, l, profile, 0, 0, 0, 1.0, grid, 0, 0, 0, {}};
    const double dt = grid.dt();
    p.j_lo = std::max(0, static_cast<int>(std::lround((tau - delta_t / 2 - grid.t0) / dt)));
    p.j_hi = std::min(grid.steps, static_cast<int>(std::lround((tau + delta_t / 2 - grid.t0) / dt)));
    if (p.j_hi <= p.j_lo) p.j_hi = p.j_lo + 1;
    p.t_lo = grid.node(p.j_lo);
    p.t_hi = grid.node(p.j_hi);
    p.amplitude = area / (p.t_hi - p.t_lo);

    // rescale so the integrator's own quadrature reproduces the area exactly
    p.scale = 1.0;
    const double raw = p.area();
    if (raw <= 0.0) throw Error("crossing_pulse: degenerate window");
    p.scale = area / raw;

    p.op_node_lo = std::max(0, p.j_lo - 2);
    const int op_node_hi = std::min(grid.steps, p.j_hi + 2);
    p.ops.reserve(op_node_hi - p.op_node_lo + 1);
    for (int j = p.op_node_lo; j <= op_node_hi; ++j) {
        const ComplexVector vn = tracks.vectors[j].col(n);
        const ComplexVector vm = tracks.vectors[j].col(m);
        const complexd ph =
            std::exp(complexd(0, tracks.theta(m, j) - tracks.theta(n, j)));
        ComplexMatrix op = ph * (vn * vm.adjoint());
        op += op.adjoint().eval();
        p.ops.push_back(std::move(op));
    }
    if (std::abs(p.area() - area) > kAreaTol)
        throw InvalidPulseArea("discrete pulse area failed to meet tolerance");
    return p;
}

CrossingPulse crossing_pulse(const SpectralTracks& tracks, double tau, int n, int m,
                             double delta_t, long l, PulseProfile profile) {
    if (delta_t <= 0.0) delta_t = 10.0 * tracks.grid.dt();
    return crossing_pulse_with_area(tracks, tau, n, m, delta_t,
                                    (l + 0.5) * std::numbers::pi, profile);
}

void ControlSchedule::add_pulse(CrossingPulse pulse) {
    for (const auto& q : pulses)
        if (pulse.overlaps(q)) throw WindowOverlap("crossing pulse windows intersect");
    pulses.push_back(std::move(pulse));
}

Eigen::Index ControlSchedule::dim() const {
    if (!base.empty()) return base.front().rows();
    if (analytic) return analytic(grid.t0).rows();
    if (!pulses.empty() && !pulses.front().ops.empty()) return pulses.front().ops.front().rows();
    return 0;
}

namespace detail {

ComplexMatrix interpolate_nodes(const TimeGrid& grid, const std::vector<ComplexMatrix>& nodes,
                                double t) {
    const int n = grid.steps;
    const double dt = grid.dt();
    int j = static_cast<int>(std::floor((t - grid.t0) / dt));
    j = std::clamp(j, 0, n - 1);
    if (n < 3) {
        // linear fallback on very coarse grids
        const double w = (t - grid.node(j)) / dt;
        return (1.0 - w) * nodes[j] + w * nodes[j + 1];
    }
    const int i0 = std::clamp(j - 1, 0, n - 3);
    ComplexMatrix M = ComplexMatrix::Zero(nodes[0].rows(), nodes[0].cols());
    for (int a = i0; a < i0 + 4; ++a) {
        double w = 1.0;
        for (int b = i0; b < i0 + 4; ++b) {
            if (b == a) continue;
            w *= (t - grid.node(b)) / (grid.node(a) - grid.node(b));
        }
        M += w * nodes[a];
    }
    return M;
}

}  // namespace detail

ComplexMatrix ControlSchedule::operator()(double t) const {
    const Eigen::Index d = dim();
    ComplexMatrix M = ComplexMatrix::Zero(d, d);
    if (analytic)
        M = analytic(t);
    else if (!base.empty())
        M = detail::interpolate_nodes(grid, base, t);
    for (const auto& p : pulses)
        if (p.amplitude_at(t) != 0.0) M += p.at(t);
    return M;
}

HamiltonianFamily total_hamiltonian(const HamiltonianFamily& fam,
                                    const ControlSchedule& schedule) {
    auto sched = std::make_shared<const ControlSchedule>(schedule);
    if (!sched->is_zero() && sched->dim() != fam.dim())
        throw DimMismatch("total_hamiltonian: schedule dim differs from family dim");
    HamiltonianFamily::Eval h = [fam, sched](double t, double g) {
        ComplexMatrix M = fam.evaluate(t, g).matrix();
        if (!sched->is_zero()) {
            M += (*sched)(t);
            M = ((M + M.adjoint().eval()) / 2.0).eval();  // guard interpolation rounding
        }
        return HermitianOperator(std::move(M));
    };
    HamiltonianFamily::Eval dh = [fam](double t, double g) { return fam.evaluate_dg(t, g); };
    return HamiltonianFamily(fam.dim(), std::move(h), std::move(dh));
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& m) {
    json arr = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            arr.push_back(m(r, c).real());
            arr.push_back(m(r, c).imag());
        }
    return arr;
}

ComplexMatrix matrix_from_json(const json& arr, Eigen::Index d) {
    if (arr.size() != static_cast<size_t>(2 * d * d))
        throw ConfigError("schedule JSON: malformed matrix payload");
    ComplexMatrix m(d, d);
    size_t i = 0;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
            const double re = arr[i++].get<double>();
            const double im = arr[i++].get<double>();
            m(r, c) = complexd(re, im);
        }
    return m;
}

}  // namespace

std::string schedule_to_json(const ControlSchedule& schedule) {
    json j;
    j["grid"] = {{"t0", schedule.grid.t0}, {"t1", schedule.grid.t1}, {"steps", schedule.grid.steps}};
    j["dim"] = schedule.dim();
    j["presym_defect"] = schedule.presym_defect;
    json base = json::array();
    if (schedule.analytic) {
        // sample the analytic evaluator onto the grid for transport
        for (int n = 0; n <= schedule.grid.steps; ++n)
            base.push_back(matrix_to_json(schedule.analytic(schedule.grid.node(n))));
    } else {
        for (const auto& m : schedule.base) base.push_back(matrix_to_json(m));
    }
    j["base"] = std::move(base);
    json pulses = json::array();
    for (const auto& p : schedule.pulses) {
        json q;
        q["tau"] = p.tau;
        q["delta_t"] = p.delta_t;
        q["n"] = p.track_n;
        q["m"] = p.track_m;
        q["l"] = p.l;
        q["profile"] = p.profile == PulseProfile::flat ? "flat" : "raised_cosine";
        q["t_lo"] = p.t_lo;
        q["t_hi"] = p.t_hi;
        q["amplitude"] = p.amplitude;
        q["scale"] = p.scale;
        q["j_lo"] = p.j_lo;
        q["j_hi"] = p.j_hi;
        q["op_node_lo"] = p.op_node_lo;
        json ops = json::array();
        for (const auto& m : p.ops) ops.push_back(matrix_to_json(m));
        q["ops"] = std::move(ops);
        pulses.push_back(std::move(q));
    }
    j["pulses"] = std::move(pulses);
    return j.dump();
}

ControlSchedule schedule_from_json(const std::string& text) {
    json j = json::parse(text);
    TimeGrid grid(j.at("grid").at("t0").get<double>(), j.at("grid").at("t1").get<double>(),
                  j.at("grid").at("steps").get<int>());
    const Eigen::Index d = j.at("dim").get<Eigen::Index>();
    ControlSchedule s(grid);
    s.presym_defect = j.value("presym_defect", 0.0);
    for (const auto& arr : j.at("base")) s.base.push_back(matrix_from_json(arr, d));
    if (!s.base.empty() && s.base.size() != static_cast<size_t>(grid.steps + 1))
        throw ConfigError("schedule JSON: node count does not match grid");
    for (const auto& q : j.at("pulses")) {
        CrossingPulse p{q.at("tau").get<double>(),
                        q.at("delta_t").get<double>(),
                        q.at("n").get<int>(),
                        q.at("m").get<int>(),
                        q.at("l").get<long>(),
                        q.at("profile").get<std::string>() == "flat" ? PulseProfile::flat
                                                                     : PulseProfile::raised_cosine,
                        q.at("t_lo").get<double>(),
                        q.at("t_hi").get<double>(),
                        q.at("amplitude").get<double>(),
                        q.at("scale").get<double>(),
                        grid,
                        q.at("j_lo").get<int>(),
                        q.at("j_hi").get<int>(),
                        q.at("op_node_lo").get<int>(),
                        {}};
        for (const auto& arr : q.at("ops")) p.ops.push_back(matrix_from_json(arr, d));
        s.pulses.push_back(std::move(p));
    }
    return s;
}

}  // namespace qmetro
