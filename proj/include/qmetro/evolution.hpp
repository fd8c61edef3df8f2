#pragma once

#include <functional>
#include <vector>

#include "qmetro/operator_algebra.hpp"

namespace qmetro {

/// Uniform grid over [t0, t1] with `steps` slices; node j at t0 + j dt,
/// slice j sampled at its midpoint.
struct TimeGrid {
    double t0;
    double t1;
    int steps;

    TimeGrid(double t0_, double t1_, int steps_);

    double dt() const { return (t1 - t0) / steps; }
    double node(int j) const { return t0 + j * dt(); }
    double midpoint(int j) const { return t0 + (j + 0.5) * dt(); }
};

/// Time-dependent Hamiltonian family H(t, g) together with its analytic
/// parameter derivative dH/dg. A centered finite-difference fallback for the
/// derivative is available and flagged via derivative_is_fd().
class HamiltonianFamily {
  public:
    using Eval = std::function<HermitianOperator(double t, double g)>;

    HamiltonianFamily(Eigen::Index dim, Eval hamiltonian, Eval derivative);

    /// Derivative by centered difference with step 1e-6 (1 + |g|).
    static HamiltonianFamily with_fd_derivative(Eigen::Index dim, Eval hamiltonian);

    HermitianOperator evaluate(double t, double g) const;
    HermitianOperator evaluate_dg(double t, double g) const;

    Eigen::Index dim() const { return dim_; }
    bool derivative_is_fd() const { return fd_derivative_; }

  private:
    Eigen::Index dim_;
    Eval h_;
    Eval dh_;
    bool fd_derivative_ = false;
};

enum class Sampling {
    midpoint,       // H sampled at slice midpoints (order 2)
    left_endpoint,  // literal short-time product with left endpoints (order 1)
};

/// Time-ordered product of slice exponentials, latest factor leftmost.
Unitary propagate(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                  Sampling sampling = Sampling::midpoint);

/// States at every grid node (index 0 = psi0 at t0, index steps = final state).
std::vector<PureState> propagate_states(const HamiltonianFamily& fam, double g,
                                        const TimeGrid& grid, const PureState& psi0,
                                        Sampling sampling = Sampling::midpoint);

/// dU/dg as the time-ordered integral -i Int U(t->T) dH(t) U(0->t) dt,
/// accumulated forward on the propagation grid.
ComplexMatrix dg_propagator(const HamiltonianFamily& fam, double g, const TimeGrid& grid);

/// Generator h_g = Int U^dag(0->t) dH(t) U(0->t) dt on the same grid; its
/// variance over the initial state gives a quarter of the Fisher information.
HermitianOperator generator_h(const HamiltonianFamily& fam, double g, const TimeGrid& grid);

/// Steps for a target resolution of `steps_per_unit` per unit time, scaled by
/// a coarse spectral-norm estimate of H over the interval.
int default_steps(const HamiltonianFamily& fam, double g, double t0, double t1,
                  int steps_per_unit = 4096);

namespace detail {

template <typename Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

// Raw propagation in the requested precision; the family itself still
// evaluates in double.
template <typename Real>
CMat<Real> propagate_raw(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                         Sampling sampling = Sampling::midpoint);

}  // namespace detail

}  // namespace qmetro
