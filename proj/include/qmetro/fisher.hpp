#pragma once

#include "qmetro/evolution.hpp"
#include "qmetro/operator_algebra.hpp"

namespace qmetro {

enum class QfiMethod { generator_variance, fidelity_fd, closed_form };

/// One Fisher-information evaluation and the eigenvalue-gap upper bound it
/// must respect.
struct QfiReport {
    double value;        // >= 0, units 1/[g]^2
    double upper_bound;  // >= 0
    double T;
    QfiMethod method;
};

/// 4 (<dpsi|dpsi> - |<psi|dpsi>|^2) for a parametrized pure state.
double qfi_from_state(const PureState& psi, const ComplexVector& dpsi);

/// 4 Var_{psi0}(h).
double qfi_from_generator(const HermitianOperator& h, const PureState& psi0);

/// Squared gap of h, the maximum of qfi_from_generator over initial states.
double qfi_max_from_generator(const HermitianOperator& h);

/// [Int (mu_max(t) - mu_min(t)) dt]^2 from per-node extreme eigenvalues of
/// dH/dg, midpoint quadrature on the propagation grid.
double qfi_upper_bound(const HamiltonianFamily& fam, double g, const TimeGrid& grid);

/// Fidelity-based cross check, 8 (1 - |<psi_g|psi_{g+delta}>|) / delta^2.
/// Propagates in extended precision so the overlap survives the tiny 1 - f.
double qfi_fidelity_fd(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                       const PureState& psi0, double delta = 1e-4);

/// Equal superposition of the extreme eigenvectors of dH/dg at t_eval.
/// Throws DegenerateExtremes when either extreme eigenvalue has multiplicity
/// above one; families whose derivative vanishes at t = 0 should pass a small
/// positive t_eval (the limit convention).
PureState optimal_initial_state(const HamiltonianFamily& fam, double g, double t_eval = 0.0);

/// Generator-variance QFI together with the bound, for reporting.
QfiReport report_generator(const HamiltonianFamily& fam, double g, const TimeGrid& grid,
                           const PureState& psi0);

namespace detail {

// Shared accumulation for the gap integral so the bound and the estimator
// variance agree bit for bit.
double gap_integral(const HamiltonianFamily& fam, double g, const TimeGrid& grid);

}  // namespace detail

}  // namespace qmetro
