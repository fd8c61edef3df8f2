#pragma once

#include "qmetro/control.hpp"
#include "qmetro/evolution.hpp"
#include "qmetro/measurement.hpp"

namespace qmetro::qubit {

/// Rotating-field probe: H(t) = -B (cos(wt) sx + sin(wt) sz), magnetic
/// moment 1. omega_c is the trial frequency used by the control field.
struct RotatingFieldParams {
    double B = 1.0;
    double omega = 1.0;
    double omega_c = 1.0;

    RotatingFieldParams() = default;
    RotatingFieldParams(double B_, double omega_, double omega_c_);
};

enum class Parameter { B, omega };

/// Family in the estimated parameter (B or omega), with analytic derivative.
HamiltonianFamily hamiltonian(const RotatingFieldParams& p, Parameter which);

/// U(0->t) = exp(i (w/2) sy t) exp(i (B sx - (w/2) sy) t), no control.
Unitary closed_form_unitary_nocontrol(const RotatingFieldParams& p, double t);

// closed forms ---------------------------------------------------------------

double qfi_B_optimal(const RotatingFieldParams& p, double T);     // 4 T^2
double qfi_B_nocontrol(const RotatingFieldParams& p, double T);
double qfi_omega_optimal(const RotatingFieldParams& p, double T); // B^2 T^4
double qfi_omega_nocontrol(const RotatingFieldParams& p, double T);

/// Small-detuning approximation B^2 T^4 (1 - T^2 dw^2 / 18), dw = omega_c - omega.
double qfi_omega_detuned(const RotatingFieldParams& p, double T);

/// Generator expansion around the matched control,
/// -(BT^2/2) sz - (BT^3/3) sx dw + ((4B^2T^5/15) sy + (BT^4/4) sz) dw^2/2.
HermitianOperator h_omega_detuned_expansion(const RotatingFieldParams& p, double T);

// controls -------------------------------------------------------------------

/// H_c = -(w/2) sy (amplitude estimation); analytic evaluator plus sampled nodes.
ControlSchedule control_for_B(const RotatingFieldParams& p, const TimeGrid& grid);

/// H_c = B (cos(wc t) sx + sin(wc t) sz) - (wc/2) sy (frequency estimation).
ControlSchedule control_for_omega(const RotatingFieldParams& p, const TimeGrid& grid);

// pipeline evaluations (same quantities through the numerical stack) ----------

TimeGrid pipeline_grid(double T, int steps_per_unit = 4096);

double qfi_B_nocontrol_pipeline(const RotatingFieldParams& p, double T,
                                int steps_per_unit = 4096);
double qfi_B_optimal_pipeline(const RotatingFieldParams& p, double T,
                              int steps_per_unit = 4096);
double qfi_omega_nocontrol_pipeline(const RotatingFieldParams& p, double T,
                                    int steps_per_unit = 4096);
/// Controlled pipeline with the field control at p.omega_c (detuned when
/// omega_c != omega); uses the closed-form control evaluator.
double qfi_omega_controlled_pipeline(const RotatingFieldParams& p, double T,
                                     int steps_per_unit = 4096);
/// Same quantity via the numerically synthesized schedule (tracks + gauge).
double qfi_omega_controlled_pipeline_synth(const RotatingFieldParams& p, double T,
                                           int steps_per_unit = 4096);
double qfi_B_optimal_pipeline_synth(const RotatingFieldParams& p, double T,
                                    int steps_per_unit = 4096);

/// Extended-precision controlled pipeline (Richardson over the grid); resolves
/// detuning residuals far below double rounding.
double qfi_omega_controlled_pipeline_precise(const RotatingFieldParams& p, double T,
                                             int steps = 4096);

/// Optimal two-outcome observable for frequency estimation at trial omega_c,
/// zero gauge, from the closed-form track expressions.
Observable optimal_observable_for_omega(const RotatingFieldParams& p, double T);

/// Equal superposition of the extreme dH/domega eigenvectors at t -> 0+,
/// (|0> + |1>)/sqrt(2).
PureState optimal_initial_state_for_omega();

}  // namespace qmetro::qubit
