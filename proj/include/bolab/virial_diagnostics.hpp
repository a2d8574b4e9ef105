#pragma once

// Both sides of the local virial (local smoothing) estimate for the
// linearized flow
//   lhs = int_0^T || <D>^{1/2} ((g'_{gamma,y0})^{1/2} v) ||^2 dt
//   rhs = sup_t ||v||^2 + |G|,
//   G   = int int g_{gamma,y0} v d_y f + int int g_{gamma,0} psi (D_gamma^{-1} L d_y f),
//   psi = D_gamma^{-1} L v,
// and the weighted mass int v^2 (phi(y - y0) - phi(-y0)), phi = pi/2 + atan(y/A).

#include <cmath>
#include <functional>
#include <vector>

#include "bolab/evolution.hpp"
#include "bolab/grid_transforms.hpp"

namespace bolab {

struct VirialReport {
  double gamma = 0.0;
  double y0 = 0.0;
  double T = 0.0;
  double lhs = 0.0;
  double rhs_norm = 0.0;     // sup_t ||v||^2
  double g_remainder = 0.0;
  double ratio = 0.0;        // lhs / (rhs_norm + |g_remainder|); 0 when the denominator vanishes
};

/// Trapezoid in time of || <D>^{1/2} ((g')^{1/2} v(t)) ||^2 over uniformly
/// spaced snapshots (>= 2).
double local_smoothing_lhs(const std::vector<Field>& snapshots, double dt, const LocalizerSpec& spec);

/// G over matched snapshot lists (trapezoid in time). The first integral uses
/// the localizer centred at spec.y_center, the second at 0; D_gamma uses
/// `gamma`.
double g_remainder(const std::vector<Field>& v_snapshots, const std::vector<Field>& f_snapshots, double dt,
                   const LocalizerSpec& spec, double gamma);

/// Linearized run driven by a time-independent forcing.
struct VirialRunSetup {
  std::size_t n_points = 4096;
  double domain_length = 1024.0;
  double dt = 0.01;
  double T = 20.0;
  /// Initial data; must satisfy <v0, Q> = <v0, Q'> = 0 (background of the
  /// linearized stepper) to 1e-8 relative.
  std::function<Field(const GridPtr&)> initial;
  /// Forcing f(y), held fixed in time.
  std::function<Field(const GridPtr&)> forcing;
};

/// f minus its L2 projection onto span(directions).
Field project_out(const Field& f, const std::vector<Field>& directions);

/// Forced run with Gaussian profiles of the given width: v0 (scaled by
/// `amplitude`) orthogonal to Q and Q', f orthogonal to Q' and Q'' (so the
/// forcing keeps <v, Q> and <v, Q'> fixed).
VirialRunSetup bump_virial_setup(double width, double amplitude = 1.0);

/// Runs the setup once and reports every (gamma, y0, T') with
/// T' in {T/2, T}. Throws UsageError when the initial data violate the
/// orthogonality conditions.
std::vector<VirialReport> virial_sweep(const VirialRunSetup& run, const std::vector<double>& gammas,
                                       const std::vector<double>& y0s);

/// max ratio over the reports with the given gamma.
double max_ratio(const std::vector<VirialReport>& reports, double gamma);

struct MonotonicitySpec {
  double A = 10.0;
  double lambda = 0.5;
  double y0 = 10.0;
  void validate() const;
};

/// phi(y) = pi/2 + atan(y / A).
inline double monotonicity_weight(double y, double A) { return 0.5 * 3.14159265358979323846 + std::atan(y / A); }

/// int v^2 (phi(y - y0 - shift) - phi(-y0 - shift)) dy.
double monotonicity_mass(const Field& v, const MonotonicitySpec& spec, double shift = 0.0);

struct MonotonicityCheck {
  double final_value = 0.0;    // functional at t0 (last snapshot)
  double initial_value = 0.0;  // shifted functional at the first snapshot
  double max_violation = 0.0;  // max_t [I(t0) - I_shift(t)]_+
  double relative_violation = 0.0;
};

/// Compares the functional at t0 = times.back() with the shifted functional
/// at every earlier snapshot (shift lambda (t0 - t)).
MonotonicityCheck monotonicity_check(const std::vector<Field>& snapshots, const std::vector<double>& times,
                                     const MonotonicitySpec& spec);

}  // namespace bolab
