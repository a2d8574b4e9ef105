#pragma once

// Modulation decomposition u = Q_{a,c} + remainder with (a, c) fixed by two
// orthogonality conditions:
//   nonsymplectic   <zeta, Q_{a,c}> = 0,  <zeta, d_x Q_{a,c}> = 0
//   symplectic      <eta,  Q_{a,c}> = 0,  <eta, (x - a) Q_{a,c}> = 0
// solved by Newton in (a, c). Remainders are returned recentered,
// v(y) = zeta(y + a).

#include <optional>
#include <vector>

#include "bolab/evolution.hpp"
#include "bolab/grid_transforms.hpp"
#include "bolab/soliton_profiles.hpp"

namespace bolab {

enum class Regime { nonsymplectic, symplectic };

const char* to_string(Regime r);

/// Line solitons c Q(c (x - a)), or the exact periodic traveling waves of
/// the same speed on the grid's torus (these need c > 2 pi / L).
enum class SolitonFamily { line, periodic };

const char* to_string(SolitonFamily f);

struct Decomposition {
  SolitonParams params;
  Field remainder;  // recentered
  Regime regime = Regime::nonsymplectic;
  int newton_iters = 0;
  /// max_i |F_i| / (||Q_c|| ||u||) at the returned parameters.
  double residual = 0.0;
};

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;
  /// Tube entry: ||u - Q_guess||_{H^1/2} <= tube_radius * guess.c.
  double tube_radius = 0.3;
  SolitonFamily family = SolitonFamily::line;
};

/// Throws DecompositionError outside the tube or when Newton does not
/// converge within the iteration cap.
Decomposition decompose(const Field& u, Regime regime, const SolitonParams& guess,
                        const NewtonOptions& opts = {});

/// Orthogonality residuals |<remainder, Q_c>|, |<remainder, second>| of a
/// decomposition, second being d_y Q_c or y Q_c by regime.
std::pair<double, double> orthogonality_residuals(const Decomposition& d);

/// Warm-started decomposition of every snapshot. Enforces parameter
/// continuity |a_n - a_{n-1}| <= 2 c dt between snapshots.
std::vector<Decomposition> track_parameters(const std::vector<EvolutionState>& snapshots, Regime regime,
                                            const SolitonParams& initial_guess,
                                            const NewtonOptions& opts = {});

/// e2(y, a) = W(h(y + a)) - W(h a) - h W'(h a) y sampled at the grid nodes.
Field e2_remainder(const GridPtr& grid, double a, const PotentialSpec& pot);

struct ConversionResult {
  Decomposition symplectic;          // computed directly
  Field predicted_remainder;         // first-order prediction, x-frame
  double discrepancy_l2 = 0.0;       // ||eta_direct - eta_predicted||, x-frame
  double hhalf_ratio = 0.0;          // ||eta||_{H^1/2} / ||zeta||_{H^1/2}
};

/// Symplectic decomposition from a nonsymplectic one, with the first-order
/// prediction eta ~ zeta + 2 ||Q_{a,c}||^-2 Q'_{a,c} <zeta, (x - a) Q_{a,c}>.
ConversionResult convert_decompositions(const Decomposition& d, const Field& u,
                                        const NewtonOptions& opts = {});

/// Remainder in the x-frame, u - Q_{a,c}.
Field unshifted_remainder(const Field& u, const SolitonParams& p, SolitonFamily family = SolitonFamily::line);

}  // namespace bolab
