#pragma once

// Linearized operators around the unit soliton Q:
//   L      = 1 - H d_y - Q
//   L_c    = c - H d_y - c Q(c y)
//   Ltilde = -2 H d_y + 1 - y Q' - Q
//   P v    = <v, L Q''> / ||Q'||^2 * Q'       (||Q'||^2 = 4 pi, exact)
//   psi    = D_gamma^{-1} L v
// plus the randomized operator-norm probe for the weighted commutator
//   w -> (<gamma y>^{-1} D_gamma^{-1} L <gamma y> - L D_gamma^{-1}) w.

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "bolab/grid_transforms.hpp"

namespace bolab {

enum class OperatorKind { L, Lc, Ltilde, P, DgammaInvL };

struct OperatorSpec {
  OperatorKind kind = OperatorKind::L;
  double c = 1.0;       // used by Lc
  double gamma = 0.0;   // used by DgammaInvL

  static OperatorSpec linearized() { return {OperatorKind::L, 1.0, 0.0}; }
  static OperatorSpec scaled(double c) { return {OperatorKind::Lc, c, 0.0}; }
  static OperatorSpec virial() { return {OperatorKind::Ltilde, 1.0, 0.0}; }
  static OperatorSpec projector() { return {OperatorKind::P, 1.0, 0.0}; }
  static OperatorSpec dual(double gamma) { return {OperatorKind::DgammaInvL, 1.0, gamma}; }

  void validate() const;
};

const char* to_string(OperatorKind kind);

Field apply_operator(const OperatorSpec& spec, const Field& f);

/// <op f, f> for the self-adjoint kinds L, Lc, Ltilde.
double quadratic_form(const OperatorSpec& spec, const Field& f);

/// L Q'' on the grid of the given field; the vector defining P.
Field projector_direction(const GridPtr& grid);

/// psi = D_gamma^{-1} L v.
inline Field dual_variable(const Field& v, double gamma) {
  return apply_operator(OperatorSpec::dual(gamma), v);
}

struct NormEstimate {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PowerIterationOptions {
  int trials = 8;
  int max_iterations = 5000;
  double tolerance = 1e-9;
  std::uint64_t seed = 20240611;
};

/// Largest singular value of a dense matrix by power iteration on K^T K from
/// `trials` random starts; the result is the max over trials. Throws
/// DiagnosticError (carrying the partial estimate) when no trial converges.
NormEstimate estimate_operator_norm(const Eigen::MatrixXd& k, const PowerIterationOptions& opts);

struct CommutatorProbeOptions {
  std::size_t n_points = 2048;
  double domain_length = 512.0;
  /// Inputs and outputs are restricted to |xi| <= band_fraction * xi_Nyquist;
  /// the top of the band is dominated by aliasing of the weight products.
  double band_fraction = 0.5;
  PowerIterationOptions power;
};

struct CommutatorProbeResult {
  double gamma = 0.0;
  double norm = 0.0;
  double ratio = 0.0;  // norm / (gamma ln(1/gamma))
  int iterations = 0;
};

/// Dense matrix of w -> (<gamma y>^{-1} D_gamma^{-1} L <gamma y> - L D_gamma^{-1}) w
/// in the nodal basis. Its spectral norm equals the L2 -> L2 operator norm.
Eigen::MatrixXd commutator_matrix(const GridPtr& grid, double gamma);

/// Norm of P K P, P the band projector. Requires 0 < gamma <= 1/2,
/// trials >= 8 and 0 < band_fraction <= 1.
CommutatorProbeResult commutator_probe(double gamma, int trials,
                                       const CommutatorProbeOptions& opts = {});

}  // namespace bolab
