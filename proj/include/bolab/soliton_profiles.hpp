#pragma once

// The Benjamin-Ono soliton Q(x) = 4 / (1 + x^2), its rescalings
// Q_{a,c}(x) = c Q(c (x - a)), derivatives, the even eigenfunctions e_+-
// of the linearized operator and the exact integral constants.

#include <numbers>
#include <utility>

#include "bolab/grid_transforms.hpp"

namespace bolab {

struct SolitonParams {
  double a = 0.0;  // translation
  double c = 1.0;  // scale, > 0
  void validate() const;
};

/// Closed forms of the unit profile and the functions built from it.
namespace profile {
inline double Q(double z) { return 4.0 / (1.0 + z * z); }
inline double dQ(double z) {
  const double p = 1.0 + z * z;
  return -8.0 * z / (p * p);
}
inline double d2Q(double z) {
  const double p = 1.0 + z * z;
  return (24.0 * z * z - 8.0) / (p * p * p);
}
inline double d3Q(double z) {
  const double p = 1.0 + z * z;
  return 96.0 * z * (1.0 - z * z) / (p * p * p * p);
}
/// (zQ)'
inline double dzQ(double z) {
  const double p = 1.0 + z * z;
  return 4.0 * (1.0 - z * z) / (p * p);
}
/// (zQ)''
inline double d2zQ(double z) {
  const double p = 1.0 + z * z;
  return 8.0 * z * (z * z - 3.0) / (p * p * p);
}
}  // namespace profile

/// Displacement x - a wrapped to the periodic image in [-L/2, L/2).
double periodic_displacement(double x, double a, double length);

/// Samples c Q(c (x - a)) at the nodes (nearest periodic image of x - a).
Field soliton_field(const GridPtr& grid, const SolitonParams& p);
/// d/dx Q_{a,c}.
Field soliton_derivative_field(const GridPtr& grid, const SolitonParams& p);
/// d^2/dx^2 Q_{a,c}.
Field soliton_second_derivative_field(const GridPtr& grid, const SolitonParams& p);
/// d/dc Q_{a,c} = ((x - a) Q_{a,c})' / c.
Field soliton_scale_derivative_field(const GridPtr& grid, const SolitonParams& p);
/// (x - a) Q_{a,c}.
Field soliton_moment_field(const GridPtr& grid, const SolitonParams& p);

/// Exact traveling wave of speed c on the periodic grid,
///   2k sinh(g) / (cosh(g) - cos(k (x - a))),  k = 2 pi / L,  k coth(g) = c,
/// which solves c u - H u' - u^2/2 = 0 on the torus and tends to Q_{a,c} as
/// L -> infinity. Requires L > 2 pi / c.
Field periodic_soliton_field(const GridPtr& grid, const SolitonParams& p);

/// ||c Q_{a,c} - H d_x Q_{a,c} - Q_{a,c}^2 / 2||_{L2}.
double soliton_residual(const SolitonParams& p, const GridPtr& grid);
/// Same defect evaluated for the field u with the speed c_test.
double profile_defect(const Field& u, double c_test);

enum class EigenSign { plus, minus };

/// e_+- = Q + ((-+sqrt5 - 1)/2) (yQ)' and lambda_+- = (+-sqrt5 - 1)/2.
std::pair<Field, double> eigenfunction_field(const GridPtr& grid, EigenSign sign);

struct ClosedFormTable {
  double normQ_sq;               // ||Q||^2 = 8 pi
  double norm_yQprime_sq;        // ||(yQ)'||^2 = 4 pi
  double inner_yQprime_Q;        // <(yQ)', Q> = 4 pi
  double norm_eminus_combo_sq;   // ||Q + lambda_+ (yQ)'||^2 = 2 (5 + sqrt5) pi
  double normQprime_sq;          // ||Q'||^2 = 4 pi (c = 1)
  double int_z2_Q_Qpp;           // int z^2 Q Q'' = 4 pi
  double int_Q_cubed;            // int Q^3 = 24 pi
  double cos2_beta;              // 1/2 + sqrt5 / 10
  double lambda_plus;            // (sqrt5 - 1)/2
  double lambda_minus;           // -(sqrt5 + 1)/2

  /// ||d_y Q_c||^2 = 4 pi c^3.
  static double normQprime_c_sq(double c) { return 4.0 * std::numbers::pi * c * c * c; }
};

ClosedFormTable closed_form_table();

/// The integral entries of the table by trapezoid quadrature of sampled
/// fields (lambda entries are copied from the exact table).
ClosedFormTable quadrature_table(const GridPtr& grid);

}  // namespace bolab
