#pragma once

// Dense discretizations of the linearized operators and the eigen-analysis
// built on them: isolated spectrum below the continuum edge, constrained
// Rayleigh-quotient minima (coercivity on codimension-k subspaces), and the
// angle-lemma lower bound.
//
// All matrices act on nodal vectors; with uniform quadrature weights the
// Euclidean inner product is the L2 inner product up to the factor dx, so
// Rayleigh quotients and symmetry carry over unchanged. Subspace solves are
// restricted to fields without Nyquist content, the space on which the
// multiplier conventions of grid_transforms are exact.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bolab/grid_transforms.hpp"
#include "bolab/linear_operators.hpp"

namespace bolab {

struct DenseOperator {
  Eigen::MatrixXd matrix;
  GridPtr grid;
  bool symmetrized = false;
};

/// Largest grid accepted by discretize().
inline constexpr std::size_t kDenseBudget = 4096;

/// Column-by-column assembly of apply_operator. Self-adjoint kinds are
/// checked (||M - M^T|| <= 1e-10 ||M||) and symmetrized.
DenseOperator discretize(const OperatorSpec& spec, const GridPtr& grid);

/// Dense matrix of the multiplier (1 + xi^2)^s including the Nyquist mode
/// (symmetric positive definite).
Eigen::MatrixXd sobolev_gram(const GridPtr& grid, double s);
/// Dense matrix of D = |xi| (Nyquist zeroed, matching fractional_derivative).
Eigen::MatrixXd dispersion_matrix(const GridPtr& grid);

/// M^2 for a symmetrized operator.
DenseOperator square(const DenseOperator& op);

enum class Parity { even, odd };

struct EigenReport {
  std::vector<double> discrete_eigenvalues;  // ascending, below threshold - margin
  double continuum_edge = 1.0;
  std::vector<Field> eigenvector_fields;     // unit L2 norm
  std::vector<double> edge_ambiguous;        // in [threshold - margin, threshold)
  std::optional<std::string> warning;
};

/// Isolated eigenvalues below `threshold - margin`. Eigenvalues inside the
/// margin band are listed as edge-ambiguous (the eigenvalue 1 of L sits on
/// the continuum edge and cannot be separated at finite resolution).
EigenReport spectrum_below_continuum(const DenseOperator& op, double threshold,
                                     std::optional<Parity> parity = std::nullopt,
                                     double margin = 0.1);

enum class RayleighNorm { L2, Hhalf, H1 };

/// min <op f, f> / ||f||^2_norm over Nyquist-free f with <f, c_k> = 0 for all
/// constraints. Throws UsageError when the constraints are dependent.
double constrained_min_rayleigh(const DenseOperator& op, const std::vector<Field>& constraints,
                                RayleighNorm norm, std::optional<Parity> parity = std::nullopt);

/// mu_perp - (mu_perp - mu1) (1 - <f, e1>^2) after normalizing e1 and f.
double angle_lemma_bound(double mu1, double mu_perp, const Field& e1, const Field& f);

}  // namespace bolab
