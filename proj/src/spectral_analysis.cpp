#include "bolab/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bolab/errors.hpp"

namespace bolab {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

bool is_self_adjoint(OperatorKind k) {
  return k == OperatorKind::L || k == OperatorKind::Lc || k == OperatorKind::Ltilde;
}

// Circulant matrix of the real even multiplier w(xi), Nyquist included.
MatrixXd circulant_from_symbol(const GridPtr& grid, auto&& w) {
  const std::size_t n = grid->size();
  Spectrum s(grid->spectrum_size());
  for (std::size_t m = 0; m < s.size(); ++m) s[m] = w(grid->wavenumber(m));
  const std::vector<double> kernel = grid->inverse(s);
  MatrixXd g(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g(static_cast<Index>(i), static_cast<Index>(j)) = kernel[(i + n - j) % n];
    }
  }
  return g;
}

// Orthonormal basis (columns) of the parity subspace, or identity.
MatrixXd parity_basis(std::size_t n, std::optional<Parity> parity) {
  const auto ni = static_cast<Index>(n);
  if (!parity) return MatrixXd::Identity(ni, ni);
  const double r = std::sqrt(0.5);
  const std::size_t half = n / 2;
  if (*parity == Parity::even) {
    MatrixXd b = MatrixXd::Zero(ni, static_cast<Index>(half + 1));
    b(0, 0) = 1.0;
    b(static_cast<Index>(half), static_cast<Index>(half)) = 1.0;
    for (std::size_t j = 1; j < half; ++j) {
      b(static_cast<Index>(j), static_cast<Index>(j)) = r;
      b(static_cast<Index>(n - j), static_cast<Index>(j)) = r;
    }
    return b;
  }
  MatrixXd b = MatrixXd::Zero(ni, static_cast<Index>(half - 1));
  for (std::size_t j = 1; j < half; ++j) {
    b(static_cast<Index>(j), static_cast<Index>(j - 1)) = r;
    b(static_cast<Index>(n - j), static_cast<Index>(j - 1)) = -r;
  }
  return b;
}

// Reduced problem on the constrained subspace: basis columns and the
// operator (and optional Gram) compressed onto them.
struct Reduced {
  MatrixXd basis;  // n x k, orthonormal
  MatrixXd op;
  MatrixXd gram;
};

Reduced reduce(const MatrixXd& a, const MatrixXd* gram, const GridPtr& grid,
               const std::vector<Field>& constraints, std::optional<Parity> parity) {
  const std::size_t n = grid->size();
  const MatrixXd pb = parity_basis(n, parity);

  // Constraint columns, always including the Nyquist mode.
  MatrixXd c(static_cast<Index>(n), static_cast<Index>(constraints.size() + 1));
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    if (constraints[k].size() != n) throw UsageError("constraint lives on a different grid");
    for (std::size_t j = 0; j < n; ++j) c(static_cast<Index>(j), static_cast<Index>(k)) = constraints[k][j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    c(static_cast<Index>(j), static_cast<Index>(constraints.size())) = (j % 2 == 0) ? 1.0 : -1.0;
  }
  MatrixXd cp = pb.transpose() * c;
  // Drop constraint columns that vanish in this parity sector.
  std::vector<Index> keep;
  for (Index k = 0; k < cp.cols(); ++k) {
    if (cp.col(k).norm() > 1e-12 * std::max(1.0, c.col(k).norm())) keep.push_back(k);
  }
  MatrixXd ck(cp.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) ck.col(static_cast<Index>(k)) = cp.col(keep[k]).normalized();

  Reduced out;
  MatrixXd ap = pb.transpose() * a * pb;
  MatrixXd gp;
  if (gram) gp = pb.transpose() * (*gram) * pb;
  const Index m = ck.cols();
  if (m == 0) {
    out.basis = pb;
    out.op = std::move(ap);
    if (gram) out.gram = std::move(gp);
    return out;
  }
  Eigen::ColPivHouseholderQR<MatrixXd> rank_check(ck);
  rank_check.setThreshold(1e-10);
  if (rank_check.rank() < m) throw UsageError("constraint Gram matrix is singular");

  Eigen::HouseholderQR<MatrixXd> qr(ck);
  const Index k = ck.rows();
  ap.applyOnTheLeft(qr.householderQ().adjoint());
  ap.applyOnTheRight(qr.householderQ());
  out.op = ap.bottomRightCorner(k - m, k - m);
  if (gram) {
    gp.applyOnTheLeft(qr.householderQ().adjoint());
    gp.applyOnTheRight(qr.householderQ());
    out.gram = gp.bottomRightCorner(k - m, k - m);
  }
  MatrixXd qfull = MatrixXd::Identity(k, k);
  qfull.applyOnTheLeft(qr.householderQ());
  out.basis = pb * qfull.rightCols(k - m);
  return out;
}

}  // namespace

DenseOperator discretize(const OperatorSpec& spec, const GridPtr& grid) {
  const std::size_t n = grid->size();
  if (n > kDenseBudget) {
    std::ostringstream os;
    os << "dense discretization limited to N <= " << kDenseBudget << ", got " << n;
    throw ConfigurationError(os.str());
  }
  const auto ni = static_cast<Index>(n);
  DenseOperator out{MatrixXd(ni, ni), grid, false};
  std::vector<double> unit(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    unit[col] = 1.0;
    const Field image = apply_operator(spec, Field(grid, unit));
    unit[col] = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      out.matrix(static_cast<Index>(row), static_cast<Index>(col)) = image[row];
    }
  }
  if (is_self_adjoint(spec.kind)) {
    const double asym = (out.matrix - out.matrix.transpose()).norm();
    if (asym > 1e-10 * out.matrix.norm()) {
      throw NumericalError("discretized self-adjoint operator is not symmetric");
    }
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose());
    out.symmetrized = true;
  }
  return out;
}

Eigen::MatrixXd sobolev_gram(const GridPtr& grid, double s) {
  return circulant_from_symbol(grid, [s](double xi) { return std::pow(1.0 + xi * xi, s); });
}

Eigen::MatrixXd dispersion_matrix(const GridPtr& grid) {
  const double nyquist = grid->wavenumber(grid->size() / 2);
  return circulant_from_symbol(grid, [nyquist](double xi) { return xi == nyquist ? 0.0 : std::abs(xi); });
}

DenseOperator square(const DenseOperator& op) {
  if (!op.symmetrized) throw UsageError("square() needs a symmetrized operator");
  DenseOperator out{op.matrix * op.matrix, op.grid, true};
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose());
  return out;
}

EigenReport spectrum_below_continuum(const DenseOperator& op, double threshold,
                                     std::optional<Parity> parity, double margin) {
  if (!op.symmetrized) throw UsageError("spectrum_below_continuum needs a symmetrized operator");
  const Reduced r = reduce(op.matrix, nullptr, op.grid, {}, parity);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(r.op);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-solve failed");
  const VectorXd& values = solver.eigenvalues();
  const double dx = op.grid->spacing();

  EigenReport report;
  report.continuum_edge = threshold;
  bool gap_above = true;
  for (Index i = 0; i < values.size(); ++i) {
    const double lambda = values[i];
    if (lambda < threshold - margin) {
      report.discrete_eigenvalues.push_back(lambda);
      VectorXd v = r.basis * solver.eigenvectors().col(i);
      v /= std::sqrt(dx) * v.norm();
      report.eigenvector_fields.emplace_back(op.grid, std::vector<double>(v.data(), v.data() + v.size()));
    } else if (lambda < threshold) {
      report.edge_ambiguous.push_back(lambda);
    } else {
      break;
    }
  }
  if (!report.discrete_eigenvalues.empty()) {
    const std::size_t next = report.discrete_eigenvalues.size();
    if (next < static_cast<std::size_t>(values.size()) &&
        values[static_cast<Index>(next)] - report.discrete_eigenvalues.back() < 0.5 * margin) {
      gap_above = false;
    }
  }
  if (!gap_above) report.warning = "no spectral gap detected below the continuum threshold";
  return report;
}

double constrained_min_rayleigh(const DenseOperator& op, const std::vector<Field>& constraints,
                                RayleighNorm norm, std::optional<Parity> parity) {
  if (!op.symmetrized) throw UsageError("constrained_min_rayleigh needs a symmetrized operator");
  if (norm == RayleighNorm::L2) {
    const Reduced r = reduce(op.matrix, nullptr, op.grid, constraints, parity);
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(r.op, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigen-solve failed");
    return solver.eigenvalues()[0];
  }
  const MatrixXd gram = sobolev_gram(op.grid, norm == RayleighNorm::Hhalf ? 0.5 : 1.0);
  const Reduced r = reduce(op.matrix, &gram, op.grid, constraints, parity);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(r.op, r.gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("generalized eigen-solve failed");
  return solver.eigenvalues()[0];
}

double angle_lemma_bound(double mu1, double mu_perp, const Field& e1, const Field& f) {
  const double ne = l2_norm(e1);
  const double nf = l2_norm(f);
  if (ne == 0.0 || nf == 0.0) throw UsageError("angle lemma needs nonzero e1 and f");
  const double cos_beta = inner(e1, f) / (ne * nf);
  const double sin2 = 1.0 - cos_beta * cos_beta;
  return mu_perp - (mu_perp - mu1) * sin2;
}

}  // namespace bolab
