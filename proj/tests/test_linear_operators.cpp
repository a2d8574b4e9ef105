#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bolab/errors.hpp"
#include "bolab/linear_operators.hpp"
#include "bolab/soliton_profiles.hpp"
#include "test_support.hpp"

using namespace bolab;
using bolab::testing::kPi;
using bolab::testing::rel_error;

namespace {

GridPtr grid() { return make_grid(8192, 1024.0); }

const SolitonParams kUnit{0.0, 1.0};

Field orthogonalize(Field v, const std::vector<Field>& against) {
  // Gram-Schmidt in place, then a second pass for rounding.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<Field> basis;
    for (const Field& a : against) {
      Field b = a;
      for (const Field& e : basis) b -= inner(b, e) * e;
      basis.push_back((1.0 / l2_norm(b)) * b);
    }
    for (const Field& e : basis) v -= inner(v, e) * e;
  }
  return v;
}

}  // namespace

TEST(LinearizedOperator, KernelAndGeneralizedKernel) {
  const GridPtr g = grid();
  const Field q = soliton_field(g, kUnit);
  const Field qp = soliton_derivative_field(g, kUnit);
  const Field yqp = soliton_scale_derivative_field(g, kUnit);
  const auto lin = OperatorSpec::linearized();
  EXPECT_LT(l2_norm(apply_operator(lin, qp)), 1e-3);
  EXPECT_LT(l2_norm(apply_operator(lin, yqp) + q), 1e-2);
  EXPECT_LT(l2_norm(apply_operator(lin, q) + yqp + q), 1e-2);
}

TEST(Projector, AnnihilatesQprime) {
  const GridPtr g = grid();
  EXPECT_LT(l2_norm(apply_operator(OperatorSpec::projector(), soliton_derivative_field(g, kUnit))), 1e-12);
}

TEST(QuadraticForm, EigenfunctionQuotient) {
  const GridPtr g = grid();
  const auto [ep, lp] = eigenfunction_field(g, EigenSign::plus);
  EXPECT_NEAR(quadratic_form(OperatorSpec::linearized(), ep) / std::pow(l2_norm(ep), 2), lp, 1e-3);
  EXPECT_EQ(quadratic_form(OperatorSpec::linearized(), Field::zeros(g)), 0.0);
}

TEST(QuadraticForm, VirialOperatorIdentity) {
  std::mt19937_64 rng(31);
  const GridPtr g = make_grid(2048, 256.0);
  const Field yqp = Field::sample(g, [](double y) { return y * profile::dQ(y); });
  for (int trial = 0; trial < 10; ++trial) {
    const Field f = bolab::testing::random_localized(g, rng);
    const double lhs = quadratic_form(OperatorSpec::virial(), f);
    const double rhs = quadratic_form(OperatorSpec::linearized(), f) +
                       std::pow(l2_norm(fractional_derivative(f, 0.5)), 2) - inner(yqp * f, f);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs) + 1e-12);
  }
}

TEST(OperatorSpec, Validation) {
  EXPECT_THROW(OperatorSpec::scaled(0.0).validate(), ConfigurationError);
  EXPECT_THROW(OperatorSpec::dual(0.0).validate(), ConfigurationError);
  EXPECT_NO_THROW(OperatorSpec::dual(0.1).validate());
}

TEST(OperatorProperties, ParityPreserved) {
  std::mt19937_64 rng(32);
  const GridPtr g = make_grid(2048, 256.0);
  const std::size_t n = g->size();
  for (int trial = 0; trial < 10; ++trial) {
    const Field f = bolab::testing::random_localized(g, rng);
    std::vector<double> ev(n), od(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = (n - j) % n;
      ev[j] = 0.5 * (f[j] + f[m]);
      od[j] = 0.5 * (f[j] - f[m]);
    }
    for (const auto& [field, sign] : {std::pair{Field(g, ev), 1.0}, std::pair{Field(g, od), -1.0}}) {
      const Field lf = apply_operator(OperatorSpec::linearized(), field);
      double leak = 0.0;
      for (std::size_t j = 0; j < n; ++j) leak = std::max(leak, std::abs(lf[j] - sign * lf[(n - j) % n]));
      EXPECT_LE(leak, 1e-10 * lf.max_abs());
    }
  }
}

TEST(OperatorProperties, DualVariableInheritsOrthogonality) {
  std::mt19937_64 rng(33);
  const GridPtr g = grid();
  const Field q = soliton_field(g, kUnit);
  const Field qp = soliton_derivative_field(g, kUnit);
  const Field qpp = soliton_second_derivative_field(g, kUnit);
  const Field yqp = soliton_scale_derivative_field(g, kUnit);
  const Field yqpp = derivative(yqp);
  for (double gamma : {0.2, 0.05}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Field v = orthogonalize(bolab::testing::random_localized(g, rng), {q, qp});
      const Field psi = dual_variable(v, gamma);
      const double scale = l2_norm(psi) * l2_norm(qp);
      EXPECT_LT(std::abs(inner(psi, qp - gamma * qpp)), 1e-3 * scale);
      // The second transfer uses <v, Q> = 0 through L (yQ)' = -Q.
      EXPECT_LT(std::abs(inner(psi, yqp - gamma * yqpp)), 1e-2 * l2_norm(psi) * l2_norm(yqp));
    }
  }
}

TEST(OperatorProperties, ConjugationIdentity) {
  std::mt19937_64 rng(34);
  const GridPtr g = grid();
  const Field qp = soliton_derivative_field(g, kUnit);
  for (double gamma : {0.3, 0.1}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Field f = bolab::testing::random_localized(g, rng);
      const Field lhs = dgamma_inverse(apply_operator(OperatorSpec::linearized(), dgamma(f, gamma)), gamma);
      const Field rhs = apply_operator(OperatorSpec::linearized(), f) + gamma * dgamma_inverse(qp * f, gamma);
      EXPECT_LT(rel_error(lhs, rhs), 1e-9);
    }
  }
}

TEST(NormEstimate, ZeroOperator) {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(16, 16);
  const NormEstimate est = estimate_operator_norm(zero, {});
  EXPECT_EQ(est.norm, 0.0);
}

TEST(NormEstimate, AgreesWithSingularValues) {
  std::mt19937_64 rng(35);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd m(40, 40);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    const double oracle = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    EXPECT_NEAR(estimate_operator_norm(m, {}).norm, oracle, 1e-6 * oracle);
  }
}

TEST(CommutatorProbe, MatchesDenseSvdOracle) {
  // Oracle: largest singular value of the band-projected commutator matrix
  // assembled independently from commutator_matrix.
  CommutatorProbeOptions opts;
  opts.n_points = 256;
  opts.domain_length = 64.0;
  const double gamma = 0.1;
  const GridPtr g = make_grid(opts.n_points, opts.domain_length);
  const std::size_t n = g->size();
  const double cutoff = opts.band_fraction * g->wavenumber(n / 2);
  Eigen::MatrixXd band(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    const Field p = apply_multiplier(Field(g, e), [&](double xi) { return std::abs(xi) <= cutoff ? 1.0 : 0.0; });
    for (std::size_t row = 0; row < n; ++row) band(row, col) = p[row];
  }
  const Eigen::MatrixXd k = band * commutator_matrix(g, gamma) * band;
  const double oracle = Eigen::JacobiSVD<Eigen::MatrixXd>(k).singularValues()(0);
  const CommutatorProbeResult r = commutator_probe(gamma, 8, opts);
  EXPECT_NEAR(r.norm, oracle, 1e-6 * oracle);
  EXPECT_NEAR(r.ratio, oracle / (gamma * std::log(1.0 / gamma)), 1e-6 * r.ratio);
  EXPECT_TRUE(std::isfinite(r.ratio));
}

TEST(CommutatorProbe, RejectsBadArguments) {
  EXPECT_THROW(commutator_probe(0.6, 8), ConfigurationError);
  EXPECT_THROW(commutator_probe(0.1, 4), ConfigurationError);
  CommutatorProbeOptions opts;
  opts.band_fraction = 0.0;
  EXPECT_THROW(commutator_probe(0.1, 8, opts), ConfigurationError);
}
