#include "bolab/linear_operators.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "bolab/errors.hpp"
#include "bolab/soliton_profiles.hpp"

namespace bolab {

void OperatorSpec::validate() const {
  if (kind == OperatorKind::Lc && !(c > 0.0)) throw ConfigurationError("L_c needs c > 0");
  if (kind == OperatorKind::DgammaInvL && !(gamma > 0.0)) {
    throw ConfigurationError("D_gamma^{-1} L needs gamma > 0");
  }
}

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::L: return "L";
    case OperatorKind::Lc: return "Lc";
    case OperatorKind::Ltilde: return "Ltilde";
    case OperatorKind::P: return "P";
    case OperatorKind::DgammaInvL: return "DgammaInvL";
  }
  return "?";
}

namespace {

// c f - H f' - c Q(c y) f
Field apply_scaled_linearized(const Field& f, double c) {
  const Field hf = hilbert(derivative(f));
  auto x = f.grid().nodes();
  const double len = f.grid().length();
  std::vector<double> out(f.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double y = periodic_displacement(x[j], 0.0, len);
    out[j] = c * f[j] - hf[j] - c * profile::Q(c * y) * f[j];
  }
  return Field(f.grid_ptr(), std::move(out));
}

Field apply_virial(const Field& f) {
  const Field hf = hilbert(derivative(f));
  auto x = f.grid().nodes();
  const double len = f.grid().length();
  std::vector<double> out(f.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double y = periodic_displacement(x[j], 0.0, len);
    out[j] = -2.0 * hf[j] + f[j] - (y * profile::dQ(y) + profile::Q(y)) * f[j];
  }
  return Field(f.grid_ptr(), std::move(out));
}

}  // namespace

Field projector_direction(const GridPtr& grid) {
  const Field qpp = soliton_second_derivative_field(grid, {0.0, 1.0});
  return apply_scaled_linearized(qpp, 1.0);
}

Field apply_operator(const OperatorSpec& spec, const Field& f) {
  spec.validate();
  switch (spec.kind) {
    case OperatorKind::L: return apply_scaled_linearized(f, 1.0);
    case OperatorKind::Lc: return apply_scaled_linearized(f, spec.c);
    case OperatorKind::Ltilde: return apply_virial(f);
    case OperatorKind::P: {
      const double coeff = inner(f, projector_direction(f.grid_ptr())) /
                           ClosedFormTable::normQprime_c_sq(1.0);
      return coeff * soliton_derivative_field(f.grid_ptr(), {0.0, 1.0});
    }
    case OperatorKind::DgammaInvL:
      return dgamma_inverse(apply_scaled_linearized(f, 1.0), spec.gamma);
  }
  throw UsageError("unknown operator kind");
}

double quadratic_form(const OperatorSpec& spec, const Field& f) {
  if (spec.kind != OperatorKind::L && spec.kind != OperatorKind::Lc &&
      spec.kind != OperatorKind::Ltilde) {
    throw UsageError("quadratic_form needs a self-adjoint operator kind");
  }
  return inner(apply_operator(spec, f), f);
}

NormEstimate estimate_operator_norm(const Eigen::MatrixXd& k, const PowerIterationOptions& opts) {
  if (opts.trials < 1) throw ConfigurationError("power iteration needs at least one trial");
  const Eigen::Index n = k.cols();
  const Eigen::MatrixXd gram = k.transpose() * k;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;

  NormEstimate best;
  bool any_converged = false;
  double partial = 0.0;
  for (int trial = 0; trial < opts.trials; ++trial) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
    x.normalize();
    double sigma_sq = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      const Eigen::VectorXd y = gram * x;
      const double next = x.dot(y);
      const double ny = y.norm();
      if (ny == 0.0) {
        sigma_sq = 0.0;
        converged = true;
        break;
      }
      x = y / ny;
      if (std::abs(next - sigma_sq) <= opts.tolerance * std::abs(next)) {
        sigma_sq = next;
        converged = true;
        break;
      }
      sigma_sq = next;
    }
    const double sigma = std::sqrt(std::max(sigma_sq, 0.0));
    partial = std::max(partial, sigma);
    if (converged) {
      any_converged = true;
      if (sigma >= best.norm) best = {sigma, it + 1, true};
    }
  }
  if (!any_converged) {
    throw DiagnosticError("power iteration did not converge within the iteration cap", partial);
  }
  best.norm = std::max(best.norm, partial);
  return best;
}

Eigen::MatrixXd commutator_matrix(const GridPtr& grid, double gamma) {
  const std::size_t n = grid->size();
  auto y = grid->nodes();
  std::vector<double> weight(n);
  for (std::size_t j = 0; j < n; ++j) weight[j] = bracket(gamma * y[j]);

  const OperatorSpec l = OperatorSpec::linearized();
  Eigen::MatrixXd k(n, n);
  std::vector<double> unit(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    unit[col] = 1.0;
    const Field e(grid, unit);
    unit[col] = 0.0;
    // <gamma y>^{-1} D_gamma^{-1} L (<gamma y> e)
    std::vector<double> we(n, 0.0);
    we[col] = weight[col];
    const Field first = dgamma_inverse(apply_operator(l, Field(grid, std::move(we))), gamma);
    // L D_gamma^{-1} e
    const Field second = apply_operator(l, dgamma_inverse(e, gamma));
    for (std::size_t row = 0; row < n; ++row) {
      k(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
          first[row] / weight[row] - second[row];
    }
  }
  return k;
}

CommutatorProbeResult commutator_probe(double gamma, int trials, const CommutatorProbeOptions& opts) {
  if (!(gamma > 0.0) || gamma > 0.5) throw ConfigurationError("commutator probe needs 0 < gamma <= 1/2");
  if (trials < 8) throw ConfigurationError("commutator probe needs at least 8 trials");
  if (opts.n_points > 2048) throw ConfigurationError("commutator probe resolution capped at N = 2048");
  const GridPtr grid = make_grid(opts.n_points, opts.domain_length);
  if (!(opts.band_fraction > 0.0 && opts.band_fraction <= 1.0)) {
    throw ConfigurationError("commutator probe needs band_fraction in (0, 1]");
  }
  const std::size_t n = grid->size();
  const double cutoff = opts.band_fraction * grid->wavenumber(n / 2);
  Eigen::MatrixXd band(n, n);
  std::vector<double> unit(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    unit[col] = 1.0;
    const Field p = apply_multiplier(Field(grid, unit), [&](double xi) { return std::abs(xi) <= cutoff ? 1.0 : 0.0; });
    unit[col] = 0.0;
    for (std::size_t row = 0; row < n; ++row) band(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = p[row];
  }
  const Eigen::MatrixXd k = band * commutator_matrix(grid, gamma) * band;
  PowerIterationOptions power = opts.power;
  power.trials = trials;
  const NormEstimate est = estimate_operator_norm(k, power);
  CommutatorProbeResult r;
  r.gamma = gamma;
  r.norm = est.norm;
  r.ratio = est.norm / (gamma * std::log(1.0 / gamma));
  r.iterations = est.iterations;
  return r;
}

}  // namespace bolab
