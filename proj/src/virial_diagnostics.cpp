#include "bolab/virial_diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "bolab/errors.hpp"
#include "bolab/linear_operators.hpp"

namespace bolab {

namespace {

std::vector<double> trapezoid_weights(std::size_t n, double dt) {
  std::vector<double> w(n, dt);
  w.front() = w.back() = 0.5 * dt;
  return w;
}

double smoothing_density(const Field& v, const Field& gprime) {
  std::vector<double> s(v.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::sqrt(gprime[j]) * v[j];
  const double n = sobolev_norm(Field(v.grid_ptr(), std::move(s)), 0.5);
  return n * n;
}

}  // namespace

double local_smoothing_lhs(const std::vector<Field>& snapshots, double dt, const LocalizerSpec& spec) {
  spec.validate();
  if (snapshots.size() < 2) throw UsageError("local smoothing needs at least two snapshots");
  if (!(dt > 0.0)) throw UsageError("snapshot spacing must be positive");
  const auto gp = localizer(spec, snapshots.front().grid_ptr()).second;
  const auto w = trapezoid_weights(snapshots.size(), dt);
  double total = 0.0;
  for (std::size_t n = 0; n < snapshots.size(); ++n) total += w[n] * smoothing_density(snapshots[n], gp);
  return total;
}

double g_remainder(const std::vector<Field>& v_snapshots, const std::vector<Field>& f_snapshots, double dt,
                   const LocalizerSpec& spec, double gamma) {
  spec.validate();
  if (v_snapshots.size() != f_snapshots.size()) throw UsageError("g_remainder: snapshot lists differ in length");
  if (v_snapshots.size() < 2) throw UsageError("g_remainder needs at least two snapshots");
  if (!(gamma > 0.0)) throw UsageError("g_remainder needs gamma > 0");
  const GridPtr& grid = v_snapshots.front().grid_ptr();
  const Field g_center = localizer(spec, grid).first;
  const Field g_origin = localizer({spec.gamma, 0.0}, grid).first;
  const auto w = trapezoid_weights(v_snapshots.size(), dt);
  const OperatorSpec dual = OperatorSpec::dual(gamma);
  double total = 0.0;
  for (std::size_t n = 0; n < v_snapshots.size(); ++n) {
    const Field& v = v_snapshots[n];
    const Field fy = derivative(f_snapshots[n]);
    const Field psi = apply_operator(dual, v);
    const Field dual_f = apply_operator(dual, fy);
    total += w[n] * (inner(g_center * v, fy) + inner(g_origin * psi, dual_f));
  }
  return total;
}

Field project_out(const Field& f, const std::vector<Field>& directions) {
  std::vector<Field> basis;
  for (const auto& d : directions) {
    Field e = d;
    for (const auto& b : basis) e = e - inner(e, b) * b;
    const double n = l2_norm(e);
    if (!(n > 0.0)) throw UsageError("project_out: dependent directions");
    basis.push_back((1.0 / n) * e);
  }
  Field out = f;
  for (const auto& b : basis) out = out - inner(out, b) * b;
  return out;
}

VirialRunSetup bump_virial_setup(double width, double amplitude) {
  if (!(width > 0.0)) throw ConfigurationError("virial bump width must be positive");
  VirialRunSetup run;
  auto gaussian = [width](const GridPtr& g) {
    return Field::sample(g, [&](double y) { return std::exp(-y * y / (2.0 * width * width)); });
  };
  run.initial = [=](const GridPtr& g) {
    const LinearizedStepper st(g, 1.0);
    return amplitude * project_out(gaussian(g), {st.background(), st.kernel()});
  };
  run.forcing = [=](const GridPtr& g) {
    const LinearizedStepper st(g, 1.0);
    return project_out(gaussian(g), {st.kernel(), derivative(st.kernel())});
  };
  return run;
}

std::vector<VirialReport> virial_sweep(const VirialRunSetup& run, const std::vector<double>& gammas,
                                       const std::vector<double>& y0s) {
  if (gammas.empty() || y0s.empty()) return {};
  if (!run.initial || !run.forcing) throw UsageError("virial run needs initial data and forcing");
  if (!(run.T > 0.0) || !(run.dt > 0.0)) throw ConfigurationError("virial run needs T > 0 and dt > 0");
  const GridPtr grid = make_grid(run.n_points, run.domain_length);
  const LinearizedStepper stepper(grid, run.dt);
  const Field v0 = run.initial(grid);
  const Field f = run.forcing(grid);
  const double scale = l2_norm(v0) * l2_norm(stepper.background());
  const double o1 = std::abs(inner(v0, stepper.background()));
  const double o2 = std::abs(inner(v0, stepper.kernel())) * l2_norm(stepper.background()) /
                    std::max(l2_norm(stepper.kernel()), 1e-300);
  if (scale > 0.0 && std::max(o1, o2) > 1e-8 * scale) {
    throw UsageError("virial run: initial data violate <v, Q> = <v, Q'> = 0");
  }

  const auto steps = static_cast<std::size_t>(std::llround(run.T / run.dt));
  const std::size_t half = steps / 2;
  if (half < 1 || 2 * half != steps) throw ConfigurationError("virial run needs an even number of steps");
  EvolutionState state = EvolutionState::start(v0, std::make_shared<PotentialSpec>(PotentialSpec::zero()));
  std::vector<Field> snaps{v0};
  snaps.reserve(steps + 1);
  for (std::size_t n = 0; n < steps; ++n) {
    stepper.step(state, f);
    snaps.push_back(state.field);
  }
  const std::vector<Field> forcing(snaps.size(), f);

  std::vector<VirialReport> out;
  for (double gamma : gammas) {
    for (double y0 : y0s) {
      const LocalizerSpec spec{gamma, y0};
      for (std::size_t last : {half, steps}) {
        const std::vector<Field> vs(snaps.begin(), snaps.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        const std::vector<Field> fs(forcing.begin(), forcing.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        VirialReport r;
        r.gamma = gamma;
        r.y0 = y0;
        r.T = static_cast<double>(last) * run.dt;
        r.lhs = local_smoothing_lhs(vs, run.dt, spec);
        for (const auto& v : vs) r.rhs_norm = std::max(r.rhs_norm, inner(v, v));
        r.g_remainder = g_remainder(vs, fs, run.dt, spec, gamma);
        const double denom = r.rhs_norm + std::abs(r.g_remainder);
        r.ratio = denom > 0.0 ? r.lhs / denom : 0.0;
        out.push_back(r);
      }
    }
  }
  return out;
}

double max_ratio(const std::vector<VirialReport>& reports, double gamma) {
  double m = 0.0;
  for (const auto& r : reports) {
    if (r.gamma == gamma) m = std::max(m, r.ratio);
  }
  return m;
}

void MonotonicitySpec::validate() const {
  if (!(A > 0.0)) throw ConfigurationError("monotonicity weight needs A > 0");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigurationError("monotonicity needs lambda in (0, 1)");
  if (!(y0 > 1.0)) throw ConfigurationError("monotonicity needs y0 > 1");
}

double monotonicity_mass(const Field& v, const MonotonicitySpec& spec, double shift) {
  spec.validate();
  const double base = monotonicity_weight(-spec.y0 - shift, spec.A);
  const auto y = v.grid().nodes();
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    s += v[j] * v[j] * (monotonicity_weight(y[j] - spec.y0 - shift, spec.A) - base);
  }
  return s * v.grid().spacing();
}

MonotonicityCheck monotonicity_check(const std::vector<Field>& snapshots, const std::vector<double>& times,
                                     const MonotonicitySpec& spec) {
  if (snapshots.size() != times.size() || snapshots.empty()) {
    throw UsageError("monotonicity check needs matched, nonempty snapshots and times");
  }
  const double t0 = times.back();
  MonotonicityCheck out;
  out.final_value = monotonicity_mass(snapshots.back(), spec, 0.0);
  out.initial_value = monotonicity_mass(snapshots.front(), spec, spec.lambda * (t0 - times.front()));
  for (std::size_t n = 0; n < snapshots.size(); ++n) {
    const double shifted = monotonicity_mass(snapshots[n], spec, spec.lambda * (t0 - times[n]));
    out.max_violation = std::max(out.max_violation, out.final_value - shifted);
  }
  out.relative_violation = out.initial_value > 0.0 ? out.max_violation / out.initial_value : 0.0;
  return out;
}

}  // namespace bolab
