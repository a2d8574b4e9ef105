// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bolab/evolution.hpp"
#include "bolab/experiment.hpp"
#include "bolab/linear_operators.hpp"
#include "bolab/soliton_profiles.hpp"
#include "bolab/spectral_analysis.hpp"
#include "bolab/trajectories.hpp"
#include "bolab/virial_diagnostics.hpp"

using namespace bolab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Detail {
 public:
  /// Records `name = value` against [lo, hi] and folds it into the verdict.
  Detail& check(const std::string& name, double value, double lo, double hi) {
    const bool ok = std::isfinite(value) && value >= lo && value <= hi;
    passed_ = passed_ && ok;
    os_ << (first_ ? "" : ", ") << name << " = " << value << (ok ? "" : " [out of range]");
    first_ = false;
    return *this;
  }
  Detail& note(const std::string& text) {
    os_ << (first_ ? "" : ", ") << text;
    first_ = false;
    return *this;
  }
  Outcome done() const { return {passed_, os_.str()}; }

 private:
  std::ostringstream os_;
  bool passed_ = true;
  bool first_ = true;
};

int run(int index, const std::string& title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_seconds;
  const bool ok = out.passed && in_time;
  std::printf("%s criterion %d (%s): %s; runtime %.1f s (budget %.0f s%s)\n", ok ? "PASS" : "FAIL", index,
              title.c_str(), out.detail.c_str(), secs, budget_seconds, in_time ? "" : ", exceeded");
  std::fflush(stdout);
  return ok ? 0 : 1;
}

const SolitonParams kUnit{0.0, 1.0};

Outcome soliton_identities() {
  const GridPtr g = make_grid(8192, 1024.0);
  const GridPtr g2 = make_grid(16384, 2048.0);
  const double r1 = soliton_residual(kUnit, g), r2 = soliton_residual(kUnit, g2);
  const double hq = l2_norm(hilbert(soliton_field(g, kUnit)) + soliton_moment_field(g, kUnit));
  const Field xq = Field::sample(g, [&](double x) {
    const double y = periodic_displacement(x, 0.0, g->length());
    return y * profile::dQ(y) - 0.5 * profile::Q(y) * profile::Q(y) + 2.0 * profile::Q(y);
  });
  return Detail()
      .check("residual", r1, 0.0, 1e-3)
      .check("residual_ratio_L_to_2L", r1 / r2, 2.0, INFINITY)
      .check("HQ+yQ", hq, 0.0, 1e-3)
      .check("xQ'-(Q^2/2-2Q)", l2_norm(xq), 0.0, 1e-3)
      .done();
}

Outcome integral_table() {
  const ClosedFormTable e = closed_form_table();
  const ClosedFormTable q = quadrature_table(make_grid(8192, 1024.0));
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  return Detail()
      .check("|Q|^2", rel(q.normQ_sq, e.normQ_sq), 0.0, 1e-6)
      .check("|(yQ)'|^2", rel(q.norm_yQprime_sq, e.norm_yQprime_sq), 0.0, 1e-6)
      .check("<(yQ)',Q>", rel(q.inner_yQprime_Q, e.inner_yQprime_Q), 0.0, 1e-6)
      .check("|e_-|^2", rel(q.norm_eminus_combo_sq, e.norm_eminus_combo_sq), 0.0, 1e-6)
      .check("int z^2QQ''", rel(q.int_z2_Q_Qpp, e.int_z2_Q_Qpp), 0.0, 1e-6)
      .check("cos^2 beta", rel(q.cos2_beta, e.cos2_beta), 0.0, 1e-6)
      .done();
}

Outcome spectrum() {
  const GridPtr g = make_grid(2048, 512.0);
  const EigenReport rep = spectrum_below_continuum(discretize(OperatorSpec::linearized(), g), 1.0);
  const ClosedFormTable t = closed_form_table();
  Detail d;
  d.check("isolated_count", static_cast<double>(rep.discrete_eigenvalues.size()), 3, 3);
  if (rep.discrete_eigenvalues.size() != 3) return d.done();
  d.check("lambda_-", rep.discrete_eigenvalues[0], t.lambda_minus - 5e-3, t.lambda_minus + 5e-3)
      .check("lambda_0", rep.discrete_eigenvalues[1], -5e-3, 5e-3)
      .check("lambda_+", rep.discrete_eigenvalues[2], t.lambda_plus - 5e-3, t.lambda_plus + 5e-3);
  const Field qp = soliton_derivative_field(g, kUnit);
  const Field unit = (1.0 / l2_norm(qp)) * qp;
  const Field& v = rep.eigenvector_fields[1];
  const double sign = inner(v, unit) >= 0.0 ? 1.0 : -1.0;
  return d.check("zero_mode_vs_Q'", l2_norm(sign * v - unit), 0.0, 1e-2).done();
}

Outcome coercivity() {
  const GridPtr g = make_grid(2048, 512.0);
  const DenseOperator lin = discretize(OperatorSpec::linearized(), g);
  const Field qp = soliton_derivative_field(g, kUnit);
  const Field yqp = soliton_scale_derivative_field(g, kUnit);
  const double min_l = constrained_min_rayleigh(lin, {qp, yqp}, RayleighNorm::L2);
  const double min_l2 = constrained_min_rayleigh(square(lin), {qp}, RayleighNorm::L2);
  std::vector<double> c0;
  for (const auto& [n, len] : {std::pair<std::size_t, double>{1024, 256.0}, {2048, 512.0}}) {
    const GridPtr gr = make_grid(n, len);
    c0.push_back(constrained_min_rayleigh(
        discretize(OperatorSpec::virial(), gr),
        {soliton_derivative_field(gr, kUnit), soliton_scale_derivative_field(gr, kUnit)}, RayleighNorm::Hhalf));
  }
  return Detail()
      .check("min L on {Q',(yQ)'}perp", min_l, -5e-3, 5e-3)
      .check("min L^2 on {Q'}perp", min_l2, 0.38 - 5e-3, INFINITY)
      .check("c0(1024,256)", c0[0], 1e-12, INFINITY)
      .check("c0(2048,512)", c0[1], 1e-12, INFINITY)
      .check("c0_spread", std::abs(c0[0] - c0[1]) / std::max(c0[0], c0[1]), 0.0, 0.1)
      .done();
}

Outcome conservation() {
  const GridPtr g = make_grid(8192, 1024.0);
  const double dt = 0.005;
  const auto pot = std::make_shared<PotentialSpec>(PotentialSpec::bump(0.05));
  const PboStepper stepper(g, pot, dt);
  EvolutionState s = EvolutionState::start(soliton_field(g, kUnit), pot);
  const InvariantReport i0 = invariants(s);
  double dm = 0.0, de = 0.0;
  for (int block = 0; block < 200; ++block) {
    for (int k = 0; k < 200; ++k) stepper.step(s);
    const InvariantReport iv = invariants(s);
    dm = std::max(dm, std::abs(iv.mass - i0.mass) / i0.mass);
    de = std::max(de, std::abs(iv.energy_perturbed - i0.energy_perturbed) / std::abs(i0.energy_perturbed));
  }

  const auto free = std::make_shared<PotentialSpec>(PotentialSpec::zero(0.05));
  const PboStepper free_stepper(g, free, dt);
  const Field u0 = soliton_field(g, kUnit) + perturbation_field(g, Perturbation::gaussian, 0.1);
  EvolutionState fw = EvolutionState::start(u0, free);
  for (int k = 0; k < 2000; ++k) free_stepper.step(fw);
  EvolutionState back = EvolutionState::start(reflect(fw.field), free);
  for (int k = 0; k < 2000; ++k) free_stepper.step(back);
  return Detail()
      .check("M0_drift", dm, 0.0, 1e-8)
      .check("E_drift", de, 0.0, 1e-6)
      .check("time_reversal", l2_norm(reflect(back.field) - u0) / l2_norm(u0), 0.0, 1e-6)
      .done();
}

Outcome linearized_structure() {
  const GridPtr g = make_grid(4096, 512.0);
  const LinearizedStepper st(g, 0.005);
  const auto pot = std::make_shared<PotentialSpec>(PotentialSpec::zero());
  const Field zero = Field::zeros(g);
  EvolutionState stat = EvolutionState::start(st.kernel(), pot);
  const Field v0 = project_out(Field::sample(g, [](double y) { return std::exp(-(y - 5.0) * (y - 5.0) / 4.0); }),
                               {st.background(), st.kernel()});
  EvolutionState orth = EvolutionState::start(v0, pot);
  double drift = 0.0, oq = 0.0, oqp = 0.0;
  for (int block = 0; block < 20; ++block) {
    for (int k = 0; k < 100; ++k) {
      st.step(stat, zero);
      st.step(orth, zero);
    }
    drift = std::max(drift, l2_norm(stat.field - st.kernel()) / l2_norm(st.kernel()));
    oq = std::max(oq, std::abs(inner(orth.field, st.background())));
    oqp = std::max(oqp, std::abs(inner(orth.field, st.kernel())));
  }
  return Detail()
      .check("Q'_drift", drift, 0.0, 1e-6)
      .check("<v,Q>", oq, 0.0, 1e-6)
      .check("<v,Q'>", oqp, 0.0, 1e-6)
      .done();
}

Outcome trajectory_order() {
  const GronwallSweep sw = gronwall_sweep(PotentialSpec::bump(0.2), {0.2, 0.1, 0.05}, 3.0);
  return Detail().check("order", sw.fitted_order.value_or(NAN), 1.8, 2.2).done();
}

Outcome theorem_sweep() {
  ExperimentConfig cfg;
  cfg.out_dir = fs::temp_directory_path() / "bolab_acceptance_sweep";
  fs::remove_all(cfg.out_dir);
  const RunSummary s = run_theorem_sweep(cfg, 1);
  const auto order = [&](const std::string& key) {
    const auto it = s.fits.find(key);
    return it == s.fits.end() ? NAN : it->second.order;
  };
  std::size_t failed = 0;
  for (const auto& r : s.records) failed += r.ok ? 0 : 1;
  std::ostringstream info;
  info << "informational: e^{-mu0 h t}-enveloped remainder order " << order("remainder_enveloped")
       << ", full-window c_residual_integral order " << order("c_residual_integral");
  Outcome out = Detail()
                    .check("remainder_order", order("remainder_hhalf"), 1.2, 1.8)
                    .check("c_residual_order", order("c_residual_sup"), 2.7, INFINITY)
                    .check("failed_members", static_cast<double>(failed), 0, 0)
                    .note(info.str())
                    .done();
  fs::remove_all(cfg.out_dir);
  return out;
}

Outcome virial_uniformity() {
  VirialRunSetup run = bump_virial_setup(50.0);
  run.n_points = 4096;
  run.domain_length = 512.0;
  run.dt = 0.01;
  run.T = 20.0;
  const auto reports = virial_sweep(run, {0.05}, {-50.0, 0.0, 50.0});
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : reports) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  return Detail()
      .check("reports", static_cast<double>(reports.size()), 6, 6)
      .check("ratio_band", hi / lo, 1.0, 3.0)
      .done();
}

Outcome commutator() {
  double lo = INFINITY, hi = 0.0;
  std::ostringstream ratios;
  for (double gamma : {0.2, 0.1, 0.05}) {
    const CommutatorProbeResult r = commutator_probe(gamma, 8);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    ratios << (gamma == 0.2 ? "" : "/") << r.ratio;
  }
  return Detail().note("ratios " + ratios.str()).check("ratio_band", hi / lo, 1.0, 4.0).done();
}

}  // namespace

int main() {
  int failures = 0;
  failures += run(1, "soliton identities", 5, soliton_identities);
  failures += run(2, "closed-form integral table", 5, integral_table);
  failures += run(3, "spectrum of L", 120, spectrum);
  failures += run(4, "coercivity suite", 300, coercivity);
  failures += run(5, "conservation", 600, conservation);
  failures += run(6, "linearized-flow structure", 120, linearized_structure);
  failures += run(7, "trajectory order", 10, trajectory_order);
  failures += run(8, "theorem sweep", 3600, theorem_sweep);
  failures += run(9, "local virial uniformity", 900, virial_uniformity);
  failures += run(10, "commutator probe", 300, commutator);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
