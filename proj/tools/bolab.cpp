// Command-line driver. Every subcommand writes its artifacts and a JSON
// summary under <out>/<subcommand>/ and exits 0 iff all of its checks pass.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <thread>

#include <CLI11.hpp>

#include "bolab/config.hpp"
#include "bolab/errors.hpp"
#include "bolab/evolution.hpp"
#include "bolab/experiment.hpp"
#include "bolab/linear_operators.hpp"
#include "bolab/modulation.hpp"
#include "bolab/soliton_profiles.hpp"
#include "bolab/spectral_analysis.hpp"
#include "bolab/trajectories.hpp"
#include "bolab/virial_diagnostics.hpp"

namespace fs = std::filesystem;
using namespace bolab;

namespace {

using std::numbers::pi;

struct Globals {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
};

double rel(double measured, double exact) { return std::abs(measured - exact) / std::abs(exact); }

void print_checks(const RunSummary& s) {
  for (const auto& c : s.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << std::setprecision(6) << c.value;
    if (std::isfinite(c.lower) && std::isfinite(c.upper) && c.lower == c.upper) {
      std::cout << " (expected " << c.lower << ")";
    } else {
      std::cout << " (range [" << c.lower << ", " << c.upper << "])";
    }
    std::cout << '\n';
  }
}

int finish(RunSummary& s, const ConfigFile& cfg, const fs::path& dir,
           std::chrono::steady_clock::time_point start) {
  s.config = cfg.entries();
  s.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& key : cfg.unused_keys()) std::cerr << "warning: unused config key '" << key << "'\n";
  write_summary(dir / "summary.json", s);
  print_checks(s);
  std::cout << "summary: " << (dir / "summary.json").string() << '\n';
  return s.all_passed() ? 0 : 1;
}

int run_identities(const ConfigFile& cfg, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  s.command = "identities";
  const auto n = static_cast<std::size_t>(cfg.get_integer("N", 8192));
  const double len = cfg.get_double("L", 1024.0);
  const GridPtr grid = make_grid(n, len);
  const GridPtr doubled = make_grid(2 * n, 2.0 * len);
  const double r1 = soliton_residual({0.0, 1.0}, grid);
  const double r2 = soliton_residual({0.0, 1.0}, doubled);
  s.checks.push_back(make_check("soliton_residual", r1, 0.0, 1e-3));
  s.checks.push_back(make_check("soliton_residual_refinement_ratio", r1 / r2, 2.0, INFINITY));

  const Field q = soliton_field(grid, {0.0, 1.0});
  const double hq = l2_norm(hilbert(q) + soliton_moment_field(grid, {0.0, 1.0}));
  s.checks.push_back(make_check("HQ_plus_yQ_L2", hq, 0.0, 1e-3));
  // Hilbert transform of the periodized profile, for reference.
  const double k = 2.0 * pi / len;
  const Field periodized = Field::sample(grid, [&](double y) {
    return -(4.0 * pi / len) * std::sin(k * y) / (std::cosh(k) - std::cos(k * y));
  });
  s.details["HQ_vs_periodized_closed_form_L2"] = l2_norm(hilbert(q) - periodized);

  const Field xq = Field::sample(grid, [&](double x) {
    const double y = periodic_displacement(x, 0.0, len);
    return y * profile::dQ(y) - 0.5 * profile::Q(y) * profile::Q(y) + 2.0 * profile::Q(y);
  });
  s.checks.push_back(make_check("xQprime_identity_L2", l2_norm(xq), 0.0, 1e-3));

  const ClosedFormTable exact = closed_form_table();
  const ClosedFormTable quad = quadrature_table(grid);
  const std::vector<std::tuple<std::string, double, double>> entries{
      {"normQ_sq", quad.normQ_sq, exact.normQ_sq},
      {"norm_yQprime_sq", quad.norm_yQprime_sq, exact.norm_yQprime_sq},
      {"inner_yQprime_Q", quad.inner_yQprime_Q, exact.inner_yQprime_Q},
      {"norm_eminus_combo_sq", quad.norm_eminus_combo_sq, exact.norm_eminus_combo_sq},
      {"int_z2_Q_Qpp", quad.int_z2_Q_Qpp, exact.int_z2_Q_Qpp},
      {"cos2_beta", quad.cos2_beta, exact.cos2_beta}};
  for (const auto& [name, measured, value] : entries) {
    s.details["table"][name] = {{"quadrature", measured}, {"exact", value}};
    s.checks.push_back(make_check("table_" + name + "_rel", rel(measured, value), 0.0, 1e-6));
  }
  return finish(s, cfg, dir, start);
}

int run_spectrum(const ConfigFile& cfg, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  s.command = "spectrum";
  const auto n = static_cast<std::size_t>(cfg.get_integer("N", 2048));
  const double len = cfg.get_double("L", 512.0);
  const GridPtr grid = make_grid(n, len);
  const DenseOperator lin = discretize(OperatorSpec::linearized(), grid);
  const EigenReport rep = spectrum_below_continuum(lin, 1.0);
  s.details["eigenvalues"] = rep.discrete_eigenvalues;
  s.details["edge_ambiguous"] = rep.edge_ambiguous;
  if (rep.warning) s.details["warning"] = *rep.warning;
  const ClosedFormTable t = closed_form_table();
  const std::vector<double> expected{t.lambda_minus, 0.0, t.lambda_plus};
  s.checks.push_back(make_check("isolated_eigenvalue_count", static_cast<double>(rep.discrete_eigenvalues.size()), 3, 3));
  for (std::size_t i = 0; i < expected.size() && i < rep.discrete_eigenvalues.size(); ++i) {
    s.checks.push_back(make_check("eigenvalue_" + std::to_string(i) + "_error",
                                  std::abs(rep.discrete_eigenvalues[i] - expected[i]), 0.0, 5e-3));
  }
  const Field qp = soliton_derivative_field(grid, {0.0, 1.0});
  if (rep.eigenvector_fields.size() >= 2) {
    const Field unit = (1.0 / l2_norm(qp)) * qp;
    const Field& v = rep.eigenvector_fields[1];
    const double sign = inner(v, unit) >= 0.0 ? 1.0 : -1.0;
    s.checks.push_back(make_check("zero_mode_eigenvector_error", l2_norm(sign * v - unit), 0.0, 1e-2));
  }

  const Field yqp = soliton_scale_derivative_field(grid, {0.0, 1.0});
  const double min_l = constrained_min_rayleigh(lin, {qp, yqp}, RayleighNorm::L2);
  s.checks.push_back(make_check("min_rayleigh_L_perp_Qp_yQp", min_l, -5e-3, 5e-3));
  const double min_l2 = constrained_min_rayleigh(square(lin), {qp}, RayleighNorm::L2);
  s.checks.push_back(make_check("min_rayleigh_L2_perp_Qp", min_l2, 0.38 - 5e-3, INFINITY));

  std::vector<double> c0;
  for (const auto& [m, l] : {std::pair{n / 2, len / 2.0}, std::pair{n, len}}) {
    const GridPtr g = make_grid(m, l);
    const DenseOperator lt = discretize(OperatorSpec::virial(), g);
    c0.push_back(constrained_min_rayleigh(
        lt, {soliton_derivative_field(g, {0.0, 1.0}), soliton_scale_derivative_field(g, {0.0, 1.0})},
        RayleighNorm::Hhalf));
  }
  s.details["Ltilde_c0"] = c0;
  s.checks.push_back(make_check("Ltilde_c0", std::min(c0[0], c0[1]), 1e-12, INFINITY));
  s.checks.push_back(make_check("Ltilde_c0_resolution_spread", std::abs(c0[0] - c0[1]) / std::max(c0[0], c0[1]), 0.0, 0.1));
  return finish(s, cfg, dir, start);
}

int run_evolve(const ConfigFile& cfg, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  s.command = "evolve";
  const std::string flow = cfg.get_string("flow", "pbo");
  const auto n = static_cast<std::size_t>(cfg.get_integer("N", flow == "pbo" ? 8192 : 4096));
  const double len = cfg.get_double("L", flow == "pbo" ? 1024.0 : 512.0);
  const double dt = cfg.get_double("dt", 0.005);
  const double T = cfg.get_double("T", flow == "pbo" ? 200.0 : 10.0);
  const double sample = cfg.get_double("sample_interval", 1.0);
  const auto per_sample = static_cast<std::size_t>(std::llround(sample / dt));
  const auto n_samples = static_cast<std::size_t>(std::llround(T / sample));
  if (per_sample < 1 || n_samples < 1) throw ConfigurationError("need T >= sample_interval >= dt");
  const GridPtr grid = make_grid(n, len);

  if (flow == "linearized") {
    const LinearizedStepper st(grid, dt);
    const auto zero_pot = std::make_shared<PotentialSpec>(PotentialSpec::zero());
    const Field zero = Field::zeros(grid);
    EvolutionState stationary = EvolutionState::start(st.kernel(), zero_pot);
    const Field v0 = project_out(Field::sample(grid, [](double y) { return std::exp(-(y - 5.0) * (y - 5.0) / 4.0); }),
                                 {st.background(), st.kernel()});
    EvolutionState orth = EvolutionState::start(v0, zero_pot);
    double drift = 0.0, o_q = 0.0, o_qp = 0.0;
    std::ofstream csv = [&] {
      fs::create_directories(dir);
      return std::ofstream(dir / "linearized.csv");
    }();
    csv << std::setprecision(17) << "t,stationary_drift,inner_v_Q,inner_v_Qprime\n";
    for (std::size_t k = 0; k < n_samples; ++k) {
      for (std::size_t j = 0; j < per_sample; ++j) {
        st.step(stationary, zero);
        st.step(orth, zero);
      }
      const double d = l2_norm(stationary.field - st.kernel()) / l2_norm(st.kernel());
      const double a = std::abs(inner(orth.field, st.background()));
      const double b = std::abs(inner(orth.field, st.kernel()));
      drift = std::max(drift, d);
      o_q = std::max(o_q, a);
      o_qp = std::max(o_qp, b);
      csv << stationary.time << ',' << d << ',' << a << ',' << b << '\n';
    }
    s.checks.push_back(make_check("stationary_Qprime_rel_drift", drift, 0.0, 1e-6));
    s.checks.push_back(make_check("orthogonality_Q_drift", o_q, 0.0, 1e-6));
    s.checks.push_back(make_check("orthogonality_Qprime_drift", o_qp, 0.0, 1e-6));
    write_gnuplot_script(dir / "linearized.gp", "linearized flow invariants", "t", "value",
                         {{"linearized.csv", 1, 2, "stationary drift", ""},
                          {"linearized.csv", 1, 3, "<v,Q>", ""},
                          {"linearized.csv", 1, 4, "<v,Q'>", ""}},
                         true);
    return finish(s, cfg, dir, start);
  }
  if (flow != "pbo") throw ConfigurationError("flow must be 'pbo' or 'linearized'");

  const double h = cfg.get_double("h", 0.05);
  const auto pot = std::make_shared<PotentialSpec>(
      cfg.get_bool("zero_potential", false) ? PotentialSpec::zero(h)
                                            : PotentialSpec::bump(h, cfg.get_double("beta", 0.2), cfg.get_double("width", 1.0)));
  pot->validate();
  EvolutionState state = [&] {
    if (cfg.has("checkpoint_in")) {
      auto [t0, u] = read_checkpoint(cfg.get_string("checkpoint_in", ""));
      if (u.size() != n || u.grid().length() != len) throw ConfigurationError("checkpoint grid differs from N, L");
      return EvolutionState::start(std::move(u), pot, t0);
    }
    const Perturbation kind = perturbation_from_string(cfg.get_string("perturbation", "none"));
    const double delta = cfg.get_double("delta", 0.0);
    return EvolutionState::start(soliton_field(grid, {0.0, 1.0}) + perturbation_field(grid, kind, delta), pot);
  }();
  const PboStepper stepper(grid, pot, dt);
  const InvariantReport i0 = invariants(state);
  double mass_drift = 0.0, energy_drift = 0.0;
  std::vector<ModulationRow> rows;
  NewtonOptions opts;
  SolitonParams guess{0.0, 1.0};
  fs::create_directories(dir);
  std::ofstream inv(dir / "invariants.csv");
  inv << std::setprecision(17) << "t,M0,E0,E\n";
  for (std::size_t k = 0; k <= n_samples; ++k) {
    if (k > 0) {
      for (std::size_t j = 0; j < per_sample; ++j) stepper.step(state);
    }
    const InvariantReport iv = invariants(state);
    inv << state.time << ',' << iv.mass << ',' << iv.energy0 << ',' << iv.energy_perturbed << '\n';
    mass_drift = std::max(mass_drift, std::abs(iv.mass - i0.mass) / std::abs(i0.mass));
    energy_drift = std::max(energy_drift, std::abs(iv.energy_perturbed - i0.energy_perturbed) / std::abs(i0.energy_perturbed));
    try {
      const Decomposition d = decompose(state.field, Regime::symplectic, guess, opts);
      guess = {d.params.a + (d.params.c - pot->v(d.params.a)) * sample, d.params.c};
      rows.push_back({state.time, d.params.a, d.params.c, d.residual, l2_norm(d.remainder),
                      sobolev_norm(d.remainder, 0.5), local_sup_norm(d.remainder)});
    } catch (const DecompositionError& e) {
      s.details["decomposition_stopped"] = {{"t", state.time}, {"reason", e.what()}};
      guess = {guess.a + (guess.c - pot->v(guess.a)) * sample, guess.c};
    }
  }
  write_modulation_csv(dir / "modulation.csv", rows);
  write_checkpoint(dir / "checkpoint.bin", state);
  write_gnuplot_script(dir / "modulation.gp", "soliton parameters", "t", "value",
                       {{"modulation.csv", 1, 2, "a", ""}, {"modulation.csv", 1, 3, "c", ""}});
  write_gnuplot_script(dir / "invariants.gp", "invariants", "t", "value",
                       {{"invariants.csv", 1, 2, "M0", ""}, {"invariants.csv", 1, 4, "E", ""}});
  s.checks.push_back(make_check("mass_M0_rel_drift", mass_drift, 0.0, 1e-8));
  s.checks.push_back(make_check("energy_E_rel_drift", energy_drift, 0.0, 1e-6));

  if (cfg.get_bool("check_reversal", true)) {
    // Free BO: u(t) -> R u(-t) is a symmetry, so evolve, reflect, evolve, reflect.
    const double t_rev = cfg.get_double("reversal_T", 10.0);
    const auto free_pot = std::make_shared<PotentialSpec>(PotentialSpec::zero(h));
    const PboStepper free_stepper(grid, free_pot, dt);
    const Field u0 = soliton_field(grid, {0.0, 1.0}) + perturbation_field(grid, Perturbation::gaussian, 0.1);
    EvolutionState fw = EvolutionState::start(u0, free_pot);
    const auto steps = static_cast<std::size_t>(std::llround(t_rev / dt));
    for (std::size_t j = 0; j < steps; ++j) free_stepper.step(fw);
    EvolutionState back = EvolutionState::start(reflect(fw.field), free_pot);
    for (std::size_t j = 0; j < steps; ++j) free_stepper.step(back);
    s.checks.push_back(make_check("time_reversal_rel_L2", l2_norm(reflect(back.field) - u0) / l2_norm(u0), 0.0, 1e-6));
  }
  return finish(s, cfg, dir, start);
}

int run_trajectories(const ConfigFile& cfg, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  s.command = "trajectories";
  const auto hs = cfg.get_list("h", {0.2, 0.1, 0.05});
  const double s_end = cfg.get_double("s_end", 3.0);
  const double dt_s = cfg.get_double("dt_s", kDefaultSlowStep);
  const PotentialSpec pot = PotentialSpec::bump(hs.front(), cfg.get_double("beta", 0.2), cfg.get_double("width", 1.0));
  const GronwallSweep sweep = gronwall_sweep(pot, hs, s_end, dt_s);
  for (const auto& e : sweep.entries) {
    PotentialSpec ph = pot;
    ph.h = e.h;
    const TrajectoryState ref = integrate_reference(ph, s_end, dt_s);
    const TrajectoryState ex = integrate_exact(ph, s_end, dt_s);
    std::ostringstream name;
    name << "h_" << e.h;
    write_trajectory_csv(dir / name.str() / "slow.csv", {ref, ex});
    write_trajectory_csv(dir / name.str() / "fast.csv", {convert_frame(ref, e.h), convert_frame(ex, e.h)});
    write_gnuplot_script(dir / name.str() / "slow.gp", "C(s), h = " + name.str().substr(2), "s", "C",
                         {{"slow.csv", 1, 3, "reference", "reference"}, {"slow.csv", 1, 3, "exact", "exact"}});
    s.details["deviations"].push_back({{"h", e.h},
                                       {"sup_dev_position", e.comparison.sup_dev_position},
                                       {"sup_dev_scale", e.comparison.sup_dev_scale}});
  }
  if (sweep.fitted_order) {
    s.fits["scale_deviation"] = {*sweep.fitted_order, sweep.fitted_order_stderr.value_or(0.0), 0.0};
    s.checks.push_back(make_check("scale_deviation_order", *sweep.fitted_order, 1.8, 2.2));
  } else {
    s.checks.push_back(make_check("scale_deviation_order", NAN, 1.8, 2.2));
  }
  return finish(s, cfg, dir, start);
}

int run_theorem(const ConfigFile& cfg, const fs::path& dir, int threads) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig ec = ExperimentConfig::from_config(cfg);
  ec.out_dir = dir;
  RunSummary s = run_theorem_sweep(ec, threads);
  for (const auto& r : s.records) {
    std::cout << "h = " << r.h << ": " << r.status << '\n';
  }
  return finish(s, cfg, dir, start);
}

int run_virial(const ConfigFile& cfg, const fs::path& dir, int threads) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  s.command = "virial";
  VirialRunSetup run = bump_virial_setup(cfg.get_double("bump_width", 50.0), cfg.get_double("initial_amplitude", 1.0));
  run.n_points = static_cast<std::size_t>(cfg.get_integer("N", 4096));
  run.domain_length = cfg.get_double("L", 512.0);
  run.dt = cfg.get_double("dt", 0.01);
  run.T = cfg.get_double("T", 20.0);
  const auto gammas = cfg.get_list("gamma", {0.05});
  const auto y0s = cfg.get_list("y0", {-50.0, 0.0, 50.0});
  const auto reports = virial_sweep(run, gammas, y0s);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"gamma", r.gamma}, {"y0", r.y0}, {"T", r.T}, {"lhs", r.lhs}, {"rhs_norm", r.rhs_norm},
                   {"g_remainder", r.g_remainder}, {"ratio", r.ratio}});
  }
  fs::create_directories(dir);
  std::ofstream(dir / "virial.json") << arr.dump(2) << '\n';
  s.details["virial_reports"] = arr;
  for (double g : gammas) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : reports) {
      if (r.gamma != g) continue;
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    std::ostringstream name;
    name << "virial_ratio_band_gamma_" << g;
    s.checks.push_back(make_check(name.str(), hi / lo, 1.0, 3.0));
  }

  const auto probe_gammas = cfg.get_list("commutator_gamma", {0.2, 0.1, 0.05});
  CommutatorProbeOptions popts;
  popts.n_points = static_cast<std::size_t>(cfg.get_integer("commutator_N", 2048));
  popts.domain_length = cfg.get_double("commutator_L", 512.0);
  popts.band_fraction = cfg.get_double("commutator_band_fraction", 0.5);
  popts.power.seed = static_cast<std::uint64_t>(cfg.get_integer("seed", static_cast<long long>(popts.power.seed)));
  const int trials = static_cast<int>(cfg.get_integer("commutator_trials", 8));
  std::vector<CommutatorProbeResult> probes(probe_gammas.size());
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < probe_gammas.size(); i = next++) {
        probes[i] = commutator_probe(probe_gammas[i], trials, popts);
      }
    };
    std::vector<std::jthread> pool;
    for (int k = 1; k < std::min<int>(threads, static_cast<int>(probe_gammas.size())); ++k) pool.emplace_back(worker);
    worker();
  }
  std::ofstream csv(dir / "commutator.csv");
  csv << std::setprecision(17) << "gamma,norm,ratio,iterations\n";
  double lo = INFINITY, hi = 0.0;
  for (const auto& p : probes) {
    csv << p.gamma << ',' << p.norm << ',' << p.ratio << ',' << p.iterations << '\n';
    lo = std::min(lo, p.ratio);
    hi = std::max(hi, p.ratio);
  }
  if (!probes.empty()) s.checks.push_back(make_check("commutator_ratio_band", hi / lo, 1.0, 4.0));
  return finish(s, cfg, dir, start);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soliton dynamics laboratory for the Benjamin-Ono equation with a slowly varying potential"};
  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "concurrent sweep members")->check(CLI::PositiveNumber)->capture_default_str();
  app.require_subcommand(1);
  app.fallthrough();
  const std::vector<std::pair<std::string, std::string>> commands{
      {"identities", "soliton profile identities and the closed-form integral table"},
      {"spectrum", "isolated spectrum of L and the coercivity suite"},
      {"evolve", "pBO evolution (or flow = linearized) with invariants and modulation tracking"},
      {"trajectories", "reference vs exact parameter trajectories over an h-sweep"},
      {"theorem-sweep", "h-sweep of perturbed soliton runs against the h^{3/2} envelope"},
      {"virial", "local virial ratios and the commutator norm probe"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);
  CLI11_PARSE(app, argc, argv);

  try {
    const ConfigFile cfg = g.config_path.empty() ? ConfigFile{} : ConfigFile::load(g.config_path);
    const std::string cmd = app.get_subcommands().front()->get_name();
    const fs::path dir = fs::path(g.out_dir) / cmd;
    if (cmd == "identities") return run_identities(cfg, dir);
    if (cmd == "spectrum") return run_spectrum(cfg, dir);
    if (cmd == "evolve") return run_evolve(cfg, dir);
    if (cmd == "trajectories") return run_trajectories(cfg, dir);
    if (cmd == "theorem-sweep") return run_theorem(cfg, dir, g.threads);
    if (cmd == "virial") return run_virial(cfg, dir, g.threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
