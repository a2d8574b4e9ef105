#include "bolab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "bolab/errors.hpp"
#include "bolab/soliton_profiles.hpp"

namespace bolab {

const char* to_string(Perturbation p) {
  switch (p) {
    case Perturbation::none: return "none";
    case Perturbation::e_plus: return "e_plus";
    case Perturbation::gaussian: return "gaussian";
    case Perturbation::q_second: return "q_second";
  }
  return "?";
}

Perturbation perturbation_from_string(const std::string& s) {
  for (auto p : {Perturbation::none, Perturbation::e_plus, Perturbation::gaussian, Perturbation::q_second}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigurationError("unknown perturbation '" + s + "' (none, e_plus, gaussian, q_second)");
}

void ExperimentConfig::validate() const {
  if (n_points < 16 || (n_points & (n_points - 1)) != 0) throw ConfigurationError("N must be a power of two >= 16");
  if (!(domain_length > 0.0)) throw ConfigurationError("L must be positive");
  if (!(dt > 0.0) || !(sample_interval > 0.0)) throw ConfigurationError("dt and sample_interval must be positive");
  const double ratio = sample_interval / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || ratio < 1.0) {
    throw ConfigurationError("sample_interval must be a positive multiple of dt");
  }
  if (final_time && !(*final_time > 0.0)) throw ConfigurationError("final time must be positive");
  if (!(mu0 > 0.0)) throw ConfigurationError("mu0 must be positive");
  if (hs.empty()) throw ConfigurationError("h list is empty");
  for (double h : hs) {
    if (!(h > 0.0 && h < 1.0)) throw ConfigurationError("each h must lie in (0, 1)");
  }
  if (!(amplitude > 0.0) || !(width > 0.0)) throw ConfigurationError("bump amplitude and width must be positive");
  if (!(delta_factor >= 0.0)) throw ConfigurationError("delta_factor must be nonnegative");
  if (!(trajectory_step > 0.0)) throw ConfigurationError("trajectory step must be positive");
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& cfg) {
  ExperimentConfig c;
  c.n_points = static_cast<std::size_t>(cfg.get_integer("N", static_cast<long long>(c.n_points)));
  c.domain_length = cfg.get_double("L", c.domain_length);
  c.dt = cfg.get_double("dt", c.dt);
  c.sample_interval = cfg.get_double("sample_interval", c.sample_interval);
  if (cfg.has("T")) c.final_time = cfg.get_double("T", 0.0);
  c.mu0 = cfg.get_double("mu0", c.mu0);
  c.hs = cfg.get_list("h", c.hs);
  c.amplitude = cfg.get_double("beta", c.amplitude);
  c.width = cfg.get_double("width", c.width);
  c.zero_potential = cfg.get_bool("zero_potential", c.zero_potential);
  c.perturbation = perturbation_from_string(cfg.get_string("perturbation", to_string(c.perturbation)));
  c.delta_factor = cfg.get_double("delta_factor", c.delta_factor);
  const std::string regime = cfg.get_string("regime", to_string(c.regime));
  if (regime == "symplectic") {
    c.regime = Regime::symplectic;
  } else if (regime == "nonsymplectic") {
    c.regime = Regime::nonsymplectic;
  } else {
    throw ConfigurationError("unknown regime '" + regime + "'");
  }
  c.trajectory_step = cfg.get_double("trajectory_step", c.trajectory_step);
  c.seed = static_cast<std::uint64_t>(cfg.get_integer("seed", static_cast<long long>(c.seed)));
  c.validate();
  return c;
}

double theorem_final_time(const PotentialSpec& pot, double mu0, double dt_s) {
  const double h = pot.h;
  const double s_rule = std::log(1.0 / h) / (4.0 * mu0);
  const TrajectoryState ref = integrate_reference(pot, s_rule, dt_s);
  const double s = ref.stop_time ? std::min(*ref.stop_time, s_rule) : s_rule;
  return s / h;
}

Field perturbation_field(const GridPtr& grid, Perturbation kind, double delta) {
  if (kind == Perturbation::none || delta == 0.0) return Field::zeros(grid);
  Field p = Field::zeros(grid);
  switch (kind) {
    case Perturbation::e_plus: p = eigenfunction_field(grid, EigenSign::plus).first; break;
    case Perturbation::gaussian:
      p = Field::sample(grid, [&](double x) {
        const double d = periodic_displacement(x, 0.0, grid->length());
        return std::exp(-d * d);
      });
      break;
    case Perturbation::q_second: p = soliton_second_derivative_field(grid, {0.0, 1.0}); break;
    case Perturbation::none: break;
  }
  return (delta / sobolev_norm(p, 0.5)) * p;
}

ResidualTable ode_residuals(const std::vector<double>& times, const std::vector<Decomposition>& track,
                            const PotentialSpec& pot) {
  if (times.size() != track.size()) throw UsageError("ode_residuals: times and track differ in length");
  if (track.size() < 5) throw UsageError("ode_residuals needs at least 5 samples");
  for (const auto& d : track) {
    if (d.regime != Regime::symplectic) throw UsageError("ode_residuals needs a symplectic track");
  }
  const double step = times[1] - times[0];
  if (!(step > 0.0)) throw UsageError("ode_residuals needs increasing times");
  for (std::size_t n = 1; n < times.size(); ++n) {
    if (std::abs(times[n] - times[n - 1] - step) > 1e-9 * std::max(1.0, std::abs(times[n]))) {
      throw UsageError("ode_residuals needs uniformly spaced times");
    }
  }
  const double h = pot.h;
  auto diff = [&](std::size_t j, auto get) {
    return (-get(track[j + 2]) + 8.0 * get(track[j + 1]) - 8.0 * get(track[j - 1]) + get(track[j - 2])) /
           (12.0 * step);
  };
  ResidualTable out;
  for (std::size_t j = 2; j + 2 < track.size(); ++j) {
    const double a = track[j].params.a;
    const double c = track[j].params.c;
    const double adot = diff(j, [](const Decomposition& d) { return d.params.a; });
    const double cdot = diff(j, [](const Decomposition& d) { return d.params.c; });
    const double x = h * a;
    out.times.push_back(times[j]);
    out.a_residual.push_back(adot - c + pot.w(x, 0) - 0.5 * h * h * pot.w(x, 2) / c);
    out.c_residual.push_back(cdot - h * pot.w(x, 1) * c - 0.5 * h * h * h * pot.w(x, 2) / c);
  }
  for (std::size_t j = 1; j < out.times.size(); ++j) {
    const double w = 0.5 * (out.times[j] - out.times[j - 1]);
    out.a_integral += w * (std::abs(out.a_residual[j]) + std::abs(out.a_residual[j - 1]));
    out.c_integral += w * (std::abs(out.c_residual[j]) + std::abs(out.c_residual[j - 1]));
  }
  return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::string format_h(double h) {
  std::ostringstream os;
  os << "h_" << h;
  return os.str();
}

}  // namespace

void write_modulation_csv(const std::filesystem::path& path, const std::vector<ModulationRow>& rows) {
  auto out = open_output(path);
  out << "t,a,c,residual,remainder_L2,remainder_Hhalf,remainder_local_sup\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.a << ',' << r.c << ',' << r.residual << ',' << r.remainder_l2 << ','
        << r.remainder_hhalf << ',' << r.remainder_local_sup << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryState>& trajectories) {
  if (trajectories.empty()) throw UsageError("no trajectories to write");
  const Frame frame = trajectories.front().frame;
  for (const auto& tr : trajectories) {
    if (tr.frame != frame) throw UsageError("trajectories in one file must share a frame");
  }
  auto out = open_output(path);
  out << (frame == Frame::slow_s ? "s,A,C,kind,frame\n" : "t,a,c,kind,frame\n");
  for (const auto& tr : trajectories) {
    for (const auto& s : tr.samples) {
      out << s.time << ',' << s.position << ',' << s.scale << ',' << to_string(tr.kind) << ',' << to_string(frame)
          << '\n';
    }
  }
}

void write_gnuplot_script(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series, bool logscale) {
  auto out = open_output(path);
  out << "set datafile separator ','\n"
      << "set terminal pngcairo size 900,600\n"
      << "set output '" << path.stem().string() << ".png'\n"
      << "set title '" << title << "'\n"
      << "set xlabel '" << xlabel << "'\n"
      << "set ylabel '" << ylabel << "'\n"
      << "set key outside\n";
  if (logscale) out << "set logscale y\n";
  out << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (i) out << ", \\\n     ";
    out << "'" << s.csv << "' every ::1 using " << s.x_column << ":";
    if (s.filter.empty()) {
      out << s.y_column;
    } else {
      out << "(strcol(4) eq '" << s.filter << "' ? $" << s.y_column << " : NaN)";
    }
    out << " with lines title '" << s.title << "'";
  }
  out << '\n';
}

Check make_check(const std::string& name, double value, double lower, double upper) {
  return {name, value, lower, upper, std::isfinite(value) && value >= lower && value <= upper};
}

bool RunSummary::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double member_final_time(const ExperimentConfig& cfg, double h) {
  if (cfg.final_time) return *cfg.final_time;
  const PotentialSpec pot = cfg.zero_potential ? PotentialSpec::zero(h) : PotentialSpec::bump(h, cfg.amplitude, cfg.width);
  return theorem_final_time(pot, cfg.mu0, cfg.trajectory_step);
}

HRecord run_theorem_member(const ExperimentConfig& cfg, double h, const std::filesystem::path& dir,
                           double common_slow_time) {
  HRecord rec;
  rec.h = h;
  rec.delta = cfg.delta_factor * std::pow(h, 1.5);
  rec.directory = dir;
  try {
    const auto pot = std::make_shared<PotentialSpec>(cfg.zero_potential ? PotentialSpec::zero(h)
                                                                        : PotentialSpec::bump(h, cfg.amplitude,
                                                                                              cfg.width));
    const double T = member_final_time(cfg, h);
    const auto per_sample = static_cast<std::size_t>(std::llround(cfg.sample_interval / cfg.dt));
    const auto n_samples = static_cast<std::size_t>(std::llround(T / cfg.sample_interval));
    rec.final_time = static_cast<double>(n_samples * per_sample) * cfg.dt;

    const GridPtr grid = make_grid(cfg.n_points, cfg.domain_length);
    const Field u0 = periodic_soliton_field(grid, {0.0, 1.0}) + perturbation_field(grid, cfg.perturbation, rec.delta);
    const PboStepper stepper(grid, pot, cfg.dt);
    EvolutionState state = EvolutionState::start(u0, pot);

    NewtonOptions opts;
    opts.family = SolitonFamily::periodic;
    std::vector<Decomposition> track;
    std::vector<double> times;
    std::vector<ModulationRow> rows;
    SolitonParams guess{0.0, 1.0};
    for (std::size_t n = 0; n <= n_samples; ++n) {
      if (n > 0) {
        for (std::size_t k = 0; k < per_sample; ++k) stepper.step(state);
      }
      Decomposition d = [&] {
        try {
          return decompose(state.field, cfg.regime, guess, opts);
        } catch (const DecompositionError& e) {
          throw DecompositionError(e.what(), static_cast<int>(n));
        }
      }();
      if (d.params.c < 0.5 || d.params.c > 2.0) {
        throw EvolutionError("scale parameter left [1/2, 2]", state.time);
      }
      // Leading-order modulation velocity: a' = c - V(a).
      guess = {d.params.a + (d.params.c - pot->v(d.params.a)) * cfg.sample_interval, d.params.c};
      const double hhalf = sobolev_norm(d.remainder, 0.5);
      const double local = local_sup_norm(d.remainder);
      rows.push_back({state.time, d.params.a, d.params.c, d.residual, l2_norm(d.remainder), hhalf, local});
      rec.sup_remainder_hhalf = std::max(rec.sup_remainder_hhalf, hhalf);
      rec.sup_remainder_enveloped = std::max(rec.sup_remainder_enveloped, hhalf * std::exp(-cfg.mu0 * h * state.time));
      rec.sup_remainder_local = std::max(rec.sup_remainder_local, local);
      rec.max_newton_residual = std::max(rec.max_newton_residual, d.residual);
      times.push_back(state.time);
      track.push_back(std::move(d));
    }
    rec.samples = track.size();

    if (cfg.regime == Regime::symplectic && track.size() >= 5) {
      const ResidualTable table = ode_residuals(times, track, *pot);
      rec.a_residual_integral = table.a_integral;
      rec.c_residual_integral = table.c_integral;
      double a_sup = 0.0, c_sup = 0.0;
      for (std::size_t j = 0; j < table.times.size(); ++j) {
        if (h * table.times[j] > common_slow_time * (1.0 + 1e-12)) break;
        a_sup = std::max(a_sup, std::abs(table.a_residual[j]));
        c_sup = std::max(c_sup, std::abs(table.c_residual[j]));
      }
      rec.a_residual_sup = a_sup;
      rec.c_residual_sup = c_sup;
    }

    const TrajectoryState exact = convert_frame(integrate_exact(*pot, h * rec.final_time, cfg.trajectory_step), h);
    std::vector<double> pos, scale;
    for (const auto& d : track) {
      pos.push_back(d.params.a);
      scale.push_back(d.params.c);
    }
    const TrajectoryState measured = measured_trajectory(times, pos, scale);
    const double t_last = exact.samples.back().time;
    for (std::size_t n = 0; n < track.size(); ++n) {
      if (times[n] > t_last) break;
      const TrajectorySample e = interpolate(exact, times[n]);
      rec.trajectory_dev_position = std::max(rec.trajectory_dev_position, std::abs(pos[n] - e.position));
      rec.trajectory_dev_scale = std::max(rec.trajectory_dev_scale, std::abs(scale[n] - e.scale));
    }

    write_modulation_csv(dir / "modulation.csv", rows);
    write_trajectory_csv(dir / "trajectory.csv", {exact, measured});
    write_gnuplot_script(dir / "remainder.gp", "remainder, h = " + std::to_string(h), "t", "norm",
                         {{"modulation.csv", 1, 6, "H^1/2", ""}, {"modulation.csv", 1, 7, "local sup", ""}}, true);
    write_gnuplot_script(dir / "scale.gp", "scale parameter, h = " + std::to_string(h), "t", "c",
                         {{"trajectory.csv", 1, 3, "exact", "exact"}, {"trajectory.csv", 1, 3, "measured", "measured"}});
    rec.ok = true;
    rec.status = "ok";
  } catch (const DecompositionError& e) {
    rec.status = std::string("decomposition failed at snapshot ") + std::to_string(e.snapshot()) + ": " + e.what();
  } catch (const EvolutionError& e) {
    rec.status = std::string("evolution aborted at t = ") + std::to_string(e.time()) + ": " + e.what();
  } catch (const std::exception& e) {
    rec.status = e.what();
  }
  return rec;
}

RunSummary run_theorem_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.command = "theorem-sweep";
  summary.records.resize(cfg.hs.size());
  double common_slow_time = INFINITY;
  for (double h : cfg.hs) common_slow_time = std::min(common_slow_time, h * member_final_time(cfg, h));
  summary.details["common_slow_time"] = common_slow_time;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.hs.size(); i = next++) {
      summary.records[i] = run_theorem_member(cfg, cfg.hs[i], cfg.out_dir / format_h(cfg.hs[i]), common_slow_time);
    }
  };
  const int n_threads = std::clamp(threads, 1, static_cast<int>(cfg.hs.size()));
  {
    std::vector<std::jthread> pool;
    for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
  }

  std::vector<const HRecord*> ok;
  for (const auto& r : summary.records) {
    if (r.ok) ok.push_back(&r);
  }
  if (ok.empty()) throw ExperimentError("theorem sweep: every member failed (first: " + summary.records[0].status + ")");

  auto fit = [&](const std::string& name, auto get) {
    std::vector<std::pair<double, double>> pts;
    for (const auto* r : ok) {
      const std::optional<double> v = get(*r);
      if (v && *v > 0.0) pts.emplace_back(r->h, *v);
    }
    if (pts.size() >= 3) summary.fits[name] = fit_scaling_exponent(pts);
  };
  fit("remainder_hhalf", [](const HRecord& r) { return std::optional<double>(r.sup_remainder_hhalf); });
  fit("remainder_enveloped", [](const HRecord& r) { return std::optional<double>(r.sup_remainder_enveloped); });
  fit("remainder_local", [](const HRecord& r) { return std::optional<double>(r.sup_remainder_local); });
  fit("a_residual_integral", [](const HRecord& r) { return r.a_residual_integral; });
  fit("c_residual_integral", [](const HRecord& r) { return r.c_residual_integral; });
  fit("a_residual_sup", [](const HRecord& r) { return r.a_residual_sup; });
  fit("c_residual_sup", [](const HRecord& r) { return r.c_residual_sup; });
  fit("trajectory_dev_scale", [](const HRecord& r) { return std::optional<double>(r.trajectory_dev_scale); });

  const auto order_of = [&](const std::string& key) {
    const auto it = summary.fits.find(key);
    return it == summary.fits.end() ? NAN : it->second.order;
  };
  summary.checks.push_back(make_check("remainder_order", order_of("remainder_hhalf"), 1.2, 1.8));
  summary.checks.push_back(make_check("c_residual_order", order_of("c_residual_sup"), 2.7, INFINITY));
  summary.checks.push_back(make_check("failed_members", static_cast<double>(summary.records.size() - ok.size()), 0, 0));
  summary.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return summary;
}

nlohmann::json to_json(const HRecord& r) {
  nlohmann::json j{{"h", r.h},
                   {"delta", r.delta},
                   {"final_time", r.final_time},
                   {"ok", r.ok},
                   {"status", r.status},
                   {"samples", r.samples},
                   {"sup_remainder_hhalf", r.sup_remainder_hhalf},
                   {"sup_remainder_enveloped", r.sup_remainder_enveloped},
                   {"sup_remainder_local", r.sup_remainder_local},
                   {"max_newton_residual", r.max_newton_residual},
                   {"trajectory_dev_position", r.trajectory_dev_position},
                   {"trajectory_dev_scale", r.trajectory_dev_scale},
                   {"directory", r.directory.string()}};
  j["a_residual_integral"] = r.a_residual_integral ? nlohmann::json(*r.a_residual_integral) : nlohmann::json();
  j["c_residual_integral"] = r.c_residual_integral ? nlohmann::json(*r.c_residual_integral) : nlohmann::json();
  j["a_residual_sup"] = r.a_residual_sup ? nlohmann::json(*r.a_residual_sup) : nlohmann::json();
  j["c_residual_sup"] = r.c_residual_sup ? nlohmann::json(*r.c_residual_sup) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j;
  j["schema_version"] = s.schema_version;
  j["command"] = s.command;
  j["config"] = s.config;
  j["records"] = nlohmann::json::array();
  for (const auto& r : s.records) j["records"].push_back(to_json(r));
  j["fits"] = nlohmann::json::object();
  for (const auto& [name, f] : s.fits) {
    j["fits"][name] = {{"order", f.order}, {"stderr", f.stderr_order}, {"log_prefactor", f.log_prefactor}};
  }
  j["checks"] = nlohmann::json::array();
  for (const auto& c : s.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"value", c.value},
                           {"lower", std::isfinite(c.lower) ? nlohmann::json(c.lower) : nlohmann::json()},
                           {"upper", std::isfinite(c.upper) ? nlohmann::json(c.upper) : nlohmann::json()},
                           {"passed", c.passed}});
  }
  j["all_passed"] = s.all_passed();
  j["details"] = s.details;
  j["wall_clock_seconds"] = s.wall_clock_seconds;
  return j;
}

void write_summary(const std::filesystem::path& path, const RunSummary& s) {
  auto out = open_output(path);
  out << to_json(s).dump(2) << '\n';
}

}  // namespace bolab
