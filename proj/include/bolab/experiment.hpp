#pragma once

// Theorem-verification sweeps over h for the pBO flow, parameter-ODE
// residuals along measured tracks, and the run artifacts (CSV, gnuplot
// scripts, JSON summaries).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bolab/config.hpp"
#include "bolab/evolution.hpp"
#include "bolab/modulation.hpp"
#include "bolab/scaling_fit.hpp"
#include "bolab/trajectories.hpp"

namespace bolab {

inline constexpr int kSummarySchemaVersion = 1;

enum class Perturbation { none, e_plus, gaussian, q_second };

const char* to_string(Perturbation p);
Perturbation perturbation_from_string(const std::string& s);

struct ExperimentConfig {
  std::size_t n_points = 8192;
  double domain_length = 1024.0;
  double dt = 0.01;
  /// Spacing of the decomposed snapshots; a multiple of dt.
  double sample_interval = 0.1;
  /// Fixed final time; nullopt selects T0 = min(ln(1/h) / (4 mu0 h), S0 / h).
  std::optional<double> final_time;
  double mu0 = 1.0;
  std::vector<double> hs{0.1, 0.05, 0.025};
  double amplitude = 0.2;
  double width = 1.0;
  bool zero_potential = false;
  Perturbation perturbation = Perturbation::gaussian;
  /// delta = delta_factor * h^{3/2} = ||u0 - Q||_{H^{1/2}}.
  double delta_factor = 1.0;
  Regime regime = Regime::symplectic;
  double trajectory_step = kDefaultSlowStep;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;

  void validate() const;
  /// Reads the keys listed in the README; unknown keys are left unused.
  static ExperimentConfig from_config(const ConfigFile& cfg);
};

/// T0 = min(ln(1/h) / (4 mu0 h), S0 / h), S0 the stopping time of the
/// reference trajectory.
double theorem_final_time(const PotentialSpec& pot, double mu0, double dt_s = kDefaultSlowStep);

/// u0 - Q_{0,1} for the chosen perturbation, scaled to H^{1/2} norm delta.
Field perturbation_field(const GridPtr& grid, Perturbation kind, double delta);

struct ResidualTable {
  std::vector<double> times;
  /// a' - c + W(h a) - h^2 W''(h a) / (2 c)
  std::vector<double> a_residual;
  /// c' - h W'(h a) c - h^3 W''(h a) / (2 c)
  std::vector<double> c_residual;
  double a_integral = 0.0;  // trapezoid of |a_residual|
  double c_integral = 0.0;
};

/// Residuals of the modulation equations along a symplectic track sampled at
/// uniformly spaced times. Derivatives by fourth-order central differences,
/// so the table covers the interior samples 2 .. n-3. UsageError with fewer
/// than 5 samples, nonuniform times, or a nonsymplectic track.
ResidualTable ode_residuals(const std::vector<double>& times, const std::vector<Decomposition>& track,
                            const PotentialSpec& pot);

struct ModulationRow {
  double t = 0.0;
  double a = 0.0;
  double c = 0.0;
  double residual = 0.0;
  double remainder_l2 = 0.0;
  double remainder_hhalf = 0.0;
  double remainder_local_sup = 0.0;
};

void write_modulation_csv(const std::filesystem::path& path, const std::vector<ModulationRow>& rows);
/// Header "s,A,C,kind,frame" or "t,a,c,kind,frame" by frame; several
/// trajectories may share a file.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryState>& trajectories);

struct PlotSeries {
  std::string csv;        // file name relative to the script
  int x_column = 1;
  int y_column = 2;
  std::string title;
  std::string filter;     // optional value of the `kind` column (4)
};

/// Writes a gnuplot script rendering the series to <script stem>.png.
void write_gnuplot_script(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series, bool logscale = false);

struct HRecord {
  double h = 0.0;
  double delta = 0.0;
  double final_time = 0.0;
  bool ok = false;
  std::string status;  // "ok" or the failure message
  std::size_t samples = 0;
  double sup_remainder_hhalf = 0.0;
  double sup_remainder_enveloped = 0.0;  // sup ||w||_{H^1/2} e^{-mu0 h t}
  double sup_remainder_local = 0.0;      // sup_t sup_n ||w||_{L2(n, n+1)}
  double max_newton_residual = 0.0;
  std::optional<double> a_residual_integral;
  std::optional<double> c_residual_integral;
  /// sup |residual| over t <= common_slow_time / h, the slow-time window
  /// shared by every member of the sweep.
  std::optional<double> a_residual_sup;
  std::optional<double> c_residual_sup;
  double trajectory_dev_position = 0.0;
  double trajectory_dev_scale = 0.0;
  std::filesystem::path directory;
};

struct Check {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passed = false;
};

Check make_check(const std::string& name, double value, double lower, double upper);

struct RunSummary {
  int schema_version = kSummarySchemaVersion;
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<HRecord> records;
  std::map<std::string, ScalingFit> fits;
  std::vector<Check> checks;
  nlohmann::json details = nlohmann::json::object();
  double wall_clock_seconds = 0.0;

  bool all_passed() const;
};

/// Final time of the member with this h (fixed T or the T0 rule).
double member_final_time(const ExperimentConfig& cfg, double h);

/// One pBO run for a single h; writes modulation.csv, trajectory.csv and
/// plot scripts into `dir`. Failures are recorded, not thrown.
HRecord run_theorem_member(const ExperimentConfig& cfg, double h, const std::filesystem::path& dir,
                           double common_slow_time);

/// Runs every h (up to `threads` concurrently, each in out_dir/h_<h>), fits
/// the h-orders and attaches the acceptance checks. The residual orders use
/// the sups over the common slow-time window min_h h T(h). ExperimentError when no
/// member succeeds.
RunSummary run_theorem_sweep(const ExperimentConfig& cfg, int threads = 1);

nlohmann::json to_json(const HRecord& r);
nlohmann::json to_json(const RunSummary& s);
/// Pretty-printed JSON.
void write_summary(const std::filesystem::path& path, const RunSummary& s);

}  // namespace bolab
