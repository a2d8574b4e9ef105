#pragma once

// Soliton parameter trajectories in slow time s = h t:
//   reference  C' = C W'(A),                          A' = C - W(A)
//   exact      C' = C W'(A) + h^2 W'''(A) / (2 C),    A' = C - W(A) + h^2 W''(A) / (2 C^2)
// both from (A, C)(0) = (0, 1), classic RK4 with the stopping time S0 (first
// s with C in {1/2, 2}) located by bisection. Fast frame: t = s/h,
// a = A/h, c = C.

#include <optional>
#include <string>
#include <vector>

#include "bolab/evolution.hpp"

namespace bolab {

enum class Frame { slow_s, fast_t };
enum class TrajectoryKind { reference, exact, measured };

const char* to_string(Frame f);
const char* to_string(TrajectoryKind k);

struct TrajectorySample {
  double time = 0.0;   // s or t
  double position = 0.0;  // A or a
  double scale = 1.0;     // C or c
};

struct TrajectoryState {
  Frame frame = Frame::slow_s;
  TrajectoryKind kind = TrajectoryKind::reference;
  std::vector<TrajectorySample> samples;
  /// S0 in the state's own time variable; nullopt encodes S0 = +infinity.
  std::optional<double> stop_time;
};

inline constexpr double kDefaultSlowStep = 1e-3;

TrajectoryState integrate_reference(const PotentialSpec& pot, double s_end, double dt_s = kDefaultSlowStep);
TrajectoryState integrate_exact(const PotentialSpec& pot, double s_end, double dt_s = kDefaultSlowStep);

/// Slow to fast frame (t = s/h, a = A/h, c = C). UsageError on fast input.
TrajectoryState convert_frame(const TrajectoryState& tr, double h);
/// Fast to slow frame. UsageError on slow input.
TrajectoryState to_slow_frame(const TrajectoryState& tr, double h);

/// 4-point cubic Lagrange interpolation of (position, scale) at time t.
/// UsageError outside the sampled range.
TrajectorySample interpolate(const TrajectoryState& tr, double t);

struct GronwallComparison {
  double sup_dev_position = 0.0;
  double sup_dev_scale = 0.0;
  /// Only defined across an h-sweep; nullopt for a single pair.
  std::optional<double> fitted_order;
  std::optional<double> fitted_order_stderr;
};

/// Deviation suprema of `ex` from `ref` on ref's mesh restricted to the
/// common window, with `ex` resampled by cubic interpolation.
GronwallComparison gronwall_compare(const TrajectoryState& ref, const TrajectoryState& ex, double h);

struct GronwallSweepEntry {
  double h = 0.0;
  GronwallComparison comparison;
};

struct GronwallSweep {
  std::vector<GronwallSweepEntry> entries;
  /// Least-squares order of sup |C_exact - C_ref| in h (nullopt when all
  /// deviations vanish).
  std::optional<double> fitted_order;
  std::optional<double> fitted_order_stderr;
};

/// Reference and exact trajectories for each h (shape taken from `pot`).
GronwallSweep gronwall_sweep(const PotentialSpec& pot, const std::vector<double>& hs, double s_end,
                             double dt_s = kDefaultSlowStep);

/// Fast-frame trajectory of parameters measured along an evolution, tagged
/// `measured`.
TrajectoryState measured_trajectory(const std::vector<double>& times, const std::vector<double>& positions,
                                    const std::vector<double>& scales);

}  // namespace bolab
