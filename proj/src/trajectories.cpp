#include "bolab/trajectories.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bolab/errors.hpp"
#include "bolab/scaling_fit.hpp"

namespace bolab {

const char* to_string(Frame f) { return f == Frame::slow_s ? "slow_s" : "fast_t"; }

const char* to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::reference: return "reference";
    case TrajectoryKind::exact: return "exact";
    case TrajectoryKind::measured: return "measured";
  }
  return "?";
}

namespace {

using State = std::array<double, 2>;  // (A, C)

struct Rhs {
  const PotentialSpec& pot;
  bool exact;
  State operator()(const State& y) const {
    const double a = y[0], c = y[1];
    State d{c - pot.w(a, 0), c * pot.w(a, 1)};
    if (exact) {
      const double h2 = pot.h * pot.h;
      d[0] += 0.5 * h2 * pot.w(a, 2) / (c * c);
      d[1] += 0.5 * h2 * pot.w(a, 3) / c;
    }
    return d;
  }
};

State rk4(const Rhs& f, const State& y, double dt) {
  auto axpy = [](const State& a, double s, const State& b) { return State{a[0] + s * b[0], a[1] + s * b[1]}; };
  const State k1 = f(y);
  const State k2 = f(axpy(y, 0.5 * dt, k1));
  const State k3 = f(axpy(y, 0.5 * dt, k2));
  const State k4 = f(axpy(y, dt, k3));
  return {y[0] + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

// Signed distance of C to the nearest window edge crossed: (C - 1/2)(C - 2)
// is negative strictly inside (1/2, 2).
double window(double c) { return (c - 0.5) * (c - 2.0); }

TrajectoryState integrate(const PotentialSpec& pot, double s_end, double dt_s, bool exact) {
  pot.validate(true);
  if (!(dt_s > 0.0)) throw ConfigurationError("trajectory step must be positive");
  if (!(s_end > 0.0)) throw ConfigurationError("trajectory end time must be positive");
  const Rhs f{pot, exact};
  TrajectoryState tr;
  tr.frame = Frame::slow_s;
  tr.kind = exact ? TrajectoryKind::exact : TrajectoryKind::reference;
  State y{0.0, 1.0};
  tr.samples.push_back({0.0, y[0], y[1]});
  const auto steps = static_cast<long long>(std::ceil(s_end / dt_s - 1e-9));
  for (long long n = 0; n < steps; ++n) {
    const double s0 = static_cast<double>(n) * dt_s;
    const double dt = std::min(dt_s, s_end - s0);
    const State next = rk4(f, y, dt);
    if (window(next[1]) >= 0.0) {
      // Bisection on the sub-step length.
      double lo = 0.0, hi = dt;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (window(rk4(f, y, mid)[1]) >= 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const State hit = rk4(f, y, hi);
      tr.samples.push_back({s0 + hi, hit[0], hit[1]});
      tr.stop_time = s0 + hi;
      return tr;
    }
    y = next;
    tr.samples.push_back({s0 + dt, y[0], y[1]});
  }
  return tr;
}

}  // namespace

TrajectoryState integrate_reference(const PotentialSpec& pot, double s_end, double dt_s) {
  return integrate(pot, s_end, dt_s, false);
}

TrajectoryState integrate_exact(const PotentialSpec& pot, double s_end, double dt_s) {
  return integrate(pot, s_end, dt_s, true);
}

TrajectoryState convert_frame(const TrajectoryState& tr, double h) {
  if (tr.frame != Frame::slow_s) throw UsageError("convert_frame expects a slow-frame trajectory");
  if (!(h > 0.0)) throw ConfigurationError("frame conversion needs h > 0");
  TrajectoryState out{Frame::fast_t, tr.kind, {}, std::nullopt};
  out.samples.reserve(tr.samples.size());
  for (const auto& s : tr.samples) out.samples.push_back({s.time / h, s.position / h, s.scale});
  if (tr.stop_time) out.stop_time = *tr.stop_time / h;
  return out;
}

TrajectoryState to_slow_frame(const TrajectoryState& tr, double h) {
  if (tr.frame != Frame::fast_t) throw UsageError("to_slow_frame expects a fast-frame trajectory");
  if (!(h > 0.0)) throw ConfigurationError("frame conversion needs h > 0");
  TrajectoryState out{Frame::slow_s, tr.kind, {}, std::nullopt};
  out.samples.reserve(tr.samples.size());
  for (const auto& s : tr.samples) out.samples.push_back({s.time * h, s.position * h, s.scale});
  if (tr.stop_time) out.stop_time = *tr.stop_time * h;
  return out;
}

TrajectorySample interpolate(const TrajectoryState& tr, double t) {
  const auto& s = tr.samples;
  if (s.empty()) throw UsageError("interpolation on an empty trajectory");
  const double tol = 1e-12 * std::max(1.0, std::abs(s.back().time));
  if (t < s.front().time - tol || t > s.back().time + tol) throw UsageError("interpolation outside the trajectory");
  if (s.size() < 4) {
    // Linear fallback for very short series.
    if (s.size() == 1) return s.front();
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TrajectorySample& x) { return v < x.time; });
    const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - s.begin()), 1, s.size() - 1);
    const double w = (t - s[i - 1].time) / (s[i].time - s[i - 1].time);
    return {t, (1 - w) * s[i - 1].position + w * s[i].position, (1 - w) * s[i - 1].scale + w * s[i].scale};
  }
  auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TrajectorySample& x) { return v < x.time; });
  std::size_t i = static_cast<std::size_t>(it - s.begin());
  // Stencil i-2 .. i+1 around the bracketing interval [i-1, i].
  std::size_t first = i >= 2 ? i - 2 : 0;
  first = std::min(first, s.size() - 4);
  TrajectorySample out{t, 0.0, 0.0};
  for (std::size_t k = first; k < first + 4; ++k) {
    double w = 1.0;
    for (std::size_t m = first; m < first + 4; ++m) {
      if (m != k) w *= (t - s[m].time) / (s[k].time - s[m].time);
    }
    out.position += w * s[k].position;
    out.scale += w * s[k].scale;
  }
  return out;
}

GronwallComparison gronwall_compare(const TrajectoryState& ref, const TrajectoryState& ex, double h) {
  if (ref.frame != ex.frame) throw UsageError("trajectories in different frames");
  if (!(h > 0.0)) throw ConfigurationError("Gronwall comparison needs h > 0");
  if (ref.samples.empty() || ex.samples.empty()) throw UsageError("empty trajectory in comparison");
  const double lo = std::max(ref.samples.front().time, ex.samples.front().time);
  const double hi = std::min(ref.samples.back().time, ex.samples.back().time);
  if (!(hi > lo)) throw UsageError("trajectories have no common time window");
  GronwallComparison out;
  for (const auto& r : ref.samples) {
    if (r.time < lo || r.time > hi) continue;
    const TrajectorySample e = interpolate(ex, r.time);
    out.sup_dev_position = std::max(out.sup_dev_position, std::abs(e.position - r.position));
    out.sup_dev_scale = std::max(out.sup_dev_scale, std::abs(e.scale - r.scale));
  }
  return out;
}

GronwallSweep gronwall_sweep(const PotentialSpec& pot, const std::vector<double>& hs, double s_end, double dt_s) {
  GronwallSweep sweep;
  std::vector<std::pair<double, double>> points;
  for (double h : hs) {
    PotentialSpec p = pot;
    p.h = h;
    const TrajectoryState ref = integrate_reference(p, s_end, dt_s);
    const TrajectoryState ex = integrate_exact(p, s_end, dt_s);
    GronwallSweepEntry e{h, gronwall_compare(ref, ex, h)};
    if (e.comparison.sup_dev_scale > 0.0) points.emplace_back(h, e.comparison.sup_dev_scale);
    sweep.entries.push_back(e);
  }
  if (points.size() >= 3 && points.size() == hs.size()) {
    const ScalingFit fit = fit_scaling_exponent(points);
    sweep.fitted_order = fit.order;
    sweep.fitted_order_stderr = fit.stderr_order;
    for (auto& e : sweep.entries) {
      e.comparison.fitted_order = fit.order;
      e.comparison.fitted_order_stderr = fit.stderr_order;
    }
  }
  return sweep;
}

TrajectoryState measured_trajectory(const std::vector<double>& times, const std::vector<double>& positions,
                                    const std::vector<double>& scales) {
  if (times.size() != positions.size() || times.size() != scales.size()) {
    throw UsageError("measured trajectory columns differ in length");
  }
  TrajectoryState tr{Frame::fast_t, TrajectoryKind::measured, {}, std::nullopt};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) throw UsageError("trajectory times must increase strictly");
    if (!(scales[i] > 0.0)) throw UsageError("trajectory scale must be positive");
    tr.samples.push_back({times[i], positions[i], scales[i]});
  }
  return tr;
}

}  // namespace bolab
