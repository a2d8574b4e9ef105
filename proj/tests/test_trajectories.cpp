#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bolab/errors.hpp"
#include "bolab/scaling_fit.hpp"
#include "bolab/trajectories.hpp"

using namespace bolab;

namespace {

const TrajectorySample& last(const TrajectoryState& t) { return t.samples.back(); }

}  // namespace

TEST(Reference, ZeroPotentialIsFreeFlight) {
  const TrajectoryState tr = integrate_reference(PotentialSpec::zero(0.1), 2.0);
  EXPECT_FALSE(tr.stop_time.has_value());
  EXPECT_EQ(tr.frame, Frame::slow_s);
  EXPECT_EQ(tr.kind, TrajectoryKind::reference);
  for (const auto& s : tr.samples) {
    EXPECT_NEAR(s.position, s.time, 1e-12);
    EXPECT_EQ(s.scale, 1.0);
  }
}

TEST(Reference, DefaultBumpAgainstOracle) {
  // Frozen from an independent long-double RK4 (dt_s = 5e-5) with the bump
  // derivatives written out by hand.
  const TrajectoryState tr = integrate_reference(PotentialSpec::bump(0.05), 3.0);
  EXPECT_FALSE(tr.stop_time.has_value());
  for (const auto& s : tr.samples) {
    EXPECT_GT(s.scale, 0.5);
    EXPECT_LT(s.scale, 2.0);
  }
  EXPECT_NEAR(last(tr).time, 3.0, 1e-12);
  EXPECT_NEAR(last(tr).position, 2.7720481770188866, 1e-8);
  EXPECT_NEAR(last(tr).scale, 0.92349781999278324, 1e-8);
}

TEST(Reference, StepHalvingAgreement) {
  const PotentialSpec pot = PotentialSpec::bump(0.05);
  const TrajectoryState a = integrate_reference(pot, 3.0, 1e-3);
  const TrajectoryState b = integrate_reference(pot, 3.0, 5e-4);
  EXPECT_LE(std::abs(last(a).position - last(b).position), 1e-9);
  EXPECT_LE(std::abs(last(a).scale - last(b).scale), 1e-9);
}

TEST(Reference, StoppingTimeLocated) {
  // Tall bumps drive C through 1/2 (beta = 2) or 2 (beta = 5).
  for (const auto& [beta, edge] : {std::pair{2.0, 0.5}, std::pair{5.0, 2.0}}) {
    const TrajectoryState tr = integrate_reference(PotentialSpec::bump(0.05, beta), 5.0);
    ASSERT_TRUE(tr.stop_time.has_value());
    EXPECT_NEAR(last(tr).time, *tr.stop_time, 1e-12);
    EXPECT_NEAR(last(tr).scale, edge, 1e-8);
  }
}

TEST(Reference, BalanceLawByFiniteDifferences) {
  // d/ds [C - W(A)] = C W'(A) - W'(A) A'.
  const PotentialSpec pot = PotentialSpec::bump(0.05);
  const double ds = 1e-3;
  const TrajectoryState tr = integrate_reference(pot, 3.0, ds);
  const auto& s = tr.samples;
  const auto energy = [&](std::size_t i) { return s[i].scale - pot.w(s[i].position); };
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < s.size(); ++i) {
    const double fd = (energy(i - 2) - 8.0 * energy(i - 1) + 8.0 * energy(i + 1) - energy(i + 2)) / (12.0 * ds);
    const double a = s[i].position, c = s[i].scale;
    const double rhs = c * pot.w(a, 1) - pot.w(a, 1) * (c - pot.w(a));
    worst = std::max(worst, std::abs(fd - rhs));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(Exact, ZeroPotentialMatchesReference) {
  const TrajectoryState r = integrate_reference(PotentialSpec::zero(0.2), 2.0);
  const TrajectoryState e = integrate_exact(PotentialSpec::zero(0.2), 2.0);
  ASSERT_EQ(r.samples.size(), e.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    EXPECT_EQ(r.samples[i].position, e.samples[i].position);
    EXPECT_EQ(r.samples[i].scale, e.samples[i].scale);
  }
}

TEST(Exact, DefaultBumpAgainstOracle) {
  const TrajectoryState tr = integrate_exact(PotentialSpec::bump(0.05), 2.0);
  EXPECT_EQ(tr.kind, TrajectoryKind::exact);
  EXPECT_NEAR(last(tr).position, 1.8489861261839837, 1e-8);
  EXPECT_NEAR(last(tr).scale, 0.9236969757299168, 1e-8);
}

TEST(Exact, TerminalPositionGapIsQuadraticInH) {
  std::vector<std::pair<double, double>> points;
  for (double h : {0.2, 0.1, 0.05}) {
    const PotentialSpec pot = PotentialSpec::bump(h);
    points.emplace_back(h, std::abs(last(integrate_exact(pot, 3.0)).position - last(integrate_reference(pot, 3.0)).position));
  }
  EXPECT_NEAR(fit_scaling_exponent(points).order, 2.0, 0.1);
}

TEST(Frames, ConversionAndRoundTrip) {
  TrajectoryState slow;
  slow.samples = {{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}};
  const TrajectoryState fast = convert_frame(slow, 0.1);
  EXPECT_EQ(fast.frame, Frame::fast_t);
  EXPECT_NEAR(fast.samples[1].time, 10.0, 1e-12);
  EXPECT_NEAR(fast.samples[1].position, 10.0, 1e-12);
  EXPECT_EQ(fast.samples[1].scale, 1.0);
  EXPECT_THROW(convert_frame(fast, 0.1), UsageError);
  EXPECT_THROW(to_slow_frame(slow, 0.1), UsageError);

  const TrajectoryState tr = integrate_reference(PotentialSpec::bump(0.1), 2.0);
  const TrajectoryState back = to_slow_frame(convert_frame(tr, 0.1), 0.1);
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    EXPECT_NEAR(back.samples[i].time, tr.samples[i].time, 1e-12);
    EXPECT_NEAR(back.samples[i].position, tr.samples[i].position, 1e-12);
    EXPECT_EQ(back.samples[i].scale, tr.samples[i].scale);
  }
}

TEST(Frames, FreeFlightInFastFrame) {
  const TrajectoryState fast = convert_frame(integrate_reference(PotentialSpec::zero(0.05), 1.0), 0.05);
  for (const auto& s : fast.samples) EXPECT_NEAR(s.position, s.time, 1e-9);
}

TEST(Interpolate, ExactOnCubicsAndRangeChecked) {
  TrajectoryState tr;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.1 * i;
    tr.samples.push_back({t, t * t * t - t, 1.0 + t * t});
  }
  const TrajectorySample s = interpolate(tr, 0.537);
  EXPECT_NEAR(s.position, 0.537 * 0.537 * 0.537 - 0.537, 1e-13);
  EXPECT_NEAR(s.scale, 1.0 + 0.537 * 0.537, 1e-13);
  EXPECT_THROW(interpolate(tr, 1.5), UsageError);
}

TEST(Gronwall, IdenticalInputs) {
  const TrajectoryState tr = integrate_reference(PotentialSpec::bump(0.1), 2.0);
  const GronwallComparison c = gronwall_compare(tr, tr, 0.1);
  EXPECT_EQ(c.sup_dev_position, 0.0);
  EXPECT_EQ(c.sup_dev_scale, 0.0);
  EXPECT_FALSE(c.fitted_order.has_value());
}

TEST(Gronwall, EmptyOverlapRejected) {
  TrajectoryState a, b;
  a.samples = {{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, {2.0, 2.0, 1.0}, {3.0, 3.0, 1.0}};
  b.samples = {{5.0, 0.0, 1.0}, {6.0, 1.0, 1.0}, {7.0, 2.0, 1.0}, {8.0, 3.0, 1.0}};
  EXPECT_THROW(gronwall_compare(a, b, 0.1), UsageError);
}

TEST(Gronwall, ZeroPotentialSweepVanishes) {
  const GronwallSweep sw = gronwall_sweep(PotentialSpec::zero(0.1), {0.2, 0.1, 0.05}, 2.0);
  ASSERT_EQ(sw.entries.size(), 3u);
  for (const auto& e : sw.entries) {
    EXPECT_EQ(e.comparison.sup_dev_position, 0.0);
    EXPECT_EQ(e.comparison.sup_dev_scale, 0.0);
  }
  EXPECT_FALSE(sw.fitted_order.has_value());
}

TEST(Gronwall, DefaultBumpSweepOrder) {
  const GronwallSweep sw = gronwall_sweep(PotentialSpec::bump(0.2), {0.2, 0.1, 0.05}, 3.0);
  ASSERT_TRUE(sw.fitted_order.has_value());
  EXPECT_NEAR(*sw.fitted_order, 2.0, 0.2);
  EXPECT_TRUE(sw.fitted_order_stderr.has_value());
}

TEST(Measured, Tagging) {
  const TrajectoryState m = measured_trajectory({0.0, 1.0}, {0.0, 1.0}, {1.0, 1.0});
  EXPECT_EQ(m.kind, TrajectoryKind::measured);
  EXPECT_EQ(m.frame, Frame::fast_t);
  EXPECT_THROW(measured_trajectory({0.0, 1.0}, {0.0}, {1.0, 1.0}), UsageError);
}

TEST(ScalingFit, Examples) {
  EXPECT_NEAR(fit_scaling_exponent({{0.2, 0.04}, {0.1, 0.01}, {0.05, 0.0025}}).order, 2.0, 1e-12);
  std::vector<std::pair<double, double>> pts;
  for (double h : {0.3, 0.1, 0.03, 0.01}) pts.emplace_back(h, std::pow(h, 1.5));
  EXPECT_NEAR(fit_scaling_exponent(pts).order, 1.5, 1e-12);
  EXPECT_THROW(fit_scaling_exponent({{0.2, 0.04}, {0.1, 0.01}}), UsageError);
  EXPECT_THROW(fit_scaling_exponent({{0.2, 0.04}, {0.1, 0.0}, {0.05, 0.01}}), UsageError);
}

TEST(ScalingFit, InvariantUnderRescaling) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> noise(0.8, 1.25), scale(1e-3, 1e3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> pts, scaled;
    const double k = scale(rng);
    for (double h : {0.2, 0.1, 0.05, 0.025}) {
      pts.emplace_back(h, h * h * noise(rng));
      scaled.emplace_back(h, k * pts.back().second);
    }
    const ScalingFit a = fit_scaling_exponent(pts), b = fit_scaling_exponent(scaled);
    EXPECT_NEAR(a.order, b.order, 1e-10);
    EXPECT_NEAR(a.stderr_order, b.stderr_order, 1e-10);
  }
}
