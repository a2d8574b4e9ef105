#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bolab/errors.hpp"
#include "bolab/evolution.hpp"
#include "bolab/modulation.hpp"
#include "bolab/soliton_profiles.hpp"
#include "test_support.hpp"

using namespace bolab;

namespace {

GridPtr grid() { return make_grid(8192, 1024.0); }

Field gaussian(const GridPtr& g, double center, double width, double amplitude) {
  return Field::sample(g, [=](double x) { return amplitude * std::exp(-(x - center) * (x - center) / (width * width)); });
}

/// Projects r off {Q_{a,c}, second} where second is the regime's other direction.
Field gauge_admissible(Field r, const GridPtr& g, const SolitonParams& p, Regime regime) {
  const Field q = soliton_field(g, p);
  const Field second = regime == Regime::nonsymplectic
                           ? soliton_derivative_field(g, p)
                           : Field::sample(g, [&](double x) { return periodic_displacement(x, p.a, g->length()) * q[g->nearest_index(x)]; });
  for (int pass = 0; pass < 2; ++pass) {
    const Field e1 = (1.0 / l2_norm(q)) * q;
    Field e2 = second - inner(second, e1) * e1;
    e2 = (1.0 / l2_norm(e2)) * e2;
    r -= inner(r, e1) * e1;
    r -= inner(r, e2) * e2;
  }
  return r;
}

}  // namespace

TEST(Decompose, ExactSolitonBothRegimes) {
  const GridPtr g = grid();
  const Field u = soliton_field(g, {3.0, 1.5});
  for (Regime r : {Regime::nonsymplectic, Regime::symplectic}) {
    const Decomposition d = decompose(u, r, {2.98, 1.49});
    EXPECT_NEAR(d.params.a, 3.0, 1e-10);
    EXPECT_NEAR(d.params.c, 1.5, 1e-10);
    EXPECT_LE(l2_norm(d.remainder), 1e-10);
    EXPECT_EQ(d.regime, r);
  }
}

TEST(Decompose, TranslationAbsorbedAgainstOracle) {
  // Frozen from an independent long-double Newton solve on direct node sums.
  const double a_oracle = -0.009999000174958762;
  const double c_oracle = 1.0000499987498713;
  const GridPtr g = grid();
  const Field u = soliton_field(g, {0.0, 1.0}) + 0.01 * soliton_derivative_field(g, {0.0, 1.0});
  const Decomposition d = decompose(u, Regime::nonsymplectic, {0.0, 1.0});
  EXPECT_NEAR(d.params.a, a_oracle, 1e-10);
  EXPECT_NEAR(d.params.c, c_oracle, 1e-10);
  const Field qp = soliton_derivative_field(d.remainder.grid_ptr(), {0.0, d.params.c});
  EXPECT_LE(std::abs(inner(d.remainder, qp)), 1e-10 * l2_norm(qp) * l2_norm(d.remainder) + 1e-14);
}

TEST(Decompose, OutsideTubeRejected) {
  const GridPtr g = grid();
  EXPECT_THROW(decompose(soliton_field(g, {40.0, 1.0}), Regime::symplectic, {0.0, 1.0}), DecompositionError);
  EXPECT_THROW(decompose(Field::zeros(g), Regime::nonsymplectic, {0.0, 1.0}), DecompositionError);
}

TEST(Decompose, PeriodicFamily) {
  const GridPtr g = make_grid(2048, 256.0);
  NewtonOptions opts;
  opts.family = SolitonFamily::periodic;
  const Decomposition d = decompose(periodic_soliton_field(g, {2.0, 1.2}), Regime::symplectic, {1.98, 1.19}, opts);
  EXPECT_NEAR(d.params.a, 2.0, 1e-9);
  EXPECT_NEAR(d.params.c, 1.2, 1e-9);
  EXPECT_LE(l2_norm(d.remainder), 1e-9);
}

TEST(DecomposeProperties, OrthogonalityInvariants) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> pos(-20.0, 20.0), speed(0.7, 1.5), amp(0.01, 0.1);
  const GridPtr g = grid();
  for (int trial = 0; trial < 12; ++trial) {
    const SolitonParams p{pos(rng), speed(rng)};
    Field pert = bolab::testing::random_localized(g, rng, 5.0);
    pert = (amp(rng) * p.c / sobolev_norm(pert, 0.5)) * translate(pert, p.a);
    const Regime regime = trial % 2 ? Regime::symplectic : Regime::nonsymplectic;
    const Decomposition d = decompose(soliton_field(g, p) + pert, regime, p);
    const auto [r1, r2] = orthogonality_residuals(d);
    const double qn = l2_norm(soliton_field(d.remainder.grid_ptr(), {0.0, d.params.c}));
    EXPECT_LE(r1, 1e-10 * qn * l2_norm(d.remainder));
    EXPECT_LE(r2, 1e-10 * qn * l2_norm(d.remainder) * (1.0 + std::abs(d.params.a)));
  }
}

TEST(DecomposeProperties, GaugeConsistencyIsSecondOrder) {
  std::mt19937_64 rng(62);
  const GridPtr g = grid();
  const SolitonParams p{1.5, 1.2};
  for (Regime regime : {Regime::nonsymplectic, Regime::symplectic}) {
    const Field r = gauge_admissible(bolab::testing::random_localized(g, rng, 4.0), g, p, regime);
    const auto deviation = [&](double eps) {
      const Decomposition d = decompose(soliton_field(g, p) + (eps / l2_norm(r)) * r, regime, p);
      return std::hypot(d.params.a - p.a, d.params.c - p.c);
    };
    // The orthogonality conditions hold exactly at p, so the O(eps^2) bound
    // is met with room to spare.
    EXPECT_LE(deviation(0.04), 1e-9);
    EXPECT_LE(deviation(0.02), 1e-9);
  }
}

TEST(Track, FreeSolitonSlopes) {
  const GridPtr g = grid();
  const auto pot = std::make_shared<PotentialSpec>(PotentialSpec::zero());
  const PboStepper st(g, pot, 0.01);
  EvolutionState s = EvolutionState::start(soliton_field(g, {0.0, 1.0}), pot);
  // Snapshots 0.05 apart keep each warm start inside the tube.
  std::vector<EvolutionState> snaps{s};
  for (int k = 0; k < 200; ++k) {
    for (int i = 0; i < 5; ++i) st.step(s);
    snaps.push_back(s);
  }
  const auto warm = track_parameters(snaps, Regime::symplectic, {0.0, 1.0});
  ASSERT_EQ(warm.size(), snaps.size());
  // Least-squares slope of a(t).
  double st_ = 0, sa = 0, stt = 0, sta = 0;
  for (std::size_t i = 0; i < warm.size(); ++i) {
    const double t = snaps[i].time, a = warm[i].params.a;
    st_ += t; sa += a; stt += t * t; sta += t * a;
    EXPECT_NEAR(warm[i].params.c, 1.0, 1e-4);
  }
  const double n = static_cast<double>(warm.size());
  EXPECT_NEAR((n * sta - st_ * sa) / (n * stt - st_ * st_), 1.0, 1e-3);
  // Cold starts from a nearby guess land on the same parameters.
  for (std::size_t i = 0; i < warm.size(); i += 25) {
    const Decomposition cold = decompose(snaps[i].field, Regime::symplectic, {snaps[i].time + 0.05, 1.01});
    EXPECT_NEAR(cold.params.a, warm[i].params.a, 1e-9);
    EXPECT_NEAR(cold.params.c, warm[i].params.c, 1e-9);
  }
}

TEST(Track, EmptyInput) {
  EXPECT_TRUE(track_parameters({}, Regime::symplectic, {0.0, 1.0}).empty());
}

TEST(E2Remainder, QuadraticIsExact) {
  const GridPtr g = make_grid(256, 64.0);
  const PotentialSpec quad{0.1, QuadraticShape{}};
  const Field e2 = e2_remainder(g, 3.0, quad);
  for (std::size_t j = 0; j < g->size(); ++j) {
    const double y = g->nodes()[j];
    EXPECT_NEAR(e2[j], 0.01 * y * y, 1e-12 * (1.0 + y * y));
  }
}

TEST(E2Remainder, ZeroShapeAndBumpBound) {
  const GridPtr g = make_grid(4096, 512.0);
  EXPECT_EQ(e2_remainder(g, 1.0, PotentialSpec::zero(0.05)).max_abs(), 0.0);
  const PotentialSpec bump = PotentialSpec::bump(0.05);
  const double w2 = bump.sup_w(2);
  for (double a : {-15.0, 0.0, 7.0}) {
    const Field e2 = e2_remainder(g, a, bump);
    for (std::size_t j = 0; j < g->size(); ++j) {
      const double y = g->nodes()[j];
      EXPECT_LE(std::abs(e2[j]), 0.5 * 0.05 * 0.05 * w2 * y * y * (1.0 + 1e-9) + 1e-15);
    }
  }
}

TEST(Convert, ExactSoliton) {
  const GridPtr g = grid();
  const Field u = soliton_field(g, {2.0, 1.3});
  const Decomposition d = decompose(u, Regime::nonsymplectic, {2.0, 1.3});
  const ConversionResult c = convert_decompositions(d, u);
  EXPECT_LE(l2_norm(c.symplectic.remainder), 1e-10);
  EXPECT_LE(l2_norm(c.predicted_remainder), 1e-10);
}

TEST(Convert, PredictionErrorIsQuadratic) {
  const GridPtr g = grid();
  const Field shape = gaussian(g, 2.0, 2.0, 1.0);
  std::vector<double> disc;
  for (double eps : {0.04, 0.02, 0.01}) {
    const Field u = soliton_field(g, {0.0, 1.0}) + eps * shape;
    const Decomposition d = decompose(u, Regime::nonsymplectic, {0.0, 1.0});
    const ConversionResult c = convert_decompositions(d, u);
    EXPECT_GT(c.hhalf_ratio, 0.0);
    EXPECT_LT(c.hhalf_ratio, 10.0);
    disc.push_back(c.discrepancy_l2);
  }
  for (std::size_t i = 0; i + 1 < disc.size(); ++i) {
    EXPECT_GT(disc[i] / disc[i + 1], 3.5);
    EXPECT_LT(disc[i] / disc[i + 1], 4.5);
  }
}
