#pragma once

// Time integration of
//   pBO            u_t = d_x(-H u_x + V u - u^2/2),   V(x) = W(h x)
//   linearized     v_t = P v + d_y L v + d_y f
// by ETDRK4: the dispersive multiplier is integrated exactly in Fourier
// space, the remaining terms by the fourth-order exponential Runge-Kutta
// stages. Quadratic products are dealiased by the 2/3 rule.

#include <filesystem>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "bolab/grid_transforms.hpp"

namespace bolab {

namespace detail {
/// Per-mode ETDRK4 coefficients for a diagonal linear part.
struct EtdTables {
  Spectrum e, e2, q, f1, f2, f3;
};
}  // namespace detail

/// beta exp(-1 / (1 - (x/w)^2)) on |x| < w.
struct BumpShape {
  double amplitude = 0.2;
  double width = 1.0;
};
struct ZeroShape {};
/// Uniform samples of W, W', W'', W''' on [x0, x0 + (n-1) dx]; W vanishes
/// outside. Each derivative is interpolated by cubic Hermite from itself and
/// the next derivative (W''' linearly).
struct TableShape {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> w, w1, w2, w3;
};
/// W(x) = x^2. Testing hook for Taylor-remainder checks; not compactly
/// supported and rejected by validate() unless explicitly allowed.
struct QuadraticShape {};

using PotentialShape = std::variant<BumpShape, ZeroShape, TableShape, QuadraticShape>;

struct PotentialSpec {
  double h = 0.05;
  PotentialShape shape = BumpShape{};

  static PotentialSpec bump(double h, double amplitude = 0.2, double width = 1.0) {
    return {h, BumpShape{amplitude, width}};
  }
  static PotentialSpec zero(double h = 0.05) { return {h, ZeroShape{}}; }

  void validate(bool allow_test_hooks = false) const;
  bool is_zero() const { return std::holds_alternative<ZeroShape>(shape); }

  /// k-th derivative (0 <= k <= 3) of W at slow position x.
  double w(double x, int k = 0) const;
  /// V(x) = W(h x).
  double v(double x) const { return w(h * x, 0); }
  /// sup |W^(k)| sampled on the support.
  double sup_w(int k) const;
};

using PotentialPtr = std::shared_ptr<const PotentialSpec>;

struct EvolutionState {
  double time = 0.0;
  Field field;
  PotentialPtr potential;
  /// H^{1/2} norm of the data the run started from (blow-up reference).
  double initial_hhalf = 0.0;

  static EvolutionState start(Field u0, PotentialPtr pot, double t0 = 0.0);
};

struct InvariantReport {
  double mass = 0.0;              // M0 = 1/2 int u^2
  double energy0 = 0.0;           // E0 = -1/2 int u H u_x - 1/6 int u^3
  double energy1 = 0.0;           // E1 = 1/2 int u_x^2 + 3/8 int u^2 H u_x - 1/16 int u^4
  double energy_perturbed = 0.0;  // E = E0 + 1/2 int V u^2
};

InvariantReport invariants(const EvolutionState& state);

/// Blow-up guard: H^{1/2} norm above this multiple of the initial norm.
inline constexpr double kBlowupFactor = 10.0;

/// ETDRK4 stepper for pBO with fixed dt. Coefficients are precomputed once.
class PboStepper {
 public:
  PboStepper(GridPtr grid, PotentialPtr pot, double dt, bool seam_guard = true);
  void step(EvolutionState& state) const;
  double dt() const { return dt_; }

 private:
  Spectrum nonlinear(const Spectrum& u_hat) const;

  GridPtr grid_;
  PotentialPtr pot_;
  double dt_;
  bool seam_guard_;
  std::vector<double> v_;      // V at the nodes
  std::vector<double> mask_;   // 2/3 rule
  detail::EtdTables etd_;
  std::vector<Complex> ik_;    // i xi
};

/// Stepper for the linearized flow with a forcing held constant over each
/// step. The background is the exact periodic soliton of speed 1 on the
/// grid, so that L Q' = 0 and the orthogonality to Q, Q' hold to rounding
/// on the torus; P uses the discrete ||Q'||^2 for the same reason.
class LinearizedStepper {
 public:
  LinearizedStepper(GridPtr grid, double dt);
  void step(EvolutionState& state, const Field& forcing) const;
  double dt() const { return dt_; }
  const Field& background() const { return background_; }
  /// Spectral derivative of the background; the kernel of L.
  const Field& kernel() const { return kernel_; }

 private:
  Spectrum nonlinear(const Spectrum& v_hat, const Spectrum& df_hat) const;

  GridPtr grid_;
  double dt_;
  Field background_;
  Field kernel_;
  Spectrum kernel_hat_;
  std::vector<double> projector_dir_;  // L Q'' / ||Q'||^2
  detail::EtdTables etd_;
  std::vector<Complex> ik_;
};

/// One pBO step (builds a stepper; loops should hold a PboStepper).
EvolutionState step_pbo(const EvolutionState& state, double dt);
/// One linearized step.
EvolutionState step_linearized(const EvolutionState& state, double dt, const Field& forcing);

/// u(x) -> u(-x) on the grid (x_j -> x_{N-j}). Free BO is reversible under
/// (x, t) -> (-x, -t), so reflect / evolve / reflect runs time backwards.
Field reflect(const Field& u);

/// Checkpoint format: "BOSL1", u32 version, u64 N, f64 L, f64 t, N f64
/// samples; all little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void write_checkpoint(const std::filesystem::path& path, const EvolutionState& state);
/// Returns the stored time and field (on a freshly built grid).
std::pair<double, Field> read_checkpoint(const std::filesystem::path& path);

}  // namespace bolab
