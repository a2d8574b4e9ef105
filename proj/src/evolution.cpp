#include "bolab/evolution.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bolab/errors.hpp"
#include "bolab/soliton_profiles.hpp"

namespace bolab {

namespace {

// Derivatives 0..3 of beta exp(-1/(1 - (x/w)^2)).
double bump_derivative(const BumpShape& b, double x, int k) {
  const double r = x / b.width;
  if (std::abs(r) >= 1.0) return 0.0;
  const double w2 = b.width * b.width;
  const double p = 1.0 - r * r;
  const double base = b.amplitude * std::exp(-1.0 / p);
  if (k == 0) return base;
  const double phi = -2.0 * x / (w2 * p * p);
  if (k == 1) return base * phi;
  const double phi1 = -2.0 / (w2 * p * p) - 8.0 * x * x / (w2 * w2 * p * p * p);
  if (k == 2) return base * (phi * phi + phi1);
  const double phi2 = -24.0 * x / (w2 * w2 * p * p * p) - 48.0 * x * x * x / (w2 * w2 * w2 * p * p * p * p);
  return base * (phi * phi * phi + 3.0 * phi * phi1 + phi2);
}

double hermite(double y0, double y1, double d0, double d1, double t, double dx) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * dx * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * dx * d1;
}

double table_derivative(const TableShape& tab, double x, int k) {
  const std::size_t n = tab.w.size();
  const double s = (x - tab.x0) / tab.dx;
  if (s < 0.0 || s > static_cast<double>(n - 1)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(s), n - 2);
  const double t = s - static_cast<double>(i);
  const std::array<const std::vector<double>*, 4> cols{&tab.w, &tab.w1, &tab.w2, &tab.w3};
  if (k == 3) return (1.0 - t) * tab.w3[i] + t * tab.w3[i + 1];
  const auto& y = *cols[k];
  const auto& d = *cols[k + 1];
  return hermite(y[i], y[i + 1], d[i], d[i + 1], t, tab.dx);
}

using EtdCoefficients = detail::EtdTables;

// Kassam-Trefethen contour evaluation of the ETDRK4 phi-type coefficients
// for a diagonal linear part.
EtdCoefficients etd_coefficients(const std::vector<Complex>& lin, double dt) {
  constexpr int kContour = 32;
  EtdCoefficients c;
  const std::size_t n = lin.size();
  for (auto* v : {&c.e, &c.e2, &c.q, &c.f1, &c.f2, &c.f3}) v->assign(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const Complex lh = lin[m] * dt;
    c.e[m] = std::exp(lh);
    c.e2[m] = std::exp(0.5 * lh);
    Complex q = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
    for (int k = 0; k < kContour; ++k) {
      const double theta = 2.0 * std::numbers::pi * (k + 0.5) / kContour;
      const Complex r = lh + std::polar(1.0, theta);
      const Complex er = std::exp(r);
      const Complex r3 = r * r * r;
      q += (std::exp(0.5 * r) - 1.0) / r;
      f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
      f2 += (2.0 + r + er * (r - 2.0)) / r3;
      f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    c.q[m] = dt * q / static_cast<double>(kContour);
    c.f1[m] = dt * f1 / static_cast<double>(kContour);
    c.f2[m] = dt * f2 / static_cast<double>(kContour);
    c.f3[m] = dt * f3 / static_cast<double>(kContour);
  }
  return c;
}

// One ETDRK4 step in Fourier space.
template <class N>
Spectrum etdrk4(const Spectrum& u, const EtdCoefficients& c, N&& nonlinear) {
  const std::size_t n = u.size();
  const Spectrum nu = nonlinear(u);
  Spectrum a(n), b(n), cc(n), out(n);
  for (std::size_t m = 0; m < n; ++m) a[m] = c.e2[m] * u[m] + c.q[m] * nu[m];
  const Spectrum na = nonlinear(a);
  for (std::size_t m = 0; m < n; ++m) b[m] = c.e2[m] * u[m] + c.q[m] * na[m];
  const Spectrum nb = nonlinear(b);
  for (std::size_t m = 0; m < n; ++m) cc[m] = c.e2[m] * a[m] + c.q[m] * (2.0 * nb[m] - nu[m]);
  const Spectrum nc = nonlinear(cc);
  for (std::size_t m = 0; m < n; ++m) {
    out[m] = c.e[m] * u[m] + nu[m] * c.f1[m] + 2.0 * (na[m] + nb[m]) * c.f2[m] + nc[m] * c.f3[m];
  }
  out[n - 1] = 0.0;  // Nyquist
  return out;
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("time step must be positive");
}

void guard_state(const EvolutionState& s, bool seam_guard) {
  const Field& u = s.field;
  if (s.initial_hhalf > 0.0 && sobolev_norm(u, 0.5) > kBlowupFactor * s.initial_hhalf) {
    std::ostringstream os;
    os << "blow-up guard: H^1/2 norm exceeded " << kBlowupFactor << "x its initial value at t = " << s.time;
    throw EvolutionError(os.str(), s.time);
  }
  if (seam_guard && u.max_abs() > 1e-8) {
    std::size_t peak = 0;
    for (std::size_t j = 1; j < u.size(); ++j) {
      if (u[j] > u[peak]) peak = j;
    }
    const double x = u.grid().nodes()[peak];
    if (std::abs(x) > 0.25 * u.grid().length()) {
      std::ostringstream os;
      os << "seam guard: soliton peak at x = " << x << " is within L/4 of the periodic seam at t = " << s.time;
      throw EvolutionError(os.str(), s.time);
    }
  }
}

Field to_field(const GridPtr& grid, const Spectrum& s, double time) {
  try {
    return field_from_spectrum(grid, s);
  } catch (const NumericalError& e) {
    throw EvolutionError(std::string("evolution produced non-finite values: ") + e.what(), time);
  }
}

std::vector<Complex> half_ik(const Grid& g) {
  std::vector<Complex> ik(g.spectrum_size());
  for (std::size_t m = 0; m + 1 < ik.size(); ++m) ik[m] = Complex(0.0, g.wavenumber(m));
  return ik;
}

}  // namespace

void PotentialSpec::validate(bool allow_test_hooks) const {
  if (!(h > 0.0) || h > 1.0) throw ConfigurationError("potential needs 0 < h <= 1");
  if (const auto* b = std::get_if<BumpShape>(&shape)) {
    if (!std::isfinite(b->amplitude)) throw ConfigurationError("bump amplitude must be finite");
    if (!(b->width > 0.0)) throw ConfigurationError("bump width must be positive");
  } else if (const auto* t = std::get_if<TableShape>(&shape)) {
    const std::size_t n = t->w.size();
    if (n < 2 || t->w1.size() != n || t->w2.size() != n || t->w3.size() != n) {
      throw ConfigurationError("potential table needs >= 2 rows of W, W', W'', W'''");
    }
    if (!(t->dx > 0.0)) throw ConfigurationError("potential table spacing must be positive");
    for (const auto* col : {&t->w, &t->w1, &t->w2, &t->w3}) {
      if (std::abs(col->front()) > 1e-12 || std::abs(col->back()) > 1e-12) {
        throw ConfigurationError("potential table must vanish at both ends (compact support)");
      }
    }
  } else if (std::holds_alternative<QuadraticShape>(shape) && !allow_test_hooks) {
    throw ConfigurationError("quadratic potential is a testing hook without compact support");
  }
}

double PotentialSpec::w(double x, int k) const {
  if (k < 0 || k > 3) throw UsageError("potential derivatives available up to order 3");
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BumpShape>) {
          return bump_derivative(s, x, k);
        } else if constexpr (std::is_same_v<S, ZeroShape>) {
          return 0.0;
        } else if constexpr (std::is_same_v<S, TableShape>) {
          return table_derivative(s, x, k);
        } else {
          return k == 0 ? x * x : k == 1 ? 2.0 * x : k == 2 ? 2.0 : 0.0;
        }
      },
      shape);
}

double PotentialSpec::sup_w(int k) const {
  double lo = -1.0, hi = 1.0;
  if (const auto* b = std::get_if<BumpShape>(&shape)) {
    lo = -b->width;
    hi = b->width;
  } else if (const auto* t = std::get_if<TableShape>(&shape)) {
    lo = t->x0;
    hi = t->x0 + t->dx * static_cast<double>(t->w.size() - 1);
  } else if (is_zero()) {
    return 0.0;
  }
  constexpr int kSamples = 20001;
  double best = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = lo + (hi - lo) * i / (kSamples - 1);
    best = std::max(best, std::abs(w(x, k)));
  }
  return best;
}

EvolutionState EvolutionState::start(Field u0, PotentialPtr pot, double t0) {
  if (!pot) throw UsageError("evolution state needs a potential");
  const double norm = sobolev_norm(u0, 0.5);
  return EvolutionState{t0, std::move(u0), std::move(pot), norm};
}

InvariantReport invariants(const EvolutionState& state) {
  const Field& u = state.field;
  const Field ux = derivative(u);
  const Field hux = hilbert(ux);
  const auto x = u.grid().nodes();
  double s2 = 0, s3 = 0, s4 = 0, uhux = 0, ux2 = 0, u2hux = 0, vu2 = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double uj = u[j];
    const double u2 = uj * uj;
    s2 += u2;
    s3 += u2 * uj;
    s4 += u2 * u2;
    uhux += uj * hux[j];
    ux2 += ux[j] * ux[j];
    u2hux += u2 * hux[j];
    if (state.potential) vu2 += state.potential->v(x[j]) * u2;
  }
  const double dx = u.grid().spacing();
  InvariantReport r;
  r.mass = 0.5 * s2 * dx;
  r.energy0 = (-0.5 * uhux - s3 / 6.0) * dx;
  r.energy1 = (0.5 * ux2 + 0.375 * u2hux - s4 / 16.0) * dx;
  r.energy_perturbed = r.energy0 + 0.5 * vu2 * dx;
  return r;
}

PboStepper::PboStepper(GridPtr grid, PotentialPtr pot, double dt, bool seam_guard)
    : grid_(std::move(grid)), pot_(std::move(pot)), dt_(dt), seam_guard_(seam_guard) {
  check_dt(dt);
  if (!pot_) throw UsageError("pBO stepper needs a potential");
  pot_->validate();
  const Grid& g = *grid_;
  const auto x = g.nodes();
  v_.resize(g.size());
  for (std::size_t j = 0; j < v_.size(); ++j) v_[j] = pot_->v(x[j]);
  ik_ = half_ik(g);
  mask_.assign(g.spectrum_size(), 0.0);
  const std::size_t cutoff = g.size() / 3;
  for (std::size_t m = 0; m <= cutoff && m < mask_.size(); ++m) mask_[m] = 1.0;
  // d_x(-H d_x): symbol i xi |xi|.
  std::vector<Complex> lin(g.spectrum_size());
  for (std::size_t m = 0; m < lin.size(); ++m) {
    const double xi = g.wavenumber(m);
    lin[m] = Complex(0.0, xi * std::abs(xi));
  }
  etd_ = etd_coefficients(lin, dt);
}

Spectrum PboStepper::nonlinear(const Spectrum& u_hat) const {
  const Grid& g = *grid_;
  std::vector<double> u = g.inverse(u_hat);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = v_[j] * u[j] - 0.5 * u[j] * u[j];
  Spectrum s = g.forward(u);
  for (std::size_t m = 0; m < s.size(); ++m) s[m] *= ik_[m] * mask_[m];
  return s;
}

void PboStepper::step(EvolutionState& state) const {
  if (state.field.grid_ptr() != grid_ && (state.field.size() != grid_->size() ||
                                          state.field.grid().length() != grid_->length())) {
    throw UsageError("state lives on a different grid than the stepper");
  }
  const Spectrum u_hat = grid_->forward(state.field.values());
  const Spectrum next = etdrk4(u_hat, etd_,
                               [this](const Spectrum& s) { return nonlinear(s); });
  state.time += dt_;
  state.field = to_field(grid_, next, state.time);
  guard_state(state, seam_guard_);
}

LinearizedStepper::LinearizedStepper(GridPtr grid, double dt)
    : grid_(std::move(grid)),
      dt_(dt),
      background_(periodic_soliton_field(grid_, {0.0, 1.0})),
      kernel_(derivative(background_)) {
  check_dt(dt);
  const Grid& g = *grid_;
  kernel_hat_ = g.forward(kernel_.values());
  // L Q'' with L = 1 - H d_y - Q built on the periodic background.
  const Field qpp = derivative(kernel_);
  const Field lqpp = qpp - hilbert(derivative(qpp)) - background_ * qpp;
  const double norm_sq = inner(kernel_, kernel_);
  projector_dir_.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) projector_dir_[j] = lqpp[j] / norm_sq;
  ik_ = half_ik(g);
  // d_y (1 - H d_y): symbol i xi (1 + |xi|).
  std::vector<Complex> lin(g.spectrum_size());
  for (std::size_t m = 0; m < lin.size(); ++m) {
    const double xi = g.wavenumber(m);
    lin[m] = Complex(0.0, xi * (1.0 + std::abs(xi)));
  }
  etd_ = etd_coefficients(lin, dt);
}

Spectrum LinearizedStepper::nonlinear(const Spectrum& v_hat, const Spectrum& df_hat) const {
  const Grid& g = *grid_;
  std::vector<double> v = g.inverse(v_hat);
  // P v = <v, L Q''> / ||Q'||^2 Q'
  double proj = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) proj += v[j] * projector_dir_[j];
  proj *= g.spacing();
  for (std::size_t j = 0; j < v.size(); ++j) v[j] *= background_[j];
  Spectrum s = g.forward(v);
  for (std::size_t m = 0; m < s.size(); ++m) s[m] = -ik_[m] * s[m] + proj * kernel_hat_[m] + df_hat[m];
  return s;
}

void LinearizedStepper::step(EvolutionState& state, const Field& forcing) const {
  require_same_grid(state.field, forcing);
  const Spectrum v_hat = grid_->forward(state.field.values());
  Spectrum df = grid_->forward(forcing.values());
  for (std::size_t m = 0; m < df.size(); ++m) df[m] *= ik_[m];
  const Spectrum next = etdrk4(v_hat, etd_,
                               [&](const Spectrum& s) { return nonlinear(s, df); });
  state.time += dt_;
  state.field = to_field(grid_, next, state.time);
  guard_state(state, false);
}

EvolutionState step_pbo(const EvolutionState& state, double dt) {
  const PboStepper stepper(state.field.grid_ptr(), state.potential, dt);
  EvolutionState next = state;
  stepper.step(next);
  return next;
}

EvolutionState step_linearized(const EvolutionState& state, double dt, const Field& forcing) {
  const LinearizedStepper stepper(state.field.grid_ptr(), dt);
  EvolutionState next = state;
  stepper.step(next, forcing);
  return next;
}

Field reflect(const Field& u) {
  const std::size_t n = u.size();
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = u[(n - j) % n];
  return Field(u.grid_ptr(), std::move(r));
}

namespace {

constexpr char kMagic[5] = {'B', 'O', 'S', 'L', '1'};

template <class T>
void put_le(std::ostream& os, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <class T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw ConfigurationError("checkpoint truncated");
    bits |= static_cast<U>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const EvolutionState& state) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigurationError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(os, kCheckpointVersion);
  put_le<std::uint64_t>(os, state.field.size());
  put_le<double>(os, state.field.grid().length());
  put_le<double>(os, state.time);
  for (double v : state.field.values()) put_le<double>(os, v);
  if (!os) throw ConfigurationError("failed writing checkpoint: " + path.string());
}

std::pair<double, Field> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigurationError("cannot open checkpoint: " + path.string());
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ConfigurationError("not a checkpoint file (bad magic): " + path.string());
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw ConfigurationError("unsupported checkpoint version");
  const auto n = get_le<std::uint64_t>(is);
  const auto len = get_le<double>(is);
  const auto t = get_le<double>(is);
  GridPtr grid = make_grid(static_cast<std::size_t>(n), len);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = get_le<double>(is);
  return {t, Field(grid, std::move(v))};
}

}  // namespace bolab
