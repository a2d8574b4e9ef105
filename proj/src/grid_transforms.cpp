#include "bolab/grid_transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "bolab/errors.hpp"

namespace bolab {

namespace {

// fftw planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_finite(std::span<const double> v, const char* where) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericalError(std::string("non-finite value in ") + where);
    }
  }
}

}  // namespace

Grid::Grid(std::size_t n, double length)
    : n_(n), length_(length), spacing_(length / static_cast<double>(n)) {
  nodes_.resize(n_);
  wavenumbers_.resize(n_);
  const double base = 2.0 * std::numbers::pi / length_;
  for (std::size_t j = 0; j < n_; ++j) {
    nodes_[j] = -0.5 * length_ + static_cast<double>(j) * spacing_;
    const auto m = static_cast<long long>(j);
    const long long signed_m = j <= n_ / 2 ? m : m - static_cast<long long>(n_);
    wavenumbers_[j] = base * static_cast<double>(signed_m);
  }

  std::lock_guard lock(planner_mutex());
  auto* real_buf = fftw_alloc_real(n_);
  auto* cplx_buf = fftw_alloc_complex(n_ / 2 + 1);
  const int ni = static_cast<int>(n_);
  forward_plan_ = fftw_plan_dft_r2c_1d(ni, real_buf, cplx_buf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_c2r_1d(ni, cplx_buf, real_buf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(real_buf);
  fftw_free(cplx_buf);
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

GridPtr make_grid(std::size_t n_points, double domain_length) {
  if (n_points < 8 || !is_power_of_two(n_points)) {
    std::ostringstream os;
    os << "grid size must be a power of two >= 8, got " << n_points;
    throw ConfigurationError(os.str());
  }
  if (!(domain_length > 0.0) || !std::isfinite(domain_length)) {
    throw ConfigurationError("domain length must be positive");
  }
  return GridPtr(new Grid(n_points, domain_length));
}

void Grid::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != spectrum_size()) {
    throw UsageError("forward transform: size mismatch");
  }
  // r2c preserves its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

Spectrum Grid::forward(std::span<const double> in) const {
  Spectrum out(spectrum_size());
  forward(in, out);
  return out;
}

void Grid::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() != spectrum_size() || out.size() != n_) {
    throw UsageError("inverse transform: size mismatch");
  }
  // c2r destroys its input, so work on a copy.
  Spectrum scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

std::vector<double> Grid::inverse(std::span<const Complex> in) const {
  std::vector<double> out(n_);
  inverse(in, out);
  return out;
}

std::size_t Grid::nearest_index(double x) const {
  const double pos = (x + 0.5 * length_) / spacing_;
  const auto n = static_cast<long long>(n_);
  long long j = std::llround(pos) % n;
  if (j < 0) j += n;
  return static_cast<std::size_t>(j);
}

// ---------------------------------------------------------------- Field

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw UsageError("field without grid");
  if (values_.size() != grid_->size()) throw UsageError("field length does not match grid");
  require_finite(values_, "field");
}

Field Field::zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }

Field Field::constant(GridPtr grid, double value) {
  std::vector<double> v(grid->size(), value);
  return Field(std::move(grid), std::move(v));
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid_ptr() == b.grid_ptr()) return;
  const Grid& ga = a.grid();
  const Grid& gb = b.grid();
  if (ga.size() != gb.size() || ga.length() != gb.length()) {
    throw UsageError("fields live on different grids");
  }
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  require_finite(values_, "scaled field");
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator-(Field a) { return a *= -1.0; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

Field operator*(const Field& a, const Field& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] * b[j];
  return Field(a.grid_ptr(), std::move(v));
}

double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().spacing();
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
  return s * f.grid().spacing();
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

Spectrum spectrum_of(const Field& f) { return f.grid().forward(f.values()); }

Field field_from_spectrum(const GridPtr& grid, std::span<const Complex> spec) {
  return Field(grid, grid->inverse(spec));
}

// ---------------------------------------------------------- multipliers

Field hilbert(const Field& f) {
  const Complex i(0.0, 1.0);
  return apply_multiplier(f, [&](double xi) -> Complex { return xi > 0.0 ? i : Complex(0.0); });
}

Field derivative(const Field& f, int order) {
  if (order < 0) throw ConfigurationError("derivative order must be nonnegative");
  const Complex i(0.0, 1.0);
  return apply_multiplier(f, [&](double xi) { return std::pow(i * xi, order); });
}

Field fractional_derivative(const Field& f, double s) {
  if (s < -0.5) throw ConfigurationError("fractional derivative order below -1/2");
  return apply_multiplier(f, [&](double xi) -> Complex {
    if (xi == 0.0) return s == 0.0 ? 1.0 : 0.0;
    return std::pow(std::abs(xi), s);
  });
}

Field bessel_potential(const Field& f, double s) {
  return apply_multiplier(f, [&](double xi) -> Complex { return std::pow(1.0 + xi * xi, 0.5 * s); });
}

Field dgamma(const Field& f, double gamma) {
  if (!(gamma > 0.0)) throw ConfigurationError("gamma must be positive");
  return apply_multiplier(f, [&](double xi) { return Complex(1.0, gamma * xi); });
}

Field dgamma_inverse(const Field& f, double gamma) {
  if (!(gamma > 0.0)) throw ConfigurationError("gamma must be positive");
  return apply_multiplier(f, [&](double xi) { return 1.0 / Complex(1.0, gamma * xi); });
}

Field translate(const Field& f, double shift) {
  Spectrum s = spectrum_of(f);
  const Grid& g = f.grid();
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t m = 0; m < nyquist; ++m) s[m] *= std::polar(1.0, g.wavenumber(m) * shift);
  // A real field can only keep the even part of the Nyquist phase.
  s[nyquist] *= std::cos(g.wavenumber(nyquist) * shift);
  return field_from_spectrum(f.grid_ptr(), s);
}

// ---------------------------------------------------------------- norms

double sobolev_norm(const Field& f, double s) {
  const Spectrum spec = spectrum_of(f);
  const Grid& g = f.grid();
  const std::size_t nyquist = g.size() / 2;
  double sum = 0.0;
  for (std::size_t m = 0; m <= nyquist; ++m) {
    const double xi = g.wavenumber(m);
    const double w = (m == 0 || m == nyquist) ? 1.0 : 2.0;
    sum += w * std::pow(1.0 + xi * xi, s) * std::norm(spec[m]);
  }
  const double n = static_cast<double>(g.size());
  return std::sqrt(sum * g.length() / (n * n));
}

namespace {

// Integral of f^2 over [a, b] given in fractional index units, periodic.
// Composite Simpson when both ends sit on nodes with an even interval count,
// otherwise the exact integral of the piecewise-linear interpolant of f^2.
double cell_integral_of_square(std::span<const double> f, double a, double b, double dx) {
  const auto n = static_cast<long long>(f.size());
  auto sq = [&](long long j) {
    long long k = j % n;
    if (k < 0) k += n;
    const double v = f[static_cast<std::size_t>(k)];
    return v * v;
  };
  const double ra = std::round(a);
  const double rb = std::round(b);
  if (std::abs(a - ra) < 1e-9 && std::abs(b - rb) < 1e-9) {
    const auto ja = static_cast<long long>(ra);
    const auto jb = static_cast<long long>(rb);
    const long long m = jb - ja;
    if (m >= 2 && m % 2 == 0) {
      double s = sq(ja) + sq(jb);
      for (long long k = 1; k < m; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * sq(ja + k);
      return s * dx / 3.0;
    }
  }
  auto lerp_sq = [&](double p) {
    const double fl = std::floor(p);
    const double t = p - fl;
    const auto j = static_cast<long long>(fl);
    return (1.0 - t) * sq(j) + t * sq(j + 1);
  };
  double s = 0.0;
  double left = a;
  while (left < b - 1e-12) {
    const double right = std::min(b, std::floor(left + 1e-12) + 1.0);
    s += 0.5 * (lerp_sq(left) + lerp_sq(right)) * (right - left);
    left = right;
  }
  return s * dx;
}

}  // namespace

double local_sup_norm(const Field& f) {
  const Grid& g = f.grid();
  if (g.spacing() > 0.25) throw ConfigurationError("local_sup_norm needs grid spacing <= 1/4");
  const double half = 0.5 * g.length();
  const double dx = g.spacing();
  const auto first = static_cast<long long>(std::floor(-half));
  const auto last = static_cast<long long>(std::ceil(half));
  double best = 0.0;
  for (long long n = first; n < last; ++n) {
    const double a = std::max(static_cast<double>(n), -half);
    const double b = std::min(static_cast<double>(n + 1), half);
    if (b <= a) continue;
    const double value = cell_integral_of_square(f.values(), (a + half) / dx, (b + half) / dx, dx);
    best = std::max(best, value);
  }
  return std::sqrt(best);
}

double weighted_l2_norm(const Field& f, double power) {
  auto x = f.grid().nodes();
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double w = std::pow(bracket(x[j]), power) * f[j];
    s += w * w;
  }
  return std::sqrt(s * f.grid().spacing());
}

void LocalizerSpec::validate() const {
  if (!(gamma > 0.0) || gamma > 1.0) throw ConfigurationError("localizer gamma must lie in (0, 1]");
  if (!std::isfinite(y_center)) throw ConfigurationError("localizer center must be finite");
}

std::pair<Field, Field> localizer(const LocalizerSpec& spec, const GridPtr& grid) {
  spec.validate();
  const double gm = spec.gamma;
  const double y0 = spec.y_center;
  Field g = Field::sample(grid, [&](double y) { return std::atan(gm * (y - y0)) / gm; });
  Field gp = Field::sample(grid, [&](double y) {
    const double z = gm * (y - y0);
    return 1.0 / (1.0 + z * z);
  });
  return {std::move(g), std::move(gp)};
}

}  // namespace bolab
