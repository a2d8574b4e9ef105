#pragma once

// Periodic grid, real fields on it, Fourier multipliers and the norms used
// throughout the library.
//
// Conventions. Nodes are x_j = -L/2 + j L/N. Spectra are the r2c half
// spectra (N/2 + 1 coefficients) in FFTW ordering, unnormalized forward,
// normalized inverse. Every Fourier multiplier zeroes the Nyquist
// coefficient, so multiplier identities are exact on fields with no
// Nyquist content. Integrals are periodic trapezoid sums dx * sum_j.

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace bolab {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Uniform periodic grid on [-L/2, L/2) with cached FFTW plans.
class Grid {
 public:
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return spacing_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  std::span<const double> nodes() const { return nodes_; }
  /// Full table 2*pi*m/L in standard FFT ordering (m = 0..N/2, -N/2+1..-1).
  std::span<const double> wavenumbers() const { return wavenumbers_; }
  /// Nonnegative wavenumber of half-spectrum index m (0 <= m <= N/2).
  double wavenumber(std::size_t m) const { return wavenumbers_[m]; }

  void forward(std::span<const double> in, std::span<Complex> out) const;
  Spectrum forward(std::span<const double> in) const;
  void inverse(std::span<const Complex> in, std::span<double> out) const;
  std::vector<double> inverse(std::span<const Complex> in) const;

  /// Periodic index of the node nearest to x.
  std::size_t nearest_index(double x) const;

 private:
  friend GridPtr make_grid(std::size_t n_points, double domain_length);
  Grid(std::size_t n, double length);

  std::size_t n_;
  double length_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> wavenumbers_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Builds a grid; n_points must be a power of two >= 8 and L > 0.
GridPtr make_grid(std::size_t n_points, double domain_length);

/// Real samples on a grid. Values are finite; operations return new fields.
class Field {
 public:
  Field(GridPtr grid, std::vector<double> values);

  static Field zeros(GridPtr grid);
  static Field constant(GridPtr grid, double value);
  template <class F>
  static Field sample(GridPtr grid, F&& fn) {
    std::vector<double> v(grid->size());
    auto x = grid->nodes();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = fn(x[j]);
    return Field(std::move(grid), std::move(v));
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double max_abs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator-(Field a);
Field operator*(Field a, double s);
Field operator*(double s, Field a);
/// Pointwise product.
Field operator*(const Field& a, const Field& b);

/// Throws UsageError unless both fields live on the same grid object or on
/// grids with identical (N, L).
void require_same_grid(const Field& a, const Field& b);

/// Trapezoid quadrature of f.
double integrate(const Field& f);
/// L2 inner product <f, g>.
double inner(const Field& f, const Field& g);
double l2_norm(const Field& f);

Spectrum spectrum_of(const Field& f);
Field field_from_spectrum(const GridPtr& grid, std::span<const Complex> spec);

/// Applies symbol(xi) on the half spectrum; the Nyquist coefficient is set
/// to zero. symbol(-xi) = conj(symbol(xi)) is assumed, so the output is real.
template <class Symbol>
Field apply_multiplier(const Field& f, Symbol&& symbol) {
  Spectrum s = spectrum_of(f);
  const Grid& g = f.grid();
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t m = 0; m < nyquist; ++m) s[m] *= symbol(g.wavenumber(m));
  s[nyquist] = 0.0;
  return field_from_spectrum(f.grid_ptr(), s);
}

/// Hilbert transform, symbol i sgn(xi).
Field hilbert(const Field& f);
/// Spectral derivative of integer order (symbol (i xi)^order).
Field derivative(const Field& f, int order = 1);
/// D^s with symbol |xi|^s; s >= -1/2. For s < 0 the zero mode is set to 0.
Field fractional_derivative(const Field& f, double s);
/// <D>^s with symbol (1 + xi^2)^(s/2).
Field bessel_potential(const Field& f, double s);
/// (1 + gamma d/dy) f.
Field dgamma(const Field& f, double gamma);
/// Inverse of (1 + gamma d/dy): symbol (1 + i gamma xi)^(-1).
Field dgamma_inverse(const Field& f, double gamma);
/// Spectral translation: returns y -> f(y + shift).
Field translate(const Field& f, double shift);

/// (sum <xi>^(2s) |f^(xi)|^2 * L/N^2)^(1/2); equals the L2 norm at s = 0.
double sobolev_norm(const Field& f, double s);
/// max_n ||f||_{L2[n, n+1)}; requires spacing <= 1/4.
double local_sup_norm(const Field& f);
/// ||<y>^power f||_{L2}.
double weighted_l2_norm(const Field& f, double power);

/// g_{gamma,y0}(y) = arctan(gamma (y - y0)) / gamma.
struct LocalizerSpec {
  double gamma = 0.05;
  double y_center = 0.0;
  void validate() const;
};

/// Returns (g, g') sampled on the grid; g' = <gamma (y - y0)>^(-2).
std::pair<Field, Field> localizer(const LocalizerSpec& spec, const GridPtr& grid);

/// Japanese bracket <x> = sqrt(1 + x^2).
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

}  // namespace bolab
