#include "bolab/soliton_profiles.hpp"

#include <cmath>

#include "bolab/errors.hpp"

namespace bolab {

using std::numbers::pi;

void SolitonParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigurationError("soliton scale c must be positive");
  if (!std::isfinite(a)) throw ConfigurationError("soliton translation must be finite");
}

double periodic_displacement(double x, double a, double length) {
  double d = x - a;
  d -= length * std::floor(d / length + 0.5);
  return d;
}

namespace {

template <class F>
Field sample_scaled(const GridPtr& grid, const SolitonParams& p, F&& fn) {
  p.validate();
  const double len = grid->length();
  return Field::sample(grid, [&](double x) {
    const double d = periodic_displacement(x, p.a, len);
    return fn(d, p.c * d);
  });
}

}  // namespace

Field soliton_field(const GridPtr& grid, const SolitonParams& p) {
  return sample_scaled(grid, p, [&](double, double z) { return p.c * profile::Q(z); });
}

Field soliton_derivative_field(const GridPtr& grid, const SolitonParams& p) {
  return sample_scaled(grid, p, [&](double, double z) { return p.c * p.c * profile::dQ(z); });
}

Field soliton_second_derivative_field(const GridPtr& grid, const SolitonParams& p) {
  return sample_scaled(grid, p, [&](double, double z) { return p.c * p.c * p.c * profile::d2Q(z); });
}

Field soliton_scale_derivative_field(const GridPtr& grid, const SolitonParams& p) {
  return sample_scaled(grid, p, [&](double, double z) { return profile::dzQ(z); });
}

Field soliton_moment_field(const GridPtr& grid, const SolitonParams& p) {
  return sample_scaled(grid, p, [&](double, double z) { return z * profile::Q(z); });
}

Field periodic_soliton_field(const GridPtr& grid, const SolitonParams& p) {
  p.validate();
  const double k = 2.0 * pi / grid->length();
  if (k >= p.c) throw ConfigurationError("periodic soliton needs L > 2 pi / c");
  const double g = std::atanh(k / p.c);
  const double sh = std::sinh(g);
  const double sh2 = std::pow(std::sinh(0.5 * g), 2);
  // cosh(g) - cos(th) = 2 sinh^2(g/2) + 2 sin^2(th/2)
  return Field::sample(grid, [&](double x) {
    const double s = std::sin(0.5 * k * (x - p.a));
    return k * sh / (sh2 + s * s);
  });
}

double profile_defect(const Field& u, double c_test) {
  const Field hux = hilbert(derivative(u));
  std::vector<double> r(u.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = c_test * u[j] - hux[j] - 0.5 * u[j] * u[j];
  return l2_norm(Field(u.grid_ptr(), std::move(r)));
}

double soliton_residual(const SolitonParams& p, const GridPtr& grid) {
  return profile_defect(soliton_field(grid, p), p.c);
}

std::pair<Field, double> eigenfunction_field(const GridPtr& grid, EigenSign sign) {
  const double s5 = std::sqrt(5.0);
  const double coeff = sign == EigenSign::plus ? (-s5 - 1.0) / 2.0 : (s5 - 1.0) / 2.0;
  const double lambda = sign == EigenSign::plus ? (s5 - 1.0) / 2.0 : (-s5 - 1.0) / 2.0;
  const double len = grid->length();
  Field e = Field::sample(grid, [&](double x) {
    const double y = periodic_displacement(x, 0.0, len);
    return profile::Q(y) + coeff * profile::dzQ(y);
  });
  return {std::move(e), lambda};
}

ClosedFormTable closed_form_table() {
  const double s5 = std::sqrt(5.0);
  ClosedFormTable t{};
  t.normQ_sq = 8.0 * pi;
  t.norm_yQprime_sq = 4.0 * pi;
  t.inner_yQprime_Q = 4.0 * pi;
  t.norm_eminus_combo_sq = 2.0 * (5.0 + s5) * pi;
  t.normQprime_sq = 4.0 * pi;
  t.int_z2_Q_Qpp = 4.0 * pi;
  t.int_Q_cubed = 24.0 * pi;
  t.cos2_beta = 0.5 + s5 / 10.0;
  t.lambda_plus = (s5 - 1.0) / 2.0;
  t.lambda_minus = -(s5 + 1.0) / 2.0;
  return t;
}

ClosedFormTable quadrature_table(const GridPtr& grid) {
  const SolitonParams unit{0.0, 1.0};
  const Field q = soliton_field(grid, unit);
  const Field qp = soliton_derivative_field(grid, unit);
  const Field qpp = soliton_second_derivative_field(grid, unit);
  const Field yq_prime = soliton_scale_derivative_field(grid, unit);
  const Field e_minus = eigenfunction_field(grid, EigenSign::minus).first;
  const double len = grid->length();
  const Field y2 = Field::sample(grid, [&](double x) {
    const double y = periodic_displacement(x, 0.0, len);
    return y * y;
  });
  ClosedFormTable t = closed_form_table();
  t.normQ_sq = inner(q, q);
  t.norm_yQprime_sq = inner(yq_prime, yq_prime);
  t.inner_yQprime_Q = inner(yq_prime, q);
  t.norm_eminus_combo_sq = inner(e_minus, e_minus);
  t.normQprime_sq = inner(qp, qp);
  t.int_z2_Q_Qpp = inner(y2 * q, qpp);
  t.int_Q_cubed = inner(q * q, q);
  const double cb = inner(e_minus, yq_prime);
  t.cos2_beta = cb * cb / (t.norm_eminus_combo_sq * t.norm_yQprime_sq);
  return t;
}

}  // namespace bolab
