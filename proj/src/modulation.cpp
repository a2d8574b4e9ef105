#include "bolab/modulation.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bolab/errors.hpp"

namespace bolab {

const char* to_string(Regime r) {
  return r == Regime::nonsymplectic ? "nonsymplectic" : "symplectic";
}

namespace {

using std::numbers::pi;

// Inner products of u against closed-form functions of z = c (x - a),
// evaluated at the wrapped displacement.
struct Profiles {
  std::vector<double> q, dq_da, dq_dc, second, dsecond_da, dsecond_dc;
};

// Periodic traveling wave phi = 2k sinh(g) / (cosh(g) - cos(k d)), k = 2 pi / L,
// g = atanh(k / c).
Profiles sample_periodic_profiles(const Grid& g, const SolitonParams& p, Regime regime) {
  const std::size_t n = g.size();
  const auto x = g.nodes();
  Profiles s;
  for (auto* v : {&s.q, &s.dq_da, &s.dq_dc, &s.second, &s.dsecond_da, &s.dsecond_dc}) v->resize(n);
  const double k = 2.0 * pi / g.length();
  if (!(p.c > k)) throw DecompositionError("periodic soliton family needs c > 2 pi / L");
  const double gam = std::atanh(k / p.c);
  const double sh = std::sinh(gam);
  const double ch = std::cosh(gam);
  const double dgam_dc = -k / (p.c * p.c - k * k);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = periodic_displacement(x[j], p.a, g.length());
    const double th = k * d;
    const double sn = std::sin(th);
    const double cs = std::cos(th);
    // cosh(g) - cos(th) without cancellation near th = 0
    const double den = 2.0 * (std::pow(std::sinh(0.5 * gam), 2) + std::pow(std::sin(0.5 * th), 2));
    const double phi = 2.0 * k * sh / den;
    const double phi_x = -2.0 * k * k * sh * sn / (den * den);
    const double phi_xx = -2.0 * k * k * k * sh * (cs * den - 2.0 * sn * sn) / (den * den * den);
    const double phi_g = 2.0 * k * (ch * den - sh * sh) / (den * den);
    const double phi_xg = -2.0 * k * k * sn * (ch * den - 2.0 * sh * sh) / (den * den * den);
    s.q[j] = phi;
    s.dq_da[j] = -phi_x;
    s.dq_dc[j] = phi_g * dgam_dc;
    if (regime == Regime::nonsymplectic) {
      s.second[j] = phi_x;
      s.dsecond_da[j] = -phi_xx;
      s.dsecond_dc[j] = phi_xg * dgam_dc;
    } else {
      s.second[j] = d * phi;
      s.dsecond_da[j] = -phi - d * phi_x;
      s.dsecond_dc[j] = d * phi_g * dgam_dc;
    }
  }
  return s;
}

Profiles sample_profiles(const Grid& g, const SolitonParams& p, Regime regime, SolitonFamily family) {
  if (family == SolitonFamily::periodic) return sample_periodic_profiles(g, p, regime);
  const std::size_t n = g.size();
  const auto x = g.nodes();
  Profiles s;
  for (auto* v : {&s.q, &s.dq_da, &s.dq_dc, &s.second, &s.dsecond_da, &s.dsecond_dc}) v->resize(n);
  const double c = p.c;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = periodic_displacement(x[j], p.a, g.length());
    const double z = c * d;
    s.q[j] = c * profile::Q(z);
    s.dq_da[j] = -c * c * profile::dQ(z);
    s.dq_dc[j] = profile::dzQ(z);
    if (regime == Regime::nonsymplectic) {
      s.second[j] = c * c * profile::dQ(z);
      s.dsecond_da[j] = -c * c * c * profile::d2Q(z);
      s.dsecond_dc[j] = c * profile::d2zQ(z);
    } else {
      s.second[j] = z * profile::Q(z);
      s.dsecond_da[j] = -c * profile::dzQ(z);
      s.dsecond_dc[j] = d * profile::dzQ(z);
    }
  }
  return s;
}

double dot(std::span<const double> a, const std::vector<double>& b, double dx) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) s += a[j] * b[j];
  return s * dx;
}

// F = (<u - Q, Q>, <u - Q, second>) and its Jacobian in (a, c).
struct System {
  std::array<double, 2> f;
  std::array<double, 4> jac;  // row-major
};

System evaluate(const Field& u, const SolitonParams& p, Regime regime, SolitonFamily family) {
  const Grid& g = u.grid();
  const Profiles s = sample_profiles(g, p, regime, family);
  const std::size_t n = g.size();
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = u[j] - s.q[j];
  const double dx = g.spacing();
  const std::span<const double> rs(r);
  System sys;
  sys.f[0] = dot(rs, s.q, dx);
  sys.f[1] = dot(rs, s.second, dx);
  // d/dp <r, g> = -<dQ/dp, g> + <r, dg/dp>
  sys.jac[0] = -dot(std::span<const double>(s.dq_da), s.q, dx) + dot(rs, s.dq_da, dx);
  sys.jac[1] = -dot(std::span<const double>(s.dq_dc), s.q, dx) + dot(rs, s.dq_dc, dx);
  sys.jac[2] = -dot(std::span<const double>(s.dq_da), s.second, dx) + dot(rs, s.dsecond_da, dx);
  sys.jac[3] = -dot(std::span<const double>(s.dq_dc), s.second, dx) + dot(rs, s.dsecond_dc, dx);
  return sys;
}

Field recentered(const Field& u, const SolitonParams& p, SolitonFamily family) {
  return translate(unshifted_remainder(u, p, family), p.a);
}

}  // namespace

const char* to_string(SolitonFamily f) { return f == SolitonFamily::line ? "line" : "periodic"; }

Field unshifted_remainder(const Field& u, const SolitonParams& p, SolitonFamily family) {
  return u - (family == SolitonFamily::line ? soliton_field(u.grid_ptr(), p) : periodic_soliton_field(u.grid_ptr(), p));
}

Decomposition decompose(const Field& u, Regime regime, const SolitonParams& guess, const NewtonOptions& opts) {
  guess.validate();
  const double tube = sobolev_norm(unshifted_remainder(u, guess, opts.family), 0.5);
  if (tube > opts.tube_radius * guess.c) {
    std::ostringstream os;
    os << "data outside the soliton tube: ||u - Q_guess||_H1/2 = " << tube << " > " << opts.tube_radius * guess.c;
    throw DecompositionError(os.str());
  }
  const double unorm = l2_norm(u);
  SolitonParams p = guess;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    const System sys = evaluate(u, p, regime, opts.family);
    const double scale = std::sqrt(8.0 * pi * p.c) * std::max(unorm, 1e-300);
    const double res = std::max(std::abs(sys.f[0]), std::abs(sys.f[1])) / scale;
    if (res <= opts.tolerance) {
      return Decomposition{p, recentered(u, p, opts.family), regime, it, res};
    }
    if (it == opts.max_iterations) break;
    const double det = sys.jac[0] * sys.jac[3] - sys.jac[1] * sys.jac[2];
    if (!std::isfinite(det) || det == 0.0) throw DecompositionError("singular Newton Jacobian");
    const double da = (sys.jac[3] * sys.f[0] - sys.jac[1] * sys.f[1]) / det;
    const double dc = (-sys.jac[2] * sys.f[0] + sys.jac[0] * sys.f[1]) / det;
    p.a -= da;
    p.c -= dc;
    if (!(p.c > 0.0) || !std::isfinite(p.a)) throw DecompositionError("Newton iterate left the parameter domain");
  }
  std::ostringstream os;
  os << "Newton did not converge within " << opts.max_iterations << " iterations";
  throw DecompositionError(os.str());
}

std::pair<double, double> orthogonality_residuals(const Decomposition& d) {
  const GridPtr& g = d.remainder.grid_ptr();
  const SolitonParams centered{0.0, d.params.c};
  const Field qc = soliton_field(g, centered);
  const Field second = d.regime == Regime::nonsymplectic ? soliton_derivative_field(g, centered)
                                                         : soliton_moment_field(g, centered);
  return {std::abs(inner(d.remainder, qc)), std::abs(inner(d.remainder, second))};
}

std::vector<Decomposition> track_parameters(const std::vector<EvolutionState>& snapshots, Regime regime,
                                            const SolitonParams& initial_guess, const NewtonOptions& opts) {
  std::vector<Decomposition> out;
  out.reserve(snapshots.size());
  SolitonParams guess = initial_guess;
  for (std::size_t n = 0; n < snapshots.size(); ++n) {
    try {
      out.push_back(decompose(snapshots[n].field, regime, guess, opts));
    } catch (const DecompositionError& e) {
      throw DecompositionError(e.what(), static_cast<int>(n));
    }
    if (n > 0) {
      const double dt = snapshots[n].time - snapshots[n - 1].time;
      const double jump = std::abs(out[n].params.a - out[n - 1].params.a);
      const double cmax = std::max(out[n].params.c, out[n - 1].params.c);
      if (jump > 2.0 * cmax * std::abs(dt)) {
        std::ostringstream os;
        os << "parameter continuity violated: |da| = " << jump << " over dt = " << dt;
        throw DecompositionError(os.str(), static_cast<int>(n));
      }
    }
    guess = out.back().params;
  }
  return out;
}

Field e2_remainder(const GridPtr& grid, double a, const PotentialSpec& pot) {
  pot.validate(true);
  const double h = pot.h;
  const double w0 = pot.w(h * a, 0);
  const double w1 = pot.w(h * a, 1);
  return Field::sample(grid, [&](double y) { return pot.w(h * (y + a), 0) - w0 - h * w1 * y; });
}

ConversionResult convert_decompositions(const Decomposition& d, const Field& u, const NewtonOptions& opts) {
  if (d.regime != Regime::nonsymplectic) throw UsageError("conversion starts from a nonsymplectic decomposition");
  const GridPtr& g = u.grid_ptr();
  const Field zeta = unshifted_remainder(u, d.params);
  const Field moment = soliton_moment_field(g, d.params);
  const double norm_sq = 8.0 * pi * d.params.c;
  const double coeff = 2.0 * inner(zeta, moment) / norm_sq;
  Field predicted = zeta + coeff * soliton_derivative_field(g, d.params);

  ConversionResult out{decompose(u, Regime::symplectic, d.params, opts), std::move(predicted), 0.0, 0.0};
  const Field eta = unshifted_remainder(u, out.symplectic.params);
  out.discrepancy_l2 = l2_norm(eta - out.predicted_remainder);
  const double zn = sobolev_norm(zeta, 0.5);
  out.hhalf_ratio = zn > 0.0 ? sobolev_norm(eta, 0.5) / zn : 0.0;
  return out;
}

}  // namespace bolab
