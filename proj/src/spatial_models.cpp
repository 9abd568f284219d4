#include "maxstorm/spatial_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <boost/math/special_functions/erf.hpp>

#include "maxstorm/errors.hpp"
#include "maxstorm/quadrature.hpp"

namespace maxstorm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;

double min_value(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

// ---------------------------------------------------------------------------
// Parameters

SmithParams::SmithParams(double sigma11, double sigma12, double sigma22)
    : s11_(sigma11), s12_(sigma12), s22_(sigma22) {
  if (!std::isfinite(sigma11) || !std::isfinite(sigma12) || !std::isfinite(sigma22)) {
    throw ValidationError("Smith covariance has non-finite entries");
  }
  if (!(sigma11 > 0.0) || !(sigma22 > 0.0) || !(det() > 0.0)) {
    std::ostringstream os;
    os << "Smith covariance (" << sigma11 << ", " << sigma12 << ", " << sigma22 << ") is not positive definite";
    throw ValidationError(os.str());
  }
}

Eigen::Matrix2d SmithParams::matrix() const {
  Eigen::Matrix2d m;
  m << s11_, s12_, s12_, s22_;
  return m;
}

Eigen::Matrix2d SmithParams::inverse() const {
  Eigen::Matrix2d m;
  m << s22_, -s12_, -s12_, s11_;
  return m / det();
}

Eigen::Matrix2d SmithParams::cholesky() const {
  const double l11 = std::sqrt(s11_);
  const double l21 = s12_ / l11;
  const double l22 = std::sqrt(s22_ - l21 * l21);
  Eigen::Matrix2d l;
  l << l11, 0.0, l21, l22;
  return l;
}

double SmithParams::mahalanobis(const Eigen::Vector2d& dx) const {
  const double q = (s22_ * dx.x() * dx.x() - 2.0 * s12_ * dx.x() * dx.y() + s11_ * dx.y() * dx.y()) / det();
  return std::sqrt(std::max(q, 0.0));
}

double SmithParams::density_max() const { return 1.0 / (kTwoPi * std::sqrt(det())); }

SchlatherParams::SchlatherParams(double range, double smoothness) : c1_(range), c2_(smoothness) {
  if (!(range > 0.0) || !std::isfinite(range)) throw ValidationError("Schlather range c1 must be positive");
  if (!(smoothness > 0.0 && smoothness < 2.0)) throw ValidationError("Schlather smoothness c2 must lie in (0, 2)");
}

VmfParams::VmfParams(double kappa) : kappa_(kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("vMF concentration must be >= 0");
}

// ---------------------------------------------------------------------------
// Smith

double gaussian_density_2d(const PlanarSite& x, const SmithParams& params) {
  const double m = params.mahalanobis(x.vec());
  return params.density_max() * std::exp(-0.5 * m * m);
}

double smith_buffer_radius(const SmithParams& params, double tail_epsilon) {
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0)) throw ValidationError("tail_epsilon must lie in (0, 1)");
  // Storms outside the buffered box lie outside the axis strip |c_i - x_i| <= r
  // in at least one coordinate; four one-sided Gaussian tails bound that mass.
  const double q = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * tail_epsilon / 4.0);
  return q * std::sqrt(std::max(params.sigma11(), params.sigma22()));
}

PlanarField simulate_smith(std::span<const PlanarSite> sites, const SmithParams& params, SeededStream& stream,
                           const SmithSimulationOptions& options) {
  if (sites.empty()) throw ValidationError("simulate_smith needs at least one site");
  const double r = smith_buffer_radius(params, options.tail_epsilon);
  double lo1 = sites[0].x1, hi1 = sites[0].x1, lo2 = sites[0].x2, hi2 = sites[0].x2;
  for (const auto& s : sites) {
    lo1 = std::min(lo1, s.x1);
    hi1 = std::max(hi1, s.x1);
    lo2 = std::min(lo2, s.x2);
    hi2 = std::max(hi2, s.x2);
  }
  lo1 -= r;
  lo2 -= r;
  hi1 += r;
  hi2 += r;
  const double area = (hi1 - lo1) * (hi2 - lo2);

  const Eigen::Matrix2d inv = params.inverse();
  const double h_max = params.density_max();

  PlanarField out;
  out.sites.assign(sites.begin(), sites.end());
  out.values.assign(sites.size(), 0.0);

  // Centres uniform on the window, intensities area / P_i, so the storm
  // process has intensity u^-2 du x dc restricted to the window.
  StormIntensityGenerator gen(stream, area, options.storm_cap);
  double floor = 0.0;
  for (;;) {
    const double u = gen.next();
    if (u * h_max < floor) break;
    const double c1 = stream.uniform(lo1, hi1);
    const double c2 = stream.uniform(lo2, hi2);
    const double bound = u * h_max;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      if (bound <= out.values[k]) continue;
      const double d1 = sites[k].x1 - c1;
      const double d2 = sites[k].x2 - c2;
      const double q = inv(0, 0) * d1 * d1 + 2.0 * inv(0, 1) * d1 * d2 + inv(1, 1) * d2 * d2;
      const double v = bound * std::exp(-0.5 * q);
      if (v > out.values[k]) out.values[k] = v;
    }
    floor = min_value(out.values);
  }
  out.storms = gen.produced();
  return out;
}

// ---------------------------------------------------------------------------
// Schlather

double correlation_powered_exponential(double h, const SchlatherParams& params) {
  if (!(h >= 0.0)) throw ValidationError("correlation lag must be non-negative");
  return std::exp(-std::pow(h / params.range(), params.smoothness()));
}

GaussianFieldSampler::GaussianFieldSampler(std::span<const PlanarSite> sites, const SchlatherParams& params) {
  std::map<std::pair<double, double>, std::size_t> unique;
  std::vector<PlanarSite> distinct;
  site_index_.reserve(sites.size());
  for (const auto& s : sites) {
    auto [it, inserted] = unique.try_emplace({s.x1, s.x2}, distinct.size());
    if (inserted) distinct.push_back(s);
    site_index_.push_back(it->second);
  }
  const auto n = static_cast<Eigen::Index>(distinct.size());
  if (distinct.size() > kMaxSites) {
    std::ostringstream os;
    os << distinct.size() << " distinct sites exceed the dense Cholesky cap of " << kMaxSites;
    throw ResourceError(os.str());
  }
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double h = (distinct[i].vec() - distinct[j].vec()).norm();
      corr(i, j) = corr(j, i) = correlation_powered_exponential(h, params);
    }
  }
  for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    Eigen::MatrixXd m = corr;
    m.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
      lower_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
  }
  // Name the most correlated pair, the usual culprit.
  Eigen::Index bi = 0, bj = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (corr(i, j) > best) {
        best = corr(i, j);
        bi = i;
        bj = j;
      }
    }
  }
  std::ostringstream os;
  os << "Cholesky of the correlation matrix failed up to jitter 1e-6; most correlated pair: sites (" << distinct[bj].x1
     << ", " << distinct[bj].x2 << ") and (" << distinct[bi].x1 << ", " << distinct[bi].x2 << "), rho = " << best;
  throw NumericalError(os.str());
}

std::vector<double> GaussianFieldSampler::sample(SeededStream& stream) const {
  Eigen::VectorXd e(lower_.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = stream.normal();
  const Eigen::VectorXd g = lower_.triangularView<Eigen::Lower>() * e;
  std::vector<double> out(site_index_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = g(static_cast<Eigen::Index>(site_index_[k]));
  return out;
}

PlanarField simulate_schlather(std::span<const PlanarSite> sites, const SchlatherParams& params,
                               SeededStream& stream, const SchlatherSimulationOptions& options) {
  const GaussianFieldSampler sampler(sites, params);
  return simulate_schlather(sampler, sites, stream, options);
}

PlanarField simulate_schlather(const GaussianFieldSampler& sampler, std::span<const PlanarSite> sites,
                               SeededStream& stream, const SchlatherSimulationOptions& options) {
  if (sites.empty()) throw ValidationError("simulate_schlather needs at least one site");
  if (sites.size() != sampler.size()) throw ValidationError("sampler built for a different site set");
  if (options.n_storms < 1) throw ValidationError("n_storms must be >= 1");
  const double scale = std::sqrt(kTwoPi);

  PlanarField out;
  out.sites.assign(sites.begin(), sites.end());
  out.values.assign(sites.size(), 0.0);

  StormIntensityGenerator gen(stream, 1.0, options.n_storms);
  bool stopped_by_rule = false;
  double floor = 0.0;
  while (gen.produced() < options.n_storms) {
    const double u = gen.next();
    if (floor > 0.0 && u * scale * options.envelope < floor) {
      stopped_by_rule = true;
      break;
    }
    const std::vector<double> eps = sampler.sample(stream);
    for (std::size_t k = 0; k < sites.size(); ++k) {
      out.values[k] = std::max(out.values[k], u * scale * std::max(eps[k], 0.0));
    }
    floor = min_value(out.values);
  }
  out.storms = gen.produced();
  if (!(floor > 0.0)) throw NumericalError("Schlather simulation left a site at zero after the storm cap");

  const double tail = 1.0 - normal_cdf(options.envelope);
  std::ostringstream os;
  os << "schlather: approximate simulation, envelope " << options.envelope
     << ", per-storm P(sup eps > envelope) <= " << std::min(1.0, tail * static_cast<double>(sampler.size()));
  out.warnings.push_back(os.str());
  if (!stopped_by_rule) {
    std::ostringstream cap;
    cap << "schlather: storm cap " << options.n_storms << " reached before the stopping rule";
    out.warnings.push_back(cap.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// von Mises-Fisher

double kappa_over_sinh(double kappa) {
  if (kappa < 1e-4) {
    const double k2 = kappa * kappa;
    return 1.0 - k2 / 6.0 + 7.0 * k2 * k2 / 360.0;
  }
  return kappa / std::sinh(kappa);
}

double vmf_density(const SphereSite& x, const SphereSite& mu, const VmfParams& params) {
  const double k = params.kappa();
  const double t = mu.dot(x);
  if (k < 1e-4) return kappa_over_sinh(k) * std::exp(k * t) / kFourPi;
  // kappa e^{kappa t} / (4 pi sinh kappa) rewritten to avoid overflow.
  return k * std::exp(k * (t - 1.0)) / (kTwoPi * -std::expm1(-2.0 * k));
}

double vmf_density_max(const VmfParams& params) {
  const double k = params.kappa();
  if (k < 1e-4) return kappa_over_sinh(k) * std::exp(k) / kFourPi;
  return k / (kTwoPi * -std::expm1(-2.0 * k));
}

SphereSite sample_uniform_sphere(SeededStream& stream) {
  for (;;) {
    const Eigen::Vector3d v(stream.normal(), stream.normal(), stream.normal());
    const double n = v.norm();
    if (n > 1e-12) return SphereSite::normalized(v);
  }
}

SphereField simulate_vmf_field(std::span<const SphereSite> sites, const VmfParams& params, SeededStream& stream,
                               const VmfSimulationOptions& options) {
  if (sites.empty()) throw ValidationError("simulate_vmf_field needs at least one site");
  const double f_max = vmf_density_max(params);
  SphereField out;
  out.sites.assign(sites.begin(), sites.end());
  out.values.assign(sites.size(), 0.0);

  // Centres uniform on the sphere with total mass 4 pi (surface measure).
  StormIntensityGenerator gen(stream, kFourPi, options.storm_cap);
  double floor = 0.0;
  for (;;) {
    const double u = gen.next();
    if (u * f_max < floor) break;
    const SphereSite mu = sample_uniform_sphere(stream);
    for (std::size_t k = 0; k < sites.size(); ++k) {
      if (u * f_max <= out.values[k]) continue;
      out.values[k] = std::max(out.values[k], u * vmf_density(sites[k], mu, params));
    }
    floor = min_value(out.values);
  }
  out.storms = gen.produced();
  return out;
}

// ---------------------------------------------------------------------------
// Exponent functions

BivariateExponent smith_exponent_bivariate(double z1, double z2, double h) {
  if (!(h >= 0.0)) throw ValidationError("Mahalanobis distance must be non-negative");
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw ValidationError("exponent arguments must be positive");
  BivariateExponent e;
  if (h < kCompleteDependenceH) {
    e.value = std::max(1.0 / z1, 1.0 / z2);
    if (z1 < z2) {
      e.d_z1 = -1.0 / (z1 * z1);
    } else if (z2 < z1) {
      e.d_z2 = -1.0 / (z2 * z2);
    } else {
      e.d_z1 = -0.5 / (z1 * z1);
      e.d_z2 = -0.5 / (z2 * z2);
    }
    return e;
  }
  const double w = 0.5 * h + std::log(z2 / z1) / h;
  const double v = h - w;
  const double cw = normal_cdf(w), cv = normal_cdf(v);
  const double pw = normal_pdf(w), pv = normal_pdf(v);
  e.value = cw / z1 + cv / z2;
  e.d_z1 = -(cw / (z1 * z1) + pw / (h * z1 * z1) - pv / (h * z1 * z2));
  e.d_z2 = -(cv / (z2 * z2) + pv / (h * z2 * z2) - pw / (h * z1 * z2));
  e.d_z1z2 = -(v * pw / (h * h * z1 * z1 * z2) + w * pv / (h * h * z1 * z2 * z2));
  return e;
}

double smith_exponent_numeric(std::span<const PlanarSite> sites, std::span<const double> z,
                              const SmithParams& params, const QuadratureOptions& options) {
  const std::size_t m = sites.size();
  if (m == 0) throw ValidationError("exponent needs at least one site");
  if (z.size() != m) throw ValidationError("one threshold per site required");
  for (double zi : z) {
    if (!(zi > 0.0)) throw ValidationError("exponent arguments must be positive");
  }

  // Whitened coordinates: c = x_1 + L u turns h_Sigma(x_m - c) dc into the
  // standard bivariate normal density at u - u_m.
  const Eigen::Matrix2d l = params.cholesky();
  std::vector<Eigen::Vector2d> centres(m);
  std::vector<double> log_z(m);
  for (std::size_t i = 0; i < m; ++i) {
    centres[i] = l.triangularView<Eigen::Lower>().solve(sites[i].vec() - sites[0].vec());
    log_z[i] = std::log(z[i]);
  }

  // Boundaries between the regions where storm shape i or j dominates are
  // lines u . d_ij = c_ij; they are passed to the integrator as breakpoints.
  struct Line {
    Eigen::Vector2d d;
    double c;
  };
  std::vector<Line> lines;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const Eigen::Vector2d d = centres[i] - centres[j];
      if (d.squaredNorm() == 0.0) continue;
      lines.push_back({d, log_z[i] - log_z[j] + 0.5 * (centres[i].squaredNorm() - centres[j].squaredNorm())});
    }
  }
  std::vector<double> outer_breaks;
  for (const auto& ln : lines) {
    if (ln.d.y() == 0.0) outer_breaks.push_back(ln.c / ln.d.x());
  }
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      Eigen::Matrix2d sys;
      sys << lines[a].d.transpose(), lines[b].d.transpose();
      const double det = sys.determinant();
      if (std::abs(det) < 1e-14) continue;
      const Eigen::Vector2d p = sys.inverse() * Eigen::Vector2d(lines[a].c, lines[b].c);
      outer_breaks.push_back(p.x());
    }
  }

  constexpr double kReach = 9.0;
  double lo1 = centres[0].x(), hi1 = lo1, lo2 = centres[0].y(), hi2 = lo2;
  for (const auto& c : centres) {
    lo1 = std::min(lo1, c.x());
    hi1 = std::max(hi1, c.x());
    lo2 = std::min(lo2, c.y());
    hi2 = std::max(hi2, c.y());
  }
  lo1 -= kReach;
  hi1 += kReach;
  lo2 -= kReach;
  hi2 += kReach;

  auto integrand = [&](double u1, double u2) {
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = u1 - centres[i].x();
      const double b = u2 - centres[i].y();
      best = std::max(best, std::exp(-0.5 * (a * a + b * b) - log_z[i]));
    }
    return best / kTwoPi;
  };

  // V >= max_m 1 / z_m sets the absolute scale of the tolerances.
  double scale = 0.0;
  for (double zi : z) scale = std::max(scale, 1.0 / zi);
  const double inner_abs_tol = 0.1 * options.rel_tol * scale / (hi1 - lo1);
  double inner_error = 0.0;
  auto inner = [&](double u1) {
    std::vector<double> breaks;
    for (const auto& ln : lines) {
      if (ln.d.y() != 0.0) breaks.push_back((ln.c - u1 * ln.d.x()) / ln.d.y());
    }
    const auto r = quadrature::integrate_1d([&](double u2) { return integrand(u1, u2); }, lo2, hi2,
                                            options.rel_tol * 0.1, breaks, inner_abs_tol);
    inner_error = std::max(inner_error, r.error);
    return r.value;
  };
  const auto r = quadrature::integrate_1d(inner, lo1, hi1, options.rel_tol, outer_breaks, options.rel_tol * scale);
  const double error = r.error + inner_error * (hi1 - lo1);
  if (!std::isfinite(r.value) || error > options.max_rel_error * std::abs(r.value)) {
    std::ostringstream os;
    os << "exponent quadrature did not converge: estimate " << r.value << ", achieved relative error "
       << error / std::abs(r.value);
    throw NumericalError(os.str());
  }
  return r.value;
}

double SmithExponentOracle::value(std::span<const PlanarSite> sites, std::span<const double> z) const {
  if (sites.empty() || sites.size() != z.size()) throw ValidationError("exponent needs matching sites and thresholds");
  if (sites.size() > max_dimension()) {
    std::ostringstream os;
    os << "Smith exponent supports at most " << max_dimension() << " points, got " << sites.size();
    throw CapabilityError(os.str());
  }
  if (sites.size() == 1) {
    if (!(z[0] > 0.0)) throw ValidationError("exponent arguments must be positive");
    return 1.0 / z[0];
  }
  if (sites.size() == 2) {
    return smith_exponent_bivariate(z[0], z[1], params_.mahalanobis(sites[1].vec() - sites[0].vec())).value;
  }
  return smith_exponent_numeric(sites, z, params_);
}

BivariateExponent SmithExponentOracle::bivariate(double z1, double z2, const PlanarSite& x1,
                                                 const PlanarSite& x2) const {
  return smith_exponent_bivariate(z1, z2, params_.mahalanobis(x2.vec() - x1.vec()));
}

}  // namespace maxstorm
