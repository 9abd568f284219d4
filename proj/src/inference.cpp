#include "maxstorm/inference.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "maxstorm/errors.hpp"
#include "maxstorm/parallel.hpp"

namespace maxstorm {

// ---------------------------------------------------------------------------
// Parameters and weights

void ThetaVector::validate() const {
  (void)smith();
  (void)markov();
}

Eigen::Matrix<double, 6, 1> ThetaVector::as_vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << sigma11, sigma12, sigma22, a, tau1, tau2;
  return v;
}

ThetaVector ThetaVector::from_vector(const Eigen::Matrix<double, 6, 1>& v) {
  return {v(0), v(1), v(2), v(3), v(4), v(5)};
}

PairWeights PairWeights::cutoff(const PlanarSpaceTimeField& data, std::optional<double> max_time_lag,
                                std::optional<double> max_distance) {
  PairWeights w;
  const auto n = static_cast<Eigen::Index>(data.n_dates());
  const auto m = static_cast<Eigen::Index>(data.n_sites());
  w.temporal = Eigen::MatrixXd::Ones(n, n);
  w.spatial = Eigen::MatrixXd::Ones(m, m);
  if (max_time_lag) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(static_cast<double>(data.dates[j] - data.dates[i])) > *max_time_lag) w.temporal(i, j) = 0.0;
      }
    }
  }
  if (max_distance) {
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index l = 0; l < m; ++l) {
        if ((data.sites[l].vec() - data.sites[k].vec()).norm() > *max_distance) w.spatial(k, l) = 0.0;
      }
    }
  }
  return w;
}

void PairWeights::validate(std::size_t n_dates, std::size_t n_sites) const {
  auto check = [](const Eigen::MatrixXd& w, std::size_t n, const char* name) {
    if (w.size() == 0) return true;
    if (w.rows() != static_cast<Eigen::Index>(n) || w.cols() != static_cast<Eigen::Index>(n)) {
      std::ostringstream os;
      os << name << " weights must be " << n << " x " << n;
      throw ValidationError(os.str());
    }
    if ((w.array() < 0.0).any() || !w.allFinite()) {
      throw ValidationError(std::string(name) + " weights must be finite and non-negative");
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < w.cols(); ++j) {
        if (w(i, j) > 0.0) return true;
      }
    }
    return false;
  };
  const bool t = check(temporal, n_dates, "temporal");
  const bool s = check(spatial, n_sites, "spatial");
  if (!t || !s) throw ValidationError("pair weights leave no positive weight product");
}

// ---------------------------------------------------------------------------
// Densities

namespace {

struct LogDensity {
  double value = 0.0;
  bool floored = false;
};

// log f for the pair with decay A = a^l, Mahalanobis distance h of
// x2 - l tau - x1, thresholds z1 (earlier date) and z2.
LogDensity smith_pair_log_density(double z1, double z2, double decay, double h) {
  LogDensity out;
  double exponent = 0.0;
  double bracket = 0.0;
  if (h < kCompleteDependenceH) {
    if (decay == 1.0) throw ValidationError("degenerate pair: same date and same shifted site has no density");
    const BivariateExponent e = smith_exponent_bivariate(z1, z2 / decay, 0.0);
    exponent = e.value + (1.0 - decay) / z2;
    bracket = (-e.d_z1) * (-e.d_z2 / decay + (1.0 - decay) / (z2 * z2)) - e.d_z1z2 / decay;
  } else {
    const double w = 0.5 * h + std::log(z2 / (decay * z1)) / h;
    const double v = h - w;
    const double cw = normal_cdf(w), cv = normal_cdf(v);
    const double pw = normal_pdf(w), pv = normal_pdf(v);
    const double rest = (1.0 - decay) / z2;
    exponent = cw / z1 + decay * cv / z2 + rest;
    const double b1 = cw / (z1 * z1) + pw / (h * z1 * z1) - decay * pv / (h * z1 * z2);
    const double b2 = decay * cv / (z2 * z2) + decay * pv / (h * z2 * z2) - pw / (h * z1 * z2) + rest / z2;
    const double c = v * pw / (h * h * z1 * z1 * z2) + decay * w * pv / (h * h * z1 * z2 * z2);
    bracket = b1 * b2 + c;
  }
  if (std::isnan(bracket)) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (bracket < kDensityFloor) {
    bracket = kDensityFloor;
    out.floored = true;
  }
  out.value = -exponent + std::log(bracket);
  return out;
}

struct OrderedPair {
  double z1, z2, lag;
  Eigen::Vector2d dx;  // x2 - x1
};

OrderedPair order_pair(double z1, double z2, double t1, double t2, const PlanarSite& x1, const PlanarSite& x2) {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw ValidationError("density arguments must be positive");
  if (t1 <= t2) return {z1, z2, t2 - t1, x2.vec() - x1.vec()};
  return {z2, z1, t1 - t2, x1.vec() - x2.vec()};
}

}  // namespace

double bivariate_density(double z1, double z2, double t1, double t2, const PlanarSite& x1, const PlanarSite& x2,
                         const ThetaVector& theta) {
  const SmithParams sigma = theta.smith();
  const MarkovParams markov = theta.markov();
  const OrderedPair p = order_pair(z1, z2, t1, t2, x1, x2);
  const double h = sigma.mahalanobis(p.dx - p.lag * markov.tau());
  const LogDensity ld = smith_pair_log_density(p.z1, p.z2, markov.decay(p.lag), h);
  return ld.floored ? 0.0 : std::exp(ld.value);
}

double bivariate_density_from_exponent(double z1, double z2, double t1, double t2, const PlanarSite& x1,
                                       const PlanarSite& x2, const MarkovParams& markov,
                                       const ExponentOracle& exponent) {
  const OrderedPair p = order_pair(z1, z2, t1, t2, x1, x2);
  const double decay = markov.decay(p.lag);
  const PlanarSite shifted(x1.x1 + p.dx.x() - p.lag * markov.tau().x(), x1.x2 + p.dx.y() - p.lag * markov.tau().y());
  const BivariateExponent e = exponent.bivariate(p.z1, p.z2 / decay, x1, shifted);
  // Chain rule for z2 -> z2 / a^l.
  const double dv1 = e.d_z1;
  const double dv2 = e.d_z2 / decay;
  const double dv12 = e.d_z1z2 / decay;
  const double rest = (1.0 - decay) / p.z2;
  return std::exp(-e.value - rest) * ((-dv1) * (-dv2 + rest / p.z2) - dv12);
}

// ---------------------------------------------------------------------------
// Pairwise likelihoods

namespace {

void check_data(const PlanarSpaceTimeField& data) {
  data.validate();
}

[[noreturn]] void bad_term(std::size_t i, std::size_t k, std::size_t j, std::size_t l, double z1, double z2) {
  std::ostringstream os;
  os << "non-finite log-density for pair (date " << i << ", site " << k << ") - (date " << j << ", site " << l
     << ") with values " << z1 << ", " << z2;
  throw NumericalError(os.str());
}

}  // namespace

LoglikResult pairwise_loglik_detailed(const PlanarSpaceTimeField& data, const ThetaVector& theta,
                                      const PairWeights& weights, const LoglikOptions& options) {
  check_data(data);
  const std::size_t n = data.n_dates();
  const std::size_t m = data.n_sites();
  if (n < 2 || m < 2) throw ValidationError("pairwise likelihood needs at least 2 dates and 2 sites");
  weights.validate(n, m);
  const SmithParams sigma = theta.smith();
  const MarkovParams markov = theta.markov();
  const Eigen::Matrix2d inv = sigma.inverse();

  std::vector<LoglikResult> blocks(n - 1);
  parallel_for(n - 1, options.threads, [&](std::size_t i) {
    LoglikResult& block = blocks[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double wt = weights.time_weight(i, j);
      if (wt == 0.0) continue;
      const double lag = static_cast<double>(data.dates[j] - data.dates[i]);
      const double decay = markov.decay(lag);
      const Eigen::Vector2d shift = lag * markov.tau();
      for (std::size_t k = 0; k + 1 < m; ++k) {
        const double z1 = data.at(i, k);
        for (std::size_t l = k + 1; l < m; ++l) {
          const double w = wt * weights.space_weight(k, l);
          if (w == 0.0) continue;
          const double d1 = data.sites[l].x1 - data.sites[k].x1 - shift.x();
          const double d2 = data.sites[l].x2 - data.sites[k].x2 - shift.y();
          const double q = inv(0, 0) * d1 * d1 + 2.0 * inv(0, 1) * d1 * d2 + inv(1, 1) * d2 * d2;
          const double z2 = data.at(j, l);
          const LogDensity ld = smith_pair_log_density(z1, z2, decay, std::sqrt(std::max(q, 0.0)));
          if (!std::isfinite(ld.value)) bad_term(i, k, j, l, z1, z2);
          block.value += w * ld.value;
          ++block.n_terms;
          if (ld.floored) ++block.n_floored;
        }
      }
    }
  });
  LoglikResult out;
  for (const auto& b : blocks) {
    out.value += b.value;
    out.n_terms += b.n_terms;
    out.n_floored += b.n_floored;
  }
  return out;
}

double pairwise_loglik(const PlanarSpaceTimeField& data, const ThetaVector& theta, const PairWeights& weights,
                       const LoglikOptions& options) {
  return pairwise_loglik_detailed(data, theta, weights, options).value;
}

LoglikResult spatial_pairwise_loglik_detailed(const PlanarSpaceTimeField& data, const SmithParams& sigma,
                                              const PairWeights& weights, const LoglikOptions& options) {
  check_data(data);
  const std::size_t n = data.n_dates();
  const std::size_t m = data.n_sites();
  if (m < 2) throw ValidationError("spatial pairwise likelihood needs at least 2 sites");
  if (weights.spatial.size() != 0) {
    PairWeights spatial_only{{}, weights.spatial};
    spatial_only.validate(n, m);
  }

  std::vector<double> h((m * (m - 1)) / 2);
  for (std::size_t k = 0, p = 0; k + 1 < m; ++k) {
    for (std::size_t l = k + 1; l < m; ++l, ++p) h[p] = sigma.mahalanobis(data.sites[l].vec() - data.sites[k].vec());
  }

  std::vector<LoglikResult> blocks(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    LoglikResult& block = blocks[i];
    for (std::size_t k = 0, p = 0; k + 1 < m; ++k) {
      for (std::size_t l = k + 1; l < m; ++l, ++p) {
        const double w = weights.space_weight(k, l);
        if (w == 0.0) continue;
        const double z1 = data.at(i, k), z2 = data.at(i, l);
        const LogDensity ld = smith_pair_log_density(z1, z2, 1.0, h[p]);
        if (!std::isfinite(ld.value)) bad_term(i, k, i, l, z1, z2);
        block.value += w * ld.value;
        ++block.n_terms;
        if (ld.floored) ++block.n_floored;
      }
    }
  });
  LoglikResult out;
  for (const auto& b : blocks) {
    out.value += b.value;
    out.n_terms += b.n_terms;
    out.n_floored += b.n_floored;
  }
  return out;
}

double spatial_pairwise_loglik(const PlanarSpaceTimeField& data, const SmithParams& sigma,
                               const PairWeights& weights, const LoglikOptions& options) {
  return spatial_pairwise_loglik_detailed(data, sigma, weights, options).value;
}

// ---------------------------------------------------------------------------
// Estimation

Eigen::Vector3d sigma_to_log_cholesky(const SmithParams& sigma) {
  const Eigen::Matrix2d l = sigma.cholesky();
  return {std::log(l(0, 0)), l(1, 0), std::log(l(1, 1))};
}

SmithParams log_cholesky_to_sigma(const Eigen::Vector3d& p) {
  const double l11 = std::exp(p(0));
  const double l21 = p(1);
  const double l22 = std::exp(p(2));
  return {l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
}

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Model-space vectors below are (sigma11, sigma12, sigma22) for the spatial
// block and (a, tau1, tau2) for the temporal block.
ParameterTransform sigma_transform() {
  return {[](const Eigen::VectorXd& free) {
            const SmithParams s = log_cholesky_to_sigma(free.head<3>());
            Eigen::VectorXd out(3);
            out << s.sigma11(), s.sigma12(), s.sigma22();
            return out;
          },
          [](const Eigen::VectorXd& model) {
            Eigen::VectorXd out(3);
            out = sigma_to_log_cholesky(SmithParams(model(0), model(1), model(2)));
            return out;
          }};
}

ParameterTransform full_transform() {
  const ParameterTransform sig = sigma_transform();
  const ParameterTransform tmp =
      coordinate_transform({CoordinateTransform::kLogit, CoordinateTransform::kIdentity, CoordinateTransform::kIdentity});
  return {[sig, tmp](const Eigen::VectorXd& free) {
            Eigen::VectorXd out(6);
            out << sig.to_model(free.head(3)), tmp.to_model(free.tail(3));
            return out;
          },
          [sig, tmp](const Eigen::VectorXd& model) {
            Eigen::VectorXd out(6);
            out << sig.to_free(model.head(3)), tmp.to_free(model.tail(3));
            return out;
          }};
}

}  // namespace

FitReport fit_scheme1(const PlanarSpaceTimeField& data, const ThetaVector& init, const FitOptions& options) {
  init.validate();
  const LoglikOptions ll{options.threads};

  auto spatial_objective = [&](const Eigen::VectorXd& s) {
    try {
      return -spatial_pairwise_loglik(data, SmithParams(s(0), s(1), s(2)), options.weights, ll);
    } catch (const ValidationError&) {
      return kInfeasible;
    }
  };
  Eigen::VectorXd s0(3);
  s0 << init.sigma11, init.sigma12, init.sigma22;
  const OptimizerReport stage1 = nelder_mead(spatial_objective, s0, sigma_transform(), options.optimizer);

  ThetaVector theta = init;
  theta.sigma11 = stage1.x(0);
  theta.sigma12 = stage1.x(1);
  theta.sigma22 = stage1.x(2);

  auto temporal_objective = [&](const Eigen::VectorXd& t) {
    ThetaVector trial = theta;
    trial.a = t(0);
    trial.tau1 = t(1);
    trial.tau2 = t(2);
    try {
      return -pairwise_loglik(data, trial, options.weights, ll);
    } catch (const ValidationError&) {
      return kInfeasible;
    }
  };
  Eigen::VectorXd t0(3);
  t0 << init.a, init.tau1, init.tau2;
  const OptimizerReport stage2 = nelder_mead(
      temporal_objective, t0,
      coordinate_transform({CoordinateTransform::kLogit, CoordinateTransform::kIdentity, CoordinateTransform::kIdentity}),
      options.optimizer);
  theta.a = stage2.x(0);
  theta.tau1 = stage2.x(1);
  theta.tau2 = stage2.x(2);

  FitReport report;
  report.theta_hat = theta;
  const LoglikResult final_ll = pairwise_loglik_detailed(data, theta, options.weights, ll);
  report.loglik = final_ll.value;
  report.n_pairs = final_ll.n_terms;
  report.iterations = stage1.iterations + stage2.iterations;
  report.evaluations = stage1.evaluations + stage2.evaluations;
  report.converged = stage1.converged && stage2.converged;
  report.scheme = 1;
  report.spatial_loglik = -stage1.value;
  return report;
}

FitReport fit_scheme2(const PlanarSpaceTimeField& data, const ThetaVector& init, const FitOptions& options) {
  init.validate();
  const LoglikOptions ll{options.threads};
  auto objective = [&](const Eigen::VectorXd& x) {
    try {
      return -pairwise_loglik(data, ThetaVector{x(0), x(1), x(2), x(3), x(4), x(5)}, options.weights, ll);
    } catch (const ValidationError&) {
      return kInfeasible;
    }
  };
  const Eigen::VectorXd x0 = init.as_vector();
  const OptimizerReport r = nelder_mead(objective, x0, full_transform(), options.optimizer);

  FitReport report;
  report.theta_hat = ThetaVector{r.x(0), r.x(1), r.x(2), r.x(3), r.x(4), r.x(5)};
  const LoglikResult final_ll = pairwise_loglik_detailed(data, report.theta_hat, options.weights, ll);
  report.loglik = final_ll.value;
  report.n_pairs = final_ll.n_terms;
  report.iterations = r.iterations;
  report.evaluations = r.evaluations;
  report.converged = r.converged;
  report.scheme = 2;
  return report;
}

}  // namespace maxstorm
