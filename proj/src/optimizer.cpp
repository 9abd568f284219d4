#include "maxstorm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maxstorm/errors.hpp"

namespace maxstorm {

ParameterTransform coordinate_transform(std::vector<CoordinateTransform> kinds) {
  auto forward = [kinds](const Eigen::VectorXd& free) {
    Eigen::VectorXd out(free.size());
    for (Eigen::Index i = 0; i < free.size(); ++i) {
      switch (kinds[static_cast<std::size_t>(i)]) {
        case CoordinateTransform::kIdentity: out(i) = free(i); break;
        // Clamped so that rounding never lands on the boundary.
        case CoordinateTransform::kLog:
          out(i) = std::max(std::exp(free(i)), std::numeric_limits<double>::min());
          break;
        case CoordinateTransform::kLogit:
          out(i) = std::clamp(1.0 / (1.0 + std::exp(-free(i))), std::numeric_limits<double>::min(),
                              std::nextafter(1.0, 0.0));
          break;
      }
    }
    return out;
  };
  auto backward = [kinds](const Eigen::VectorXd& model) {
    Eigen::VectorXd out(model.size());
    for (Eigen::Index i = 0; i < model.size(); ++i) {
      switch (kinds[static_cast<std::size_t>(i)]) {
        case CoordinateTransform::kIdentity: out(i) = model(i); break;
        case CoordinateTransform::kLog: out(i) = std::log(model(i)); break;
        case CoordinateTransform::kLogit: out(i) = std::log(model(i) / (1.0 - model(i))); break;
      }
    }
    return out;
  };
  return {forward, backward};
}

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;
};

}  // namespace

OptimizerReport nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                            const Eigen::VectorXd& init, const ParameterTransform& transform,
                            const NelderMeadOptions& options) {
  const auto n = static_cast<std::size_t>(init.size());
  if (n == 0) throw ValidationError("nelder_mead needs at least one parameter");

  OptimizerReport report;
  auto eval = [&](const Eigen::VectorXd& free) {
    ++report.evaluations;
    const double v = objective(transform.to_model(free));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  Eigen::VectorXd start = transform.to_free(init);
  const double f0 = eval(start);
  if (!std::isfinite(f0)) throw ValidationError("objective is not finite at the initial point");

  Simplex s;
  auto build = [&](const Eigen::VectorXd& base, double fbase) {
    s.points.assign(1, base);
    s.values.assign(1, fbase);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd p = base;
      p(static_cast<Eigen::Index>(i)) += options.initial_step;
      s.points.push_back(p);
      s.values.push_back(eval(p));
    }
  };
  build(start, f0);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    Simplex sorted;
    for (std::size_t i : order) {
      sorted.points.push_back(s.points[i]);
      sorted.values.push_back(s.values[i]);
    }
    s = std::move(sorted);
  };

  auto converged = [&] {
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      diameter = std::max(diameter, (s.points[i] - s.points[0]).cwiseAbs().maxCoeff());
    }
    const double spread = s.values[n] - s.values[0];
    return diameter < options.xtol && spread <= options.ftol * std::max(1.0, std::abs(s.values[0]));
  };

  bool done = false;
  while (!done) {
    sort_simplex();
    while (!converged()) {
      if (report.evaluations >= options.max_evaluations) break;
      ++report.iterations;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) centroid += s.points[i];
      centroid /= static_cast<double>(n);
      const Eigen::VectorXd& worst = s.points[n];

      const Eigen::VectorXd reflected = centroid + (centroid - worst);
      const double fr = eval(reflected);
      if (fr < s.values[0]) {
        const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - worst);
        const double fe = eval(expanded);
        if (fe < fr) {
          s.points[n] = expanded;
          s.values[n] = fe;
        } else {
          s.points[n] = reflected;
          s.values[n] = fr;
        }
      } else if (fr < s.values[n - 1]) {
        s.points[n] = reflected;
        s.values[n] = fr;
      } else {
        const bool outside = fr < s.values[n];
        const Eigen::VectorXd contracted =
            outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                    : Eigen::VectorXd(centroid + 0.5 * (worst - centroid));
        const double fc = eval(contracted);
        if (fc < (outside ? fr : s.values[n])) {
          s.points[n] = contracted;
          s.values[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            s.points[i] = s.points[0] + 0.5 * (s.points[i] - s.points[0]);
            s.values[i] = eval(s.points[i]);
          }
        }
      }
      sort_simplex();
    }
    const bool met = converged();
    if (met && options.restart && report.restarts == 0 && report.evaluations < options.max_evaluations) {
      ++report.restarts;
      const Eigen::VectorXd best = s.points[0];
      const double fbest = s.values[0];
      build(best, fbest);
      continue;
    }
    report.converged = met && report.evaluations <= options.max_evaluations;
    done = true;
  }

  report.x_free = s.points[0];
  report.x = transform.to_model(s.points[0]);
  report.value = s.values[0];
  return report;
}

}  // namespace maxstorm
