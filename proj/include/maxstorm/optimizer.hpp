#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace maxstorm {

// Bijection between an unconstrained search space and the model space.
struct ParameterTransform {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> to_model;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> to_free;
};

enum class CoordinateTransform { kIdentity, kLog, kLogit };

// Per-coordinate transform: log for (0, inf), logit for (0, 1).
[[nodiscard]] ParameterTransform coordinate_transform(std::vector<CoordinateTransform> kinds);

// Converged once the simplex diameter is below xtol and the vertex values
// spread by at most ftol max(1, |f_best|).
struct NelderMeadOptions {
  double xtol = 1e-6;      // simplex diameter in the free space
  double ftol = 1e-8;      // spread of vertex values, relative to max(1, |f_best|)
  std::size_t max_evaluations = 5000;
  double initial_step = 0.3;  // free-space step for the initial simplex
  bool restart = true;        // restart once from the best vertex
};

struct OptimizerReport {
  Eigen::VectorXd x;       // model space
  Eigen::VectorXd x_free;  // search space
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  bool converged = false;
};

// Minimizes objective(model-space x). Non-finite objective values are treated
// as +inf. Throws ValidationError when the objective is not finite at init.
[[nodiscard]] OptimizerReport nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                                          const Eigen::VectorXd& init, const ParameterTransform& transform,
                                          const NelderMeadOptions& options = {});

}  // namespace maxstorm
