#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace maxstorm {

struct PlanarSite {
  double x1 = 0.0;
  double x2 = 0.0;

  PlanarSite() = default;
  // Throws ValidationError on NaN/Inf components.
  PlanarSite(double a, double b);

  [[nodiscard]] Eigen::Vector2d vec() const { return {x1, x2}; }
  friend bool operator==(const PlanarSite&, const PlanarSite&) = default;
};

// Point on the unit sphere. Construction checks |v| = 1 within kUnitTolerance
// and never renormalizes; use normalized() explicitly when needed.
class SphereSite {
 public:
  static constexpr double kUnitTolerance = 1e-12;

  SphereSite() : v_(0.0, 0.0, 1.0) {}
  explicit SphereSite(const Eigen::Vector3d& v);
  SphereSite(double x, double y, double z) : SphereSite(Eigen::Vector3d(x, y, z)) {}

  static SphereSite normalized(const Eigen::Vector3d& v);

  [[nodiscard]] const Eigen::Vector3d& vec() const { return v_; }
  [[nodiscard]] double dot(const SphereSite& o) const { return v_.dot(o.v_); }
  friend bool operator==(const SphereSite& a, const SphereSite& b) { return a.v_ == b.v_; }

 private:
  Eigen::Vector3d v_;
};

using PlanarSites = std::vector<PlanarSite>;
using SphereSites = std::vector<SphereSite>;

// Rotation of `angle` radians per unit time step about unit `axis`.
class RotationSpec {
 public:
  RotationSpec(double angle, const Eigen::Vector3d& axis);

  [[nodiscard]] double angle() const { return angle_; }
  [[nodiscard]] const Eigen::Vector3d& axis() const { return axis_; }

 private:
  double angle_;
  Eigen::Vector3d axis_;
};

// R = cos(a) I + sin(a) [u]_x + (1 - cos(a)) u u' with a = angle * steps.
[[nodiscard]] Eigen::Matrix3d rotation_matrix(const RotationSpec& spec, double steps);

// Cross-product matrix [u]_x, so that [u]_x v = u x v.
[[nodiscard]] Eigen::Matrix3d cross_product_matrix(const Eigen::Vector3d& u);

// x - lag * tau.
[[nodiscard]] PlanarSite translate(const PlanarSite& x, double lag, const Eigen::Vector2d& tau);

// Applies R to a sphere site; R must be orthogonal to working precision.
[[nodiscard]] SphereSite rotate(const Eigen::Matrix3d& r, const SphereSite& x);

}  // namespace maxstorm
