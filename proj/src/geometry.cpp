#include "maxstorm/geometry.hpp"

#include <cmath>
#include <sstream>

#include "maxstorm/errors.hpp"

namespace maxstorm {

PlanarSite::PlanarSite(double a, double b) : x1(a), x2(b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError("planar site has non-finite coordinate");
  }
}

SphereSite::SphereSite(const Eigen::Vector3d& v) : v_(v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTolerance) {
    std::ostringstream os;
    os << "sphere site is not a unit vector (norm " << v.norm() << ")";
    throw ValidationError(os.str());
  }
}

SphereSite SphereSite::normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize zero or non-finite vector");
  return SphereSite(v / n);
}

RotationSpec::RotationSpec(double angle, const Eigen::Vector3d& axis) : angle_(angle), axis_(axis) {
  if (!std::isfinite(angle)) throw ValidationError("rotation angle must be finite");
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > SphereSite::kUnitTolerance) {
    std::ostringstream os;
    os << "rotation axis must be a unit vector (norm " << axis.norm() << ")";
    throw ValidationError(os.str());
  }
}

Eigen::Matrix3d cross_product_matrix(const Eigen::Vector3d& u) {
  Eigen::Matrix3d m;
  m << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
       -u.y(), u.x(), 0.0;
  return m;
}

Eigen::Matrix3d rotation_matrix(const RotationSpec& spec, double steps) {
  const double a = spec.angle() * steps;
  const Eigen::Vector3d& u = spec.axis();
  const double c = std::cos(a);
  return c * Eigen::Matrix3d::Identity() + std::sin(a) * cross_product_matrix(u) +
         (1.0 - c) * (u * u.transpose());
}

PlanarSite translate(const PlanarSite& x, double lag, const Eigen::Vector2d& tau) {
  return PlanarSite(x.x1 - lag * tau.x(), x.x2 - lag * tau.y());
}

SphereSite rotate(const Eigen::Matrix3d& r, const SphereSite& x) {
  return SphereSite(r * x.vec());
}

}  // namespace maxstorm
