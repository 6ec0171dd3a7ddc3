#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace smartprism {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad config, out-of-range value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Geometry that cannot be solved (collinear points, zero gravity vector...).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_pi(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Roll/pitch/yaw in the Z-Y-X convention, radians.
struct Attitude {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  bool operator==(const Attitude&) const = default;
};

/// roll, yaw in (-pi, pi]; pitch in [-pi/2, pi/2].
inline bool in_range(const Attitude& a) {
  return a.roll > -kPi && a.roll <= kPi && a.pitch >= -kPi / 2 && a.pitch <= kPi / 2 &&
         a.yaw > -kPi && a.yaw <= kPi;
}

inline Attitude normalized(Attitude a) {
  a.roll = wrap_pi(a.roll);
  a.yaw = wrap_pi(a.yaw);
  a.pitch = std::clamp(a.pitch, -kPi / 2, kPi / 2);
  return a;
}

}  // namespace smartprism
