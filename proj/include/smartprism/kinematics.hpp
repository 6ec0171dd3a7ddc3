#pragma once

#include "smartprism/core.hpp"

namespace smartprism {

/// Rigid body-frame offsets from the IMU center, meters.
struct LeverArms {
  Vec3 imu_to_prism_b = Vec3::Zero();
  Vec3 imu_to_poi_b = Vec3::Zero();
};

/// Body -> navigation rotation, R = Rz(yaw) * Ry(pitch) * Rx(roll).
///
/// Navigation frame is right-handed, z up; at zero attitude the body frame
/// coincides with it.
inline Mat3 rotation_b_to_n(const Attitude& att) {
  const double sr = std::sin(att.roll), cr = std::cos(att.roll);
  const double sp = std::sin(att.pitch), cp = std::cos(att.pitch);
  const double sy = std::sin(att.yaw), cy = std::cos(att.yaw);
  Mat3 r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return r;
}

inline Vec3 prism_to_poi_body(const LeverArms& arms) {
  return arms.imu_to_poi_b - arms.imu_to_prism_b;
}

inline Vec3 rotate_lever(const Mat3& r_b_to_n, const Vec3& lever_b) { return r_b_to_n * lever_b; }

/// Tilt-compensated point of interest: prism position plus the lever arm
/// rotated into the navigation frame.
inline Vec3 poi_position(const Vec3& prism_nav, const Attitude& att, const LeverArms& arms) {
  return prism_nav + rotate_lever(rotation_b_to_n(att), prism_to_poi_body(arms));
}

}  // namespace smartprism
