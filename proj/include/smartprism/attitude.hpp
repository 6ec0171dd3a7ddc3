#pragma once

// Roll/pitch estimation with an adaptive complementary filter.
//
// Sensor convention: a level, static sensor reads accel = (0, 0, +g). Gyro
// rates are body-frame, rad/s. Yaw is open-loop gyro integration and drifts.

#include "smartprism/core.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace smartprism {

struct ImuSample {
  double timestamp = 0.0;  // s
  Vec3 accel = Vec3::Zero();  // m/s^2, body
  Vec3 gyro = Vec3::Zero();   // rad/s, body
};

inline bool is_finite(const ImuSample& s) {
  return std::isfinite(s.timestamp) && s.accel.allFinite() && s.gyro.allFinite();
}

struct FilterConfig {
  double alpha_base = 0.9;
  double delta_a_threshold = 1.0;  // m/s^2
  double gravity = 9.80665;        // m/s^2
  std::size_t bias_calibration_count = 1000;

  void validate() const {
    if (!(alpha_base >= 0.0 && alpha_base <= 1.0))
      throw InvalidArgument("alpha_base must lie in [0, 1]");
    if (!(delta_a_threshold > 0.0)) throw InvalidArgument("delta_a_threshold must be > 0");
    if (!(gravity > 0.0)) throw InvalidArgument("gravity must be > 0");
    if (bias_calibration_count < 1) throw InvalidArgument("bias_calibration_count must be >= 1");
  }
};

struct FilterState {
  Attitude attitude;
  std::optional<double> last_timestamp;
  Vec3 gyro_bias = Vec3::Zero();
  double last_alpha = 0.0;  // weight of the gyro path in the last step; 0 on the seeding step
};

/// Gravity-referenced roll and pitch from a single accelerometer reading.
inline std::pair<double, double> accel_angles(const Vec3& accel) {
  if (!(accel.norm() > 0.0))
    throw DegenerateGeometry("accelerometer vector has zero norm; no gravity reference");
  const double roll = std::atan2(accel.y(), accel.z());
  const double pitch = std::atan2(-accel.x(), std::hypot(accel.y(), accel.z()));
  return {roll, pitch};
}

/// Gyro confidence: alpha_base when |a| matches g, rising linearly to 1.0 at
/// delta_a_threshold of deviation and saturating above it.
inline double adaptive_alpha(const Vec3& accel, const FilterConfig& cfg) {
  const double delta_a = std::abs(accel.norm() - cfg.gravity);
  return std::min(1.0, cfg.alpha_base + (1.0 - cfg.alpha_base) * delta_a / cfg.delta_a_threshold);
}

/// Advances the filter by one IMU sample.
///
/// The first sample seeds roll/pitch from the accelerometer. Afterwards each
/// axis is blended as alpha * (previous + rate * dt) + (1 - alpha) * accel_angle,
/// with the correction taken along the shortest arc so the roll seam at +-pi
/// does not average opposite angles. The state's gyro bias is subtracted first.
inline FilterState filter_step(const FilterState& state, const ImuSample& sample,
                               const FilterConfig& cfg) {
  if (!is_finite(sample)) throw InvalidArgument("IMU sample contains a non-finite value");
  if (state.last_timestamp && sample.timestamp < *state.last_timestamp)
    throw InvalidArgument("IMU timestamp went backwards");

  const Vec3 rate = sample.gyro - state.gyro_bias;
  const auto [roll_acc, pitch_acc] = accel_angles(sample.accel);

  FilterState next = state;
  next.last_timestamp = sample.timestamp;

  if (!state.last_timestamp) {
    next.attitude.roll = roll_acc;
    next.attitude.pitch = pitch_acc;
    next.last_alpha = 0.0;
    next.attitude = normalized(next.attitude);
    return next;
  }

  const double dt = sample.timestamp - *state.last_timestamp;
  const double alpha = adaptive_alpha(sample.accel, cfg);

  const double roll_pred = state.attitude.roll + rate.x() * dt;
  const double pitch_pred = state.attitude.pitch + rate.y() * dt;
  next.attitude.roll = roll_pred + (1.0 - alpha) * wrap_pi(roll_acc - roll_pred);
  next.attitude.pitch = pitch_pred + (1.0 - alpha) * (pitch_acc - pitch_pred);
  next.attitude.yaw = state.attitude.yaw + rate.z() * dt;
  next.last_alpha = alpha;
  next.attitude = normalized(next.attitude);
  return next;
}

/// Mean gyro reading over an idle segment.
inline Vec3 calibrate_bias(std::span<const ImuSample> samples, std::size_t required_count) {
  if (required_count < 1) required_count = 1;
  if (samples.size() < required_count)
    throw InvalidArgument("gyro bias calibration needs at least " +
                          std::to_string(required_count) + " samples, got " +
                          std::to_string(samples.size()));
  Vec3 sum = Vec3::Zero();
  for (const auto& s : samples) sum += s.gyro;
  return sum / static_cast<double>(samples.size());
}

inline Vec3 calibrate_bias(std::span<const ImuSample> samples, const FilterConfig& cfg) {
  return calibrate_bias(samples, cfg.bias_calibration_count);
}

/// External heading correction; roll and pitch are left untouched.
inline FilterState set_yaw(FilterState state, double yaw) {
  if (!std::isfinite(yaw)) throw InvalidArgument("yaw must be finite");
  state.attitude.yaw = wrap_pi(yaw);
  return state;
}

}  // namespace smartprism
