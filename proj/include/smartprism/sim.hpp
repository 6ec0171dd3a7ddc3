#pragma once

// Ground-truth scenarios of a pole pivoting about a fixed ground point, with
// synthetic IMU and total-station streams.
//
// The attitude of every axis follows
//   angle(tau) = offset + rate * tau + amplitude * sin(2 pi f tau + phase),
// with tau = t - idle_duration clamped at zero, so the leading idle segment is
// static. All derivatives used below are analytic.

#include "smartprism/attitude.hpp"
#include "smartprism/geodesy.hpp"
#include "smartprism/kinematics.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_on_sphere.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace smartprism {

/// One Euler-angle channel; all angles in radians, frequency in Hz.
struct AxisProfile {
  double offset = 0.0;
  double rate = 0.0;  // rad/s
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;

  double value(double tau) const {
    tau = std::max(tau, 0.0);
    return offset + rate * tau + amplitude * std::sin(2.0 * kPi * frequency * tau + phase);
  }
  double first_derivative(double tau) const {
    if (tau < 0.0) return 0.0;
    const double w = 2.0 * kPi * frequency;
    return rate + amplitude * w * std::cos(w * tau + phase);
  }
  double second_derivative(double tau) const {
    if (tau < 0.0) return 0.0;
    const double w = 2.0 * kPi * frequency;
    return -amplitude * w * w * std::sin(w * tau + phase);
  }
};

struct TiltProfile {
  AxisProfile roll;
  AxisProfile pitch;
  AxisProfile yaw;  // only offset and rate are meaningful for a constant/drifting heading
  double start_time = 0.0;  // s; motion starts here

  /// Unwrapped Euler angles.
  Attitude attitude(double t) const {
    const double tau = t - start_time;
    return {roll.value(tau), pitch.value(tau), yaw.value(tau)};
  }
  Vec3 euler_rates(double t) const {
    const double tau = t - start_time;
    return {roll.first_derivative(tau), pitch.first_derivative(tau), yaw.first_derivative(tau)};
  }
  Vec3 euler_accels(double t) const {
    const double tau = t - start_time;
    return {roll.second_derivative(tau), pitch.second_derivative(tau),
            yaw.second_derivative(tau)};
  }
};

/// Body angular rate from Z-Y-X Euler angles and their rates.
inline Vec3 body_rates(const Attitude& a, const Vec3& euler_rate) {
  const double sr = std::sin(a.roll), cr = std::cos(a.roll);
  const double sp = std::sin(a.pitch), cp = std::cos(a.pitch);
  const double dr = euler_rate.x(), dp = euler_rate.y(), dy = euler_rate.z();
  return {dr - sp * dy, cr * dp + sr * cp * dy, -sr * dp + cr * cp * dy};
}

/// Time derivative of body_rates along the profile.
inline Vec3 body_accels(const Attitude& a, const Vec3& euler_rate, const Vec3& euler_accel) {
  const double sr = std::sin(a.roll), cr = std::cos(a.roll);
  const double sp = std::sin(a.pitch), cp = std::cos(a.pitch);
  const double dr = euler_rate.x(), dp = euler_rate.y(), dy = euler_rate.z();
  const double ddr = euler_accel.x(), ddp = euler_accel.y(), ddy = euler_accel.z();
  return {ddr - cp * dp * dy - sp * ddy,
          -sr * dr * dp + cr * ddp + cr * dr * cp * dy - sr * sp * dp * dy + sr * cp * ddy,
          -cr * dr * dp - sr * ddp - sr * dr * cp * dy - cr * sp * dp * dy + cr * cp * ddy};
}

/// Navigation-frame acceleration of the IMU point while the body pivots about
/// the fixed POI. The IMU sits at poi - R * imu_to_poi_b, hence
///   a = -R (dw x L + w x (w x L)),  w = body rate, L = imu_to_poi_b.
/// Evaluated analytically.
inline Vec3 lever_kinematic_accel(const TiltProfile& profile, const LeverArms& arms, double t) {
  const Attitude att = profile.attitude(t);
  const Vec3 rates = profile.euler_rates(t);
  const Vec3 w = body_rates(att, rates);
  const Vec3 dw = body_accels(att, rates, profile.euler_accels(t));
  const Vec3& lever = arms.imu_to_poi_b;
  return -(rotation_b_to_n(att) * (dw.cross(lever) + w.cross(w.cross(lever))));
}

struct NoiseSpec {
  double gyro_noise_density = 0.0005;  // deg/(s sqrt(Hz))
  double gyro_bias = 0.3;              // deg/h, constant per run, random direction
  double accel_noise_sigma = 0.01;     // m/s^2 per sample
  double rts_range_sigma = 0.001;      // m
  double rts_angle_sigma = 5e-6;       // rad

  static NoiseSpec none() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }

  void validate() const {
    for (double v : {gyro_noise_density, gyro_bias, accel_noise_sigma, rts_range_sigma,
                     rts_angle_sigma})
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("noise terms must be >= 0");
  }
};

inline constexpr double kMaxTiltAmplitude = 60.0 * kDegToRad;

struct ScenarioConfig {
  double duration = 60.0;  // s
  double imu_rate = 100.0;  // Hz
  double rts_rate = 5.0;    // Hz
  double idle_duration = 10.0;  // s, static prefix used for gyro bias calibration
  std::size_t calibration_count = 1000;
  double gravity = 9.80665;
  Vec3 poi_nav{2.1312, 0.9983, -1.5374};
  LeverArms lever_arms{Vec3(0.0, 0.0, 0.0756), Vec3(0.0, 0.0, -0.9920)};
  AxisProfile roll;
  AxisProfile pitch;
  AxisProfile yaw;
  Vec3 rts_station = Vec3::Zero();
  NoiseSpec noise;
  std::uint64_t seed = 1;

  TiltProfile profile() const { return {roll, pitch, yaw, idle_duration}; }

  void validate() const {
    if (!(imu_rate > 0.0) || !(rts_rate > 0.0)) throw InvalidArgument("rates must be > 0");
    if (calibration_count < 1) throw InvalidArgument("calibration_count must be >= 1");
    if (!(gravity > 0.0)) throw InvalidArgument("gravity must be > 0");
    if (!(idle_duration >= static_cast<double>(calibration_count) / imu_rate))
      throw InvalidArgument("idle_duration must cover calibration_count / imu_rate seconds");
    if (!(duration > idle_duration)) throw InvalidArgument("duration must exceed idle_duration");
    if (std::abs(roll.amplitude) > kMaxTiltAmplitude + 1e-12)
      throw InvalidArgument("roll amplitude exceeds 60 deg");
    if (std::abs(pitch.amplitude) > kMaxTiltAmplitude + 1e-12)
      throw InvalidArgument("pitch amplitude exceeds 60 deg");
    if (pitch.rate != 0.0) throw InvalidArgument("pitch rate must be 0 (pitch must stay bounded)");
    if (std::abs(pitch.offset) + std::abs(pitch.amplitude) >= kPi / 2)
      throw InvalidArgument("pitch excursion must stay below 90 deg");
    if (yaw.amplitude != 0.0) throw InvalidArgument("yaw supports only offset and drift rate");
    if (!poi_nav.allFinite() || !rts_station.allFinite() ||
        !lever_arms.imu_to_prism_b.allFinite() || !lever_arms.imu_to_poi_b.allFinite())
      throw InvalidArgument("geometry must be finite");
    noise.validate();
  }
};

struct GroundTruthSample {
  double timestamp = 0.0;
  Attitude attitude;  // wrapped
  Vec3 prism_nav = Vec3::Zero();
  Vec3 poi_nav = Vec3::Zero();
};

struct Scenario {
  std::vector<ImuSample> imu;
  std::vector<RtsObservation> rts;
  std::vector<GroundTruthSample> truth;  // at every IMU and RTS timestamp
  Vec3 gyro_bias = Vec3::Zero();         // rad/s, as drawn for this run
};

inline Vec3 truth_prism(const ScenarioConfig& cfg, const Attitude& att) {
  return cfg.poi_nav - rotate_lever(rotation_b_to_n(att), prism_to_poi_body(cfg.lever_arms));
}

inline Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const TiltProfile profile = cfg.profile();

  std::mt19937_64 master(cfg.seed);
  std::mt19937_64 bias_rng(master());
  std::mt19937_64 imu_rng(master());
  std::mt19937_64 rts_rng(master());
  boost::random::normal_distribution<double> unit_normal(0.0, 1.0);

  Scenario out;
  {
    boost::random::uniform_on_sphere<double> direction(3);
    const auto d = direction(bias_rng);
    out.gyro_bias = Vec3(d[0], d[1], d[2]) * (cfg.noise.gyro_bias * kDegToRad / 3600.0);
  }

  const auto imu_count = static_cast<std::size_t>(std::floor(cfg.duration * cfg.imu_rate));
  const auto rts_count = static_cast<std::size_t>(std::floor(cfg.duration * cfg.rts_rate));
  const double gyro_sigma = cfg.noise.gyro_noise_density * kDegToRad * std::sqrt(cfg.imu_rate);
  const Vec3 gravity_up(0.0, 0.0, cfg.gravity);

  out.imu.reserve(imu_count);
  for (std::size_t k = 0; k < imu_count; ++k) {
    const double t = static_cast<double>(k) / cfg.imu_rate;
    const Attitude att = profile.attitude(t);
    const Mat3 r = rotation_b_to_n(att);
    const Vec3 accel_nav = lever_kinematic_accel(profile, cfg.lever_arms, t);
    const Vec3 rates = body_rates(att, profile.euler_rates(t));

    ImuSample s;
    s.timestamp = t;
    s.accel = r.transpose() * (accel_nav + gravity_up);
    s.gyro = rates + out.gyro_bias;
    for (int i = 0; i < 3; ++i) s.accel(i) += cfg.noise.accel_noise_sigma * unit_normal(imu_rng);
    for (int i = 0; i < 3; ++i) s.gyro(i) += gyro_sigma * unit_normal(imu_rng);
    out.imu.push_back(s);
  }

  out.rts.reserve(rts_count);
  for (std::size_t k = 0; k < rts_count; ++k) {
    const double t = static_cast<double>(k) / cfg.rts_rate;
    const Vec3 d = truth_prism(cfg, profile.attitude(t)) - cfg.rts_station;
    const double slant = d.norm();
    const double horizontal = std::hypot(d.x(), d.y());
    if (!(slant > 0.0) || horizontal <= 1e-9 * slant)
      throw DegenerateGeometry(
          "infeasible geometry: prism is vertically aligned with the station (zenith angle 0 or "
          "180 deg)");
    RtsObservation obs;
    obs.timestamp = t;
    obs.slant_distance = slant + cfg.noise.rts_range_sigma * unit_normal(rts_rng);
    obs.horizontal_angle = std::atan2(d.y(), d.x()) + cfg.noise.rts_angle_sigma * unit_normal(rts_rng);
    obs.zenith_angle = std::atan2(horizontal, d.z()) + cfg.noise.rts_angle_sigma * unit_normal(rts_rng);
    if (!(obs.slant_distance > 0.0) || !(obs.zenith_angle > 0.0 && obs.zenith_angle < kPi))
      throw DegenerateGeometry("infeasible geometry: noisy observation leaves the valid domain");
    out.rts.push_back(obs);
  }

  std::vector<double> times;
  times.reserve(imu_count + rts_count);
  for (const auto& s : out.imu) times.push_back(s.timestamp);
  for (const auto& o : out.rts) times.push_back(o.timestamp);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  out.truth.reserve(times.size());
  for (double t : times) {
    const Attitude att = profile.attitude(t);
    out.truth.push_back({t, normalized(att), truth_prism(cfg, att), cfg.poi_nav});
  }
  return out;
}

}  // namespace smartprism
