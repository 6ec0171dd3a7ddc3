#pragma once

// Plain-text `key = value` configuration files.
//
//   # comment
//   duration = 60
//   lever.imu_to_poi = 0, 0, -0.992
//
// Keys are unique; vectors are comma-separated. Every key a reader does not
// consume is reported as unknown, so typos fail loudly.

#include "smartprism/codec.hpp"
#include "smartprism/sim.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace smartprism {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(fmt::format("config key '{}': {}", key, what)), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError("expected 'key = value'", line_no);
      const std::string key(detail::trim(std::string_view(line).substr(0, eq)));
      const std::string value(detail::trim(std::string_view(line).substr(eq + 1)));
      if (key.empty()) throw ParseError("empty key", line_no);
      if (!cfg.values_.emplace(key, value).second)
        throw ConfigError(key, fmt::format("duplicate key on line {}", line_no));
    }
    return cfg;
  }

  static KeyValueConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("cannot open config file '{}'", path));
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  double number(const std::string& key, double fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    try {
      return detail::parse_number(*v, key, 0);
    } catch (const ParseError&) {
      throw ConfigError(key, fmt::format("'{}' is not a finite number", *v));
    }
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size())
      throw ConfigError(key, fmt::format("'{}' is not a non-negative integer", *v));
    return out;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    const auto parts = numbers(key, *v);
    if (parts.size() != 3) throw ConfigError(key, "expected 3 comma-separated numbers");
    return {parts[0], parts[1], parts[2]};
  }

  Mat3 mat3(const std::string& key, const Mat3& fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    const auto parts = numbers(key, *v);
    if (parts.size() != 9) throw ConfigError(key, "expected 9 comma-separated numbers (row-major)");
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = parts[static_cast<std::size_t>(i)];
    return m;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto* v = find(key);
    return v ? *v : fallback;
  }

  bool flag(const std::string& key, bool fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key, fmt::format("'{}' is not a boolean", *v));
  }

  /// Throws for the first key nobody asked for.
  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) throw ConfigError(key, "unknown key");
  }

 private:
  const std::string* find(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  static std::vector<double> numbers(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (auto tok : detail::split_fields(v)) {
      try {
        out.push_back(detail::parse_number(tok, key, 0));
      } catch (const ParseError&) {
        throw ConfigError(key, fmt::format("'{}' is not a list of finite numbers", v));
      }
    }
    return out;
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

namespace detail {

inline AxisProfile read_axis(KeyValueConfig& kv, const std::string& prefix, AxisProfile a) {
  a.offset = kv.number(prefix + ".offset_deg", a.offset * kRadToDeg) * kDegToRad;
  a.rate = kv.number(prefix + ".rate_deg_s", a.rate * kRadToDeg) * kDegToRad;
  a.amplitude = kv.number(prefix + ".amplitude_deg", a.amplitude * kRadToDeg) * kDegToRad;
  a.frequency = kv.number(prefix + ".frequency_hz", a.frequency);
  a.phase = kv.number(prefix + ".phase_deg", a.phase * kRadToDeg) * kDegToRad;
  return a;
}

/// Maps a validation failure back to the key that caused it.
template <typename Check>
void check_key(const std::string& key, Check ok, const std::string& what) {
  if (!ok()) throw ConfigError(key, what);
}

}  // namespace detail

/// Scenario keys (angles in degrees, everything else SI):
///   seed, duration, imu_rate, rts_rate, idle_duration, calibration_count, gravity,
///   poi, rts_station, lever.imu_to_prism, lever.imu_to_poi,
///   {roll,pitch}.{offset_deg,rate_deg_s,amplitude_deg,frequency_hz,phase_deg},
///   yaw.{offset_deg,rate_deg_s},
///   noise.{gyro_density_dps_rthz,gyro_bias_dph,accel_sigma,rts_range_sigma,rts_angle_sigma}
inline ScenarioConfig scenario_from_config(KeyValueConfig kv) {
  using detail::check_key;
  ScenarioConfig c;
  c.seed = kv.count("seed", c.seed);
  c.duration = kv.number("duration", c.duration);
  c.imu_rate = kv.number("imu_rate", c.imu_rate);
  c.rts_rate = kv.number("rts_rate", c.rts_rate);
  c.calibration_count = kv.count("calibration_count", c.calibration_count);
  c.idle_duration = kv.number("idle_duration", static_cast<double>(c.calibration_count) / c.imu_rate);
  c.gravity = kv.number("gravity", c.gravity);
  c.poi_nav = kv.vec3("poi", c.poi_nav);
  c.rts_station = kv.vec3("rts_station", c.rts_station);
  c.lever_arms.imu_to_prism_b = kv.vec3("lever.imu_to_prism", c.lever_arms.imu_to_prism_b);
  c.lever_arms.imu_to_poi_b = kv.vec3("lever.imu_to_poi", c.lever_arms.imu_to_poi_b);
  c.roll = detail::read_axis(kv, "roll", c.roll);
  c.pitch = detail::read_axis(kv, "pitch", c.pitch);
  c.yaw.offset = kv.number("yaw.offset_deg", 0.0) * kDegToRad;
  c.yaw.rate = kv.number("yaw.rate_deg_s", 0.0) * kDegToRad;
  c.noise.gyro_noise_density = kv.number("noise.gyro_density_dps_rthz", c.noise.gyro_noise_density);
  c.noise.gyro_bias = kv.number("noise.gyro_bias_dph", c.noise.gyro_bias);
  c.noise.accel_noise_sigma = kv.number("noise.accel_sigma", c.noise.accel_noise_sigma);
  c.noise.rts_range_sigma = kv.number("noise.rts_range_sigma", c.noise.rts_range_sigma);
  c.noise.rts_angle_sigma = kv.number("noise.rts_angle_sigma", c.noise.rts_angle_sigma);
  kv.reject_unknown();

  check_key("duration", [&] { return c.duration > 0.0; }, "must be > 0");
  check_key("imu_rate", [&] { return c.imu_rate > 0.0; }, "must be > 0");
  check_key("rts_rate", [&] { return c.rts_rate > 0.0; }, "must be > 0");
  check_key("calibration_count", [&] { return c.calibration_count >= 1; }, "must be >= 1");
  check_key("gravity", [&] { return c.gravity > 0.0; }, "must be > 0");
  check_key("idle_duration",
            [&] { return c.idle_duration >= static_cast<double>(c.calibration_count) / c.imu_rate; },
            "must cover calibration_count / imu_rate seconds");
  check_key("duration", [&] { return c.duration > c.idle_duration; }, "must exceed idle_duration");
  check_key("roll.amplitude_deg",
            [&] { return std::abs(c.roll.amplitude) <= kMaxTiltAmplitude + 1e-12; },
            "exceeds the 60 deg excursion bound");
  check_key("pitch.amplitude_deg",
            [&] { return std::abs(c.pitch.amplitude) <= kMaxTiltAmplitude + 1e-12; },
            "exceeds the 60 deg excursion bound");
  check_key("pitch.rate_deg_s", [&] { return c.pitch.rate == 0.0; }, "must be 0");
  check_key("pitch.offset_deg",
            [&] { return std::abs(c.pitch.offset) + std::abs(c.pitch.amplitude) < kPi / 2; },
            "offset + amplitude must stay below 90 deg");
  const auto non_negative = [](double v) { return v >= 0.0; };
  check_key("noise.gyro_density_dps_rthz", [&] { return non_negative(c.noise.gyro_noise_density); }, "must be >= 0");
  check_key("noise.gyro_bias_dph", [&] { return non_negative(c.noise.gyro_bias); }, "must be >= 0");
  check_key("noise.accel_sigma", [&] { return non_negative(c.noise.accel_noise_sigma); }, "must be >= 0");
  check_key("noise.rts_range_sigma", [&] { return non_negative(c.noise.rts_range_sigma); }, "must be >= 0");
  check_key("noise.rts_angle_sigma", [&] { return non_negative(c.noise.rts_angle_sigma); }, "must be >= 0");
  c.validate();
  return c;
}

/// Helmert parameter file keys: scale, rotation (9 values, row-major), translation.
inline HelmertParams helmert_from_config(KeyValueConfig kv, const std::string& prefix = "") {
  HelmertParams p;
  p.scale = kv.number(prefix + "scale", p.scale);
  p.rotation = kv.mat3(prefix + "rotation", p.rotation);
  p.translation = kv.vec3(prefix + "translation", p.translation);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(prefix + "rotation", e.what());
  }
  return p;
}

inline std::string helmert_to_config(const HelmertParams& p) {
  const Mat3& r = p.rotation;
  return fmt::format(
      "# 3D similarity transform: target = scale * rotation * source + translation\n"
      "scale = {:.15g}\n"
      "rotation = {:.15g}, {:.15g}, {:.15g}, {:.15g}, {:.15g}, {:.15g}, {:.15g}, {:.15g}, {:.15g}\n"
      "translation = {:.15g}, {:.15g}, {:.15g}\n",
      p.scale, r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2),
      p.translation.x(), p.translation.y(), p.translation.z());
}

/// Fusion keys:
///   lever.imu_to_prism, lever.imu_to_poi,
///   filter.{alpha_base,delta_a_threshold,gravity,bias_calibration_count},
///   pipeline.{rts_buffer_capacity,pairing_tolerance,rts_latency,pairing,yaw_mode,held_yaw_deg},
///   helmert.{scale,rotation,translation}
inline PipelineConfig pipeline_from_config(KeyValueConfig kv) {
  using detail::check_key;
  PipelineConfig c;
  c.lever_arms = ScenarioConfig{}.lever_arms;
  c.lever_arms.imu_to_prism_b = kv.vec3("lever.imu_to_prism", c.lever_arms.imu_to_prism_b);
  c.lever_arms.imu_to_poi_b = kv.vec3("lever.imu_to_poi", c.lever_arms.imu_to_poi_b);
  c.filter.alpha_base = kv.number("filter.alpha_base", c.filter.alpha_base);
  c.filter.delta_a_threshold = kv.number("filter.delta_a_threshold", c.filter.delta_a_threshold);
  c.filter.gravity = kv.number("filter.gravity", c.filter.gravity);
  c.filter.bias_calibration_count =
      kv.count("filter.bias_calibration_count", c.filter.bias_calibration_count);
  c.rts_buffer_capacity = kv.count("pipeline.rts_buffer_capacity", c.rts_buffer_capacity);
  c.pairing_tolerance = kv.number("pipeline.pairing_tolerance", c.pairing_tolerance);
  c.rts_latency = kv.number("pipeline.rts_latency", c.rts_latency);
  const auto pairing = kv.text("pipeline.pairing", "replay");
  const auto yaw_mode = kv.text("pipeline.yaw_mode", "hold");
  c.held_yaw = kv.number("pipeline.held_yaw_deg", 0.0) * kDegToRad;
  c.helmert.scale = kv.number("helmert.scale", c.helmert.scale);
  c.helmert.rotation = kv.mat3("helmert.rotation", c.helmert.rotation);
  c.helmert.translation = kv.vec3("helmert.translation", c.helmert.translation);
  kv.reject_unknown();

  if (pairing == "replay") c.pairing = PairingMode::Replay;
  else if (pairing == "live") c.pairing = PairingMode::Live;
  else throw ConfigError("pipeline.pairing", "expected 'replay' or 'live'");
  if (yaw_mode == "hold") c.yaw_mode = YawMode::Hold;
  else if (yaw_mode == "integrate") c.yaw_mode = YawMode::Integrate;
  else throw ConfigError("pipeline.yaw_mode", "expected 'hold' or 'integrate'");

  check_key("filter.alpha_base", [&] { return c.filter.alpha_base >= 0.0 && c.filter.alpha_base <= 1.0; }, "must lie in [0, 1]");
  check_key("filter.delta_a_threshold", [&] { return c.filter.delta_a_threshold > 0.0; }, "must be > 0");
  check_key("filter.gravity", [&] { return c.filter.gravity > 0.0; }, "must be > 0");
  check_key("filter.bias_calibration_count", [&] { return c.filter.bias_calibration_count >= 1; }, "must be >= 1");
  check_key("pipeline.rts_buffer_capacity", [&] { return c.rts_buffer_capacity >= 1; }, "must be >= 1");
  check_key("pipeline.pairing_tolerance", [&] { return c.pairing_tolerance >= 0.0; }, "must be >= 0");
  check_key("helmert.scale", [&] { return c.helmert.scale > 0.0; }, "must be > 0");
  try {
    c.helmert.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("helmert.rotation", e.what());
  }
  c.validate();
  return c;
}

}  // namespace smartprism
