#pragma once

// Asynchronous fusion of the IMU stream (~100 Hz) with total-station
// observations (~5 Hz).
//
// Both streams must be timestamped on one shared clock by the caller. The
// pipeline is a plain value type with no internal locking: push/drain calls
// have to be serialized by the integrator.

#include "smartprism/attitude.hpp"
#include "smartprism/geodesy.hpp"
#include "smartprism/kinematics.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iterator>
#include <optional>
#include <vector>

namespace smartprism {

/// Fixed-capacity FIFO that evicts its oldest element on overflow.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw InvalidArgument("ring buffer capacity must be >= 1");
  }

  /// Returns true if an element had to be dropped to make room.
  bool push(T value) {
    bool dropped = false;
    if (items_.size() == capacity_) {
      items_.pop_front();
      dropped = true;
    }
    items_.push_back(std::move(value));
    return dropped;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const T& front() const { return items_.front(); }

  /// Keeps only the elements for which keep(x) is true, order preserved.
  template <typename Pred>
  void retain(Pred keep) {
    std::deque<T> kept;
    for (auto& x : items_)
      if (keep(x)) kept.push_back(std::move(x));
    items_.swap(kept);
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

enum class PairingMode {
  Replay,  // latest attitude at or before the RTS timestamp
  Live,    // latest attitude up to RTS timestamp + pairing_tolerance
};

enum class YawMode {
  Hold,       // lever rotation uses a fixed heading (set via set_yaw)
  Integrate,  // lever rotation uses the gyro-integrated heading
};

struct PipelineConfig {
  FilterConfig filter;
  LeverArms lever_arms;
  HelmertParams helmert;
  std::size_t rts_buffer_capacity = 32;
  double pairing_tolerance = 0.25;  // s, bound on attitude staleness
  double rts_latency = 0.0;         // s, subtracted from RTS timestamps on arrival
  PairingMode pairing = PairingMode::Replay;
  YawMode yaw_mode = YawMode::Hold;
  double held_yaw = 0.0;  // rad

  void validate() const {
    filter.validate();
    helmert.validate();
    if (!lever_arms.imu_to_prism_b.allFinite() || !lever_arms.imu_to_poi_b.allFinite())
      throw InvalidArgument("lever arms must be finite");
    if (rts_buffer_capacity < 1) throw InvalidArgument("rts_buffer_capacity must be >= 1");
    if (!(pairing_tolerance >= 0.0)) throw InvalidArgument("pairing_tolerance must be >= 0");
    if (!std::isfinite(rts_latency)) throw InvalidArgument("rts_latency must be finite");
    if (!std::isfinite(held_yaw)) throw InvalidArgument("held_yaw must be finite");
  }
};

struct FusedRecord {
  double timestamp = 0.0;  // RTS observation time, s
  Vec3 prism_nav = Vec3::Zero();
  Vec3 poi_nav = Vec3::Zero();
  Attitude attitude_used;
  double alpha_used = 0.0;
  double imu_timestamp_used = 0.0;
};

class Pipeline {
 public:
  struct AttitudeEstimate {
    double timestamp;
    Attitude attitude;
    double alpha;
  };

  // Attitudes kept for pairing; 512 samples is ~5 s at 100 Hz.
  static constexpr std::size_t kHistoryCapacity = 512;

  explicit Pipeline(PipelineConfig cfg)
      : cfg_((cfg.validate(), std::move(cfg))), rts_(cfg_.rts_buffer_capacity),
        history_(kHistoryCapacity) {
    if (cfg_.yaw_mode == YawMode::Hold) filter_ = set_yaw(filter_, cfg_.held_yaw);
  }

  const PipelineConfig& config() const { return cfg_; }

  bool calibrating() const { return !calibrated_; }
  std::size_t calibration_samples() const { return calibration_.size(); }
  const Vec3& gyro_bias() const { return filter_.gyro_bias; }
  const FilterState& filter_state() const { return filter_; }
  std::optional<AttitudeEstimate> latest_attitude() const {
    if (history_.empty()) return std::nullopt;
    return *std::prev(history_.end());
  }

  std::size_t rts_buffered() const { return rts_.size(); }
  std::uint64_t rts_dropped() const { return dropped_; }
  const RingBuffer<RtsObservation>& rts_buffer() const { return rts_; }

  void push_imu(const ImuSample& sample) {
    if (!is_finite(sample)) throw InvalidArgument("IMU sample contains a non-finite value");
    if (last_imu_time_ && sample.timestamp < *last_imu_time_)
      throw InvalidArgument("IMU timestamp went backwards");
    last_imu_time_ = sample.timestamp;

    if (!calibrated_) {
      calibration_.push_back(sample);
      if (calibration_.size() < cfg_.filter.bias_calibration_count) return;
      filter_.gyro_bias = calibrate_bias(calibration_, cfg_.filter);
      calibration_.clear();
      calibration_.shrink_to_fit();
      calibrated_ = true;
    }

    filter_ = filter_step(filter_, sample, cfg_.filter);
    if (cfg_.yaw_mode == YawMode::Hold) filter_ = set_yaw(filter_, cfg_.held_yaw);
    history_.push({sample.timestamp, filter_.attitude, filter_.last_alpha});
  }

  void push_rts(RtsObservation obs) {
    validate(obs);
    obs.timestamp -= cfg_.rts_latency;
    if (rts_.push(obs)) ++dropped_;
  }

  /// Pairs every buffered observation that has an eligible attitude and
  /// returns the fused records in arrival order. Observations without an
  /// eligible attitude stay buffered.
  std::vector<FusedRecord> drain() {
    std::vector<FusedRecord> out;
    if (!calibrated_) return out;
    rts_.retain([&](const RtsObservation& obs) {
      const auto* est = eligible_attitude(obs.timestamp);
      if (!est) return true;
      out.push_back(fuse(obs, *est));
      return false;
    });
    return out;
  }

 private:
  const AttitudeEstimate* eligible_attitude(double rts_time) const {
    const double upper =
        cfg_.pairing == PairingMode::Live ? rts_time + cfg_.pairing_tolerance : rts_time;
    const double lower = rts_time - cfg_.pairing_tolerance;
    // Newest first.
    for (auto it = history_.end(); it != history_.begin();) {
      --it;
      if (it->timestamp <= upper) return it->timestamp >= lower ? &*it : nullptr;
    }
    return nullptr;
  }

  FusedRecord fuse(const RtsObservation& obs, const AttitudeEstimate& est) const {
    FusedRecord rec;
    rec.timestamp = obs.timestamp;
    rec.prism_nav = apply_helmert(cfg_.helmert, polar_to_cartesian(obs));
    rec.attitude_used = est.attitude;
    rec.alpha_used = est.alpha;
    rec.imu_timestamp_used = est.timestamp;
    rec.poi_nav = poi_position(rec.prism_nav, rec.attitude_used, cfg_.lever_arms);
    return rec;
  }

  PipelineConfig cfg_;
  RingBuffer<RtsObservation> rts_;
  RingBuffer<AttitudeEstimate> history_;
  std::vector<ImuSample> calibration_;
  FilterState filter_;
  std::optional<double> last_imu_time_;
  bool calibrated_ = false;
  std::uint64_t dropped_ = 0;
};

}  // namespace smartprism
