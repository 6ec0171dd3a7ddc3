#pragma once

// Wire formats.
//
//   IMU,<t_s>,<ax>,<ay>,<az>,<gx>,<gy>,<gz>     accel m/s^2, gyro rad/s
//   RTS,<t_s>,<D_m>,<Hz_deg>,<V_deg>            angles in degrees on the wire
//   fused CSV                                    see kFusedCsvHeader
//   CAN                                          3 frames of 2 x int32 LE, 0.1 mm/LSB
//
// Numbers are parsed with std::from_chars, so parsing never depends on the
// process locale. Whitespace (space, tab) around separators is ignored.

#include "smartprism/geodesy.hpp"
#include "smartprism/pipeline.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smartprism {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line_no = 0)
      : Error(line_no ? fmt::format("line {}: {}", line_no, what) : what), line_no_(line_no) {}
  std::size_t line() const { return line_no_; }

 private:
  std::size_t line_no_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view token, std::string_view field, std::size_t line_no) {
  if (token.empty()) throw ParseError(fmt::format("field '{}' is empty", field), line_no);
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range)
    throw ParseError(fmt::format("field '{}' is out of range: '{}'", field, token), line_no);
  if (ec != std::errc() || ptr != last)
    throw ParseError(fmt::format("field '{}' is not a number: '{}'", field, token), line_no);
  if (!std::isfinite(value))
    throw ParseError(fmt::format("field '{}' is not finite: '{}'", field, token), line_no);
  return value;
}

template <std::size_t N>
std::array<double, N> parse_tagged(std::string_view line, std::string_view tag,
                                   const std::array<std::string_view, N>& names,
                                   std::size_t line_no) {
  const auto fields = split_fields(line);
  if (fields.size() != N + 1)
    throw ParseError(fmt::format("{} line needs {} fields, got {}", tag, N + 1, fields.size()),
                     line_no);
  if (fields[0] != tag)
    throw ParseError(fmt::format("expected tag '{}', got '{}'", tag, fields[0]), line_no);
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_number(fields[i + 1], names[i], line_no);
  return out;
}

inline std::string fixed9(double v) { return fmt::format("{:.9f}", v); }

}  // namespace detail

// --- IMU / RTS text streams -------------------------------------------------

inline ImuSample parse_imu_line(std::string_view line, std::size_t line_no = 0) {
  static constexpr std::array<std::string_view, 7> kNames{"t_s", "ax", "ay", "az",
                                                          "gx",  "gy", "gz"};
  const auto v = detail::parse_tagged(line, "IMU", kNames, line_no);
  return {v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])};
}

inline std::string format_imu_line(const ImuSample& s) {
  using detail::fixed9;
  return fmt::format("IMU,{},{},{},{},{},{},{}", fixed9(s.timestamp), fixed9(s.accel.x()),
                     fixed9(s.accel.y()), fixed9(s.accel.z()), fixed9(s.gyro.x()),
                     fixed9(s.gyro.y()), fixed9(s.gyro.z()));
}

inline RtsObservation parse_rts_line(std::string_view line, std::size_t line_no = 0) {
  static constexpr std::array<std::string_view, 4> kNames{"t_s", "D_m", "Hz_deg", "V_deg"};
  const auto v = detail::parse_tagged(line, "RTS", kNames, line_no);
  if (!(v[1] > 0.0))
    throw ParseError(fmt::format("slant distance must be > 0, got {}", v[1]), line_no);
  if (!(v[3] > 0.0 && v[3] < 180.0))
    throw ParseError(fmt::format("zenith angle must lie in (0, 180) deg, got {}", v[3]), line_no);
  return {v[0], v[1], v[2] * kDegToRad, v[3] * kDegToRad};
}

inline std::string format_rts_line(const RtsObservation& o) {
  using detail::fixed9;
  return fmt::format("RTS,{},{},{},{}", fixed9(o.timestamp), fixed9(o.slant_distance),
                     fixed9(o.horizontal_angle * kRadToDeg), fixed9(o.zenith_angle * kRadToDeg));
}

/// True for lines a stream reader should skip: blank or starting with '#'.
inline bool is_comment_or_blank(std::string_view line) {
  line = detail::trim(line);
  return line.empty() || line.front() == '#';
}

template <typename Parser>
auto read_stream_lines(std::istream& in, Parser parse) {
  std::vector<decltype(parse(std::string_view{}, std::size_t{}))> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    out.push_back(parse(line, line_no));
  }
  return out;
}

inline std::vector<ImuSample> read_imu_stream(std::istream& in) {
  return read_stream_lines(in, [](std::string_view l, std::size_t n) { return parse_imu_line(l, n); });
}

inline std::vector<RtsObservation> read_rts_stream(std::istream& in) {
  return read_stream_lines(in, [](std::string_view l, std::size_t n) { return parse_rts_line(l, n); });
}

// --- Fused-record CSV ---------------------------------------------------------

inline constexpr std::string_view kFusedCsvHeader =
    "t_s,prism_x_m,prism_y_m,prism_z_m,poi_x_m,poi_y_m,poi_z_m,roll_deg,pitch_deg,yaw_deg,alpha,"
    "imu_t_s";

inline std::string write_csv_record(const FusedRecord& r) {
  using detail::fixed9;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", fixed9(r.timestamp),
                     fixed9(r.prism_nav.x()), fixed9(r.prism_nav.y()), fixed9(r.prism_nav.z()),
                     fixed9(r.poi_nav.x()), fixed9(r.poi_nav.y()), fixed9(r.poi_nav.z()),
                     fixed9(r.attitude_used.roll * kRadToDeg),
                     fixed9(r.attitude_used.pitch * kRadToDeg),
                     fixed9(r.attitude_used.yaw * kRadToDeg), fixed9(r.alpha_used),
                     fixed9(r.imu_timestamp_used));
}

inline FusedRecord read_csv_record(std::string_view line, std::size_t line_no = 0) {
  static constexpr std::array<std::string_view, 12> kNames{
      "t_s",     "prism_x_m", "prism_y_m", "prism_z_m", "poi_x_m", "poi_y_m",
      "poi_z_m", "roll_deg",  "pitch_deg", "yaw_deg",   "alpha",   "imu_t_s"};
  const auto fields = detail::split_fields(line);
  if (fields.size() != kNames.size())
    throw ParseError(
        fmt::format("fused CSV row needs {} fields, got {}", kNames.size(), fields.size()), line_no);
  std::array<double, 12> v{};
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = detail::parse_number(fields[i], kNames[i], line_no);
  FusedRecord r;
  r.timestamp = v[0];
  r.prism_nav = Vec3(v[1], v[2], v[3]);
  r.poi_nav = Vec3(v[4], v[5], v[6]);
  r.attitude_used = {v[7] * kDegToRad, v[8] * kDegToRad, v[9] * kDegToRad};
  r.alpha_used = v[10];
  r.imu_timestamp_used = v[11];
  return r;
}

inline void write_fused_csv(std::ostream& out, const std::vector<FusedRecord>& records) {
  out << kFusedCsvHeader << '\n';
  for (const auto& r : records) out << write_csv_record(r) << '\n';
}

inline std::vector<FusedRecord> read_fused_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("fused CSV is empty; header missing", 1);
  if (detail::trim(line) != kFusedCsvHeader)
    throw ParseError(fmt::format("unexpected fused CSV header '{}'", detail::trim(line)), 1);
  std::vector<FusedRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    out.push_back(read_csv_record(line, line_no));
  }
  return out;
}

// --- CAN ------------------------------------------------------------------------
//
// Extended (29-bit) identifiers, 8-byte payloads, little-endian fields.
//   base_id + 0 : prism_x:i32  prism_y:i32
//   base_id + 1 : prism_z:i32  poi_x:i32
//   base_id + 2 : poi_y:i32    poi_z:i32
//   base_id + 3 : roll:i16 pitch:i16 yaw:i16 (0.01 deg)  seq:u16   (optional)
// Coordinates are 0.1 mm per LSB.

inline constexpr std::uint32_t kCanIdMask = 0x1FFFFFFFu;
inline constexpr std::uint32_t kDefaultCanBaseId = 0x18FEF000u;
inline constexpr double kCanCoordLsb = 1e-4;    // m
inline constexpr double kCanAngleLsbDeg = 0.01;  // deg

struct CanFrame {
  std::uint32_t id = 0;
  std::array<std::uint8_t, 8> payload{};
  double timestamp = 0.0;  // capture time, not part of the payload

  bool operator==(const CanFrame&) const = default;
};

class CanRangeError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void put_le(std::span<std::uint8_t> dst, std::uint32_t v) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint32_t get_le(std::span<const std::uint8_t> src) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < src.size(); ++i) v |= static_cast<std::uint32_t>(src[i]) << (8 * i);
  return v;
}

inline std::int32_t to_can_coord(double meters, std::string_view name) {
  const double counts = std::round(meters / kCanCoordLsb);
  if (!std::isfinite(counts) || counts < static_cast<double>(INT32_MIN) ||
      counts > static_cast<double>(INT32_MAX))
    throw CanRangeError(fmt::format("{} = {} m does not fit the CAN coordinate range", name, meters));
  return static_cast<std::int32_t>(counts);
}

inline std::int16_t to_can_angle(double rad, std::string_view name) {
  const double counts = std::round(rad * kRadToDeg / kCanAngleLsbDeg);
  if (!std::isfinite(counts) || counts < INT16_MIN || counts > INT16_MAX)
    throw CanRangeError(fmt::format("{} does not fit the CAN angle range", name));
  return static_cast<std::int16_t>(counts);
}

inline CanFrame pack_pair(std::uint32_t id, std::int32_t a, std::int32_t b, double t) {
  CanFrame f;
  f.id = id;
  f.timestamp = t;
  put_le(std::span(f.payload).subspan(0, 4), static_cast<std::uint32_t>(a));
  put_le(std::span(f.payload).subspan(4, 4), static_cast<std::uint32_t>(b));
  return f;
}

inline std::int32_t field_i32(const CanFrame& f, std::size_t offset) {
  return static_cast<std::int32_t>(get_le(std::span(f.payload).subspan(offset, 4)));
}

inline void check_base_id(std::uint32_t base_id, std::uint32_t frames) {
  if (base_id > kCanIdMask || base_id + (frames - 1) > kCanIdMask)
    throw CanRangeError(fmt::format("CAN base id 0x{:X} exceeds the 29-bit range", base_id));
}

}  // namespace detail

/// Three coordinate frames for one record. Throws CanRangeError when a
/// coordinate is beyond +-214.7483647 m or the ids leave the 29-bit space.
inline std::array<CanFrame, 3> encode_can_frames(const FusedRecord& r,
                                                 std::uint32_t base_id = kDefaultCanBaseId) {
  using detail::to_can_coord;
  detail::check_base_id(base_id, 3);
  const auto px = to_can_coord(r.prism_nav.x(), "prism_x");
  const auto py = to_can_coord(r.prism_nav.y(), "prism_y");
  const auto pz = to_can_coord(r.prism_nav.z(), "prism_z");
  const auto qx = to_can_coord(r.poi_nav.x(), "poi_x");
  const auto qy = to_can_coord(r.poi_nav.y(), "poi_y");
  const auto qz = to_can_coord(r.poi_nav.z(), "poi_z");
  return {detail::pack_pair(base_id, px, py, r.timestamp),
          detail::pack_pair(base_id + 1, pz, qx, r.timestamp),
          detail::pack_pair(base_id + 2, qy, qz, r.timestamp)};
}

struct CanPosition {
  Vec3 prism_nav = Vec3::Zero();
  Vec3 poi_nav = Vec3::Zero();
  double timestamp = 0.0;
};

inline CanPosition decode_can_frames(std::span<const CanFrame> frames,
                                     std::uint32_t base_id = kDefaultCanBaseId) {
  if (frames.size() != 3)
    throw ParseError(fmt::format("expected 3 CAN frames, got {}", frames.size()));
  for (std::uint32_t i = 0; i < 3; ++i)
    if (frames[i].id != base_id + i)
      throw ParseError(fmt::format("CAN frame {} has id 0x{:X}, expected 0x{:X}", i, frames[i].id,
                                   base_id + i));
  using detail::field_i32;
  CanPosition out;
  out.prism_nav = Vec3(field_i32(frames[0], 0), field_i32(frames[0], 4), field_i32(frames[1], 0)) *
                  kCanCoordLsb;
  out.poi_nav = Vec3(field_i32(frames[1], 4), field_i32(frames[2], 0), field_i32(frames[2], 4)) *
                kCanCoordLsb;
  out.timestamp = frames[0].timestamp;
  return out;
}

/// Optional fourth frame carrying the attitude used and a sequence counter.
inline CanFrame encode_can_attitude_frame(const FusedRecord& r, std::uint16_t sequence,
                                          std::uint32_t base_id = kDefaultCanBaseId) {
  detail::check_base_id(base_id, 4);
  CanFrame f;
  f.id = base_id + 3;
  f.timestamp = r.timestamp;
  const auto roll = detail::to_can_angle(r.attitude_used.roll, "roll");
  const auto pitch = detail::to_can_angle(r.attitude_used.pitch, "pitch");
  const auto yaw = detail::to_can_angle(r.attitude_used.yaw, "yaw");
  auto p = std::span(f.payload);
  detail::put_le(p.subspan(0, 2), static_cast<std::uint16_t>(roll));
  detail::put_le(p.subspan(2, 2), static_cast<std::uint16_t>(pitch));
  detail::put_le(p.subspan(4, 2), static_cast<std::uint16_t>(yaw));
  detail::put_le(p.subspan(6, 2), sequence);
  return f;
}

struct CanAttitude {
  Attitude attitude;
  std::uint16_t sequence = 0;
};

inline CanAttitude decode_can_attitude_frame(const CanFrame& f,
                                             std::uint32_t base_id = kDefaultCanBaseId) {
  if (f.id != base_id + 3)
    throw ParseError(fmt::format("attitude frame has id 0x{:X}, expected 0x{:X}", f.id, base_id + 3));
  const auto p = std::span<const std::uint8_t>(f.payload);
  const auto angle = [&](std::size_t off) {
    return static_cast<std::int16_t>(detail::get_le(p.subspan(off, 2))) * kCanAngleLsbDeg *
           kDegToRad;
  };
  return {{angle(0), angle(2), angle(4)}, static_cast<std::uint16_t>(detail::get_le(p.subspan(6, 2)))};
}

/// candump-style compact line: 8 hex digits of id, '#', 16 hex digits of payload.
inline std::string format_can_dump_line(const CanFrame& f) {
  std::string out = fmt::format("{:08X}#", f.id);
  for (auto b : f.payload) out += fmt::format("{:02X}", b);
  return out;
}

inline CanFrame parse_can_dump_line(std::string_view line, std::size_t line_no = 0) {
  line = detail::trim(line);
  const auto hash = line.find('#');
  if (hash == std::string_view::npos) throw ParseError("CAN dump line lacks '#'", line_no);
  const auto id_text = line.substr(0, hash);
  const auto data_text = line.substr(hash + 1);
  CanFrame f;
  auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), f.id, 16);
  if (id_text.empty() || ec != std::errc() || p != id_text.data() + id_text.size() ||
      f.id > kCanIdMask)
    throw ParseError(fmt::format("bad CAN id '{}'", id_text), line_no);
  if (data_text.size() != 16)
    throw ParseError(fmt::format("CAN payload must be 16 hex digits, got '{}'", data_text), line_no);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto byte = data_text.substr(2 * i, 2);
    auto [q, ec2] = std::from_chars(byte.data(), byte.data() + 2, f.payload[i], 16);
    if (ec2 != std::errc() || q != byte.data() + 2)
      throw ParseError(fmt::format("bad CAN payload byte '{}'", byte), line_no);
  }
  return f;
}

}  // namespace smartprism
