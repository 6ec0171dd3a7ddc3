#pragma once

// File-level operations behind the `smartprism` command line tool.
//
// Every function throws smartprism::Error (or a subclass) on bad input and
// writes nothing partial: outputs are produced in memory first.

#include "smartprism/codec.hpp"
#include "smartprism/config.hpp"
#include "smartprism/eval.hpp"
#include "smartprism/pipeline.hpp"
#include "smartprism/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace smartprism {

// --- truth CSV -----------------------------------------------------------------

inline constexpr std::string_view kTruthCsvHeader =
    "t_s,roll_deg,pitch_deg,yaw_deg,prism_x_m,prism_y_m,prism_z_m,poi_x_m,poi_y_m,poi_z_m";

inline std::string format_truth_row(const GroundTruthSample& s) {
  using detail::fixed9;
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", fixed9(s.timestamp),
                     fixed9(s.attitude.roll * kRadToDeg), fixed9(s.attitude.pitch * kRadToDeg),
                     fixed9(s.attitude.yaw * kRadToDeg), fixed9(s.prism_nav.x()),
                     fixed9(s.prism_nav.y()), fixed9(s.prism_nav.z()), fixed9(s.poi_nav.x()),
                     fixed9(s.poi_nav.y()), fixed9(s.poi_nav.z()));
}

inline std::vector<GroundTruthSample> read_truth_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kTruthCsvHeader)
    throw ParseError("unexpected or missing truth CSV header", 1);
  std::vector<GroundTruthSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 10)
      throw ParseError(fmt::format("truth row needs 10 fields, got {}", f.size()), line_no);
    std::array<double, 10> v{};
    for (std::size_t i = 0; i < 10; ++i) v[i] = detail::parse_number(f[i], "truth", line_no);
    out.push_back({v[0],
                   {v[1] * kDegToRad, v[2] * kDegToRad, v[3] * kDegToRad},
                   Vec3(v[4], v[5], v[6]),
                   Vec3(v[7], v[8], v[9])});
  }
  return out;
}

// --- file helpers ----------------------------------------------------------------

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return in;
}

/// Writes via a sibling temp file and rename so readers never see a partial file.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
  }
  std::filesystem::rename(tmp, path);
}

template <typename T, typename Fmt>
std::string join_lines(const std::vector<T>& items, Fmt format, std::string_view header = {}) {
  std::string out;
  if (!header.empty()) {
    out += header;
    out += '\n';
  }
  for (const auto& x : items) {
    out += format(x);
    out += '\n';
  }
  return out;
}

}  // namespace detail

// --- simulate ------------------------------------------------------------------

struct SimulateResult {
  std::size_t imu_lines = 0;
  std::size_t rts_lines = 0;
  std::size_t truth_lines = 0;
};

inline SimulateResult write_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto imu = detail::join_lines(sc.imu, [](const ImuSample& s) { return format_imu_line(s); });
  const auto rts =
      detail::join_lines(sc.rts, [](const RtsObservation& o) { return format_rts_line(o); });
  const auto truth = detail::join_lines(
      sc.truth, [](const GroundTruthSample& s) { return format_truth_row(s); }, kTruthCsvHeader);
  detail::write_file(out_dir / "imu.txt", imu);
  detail::write_file(out_dir / "rts.txt", rts);
  detail::write_file(out_dir / "truth.csv", truth);
  return {sc.imu.size(), sc.rts.size(), sc.truth.size()};
}

inline SimulateResult run_simulate(const std::filesystem::path& config_path,
                                   const std::filesystem::path& out_dir,
                                   std::optional<std::uint64_t> seed_override = std::nullopt) {
  auto kv = KeyValueConfig::load(config_path.string());
  if (seed_override) kv.set("seed", std::to_string(*seed_override));
  return write_scenario(generate_scenario(scenario_from_config(std::move(kv))), out_dir);
}

// --- fuse ----------------------------------------------------------------------

/// Offline replay: merges both streams by timestamp (IMU first on ties) and
/// drains after every RTS observation, so each observation is paired with the
/// newest attitude at or before its (latency-corrected) timestamp.
inline std::vector<FusedRecord> replay_streams(const PipelineConfig& cfg,
                                               const std::vector<ImuSample>& imu,
                                               const std::vector<RtsObservation>& rts) {
  Pipeline pipeline(cfg);
  std::vector<FusedRecord> out;
  std::size_t i = 0;
  for (const auto& obs : rts) {
    const double t = obs.timestamp - cfg.rts_latency;
    while (i < imu.size() && imu[i].timestamp <= t) pipeline.push_imu(imu[i++]);
    pipeline.push_rts(obs);
    for (auto& r : pipeline.drain()) out.push_back(r);
  }
  while (i < imu.size()) pipeline.push_imu(imu[i++]);
  for (auto& r : pipeline.drain()) out.push_back(r);
  return out;
}

struct FuseOptions {
  std::filesystem::path imu_path;
  std::filesystem::path rts_path;
  std::optional<std::filesystem::path> config_path;   // key/value fusion config
  std::optional<std::filesystem::path> helmert_path;  // overrides helmert.* keys
  bool identity_helmert = false;
  std::filesystem::path out_csv;
  std::optional<std::filesystem::path> can_dump_path;
  std::uint32_t can_base_id = kDefaultCanBaseId;
  bool can_attitude = false;
};

inline PipelineConfig load_pipeline_config(const FuseOptions& opt) {
  auto kv = opt.config_path ? KeyValueConfig::load(opt.config_path->string()) : KeyValueConfig{};
  PipelineConfig cfg = pipeline_from_config(std::move(kv));
  if (opt.helmert_path) cfg.helmert = helmert_from_config(KeyValueConfig::load(opt.helmert_path->string()));
  if (opt.identity_helmert) cfg.helmert = HelmertParams::identity();
  return cfg;
}

inline std::vector<FusedRecord> run_fuse(const FuseOptions& opt) {
  const PipelineConfig cfg = load_pipeline_config(opt);
  auto imu_in = detail::open_input(opt.imu_path);
  auto rts_in = detail::open_input(opt.rts_path);
  const auto imu = read_imu_stream(imu_in);
  const auto rts = read_rts_stream(rts_in);
  const auto records = replay_streams(cfg, imu, rts);

  std::string csv(kFusedCsvHeader);
  csv += '\n';
  for (const auto& r : records) csv += write_csv_record(r) + '\n';

  std::string can;
  if (opt.can_dump_path) {
    std::uint16_t seq = 0;
    for (const auto& r : records) {
      for (const auto& f : encode_can_frames(r, opt.can_base_id)) can += format_can_dump_line(f) + '\n';
      if (opt.can_attitude)
        can += format_can_dump_line(encode_can_attitude_frame(r, seq, opt.can_base_id)) + '\n';
      ++seq;
    }
  }

  detail::write_file(opt.out_csv, csv);
  if (opt.can_dump_path) detail::write_file(*opt.can_dump_path, can);
  return records;
}

// --- helmert-fit ----------------------------------------------------------------

/// Pairs CSV: `sx,sy,sz,tx,ty,tz` rows; a header row with that text is optional.
inline std::vector<PointPair> read_point_pairs(std::istream& in) {
  std::vector<PointPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    if (out.empty() && detail::trim(line) == "sx,sy,sz,tx,ty,tz") continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 6) throw ParseError(fmt::format("pair row needs 6 fields, got {}", f.size()), line_no);
    std::array<double, 6> v{};
    static constexpr std::array<std::string_view, 6> kNames{"sx", "sy", "sz", "tx", "ty", "tz"};
    for (std::size_t i = 0; i < 6; ++i) v[i] = detail::parse_number(f[i], kNames[i], line_no);
    out.push_back({Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])});
  }
  return out;
}

struct HelmertFitResult {
  HelmertParams params;
  double rms_residual = 0.0;  // m
};

inline HelmertFitResult run_helmert_fit(const std::filesystem::path& pairs_path,
                                        const std::filesystem::path& out_path) {
  auto in = detail::open_input(pairs_path);
  const auto pairs = read_point_pairs(in);
  HelmertFitResult res;
  res.params = fit_helmert(pairs);
  res.rms_residual = helmert_rms_residual(res.params, pairs);
  detail::write_file(out_path, helmert_to_config(res.params) +
                                   fmt::format("# fit rms residual: {:.6e} m over {} pairs\n",
                                               res.rms_residual, pairs.size()));
  return res;
}

// --- eval ------------------------------------------------------------------------

/// Matches fused records to truth rows by timestamp (|dt| <= 1 us).
inline std::vector<std::pair<Vec3, Vec3>> match_truth(const std::vector<FusedRecord>& fused,
                                                      std::vector<GroundTruthSample> truth) {
  std::sort(truth.begin(), truth.end(),
            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  std::vector<std::pair<Vec3, Vec3>> out;
  for (const auto& r : fused) {
    auto it = std::lower_bound(truth.begin(), truth.end(), r.timestamp - 1e-6,
                               [](const auto& s, double t) { return s.timestamp < t; });
    if (it != truth.end() && std::abs(it->timestamp - r.timestamp) <= 1e-6)
      out.emplace_back(r.poi_nav, it->poi_nav);
  }
  return out;
}

struct EvalOptions {
  std::vector<std::filesystem::path> fused_paths;
  std::optional<std::filesystem::path> truth_path;
  std::optional<Vec3> reference;
  std::optional<std::filesystem::path> stats_out;
};

inline std::vector<LabeledStats> run_eval(const EvalOptions& opt, std::ostream& report) {
  if (opt.fused_paths.empty()) throw InvalidArgument("eval needs at least one fused CSV");
  if (opt.truth_path.has_value() == opt.reference.has_value())
    throw InvalidArgument("eval needs exactly one of a truth CSV or a fixed reference point");

  std::optional<std::vector<GroundTruthSample>> truth;
  if (opt.truth_path) {
    auto in = detail::open_input(*opt.truth_path);
    truth = read_truth_csv(in);
  }

  std::vector<LabeledStats> rows;
  for (std::size_t k = 0; k < opt.fused_paths.size(); ++k) {
    auto in = detail::open_input(opt.fused_paths[k]);
    const auto fused = read_fused_csv(in);
    ErrorStats stats;
    if (truth) {
      const auto matched = match_truth(fused, *truth);
      if (matched.empty())
        throw Error(fmt::format("'{}' has no timestamps in common with the truth CSV",
                                opt.fused_paths[k].string()));
      std::vector<Vec3> est, ref;
      for (const auto& [e, r] : matched) {
        est.push_back(e);
        ref.push_back(r);
      }
      stats = compute_stats(est, ref);
    } else {
      if (fused.empty())
        throw Error(fmt::format("'{}' contains no records", opt.fused_paths[k].string()));
      std::vector<Vec3> est;
      for (const auto& r : fused) est.push_back(r.poi_nav);
      stats = compute_stats(est, *opt.reference);
    }
    rows.push_back({std::to_string(k + 1), stats});
  }

  report << render_report(rows);
  if (opt.stats_out) {
    detail::write_file(*opt.stats_out,
                       detail::join_lines(rows, format_stats_row, kStatsCsvHeader));
  }
  return rows;
}

// --- stats rows / RMSE reconstruction ------------------------------------------

inline std::vector<LabeledStats> read_stats_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kStatsCsvHeader)
    throw ParseError("unexpected or missing stats CSV header", 1);
  std::vector<LabeledStats> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 9) throw ParseError(fmt::format("stats row needs 9 fields, got {}", f.size()), line_no);
    std::array<double, 7> v{};
    for (std::size_t i = 0; i < 7; ++i) v[i] = detail::parse_number(f[i + 1], "stats", line_no);
    std::size_t n = 0;
    const auto [p, ec] = std::from_chars(f[8].data(), f[8].data() + f[8].size(), n);
    if (ec != std::errc() || p != f[8].data() + f[8].size() || n == 0)
      throw ParseError(fmt::format("bad sample count '{}'", f[8]), line_no);
    out.push_back({std::string(f[0]), {Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]), v[6], n}});
  }
  return out;
}

struct Reconstruction {
  std::string label;
  double reported = 0.0;       // mm
  double reconstructed = 0.0;  // mm
  bool ok = false;
};

inline constexpr double kReconstructionTolerance = 0.2;  // mm

/// Recomputes RMSE_3D from each row's means, stds and n.
inline std::vector<Reconstruction> reconstruct_rows(const std::vector<LabeledStats>& rows,
                                                    std::ostream& report,
                                                    double tolerance = kReconstructionTolerance) {
  std::vector<Reconstruction> out;
  report << fmt::format("{:<12}{:>12}{:>16}{:>10}{:>6}\n", "ID", "RMSE_3D", "reconstructed",
                        "diff", "ok");
  for (const auto& row : rows) {
    Reconstruction r{row.label, row.stats.rmse3d,
                     reconstruct_rmse3d(row.stats.mean, row.stats.std, row.stats.n)};
    r.ok = std::abs(r.reported - r.reconstructed) <= tolerance;
    report << fmt::format("{:<12}{:>12.3f}{:>16.3f}{:>10.3f}{:>6}\n", r.label, r.reported,
                          r.reconstructed, r.reconstructed - r.reported, r.ok ? "yes" : "NO");
    out.push_back(r);
  }
  return out;
}

}  // namespace smartprism
