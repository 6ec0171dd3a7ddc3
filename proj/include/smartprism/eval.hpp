#pragma once

// Error statistics of estimated points against a reference, in millimeters.

#include "smartprism/core.hpp"

#include <fmt/format.h>

#include <span>
#include <string>
#include <vector>

namespace smartprism {

struct ErrorStats {
  Vec3 mean = Vec3::Zero();  // mm
  Vec3 std = Vec3::Zero();   // mm, sample standard deviation (n - 1)
  double rmse3d = 0.0;       // mm
  std::size_t n = 0;
};

/// RMSE_3D implied by per-axis means and sample stds:
///   rmse^2 = sum_axes(mean^2 + (n - 1) / n * std^2).
inline double reconstruct_rmse3d(const Vec3& mean, const Vec3& std, std::size_t n) {
  if (n == 0) throw InvalidArgument("sample count must be >= 1");
  const double k = static_cast<double>(n - 1) / static_cast<double>(n);
  return std::sqrt(mean.squaredNorm() + k * std.squaredNorm());
}

/// Residuals are estimate - reference; inputs in meters.
inline ErrorStats compute_stats(std::span<const Vec3> estimates, const Vec3& reference) {
  if (estimates.empty()) throw InvalidArgument("compute_stats needs at least one estimate");
  const auto n = estimates.size();
  const double nd = static_cast<double>(n);

  Vec3 mean = Vec3::Zero();
  double sq = 0.0;
  for (const auto& e : estimates) {
    const Vec3 r = (e - reference) * 1e3;
    mean += r;
    sq += r.squaredNorm();
  }
  mean /= nd;

  Vec3 var = Vec3::Zero();
  for (const auto& e : estimates) var += ((e - reference) * 1e3 - mean).cwiseAbs2();

  ErrorStats s;
  s.n = n;
  s.mean = mean;
  s.std = n > 1 ? Vec3((var / (nd - 1.0)).cwiseSqrt()) : Vec3::Zero();
  s.rmse3d = std::sqrt(sq / nd);
  return s;
}

/// Residuals against a per-sample reference (truth trajectory mode).
inline ErrorStats compute_stats(std::span<const Vec3> estimates, std::span<const Vec3> references) {
  if (estimates.size() != references.size())
    throw InvalidArgument("estimates and references differ in length");
  std::vector<Vec3> residuals;
  residuals.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) residuals.push_back(estimates[i] - references[i]);
  return compute_stats(residuals, Vec3::Zero());
}

struct LabeledStats {
  std::string label;
  ErrorStats stats;
};

/// Fixed-width table, all quantities in mm with 3 decimals.
inline std::string render_report(std::span<const LabeledStats> rows) {
  std::string out = fmt::format("{:<12}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>11}{:>8}\n", "ID",
                                "mean_dX", "mean_dY", "mean_dZ", "std_dX", "std_dY", "std_dZ",
                                "RMSE_3D", "n");
  for (const auto& row : rows) {
    const auto& s = row.stats;
    out += fmt::format("{:<12}{:>10.3f}{:>10.3f}{:>10.3f}{:>10.3f}{:>10.3f}{:>10.3f}{:>11.3f}{:>8}\n",
                       row.label, s.mean.x(), s.mean.y(), s.mean.z(), s.std.x(), s.std.y(),
                       s.std.z(), s.rmse3d, s.n);
  }
  return out;
}

// Machine-readable stats, one row per series.
inline constexpr std::string_view kStatsCsvHeader =
    "id,mean_x_mm,mean_y_mm,mean_z_mm,std_x_mm,std_y_mm,std_z_mm,rmse3d_mm,n";

inline std::string format_stats_row(const LabeledStats& row) {
  const auto& s = row.stats;
  return fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}", row.label,
                     s.mean.x(), s.mean.y(), s.mean.z(), s.std.x(), s.std.y(), s.std.z(), s.rmse3d,
                     s.n);
}

}  // namespace smartprism
