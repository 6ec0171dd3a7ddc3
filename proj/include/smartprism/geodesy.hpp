#pragma once

// Total-station polar observations and the 3D similarity (Helmert) transform
// between the instrument frame and the navigation frame.

#include "smartprism/core.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smartprism {

struct RtsObservation {
  double timestamp = 0.0;       // s
  double slant_distance = 0.0;  // m
  double horizontal_angle = 0.0;  // rad, counterclockwise from +x
  double zenith_angle = 0.0;      // rad, from +z; pi/2 is a horizontal sight
};

inline void validate(const RtsObservation& obs) {
  if (!std::isfinite(obs.timestamp) || !std::isfinite(obs.slant_distance) ||
      !std::isfinite(obs.horizontal_angle) || !std::isfinite(obs.zenith_angle))
    throw InvalidArgument("RTS observation contains a non-finite value");
  if (!(obs.slant_distance > 0.0)) throw InvalidArgument("slant distance must be > 0");
  if (!(obs.zenith_angle > 0.0 && obs.zenith_angle < kPi))
    throw InvalidArgument("zenith angle must lie in (0, pi)");
}

struct HelmertParams {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static HelmertParams identity() { return {}; }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("Helmert scale must be > 0");
    if (!rotation.allFinite() || !translation.allFinite())
      throw InvalidArgument("Helmert parameters must be finite");
    const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9)
      throw InvalidArgument("Helmert rotation must be orthonormal with det +1");
  }
};

/// Prism coordinates in the instrument frame.
inline Vec3 polar_to_cartesian(const RtsObservation& obs) {
  const double horizontal = obs.slant_distance * std::sin(obs.zenith_angle);
  return {horizontal * std::cos(obs.horizontal_angle),
          horizontal * std::sin(obs.horizontal_angle),
          obs.slant_distance * std::cos(obs.zenith_angle)};
}

inline Vec3 apply_helmert(const HelmertParams& p, const Vec3& point) {
  return p.scale * (p.rotation * point) + p.translation;
}

struct PointPair {
  Vec3 source;
  Vec3 target;
};

/// Least-squares similarity transform mapping sources onto targets.
///
/// Closed form: remove centroids, factor the cross-covariance with an SVD,
/// flip the weakest axis if the orthogonal factor comes out as a reflection,
/// then take scale = trace(D S) / var(source). Minimizes
/// sum |target - (s R source + t)|^2.
inline HelmertParams fit_helmert(std::span<const PointPair> pairs) {
  const auto n = pairs.size();
  if (n < 3)
    throw InvalidArgument("Helmert fit needs at least 3 point pairs, got " + std::to_string(n));

  Vec3 mean_src = Vec3::Zero();
  Vec3 mean_dst = Vec3::Zero();
  for (const auto& p : pairs) {
    if (!p.source.allFinite() || !p.target.allFinite())
      throw InvalidArgument("Helmert fit input contains a non-finite coordinate");
    mean_src += p.source;
    mean_dst += p.target;
  }
  mean_src /= static_cast<double>(n);
  mean_dst /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  double var_src = 0.0;
  for (const auto& p : pairs) {
    const Vec3 ds = p.source - mean_src;
    const Vec3 dt = p.target - mean_dst;
    cov += dt * ds.transpose();
    var_src += ds.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_src /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();  // descending
  // Rank >= 2 determines the rotation uniquely; three points are always
  // coplanar, so only collinear (or collapsed) configurations are rejected.
  if (!(sv(0) > 0.0) || sv(1) < 1e-9 * sv(0))
    throw DegenerateGeometry(
        "Helmert fit is degenerate: point configuration is collinear or collapsed");

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 s_diag(1.0, 1.0, 1.0);
  if (u.determinant() * v.determinant() < 0.0) s_diag(2) = -1.0;

  HelmertParams out;
  out.rotation = u * s_diag.asDiagonal() * v.transpose();
  out.scale = sv.dot(s_diag) / var_src;
  out.translation = mean_dst - out.scale * (out.rotation * mean_src);
  return out;
}

/// RMS of |target - apply(source)| over the pairs.
inline double helmert_rms_residual(const HelmertParams& p, std::span<const PointPair> pairs) {
  if (pairs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& pr : pairs) acc += (pr.target - apply_helmert(p, pr.source)).squaredNorm();
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

}  // namespace smartprism
