#include "smartprism/geodesy.hpp"
#include "smartprism/kinematics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace smartprism;

namespace {

// Uniformly random rotation from a normalized Gaussian quaternion.
Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

std::vector<PointPair> transformed(const std::vector<Vec3>& pts, double s, const Mat3& r,
                                   const Vec3& t) {
  std::vector<PointPair> out;
  for (const auto& p : pts) out.push_back({p, s * r * p + t});
  return out;
}

const std::vector<Vec3> kTetra{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};

}  // namespace

TEST(Polar, HorizontalSightAlongX) {
  const Vec3 p = polar_to_cartesian({0.0, 10.0, 0.0, kPi / 2});
  EXPECT_NEAR(p.x(), 10.0, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.z(), 0.0, 1e-12);
}

TEST(Polar, InclinedSight) {
  const Vec3 p = polar_to_cartesian({0.0, 2.0, kPi / 2, kPi / 3});
  EXPECT_NEAR(p.x(), 0.0, 1e-12);
  EXPECT_NEAR(p.y(), 1.7320508075688772, 1e-12);
  EXPECT_NEAR(p.z(), 1.0, 1e-12);
}

TEST(Polar, NormEqualsSlantDistance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.1, 2000.0), hz(-kPi, kPi), v(1e-3, kPi - 1e-3);
  for (int i = 0; i < 10000; ++i) {
    const RtsObservation obs{0.0, d(rng), hz(rng), v(rng)};
    EXPECT_NEAR(polar_to_cartesian(obs).norm(), obs.slant_distance, 1e-12 * obs.slant_distance);
  }
}

TEST(Polar, ObservationValidation) {
  EXPECT_THROW(validate(RtsObservation{0, 0.0, 0, 1.0}), InvalidArgument);
  EXPECT_THROW(validate(RtsObservation{0, 1.0, 0, 0.0}), InvalidArgument);
  EXPECT_THROW(validate(RtsObservation{0, 1.0, 0, kPi}), InvalidArgument);
  EXPECT_NO_THROW(validate(RtsObservation{0, 1.0, 0, 1.0}));
}

TEST(ApplyHelmert, IdentityLeavesPoint) {
  const Vec3 p(2131.2, 998.3, -1537.4);
  EXPECT_EQ(apply_helmert(HelmertParams::identity(), p), p);
}

TEST(ApplyHelmert, ScaleAndTranslate) {
  HelmertParams h;
  h.scale = 2.0;
  h.translation = Vec3(1, 0, 0);
  EXPECT_EQ(apply_helmert(h, Vec3(1, 1, 1)), Vec3(3, 2, 2));
}

TEST(ApplyHelmert, QuarterTurn) {
  HelmertParams h;
  h.rotation = rotation_b_to_n({0, 0, kPi / 2});
  const Vec3 p = apply_helmert(h, Vec3(1, 0, 0));
  EXPECT_NEAR(p.x(), 0.0, 1e-15);
  EXPECT_NEAR(p.y(), 1.0, 1e-15);
  EXPECT_NEAR(p.z(), 0.0, 1e-15);
}

TEST(FitHelmert, IdentityPairs) {
  const auto h = fit_helmert(transformed(kTetra, 1.0, Mat3::Identity(), Vec3::Zero()));
  EXPECT_NEAR(h.scale, 1.0, 1e-12);
  EXPECT_LE((h.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(h.translation.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitHelmert, PureTranslation) {
  const auto h = fit_helmert(transformed(kTetra, 1.0, Mat3::Identity(), Vec3(5, -2, 1)));
  EXPECT_NEAR(h.scale, 1.0, 1e-12);
  EXPECT_LE((h.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((h.translation - Vec3(5, -2, 1)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitHelmert, RecoversRandomSimilarity) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> scale(0.5, 2.0), coord(-50.0, 50.0), shift(-1000, 1000);
  for (int trial = 0; trial < 100; ++trial) {
    const double s = scale(rng);
    const Mat3 r = random_rotation(rng);
    const Vec3 t(shift(rng), shift(rng), shift(rng));
    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(coord(rng), coord(rng), coord(rng));
    const auto h = fit_helmert(transformed(pts, s, r, t));
    EXPECT_NEAR(h.scale / s, 1.0, 1e-9);
    EXPECT_LE((h.rotation - r).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((h.translation - t).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(h.rotation.determinant(), 1.0, 1e-12);
  }
}

TEST(FitHelmert, ThreeCoplanarPairsSuffice) {
  std::mt19937_64 rng(8);
  const Mat3 r = random_rotation(rng);
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(0, 7, 0)};
  const auto h = fit_helmert(transformed(pts, 1.3, r, Vec3(1, 2, 3)));
  EXPECT_NEAR(h.scale, 1.3, 1e-12);
  EXPECT_LE((h.rotation - r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitHelmert, ReflectionIsCorrected) {
  // Targets are a mirror image: the best proper rotation must still have det +1.
  std::vector<PointPair> pairs;
  for (const auto& p : kTetra) pairs.push_back({p, Vec3(-p.x(), p.y(), p.z())});
  const auto h = fit_helmert(pairs);
  EXPECT_NEAR(h.rotation.determinant(), 1.0, 1e-12);
  EXPECT_LE((h.rotation.transpose() * h.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitHelmert, ResidualZeroForConsistentPairs) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(coord(rng), coord(rng), coord(rng));
  const auto pairs = transformed(pts, 0.9, random_rotation(rng), Vec3(3, 4, 5));
  const auto h = fit_helmert(pairs);
  for (const auto& p : pairs) EXPECT_LE((apply_helmert(h, p.source) - p.target).norm(), 1e-9);
  EXPECT_LE(helmert_rms_residual(h, pairs), 1e-9);
}

TEST(FitHelmert, NoisyResidualWithinTwoSigma) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 0.001);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PointPair> pairs;
    const Mat3 r = random_rotation(rng);
    for (int i = 0; i < 8; ++i) {
      const Vec3 p(coord(rng), coord(rng), coord(rng));
      pairs.push_back({p, r * p + Vec3(noise(rng), noise(rng), noise(rng))});
    }
    const auto h = fit_helmert(pairs);
    // Per-point 3D RMS of an isotropic sigma is sqrt(3) sigma; the fit only lowers it.
    EXPECT_LE(helmert_rms_residual(h, pairs) / std::sqrt(3.0), 2 * 0.001);
  }
}

TEST(FitHelmert, OrderInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<PointPair> pairs;
  const Mat3 r = random_rotation(rng);
  for (int i = 0; i < 12; ++i) {
    const Vec3 p(coord(rng), coord(rng), coord(rng));
    pairs.push_back({p, 1.1 * r * p + Vec3(noise(rng), 2.0, noise(rng))});
  }
  const auto a = fit_helmert(pairs);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto b = fit_helmert(pairs);
  EXPECT_NEAR(a.scale, b.scale, 1e-12);
  EXPECT_LE((a.rotation - b.rotation).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.translation - b.translation).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitHelmert, TooFewPairs) {
  const auto pairs = transformed({Vec3(0, 0, 0), Vec3(1, 0, 0)}, 1.0, Mat3::Identity(), Vec3::Zero());
  EXPECT_THROW(fit_helmert(pairs), InvalidArgument);
}

TEST(FitHelmert, CollinearIsDegenerate) {
  const auto pairs = transformed({Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2), Vec3(5, 5, 5)}, 1.0,
                                 Mat3::Identity(), Vec3(1, 0, 0));
  try {
    fit_helmert(pairs);
    FAIL() << "expected DegenerateGeometry";
  } catch (const DegenerateGeometry& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate"), std::string::npos);
  }
}

TEST(FitHelmert, CollapsedTargetsAreDegenerate) {
  std::vector<PointPair> pairs;
  for (const auto& p : kTetra) pairs.push_back({p, Vec3(1, 1, 1)});
  EXPECT_THROW(fit_helmert(pairs), DegenerateGeometry);
}

TEST(HelmertParams, Validation) {
  HelmertParams h;
  EXPECT_NO_THROW(h.validate());
  h.scale = 0.0;
  EXPECT_THROW(h.validate(), InvalidArgument);
  h = {};
  h.rotation(0, 0) = -1.0;  // reflection
  EXPECT_THROW(h.validate(), InvalidArgument);
}
