#include "smartprism/pipeline.hpp"
#include "smartprism/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace smartprism;

namespace {

ScenarioConfig quiet_static() {
  ScenarioConfig c;
  c.noise = NoiseSpec::none();
  c.duration = 12.0;
  return c;
}

ScenarioConfig sixty_degree_motion() {
  ScenarioConfig c;
  c.noise = NoiseSpec::none();
  c.roll.amplitude = 60.0 * kDegToRad;
  c.roll.frequency = 0.013;
  c.pitch.amplitude = 60.0 * kDegToRad;
  c.pitch.frequency = 0.011;
  return c;
}

// IMU position in the navigation frame for a fixed POI.
Vec3 imu_position(const ScenarioConfig& c, double t) {
  return c.poi_nav - rotation_b_to_n(c.profile().attitude(t)) * c.lever_arms.imu_to_poi_b;
}

}  // namespace

TEST(Sim, StaticZeroNoiseAccelIsGravity) {
  const auto c = quiet_static();
  const auto sc = generate_scenario(c);
  for (const auto& s : sc.imu) {
    EXPECT_NEAR(s.accel.x(), 0.0, 1e-12);
    EXPECT_NEAR(s.accel.y(), 0.0, 1e-12);
    EXPECT_NEAR(s.accel.z(), c.gravity, 1e-12);
    EXPECT_LE(s.gyro.cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Sim, StaticObservationsPointAtPrism) {
  const auto c = quiet_static();
  const auto sc = generate_scenario(c);
  for (const auto& o : sc.rts) {
    const Vec3 prism = c.rts_station + polar_to_cartesian(o);
    EXPECT_LE((prism - (c.poi_nav + Vec3(0, 0, 1.0676))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Sim, TruthLeverConsistencyAtSixtyDegrees) {
  const auto c = sixty_degree_motion();
  const auto sc = generate_scenario(c);
  const Vec3 lever = prism_to_poi_body(c.lever_arms);
  double max_err = 0.0;
  for (const auto& g : sc.truth)
    max_err = std::max(max_err, (g.poi_nav - (g.prism_nav + rotation_b_to_n(g.attitude) * lever)).norm());
  EXPECT_LE(max_err, 1e-12);
  EXPECT_EQ(sc.truth.front().poi_nav, c.poi_nav);
}

TEST(Sim, ObservationsReconstructTruthPrism) {
  const auto c = sixty_degree_motion();
  const auto sc = generate_scenario(c);
  for (const auto& o : sc.rts) {
    const Vec3 expected = truth_prism(c, c.profile().attitude(o.timestamp));
    EXPECT_LE((c.rts_station + polar_to_cartesian(o) - expected).norm(), 1e-12);
  }
}

TEST(Sim, SampleCountsAndTimes) {
  const auto c = sixty_degree_motion();
  const auto sc = generate_scenario(c);
  EXPECT_EQ(sc.imu.size(), 6000u);
  EXPECT_EQ(sc.rts.size(), 300u);
  // Every RTS epoch coincides with an IMU epoch at these rates.
  EXPECT_EQ(sc.truth.size(), 6000u);
  EXPECT_DOUBLE_EQ(sc.imu[150].timestamp, 1.5);
  EXPECT_DOUBLE_EQ(sc.rts[7].timestamp, 1.4);
  for (std::size_t i = 1; i < sc.imu.size(); ++i) EXPECT_GT(sc.imu[i].timestamp, sc.imu[i - 1].timestamp);
}

TEST(Sim, SameSeedSameStreams) {
  ScenarioConfig c = sixty_degree_motion();
  c.noise = NoiseSpec{};
  c.seed = 77;
  const auto a = generate_scenario(c);
  const auto b = generate_scenario(c);
  ASSERT_EQ(a.imu.size(), b.imu.size());
  for (std::size_t i = 0; i < a.imu.size(); ++i) {
    EXPECT_EQ(a.imu[i].accel, b.imu[i].accel);
    EXPECT_EQ(a.imu[i].gyro, b.imu[i].gyro);
  }
  for (std::size_t i = 0; i < a.rts.size(); ++i) {
    EXPECT_EQ(a.rts[i].slant_distance, b.rts[i].slant_distance);
    EXPECT_EQ(a.rts[i].zenith_angle, b.rts[i].zenith_angle);
  }
  c.seed = 78;
  const auto d = generate_scenario(c);
  EXPECT_NE(a.imu[0].accel, d.imu[0].accel);
}

TEST(Sim, GyroBiasMagnitude) {
  ScenarioConfig c = quiet_static();
  c.noise.gyro_bias = 0.3;
  const auto sc = generate_scenario(c);
  EXPECT_NEAR(sc.gyro_bias.norm(), 0.3 * kDegToRad / 3600.0, 1e-18);
  EXPECT_LE((sc.imu[0].gyro - sc.gyro_bias).norm(), 1e-20);
}

TEST(LeverAccel, StaticIsZero) {
  const auto c = quiet_static();
  EXPECT_EQ(lever_kinematic_accel(c.profile(), c.lever_arms, 5.0), Vec3::Zero());
}

TEST(LeverAccel, ConstantRollRateIsCentripetal) {
  // Pure roll at 0.5 rad/s, at the instant roll = 0: |a| = w^2 * |L| = 0.25 * 0.992.
  TiltProfile p;
  p.roll.rate = 0.5;
  const LeverArms arms{Vec3(0, 0, 0.0756), Vec3(0, 0, -0.992)};
  const Vec3 a = lever_kinematic_accel(p, arms, 0.0);
  EXPECT_NEAR(a.norm(), 0.248, 1e-12);
  // The IMU sits 0.992 m above the POI and is pulled back toward it.
  EXPECT_NEAR(a.z(), -0.248, 1e-12);
  TiltProfile q = p;
  q.roll.rate = 1.0;
  EXPECT_NEAR(lever_kinematic_accel(q, arms, 0.0).norm(), 4 * a.norm(), 1e-12);
}

TEST(LeverAccel, MatchesFiniteDifferenceOfImuPosition) {
  const auto c = sixty_degree_motion();
  const double h = 1e-3;
  for (double t : {11.0, 17.3, 25.0, 38.8, 52.1}) {
    const Vec3 fd = (imu_position(c, t + h) - 2 * imu_position(c, t) + imu_position(c, t - h)) / (h * h);
    const Vec3 a = lever_kinematic_accel(c.profile(), c.lever_arms, t);
    EXPECT_LE((fd - a).norm(), 1e-6) << "t=" << t;
  }
}

TEST(BodyRates, MatchAttitudeDerivative) {
  // R' = R [w]x, checked with a central difference of the rotation matrix.
  const auto c = sixty_degree_motion();
  const auto p = c.profile();
  const double h = 1e-5;
  for (double t : {12.0, 30.0, 47.5}) {
    const Mat3 dr = (rotation_b_to_n(p.attitude(t + h)) - rotation_b_to_n(p.attitude(t - h))) / (2 * h);
    const Mat3 skew = rotation_b_to_n(p.attitude(t)).transpose() * dr;
    const Vec3 w = body_rates(p.attitude(t), p.euler_rates(t));
    EXPECT_NEAR(skew(2, 1), w.x(), 1e-8);
    EXPECT_NEAR(skew(0, 2), w.y(), 1e-8);
    EXPECT_NEAR(skew(1, 0), w.z(), 1e-8);
    const Vec3 wp = body_rates(p.attitude(t + h), p.euler_rates(t + h));
    const Vec3 wm = body_rates(p.attitude(t - h), p.euler_rates(t - h));
    EXPECT_LE(((wp - wm) / (2 * h) - body_accels(p.attitude(t), p.euler_rates(t), p.euler_accels(t))).norm(), 1e-7);
  }
}

TEST(Sim, MotionStartsAfterIdle) {
  const auto c = sixty_degree_motion();
  const auto sc = generate_scenario(c);
  for (const auto& s : sc.imu) {
    if (s.timestamp > c.idle_duration - 1e-9) break;
    EXPECT_LE(std::abs(s.accel.z() - c.gravity), 1e-12);
  }
  EXPECT_GT(std::abs(sc.truth.back().attitude.roll), 1e-3);
}

TEST(Sim, StationAbovePoiIsInfeasible) {
  ScenarioConfig c = quiet_static();
  c.rts_station = c.poi_nav + Vec3(0, 0, 5.0);
  EXPECT_THROW(generate_scenario(c), DegenerateGeometry);
}

TEST(Sim, InvalidConfigurations) {
  ScenarioConfig c;
  c.roll.amplitude = 70 * kDegToRad;
  EXPECT_THROW(generate_scenario(c), InvalidArgument);
  c = {};
  c.pitch.rate = 0.1;
  EXPECT_THROW(generate_scenario(c), InvalidArgument);
  c = {};
  c.idle_duration = 5.0;
  EXPECT_THROW(generate_scenario(c), InvalidArgument);
  c = {};
  c.noise.accel_noise_sigma = -1.0;
  EXPECT_THROW(generate_scenario(c), InvalidArgument);
}

TEST(Sim, AccelNoiseScalesLinearlyWithSigma) {
  // Same seed, same draws: residuals scale exactly with sigma.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig c1 = quiet_static();
    c1.seed = seed;
    c1.noise.accel_noise_sigma = 0.01;
    ScenarioConfig c2 = c1;
    c2.noise.accel_noise_sigma = 0.02;
    const auto a = generate_scenario(c1);
    const auto b = generate_scenario(c2);
    double ra = 0.0, rb = 0.0;
    for (std::size_t i = 0; i < a.imu.size(); ++i) {
      ra += (a.imu[i].accel - Vec3(0, 0, c1.gravity)).squaredNorm();
      rb += (b.imu[i].accel - Vec3(0, 0, c1.gravity)).squaredNorm();
    }
    EXPECT_NEAR(std::sqrt(rb / ra), 2.0, 1e-9);
    // Per-axis sample sigma close to the configured one.
    EXPECT_NEAR(std::sqrt(ra / (3.0 * static_cast<double>(a.imu.size()))), 0.01, 0.0005);
  }
}

TEST(Sim, ZeroNoisePipelineWithTruthAttitudeHitsPoi) {
  // Fusing perfect observations with the true attitude lands exactly on the POI.
  const auto c = sixty_degree_motion();
  const auto sc = generate_scenario(c);
  double worst = 0.0;
  for (const auto& o : sc.rts) {
    const Vec3 prism = c.rts_station + polar_to_cartesian(o);
    const Vec3 poi = poi_position(prism, c.profile().attitude(o.timestamp), c.lever_arms);
    worst = std::max(worst, (poi - c.poi_nav).norm());
  }
  EXPECT_LE(worst, 1e-9);
}
