#include <gtest/gtest.h>

#include <sstream>

#include "fueterlab/blowup.hpp"
#include "fueterlab/targets.hpp"

using namespace fueterlab;

namespace {

TargetPtr flat() { return std::make_shared<FlatTarget>(); }

ChartPoint q(const Vec4& v) { return ChartPoint{TargetId::flat, 0, v}; }

BallEvaluator constant() {
  return [](const Vec3&) { return q(Vec4(1, 2, 3, 4)); };
}

// x1 i + x2 j - 2 x3 k
BallEvaluator linear_fueter() {
  return [](const Vec3& x) { return q(Vec4(0, x[0], x[1], -2 * x[2])); };
}

// x / |x|^3 as an imaginary quaternion
BallEvaluator green() {
  return [](const Vec3& x) {
    double r = x.norm();
    return q(Vec4(0, x[0], x[1], x[2]) / (r * r * r));
  };
}

BallEvaluator smooth_map() {
  return [](const Vec3& x) {
    return q(Vec4(x[0] * x[1], x[0] + 0.5 * x[2] * x[2], std::sin(x[1]), x[2] + x[0] * x[0]));
  };
}

SphereEvaluator sphere_profile() {
  return [](const Vec3& x) { return q(Vec4(x[0] * x[1], x[0], x[1] + x[2] * x[2], 0.3 * x[2])); };
}

double node_gap(const BallMap& a, const BallMap& b) {
  double m = 0;
  for (std::size_t n = 0; n < a.nodes().size(); ++n) m = std::max(m, (a.nodes()[n].x - b.nodes()[n].x).norm());
  return m;
}

}  // namespace

TEST(BallMap, ValidatesDomainAndShape) {
  EXPECT_THROW(BallMap(flat(), constant(), Vec3::Zero(), 1.0, 1.0), PreconditionError);
  auto ah = make_atiyah_hitchin();
  EXPECT_THROW(BallMap(ah, [](const Vec3&) { return ChartPoint{TargetId::atiyah_hitchin, 1, Vec4(3, 0, 0, 1)}; },
                       Vec3::Zero(), 1.0),
               DomainError);
  BallMap m(flat(), constant(), Vec3(1, 0, 0), 0.5, 0.1, 6, 8);
  EXPECT_EQ(m.nodes().size(), 6u * 2 * 8 * 8);
  EXPECT_EQ(m.ntheta(), 8);
  for (double s : m.shells()) {
    EXPECT_GT(s, 0.1);
    EXPECT_LT(s, 0.5);
  }
}

TEST(Monotonicity, ConstantMap) {
  BallMap m(flat(), constant(), Vec3::Zero(), 1.0);
  auto P = monotonicity_profile(m, Vec3::Zero(), {0.25, 0.5, 1.0});
  for (std::size_t k = 0; k < P.radii.size(); ++k) {
    EXPECT_EQ(P.N[k], 0.0);
    EXPECT_EQ(P.D[k], 0.0);
    EXPECT_EQ(P.defect[k], 0.0);
  }
  EXPECT_EQ(P.fueter_residual, 0.0);
}

TEST(Monotonicity, LinearFueterMap) {
  BallMap m(flat(), linear_fueter(), Vec3::Zero(), 2.0);
  for (Vec3 c : {Vec3(0, 0, 0), Vec3(0.3, -0.2, 0.1)}) {
    auto P = monotonicity_profile(m, c, {0.2, 0.5, 1.0, 1.5});
    EXPECT_LE(P.fueter_residual, 1e-10);
    for (std::size_t k = 0; k < P.radii.size(); ++k) {
      double r = P.radii[k];
      EXPECT_NEAR(P.N[k], 8 * kPi * r * r, 1e-6 * (1 + P.N[k]));
      EXPECT_NEAR(P.D[k], 8 * kPi * (r * r - 0.04), 1e-6 * (1 + P.N[k]));
    }
    EXPECT_LE(P.max_pair_defect, 1e-6);
    EXPECT_TRUE(P.nondecreasing);
  }
}

TEST(Monotonicity, GreenMapIsFueterAndSatisfiesTheEquality) {
  BallMap m(flat(), green(), Vec3(1, 0, 0), 0.6);
  // the map is Fueter away from the origin
  for (Vec3 y : {Vec3(1, 0, 0), Vec3(0.7, 0.3, -0.2), Vec3(1.2, -0.4, 0.3)})
    EXPECT_LE(ball_fueter_residual(m, y), 1e-8);
  std::vector<double> radii{0.1, 0.2, 0.3, 0.4, 0.5};
  ProfileOptions coarse, fine;
  coarse.radial_nodes = 8;
  coarse.ntheta = 12;
  fine.radial_nodes = 10;
  fine.ntheta = 16;
  auto Pc = monotonicity_profile(m, Vec3(1, 0, 0), radii, coarse);
  auto Pf = monotonicity_profile(m, Vec3(1, 0, 0), radii, fine);
  EXPECT_LE(Pc.max_pair_defect, 1e-3);
  EXPECT_LE(Pf.max_pair_defect, Pc.max_pair_defect / 8);
  EXPECT_LE(Pf.fueter_residual, 1e-8);
  EXPECT_TRUE(Pf.nondecreasing);
}

TEST(Monotonicity, NonFueterMapBreaksTheEquality) {
  BallMap m(flat(), smooth_map(), Vec3::Zero(), 1.0);
  auto P = monotonicity_profile(m, Vec3::Zero(), {0.25, 0.5, 1.0});
  EXPECT_GT(P.fueter_residual, 0.1);
  EXPECT_GT(P.max_pair_defect, 1e-3);
}

TEST(Monotonicity, CenterOutsideDomain) {
  BallMap m(flat(), constant(), Vec3::Zero(), 1.0);
  EXPECT_THROW(monotonicity_profile(m, Vec3(2, 0, 0), {0.1}), DomainError);
  EXPECT_THROW(monotonicity_profile(m, Vec3(0.5, 0, 0), {0.6}), DomainError);
}

TEST(Monotonicity, CsvExport) {
  BallMap m(flat(), linear_fueter(), Vec3::Zero(), 1.0);
  std::ostringstream os;
  write_profile_csv(os, monotonicity_profile(m, Vec3::Zero(), {0.5, 1.0}));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "r,N,D,defect");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Density, SmoothMapHasZeroDensity) {
  BallMap m(flat(), smooth_map(), Vec3::Zero(), 1.0);
  auto E = density_estimate(m, Vec3::Zero());
  EXPECT_LE(E.theta, 1e-4);
  EXPECT_NEAR(E.order, 2.0, 0.1);
  EXPECT_FALSE(E.noisy);
  // bounded gradient near the center
  EXPECT_LE(E.sup_gradient.front(), 2 * E.sup_gradient.back());
}

TEST(Density, HomogeneousMapHasConstantProfile) {
  auto m = homogeneous_ball_map(flat(), sphere_profile());
  auto E = density_estimate(m, Vec3::Zero());
  EXPECT_TRUE(E.flat_profile);
  EXPECT_GT(E.theta, 0.1);
  for (double v : E.values) EXPECT_NEAR(v, E.theta, 1e-8 * E.theta);
  // gradient blows up like 1/r
  EXPECT_GT(E.sup_gradient.front(), 8 * E.sup_gradient.back());
}

TEST(Density, ConstantMap) {
  BallMap m(flat(), constant(), Vec3::Zero(), 1.0);
  auto E = density_estimate(m, Vec3::Zero());
  EXPECT_EQ(E.theta, 0.0);
}

TEST(Rescale, HomogeneousMapIsFixed) {
  auto m = homogeneous_ball_map(flat(), sphere_profile());
  for (double r : {0.5, 0.25, 0.1}) EXPECT_LE(node_gap(m, rescale(m, Vec3::Zero(), r)), 1e-6);
}

TEST(Rescale, LinearMapGradientScales) {
  BallMap m(flat(), linear_fueter(), Vec3::Zero(), 2.0);
  Vec3 x(0.2, 0.1, -0.3);
  auto mr = rescale(m, x, 0.5);
  for (Vec3 y : {Vec3(0.1, 0.2, 0.3), Vec3(-0.5, 0.4, 0.0)})
    EXPECT_NEAR(std::sqrt(energy_density(mr, y)), 0.5 * std::sqrt(energy_density(m, x + 0.5 * y)), 1e-9);
}

TEST(Rescale, EnergyCovarianceOnGreenMap) {
  BallMap m(flat(), green(), Vec3(1, 0, 0), 0.6);
  const double r = 0.5;
  auto mr = rescale(m, Vec3(1, 0, 0), r);
  for (double sigma : {0.4, 0.8, 1.0}) {
    double a = monotonicity_profile(mr, Vec3::Zero(), {sigma}).N[0];
    double b = monotonicity_profile(m, Vec3(1, 0, 0), {sigma * r}).N[0];
    EXPECT_LE(std::abs(a - b), 1e-4 * b);
  }
}

TEST(Rescale, Semigroup) {
  BallMap m(flat(), smooth_map(), Vec3::Zero(), 1.0);
  Vec3 x(0.1, 0.0, 0.2);
  auto a = rescale(rescale(m, x, 0.5), Vec3::Zero(), 0.4);
  auto b = rescale(m, x, 0.2);
  EXPECT_LE(node_gap(a, b), 1e-6);
}

TEST(Rescale, DomainExceeded) {
  BallMap m(flat(), smooth_map(), Vec3::Zero(), 1.0);
  EXPECT_THROW(rescale(m, Vec3(0.8, 0, 0), 0.5), DomainError);
}

TEST(Homogeneity, SphereMapExtensionIsHomogeneous) {
  auto m = homogeneous_ball_map(flat(), sphere_profile());
  EXPECT_LE(homogeneity_defect(m, Vec3::Zero()).sup, 1e-8);
}

TEST(Homogeneity, LinearMapIsNot) {
  BallMap m(flat(), linear_fueter(), Vec3::Zero(), 1.0);
  EXPECT_GT(homogeneity_defect(m, Vec3::Zero()).sup, 0.1);
  EXPECT_GT(homogeneity_defect(m, Vec3(0.1, 0, 0)).sup, 0.1);
}

TEST(Homogeneity, GreenMapPattern) {
  BallMap m(flat(), green(), Vec3::Zero(), 1.0, 0.5, 14);
  auto H = homogeneity_defect(m, Vec3::Zero());
  const auto& dirs = m.directions();
  for (std::size_t a = 0; a < m.shells().size(); ++a)
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      double v = H.values[a * dirs.size() + d];
      EXPECT_GT(v, 0);
      EXPECT_NEAR(v, 2 * m.node(a, d).x.norm(), 1e-4);
    }
}

TEST(Axisymmetric, CoveringOfTheBolt) {
  auto ah = make_atiyah_hitchin();
  AxisymmetricReport R;
  SphereMap map = axisymmetric_map(SphereGrid(128), ah, &R);
  EXPECT_EQ(R.eta_deviation, 0.0);
  EXPECT_LE(R.axis_deviation, 1e-15);
  EXPECT_EQ(R.antipodal_mismatch, 0.0);
  for (std::size_t n = 0; n < map.size(); ++n) {
    Vec3 x = map.grid().node_position(n);
    EXPECT_TRUE(bolt_point(x).x == bolt_point(-x).x);
  }
  EXPECT_LE(R.tension, 1e-6);
  EXPECT_NEAR(R.bolt_radius, kPi, 1e-6);
  EXPECT_NEAR(R.energy, R.energy_expected, 1e-6 * R.energy_expected);
  EXPECT_GT(R.theta, 0);
  EXPECT_NEAR(R.theta, R.N1, 1e-8 * R.N1);
  EXPECT_LE(R.density_spread, 1e-4);
  EXPECT_NEAR(R.N1, R.energy_expected, 1e-5 * R.energy_expected);
  EXPECT_TRUE(R.identification_assumed);
}

TEST(Axisymmetric, MissingProfile) {
  EXPECT_THROW(axisymmetric_map(SphereGrid(8), nullptr), PreconditionError);
}
