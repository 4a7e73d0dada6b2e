#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fueterlab/fields3d.hpp"
#include "fueterlab/fueter4d.hpp"
#include "fueterlab/io.hpp"
#include "fueterlab/targets.hpp"

using namespace fueterlab;

namespace {

TargetPtr flat() { return std::make_shared<FlatTarget>(); }

// x1 i + x2 j - 2 x3 k on T^3 of side L, with its monodromy
Section3 linear_fueter(int n, double L = 1.0, double scale = 1.0) {
  Section3 s = sample_section<3>(Grid3(n, L), flat(), [scale](const Vec3& x) {
    return Vec4(Vec4(0, x[0], x[1], -2 * x[2]) * scale);
  });
  s.monodromy = {Vec4(0, L, 0, 0) * scale, Vec4(0, 0, L, 0) * scale, Vec4(0, 0, 0, -2 * L) * scale};
  return s;
}

Section3 taubnut3(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_smooth_section<3>(Grid3(n, 1.0), make_taubnut(), Vec4(0.5, 1.0, 1.5, 1.0), Vec4(0.6, 0.6, 0.6, 2.0),
                                  rng, 2, 6);
}

Section4 taubnut4(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_smooth_section<4>(Grid4(n, 1.0), make_taubnut(), Vec4(0.5, 1.0, 1.5, 1.0), Vec4(0.6, 0.6, 0.6, 2.0),
                                  rng, 1, 6);
}

}  // namespace

TEST(SelfDualFrame, Relations) {
  auto d = SelfDualFrame{}.defects();
  EXPECT_EQ(d.orthogonality, 0.0);
  EXPECT_EQ(d.square, 0.0);
  EXPECT_EQ(d.product, 0.0);
  SelfDualFrame F;
  for (int i = 0; i < 3; ++i) EXPECT_TRUE((F.Omega[i] + F.Omega[i].transpose()).isZero(0));
}

TEST(Fueter4, ConstantSection) {
  Section4 s = sample_section<4>(Grid4(6, 1.0), make_taubnut(), [](const Vec4&) { return Vec4(0.5, 1, 1.5, 2); });
  for (auto& R : fueter4_residual(s)) EXPECT_EQ(R.cwiseAbs().maxCoeff(), 0.0);
  auto r = energy_identity4(s);
  EXPECT_EQ(r.grad2, 0.0);
  EXPECT_EQ(r.fueter2, 0.0);
  EXPECT_EQ(r.lambda, 0.0);
  EXPECT_EQ(r.defect, 0.0);
}

TEST(Fueter4, TimeInvariantLiftOfLinearExample) {
  Section4 s = t_invariant_lift(linear_fueter(8));
  double m = 0;
  for (auto& R : fueter4_residual(s)) m = std::max(m, R.cwiseAbs().maxCoeff());
  EXPECT_LE(m, 1e-10);
}

TEST(Fueter4, TimeLinearSectionHasConstantResidual) {
  // f = x0 i: df has the single column e_i, so F4 = [e_i, I_1 e_i, I_2 e_i, I_3 e_i] and |F4| = 2
  Section4 s = sample_section<4>(Grid4(6, 1.0), flat(), [](const Vec4& x) { return Vec4(0, x[0], 0, 0); });
  s.monodromy[0] = Vec4(0, 1, 0, 0);
  auto T = flat()->triple(s.nodes[0]);
  for (auto& R : fueter4_residual(s)) {
    EXPECT_NEAR(R.norm(), 2.0, 1e-12);
    Vec4 c0 = R.col(0);
    EXPECT_LE((c0 - Vec4(0, 1, 0, 0)).norm(), 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_LE((Vec4(R.col(i + 1)) - T.I[i] * c0).norm(), 1e-12);
  }
}

TEST(Fueter4, PointwiseIdentityQuarterNormalization) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  auto t = make_taubnut();
  SelfDualFrame F;
  for (int k = 0; k < 200; ++k) {
    ChartPoint p = random_point(*t, rng, 0.5, 3.0);
    NodeGeometry G;
    G.g = t->metric(p);
    auto T = t->triple(p);
    auto W = t->kahler(p);
    for (int a = 0; a < 3; ++a) {
      G.I[a] = T.I[a];
      G.W[a] = W[a];
    }
    std::array<Vec4, 4> d;
    for (auto& v : d) v = Vec4(N(rng), N(rng), N(rng), N(rng));
    double g2 = 0;
    for (auto& v : d) g2 += v.dot(G.g * v);
    Mat4 R = fueter4_matrix(G, d, F);
    double f2 = matrix_sq_norm(G.g, R);
    EXPECT_NEAR(g2, 0.25 * f2 - 2 * lambda4_density(G, d), 1e-10 * (1 + g2));
    Vec4 e = evolution_residual(G, d);
    EXPECT_NEAR(f2, 4 * e.dot(G.g * e), 1e-10 * (1 + f2));
  }
}

TEST(Fueter4, IdentityRefinementOnTaubNut) {
  auto a = energy_identity4(taubnut4(16, 21));
  auto b = energy_identity4(taubnut4(32, 21));
  EXPECT_TRUE(a.stokes_route);
  EXPECT_LE(a.relative_fit_defect(), 5e-3);
  EXPECT_GE(a.fit_defect / b.fit_defect, 8.0);
  // the measured coefficient of ||F4||^2 is 1/4
  EXPECT_NEAR(b.lambda_fit, 0.25, 0.01);
}

TEST(Fueter4, SolutionLiftHasEnergyEqualToLambda) {
  auto r = energy_identity4(t_invariant_lift(linear_fueter(8)));
  EXPECT_NEAR(r.grad2, 6.0, 1e-10);
  EXPECT_NEAR(r.lambda, -3.0, 1e-10);
  EXPECT_LE(std::abs(r.grad2 + 2 * r.lambda), 1e-10);
  // lift of a converged solver output
  std::mt19937_64 rng(7);
  Section3 init = random_smooth_section<3>(Grid3(8, 1.0), flat(), Vec4(0.2, -0.1, 0.3, 0.4), Vec4::Constant(0.2),
                                           rng, 2, 6);
  auto res = solve_fueter(init);
  ASSERT_TRUE(res.converged);
  auto q = energy_identity4(t_invariant_lift(res.section));
  EXPECT_LE(std::abs(q.grad2 + 2 * q.lambda), 1e-10);
}

TEST(Cylinder, ConstantAndLinear) {
  Section3 c = sample_section<3>(Grid3(6, 1.0), make_taubnut(), [](const Vec3&) { return Vec4(0.5, 1, 1.5, 2); });
  auto R = cylinder_reduction(c);
  EXPECT_EQ(R.residual3, 0.0);
  EXPECT_EQ(R.residual4, 0.0);
  auto L = cylinder_reduction(linear_fueter(8));
  EXPECT_LE(L.residual4, 1e-10);
  EXPECT_LE(L.residual3, 1e-10);
}

TEST(Cylinder, ResidualEquivalenceOnNonFueterSections) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto R = cylinder_reduction(taubnut3(10, seed));
    EXPECT_GT(R.residual3, 1e-3);
    EXPECT_NEAR(R.matched_ratio, 1.0, 1e-6);
    EXPECT_NEAR(R.raw_ratio, 2.0, 2e-6);
  }
}

TEST(Trajectory, ConstantPathOfSolution) {
  std::vector<Section3> path(4, linear_fueter(8));
  auto R = trajectory_residual(path, 0.1, &path.front(), &path.back());
  ASSERT_EQ(R.sup.size(), 2u);
  for (double v : R.sup) EXPECT_LE(v, 1e-10);
  EXPECT_EQ(R.start_distance, 0.0);
  EXPECT_EQ(R.end_distance, 0.0);
}

TEST(Trajectory, InterpolatedConstants) {
  auto t = flat();
  auto at = [&](double s) {
    return sample_section<3>(Grid3(6, 1.0), t, [s](const Vec3&) { return Vec4(Vec4(1, 0, 0, 0) * (1 - s) + Vec4(0, 2, 0, 0) * s); });
  };
  std::vector<Section3> path;
  for (int k = 0; k <= 4; ++k) path.push_back(at(k / 4.0));
  auto R = trajectory_residual(path, 0.25);
  for (double v : R.sup) EXPECT_NEAR(v, std::sqrt(5.0), 1e-12);
}

TEST(Trajectory, ScaledFueterSectionPattern) {
  // f(t, x) = h(t) f_lin(x): d_t f = h'(t) f_lin, sum I_i d_i f = 0
  auto h = [](double t) { return 1 + t + 0.5 * t * t; };
  auto hp = [](double t) { return 1 + t; };
  const double dt = 0.1;
  std::vector<Section3> path;
  for (int k = 0; k < 5; ++k) path.push_back(linear_fueter(6, 1.0, h(k * dt)));
  auto R = trajectory_residual(path, dt);
  Section3 base = linear_fueter(6);
  for (std::size_t k = 0; k < R.fields.size(); ++k)
    for (std::size_t n = 0; n < base.size(); ++n)
      EXPECT_NEAR(R.fields[k][n].norm(), std::abs(hp((k + 1) * dt)) * base.nodes[n].x.norm(), 1e-6);
}

TEST(Trajectory, NeedsThreeSlices) {
  std::vector<Section3> path(2, linear_fueter(4));
  EXPECT_THROW(trajectory_residual(path, 0.1), PreconditionError);
}

TEST(Files, Fuet4RoundTripAndTrajectoryBundle) {
  Section4 s = taubnut4(4, 5);
  std::stringstream ss;
  write_section(ss, s);
  EXPECT_EQ(ss.str().substr(0, 5), "FUET4");
  Section4 r = read_section<4>(ss, s.target);
  ASSERT_EQ(r.size(), s.size());
  for (std::size_t n = 0; n < s.size(); ++n) EXPECT_TRUE(r.nodes[n].x == s.nodes[n].x);

  std::vector<Section3> path{taubnut3(4, 1), taubnut3(4, 2), taubnut3(4, 3)};
  std::stringstream tj;
  write_trajectory(tj, path, 0.0, 0.5);
  auto back = read_trajectory<3>(tj, path[0].target);
  ASSERT_EQ(back.slices.size(), 3u);
  EXPECT_EQ(back.dt, 0.5);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t n = 0; n < path[k].size(); ++n) EXPECT_TRUE(back.slices[k].nodes[n].x == path[k].nodes[n].x);
}
