#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fueterlab/spheremaps.hpp"

using namespace fueterlab;

namespace {

TargetPtr flat() { return std::make_shared<FlatTarget>(); }

SphereEvaluator constant_map(TargetId id, const Vec4& v) {
  return [=](const Vec3&) { return ChartPoint{id, 0, v}; };
}

// smooth map into Taub-NUT, away from the nut and the string
SphereEvaluator taubnut_map() {
  return [](const Vec3& x) {
    Vec3 y = Vec3(0.5, 1.0, 1.5) + 0.3 * Vec3(x[0] + 0.2 * x[1], x[1] - 0.4 * x[2], x[2]) +
             0.1 * Vec3(x[0] * x[1], x[2] * x[2], x[0] * x[2]);
    return ChartPoint{TargetId::taubnut, 0, Vec4(y[0], y[1], y[2], 1.0 + 0.5 * x[0] + 0.3 * x[1] * x[2])};
  };
}

// random smooth flat map built from low-degree polynomials
SphereEvaluator random_flat_map(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Eigen::Matrix<double, 4, 3> A;
  Eigen::Matrix<double, 4, 3> B;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      A(i, j) = N(rng);
      B(i, j) = 0.3 * N(rng);
    }
  return [A, B](const Vec3& x) {
    Vec3 q(x[0] * x[1], x[1] * x[2], x[2] * x[0]);
    return ChartPoint{TargetId::flat, 0, (A * x + B * q).eval()};
  };
}

double max_norm(const std::vector<Vec4>& v) {
  double m = 0;
  for (auto& x : v) m = std::max(m, x.norm());
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// grid

TEST(SphereGrid, PanelsAreOrientedOutward) {
  for (auto& P : cube_panels()) EXPECT_EQ(P.e1.cross(P.e2), P.c);
}

TEST(SphereGrid, AreaWeightsSumToFourPi) {
  for (int m : {12, 16, 32, 64}) EXPECT_NEAR(SphereGrid(m).total_area() / (4 * kPi), 1.0, 1e-8) << m;
}

TEST(SphereGrid, PatchDerivativesMatchDifferences) {
  const double a = 0.3, b = -0.2, h = 1e-5;
  for (int p = 0; p < 6; ++p) {
    PanelPatch q = SphereGrid::patch(p, a, b);
    auto X = [&](double s, double t) { return SphereGrid::position(p, s, t); };
    EXPECT_LE((q.Xa - (X(a + h, b) - X(a - h, b)) / (2 * h)).norm(), 1e-9);
    EXPECT_LE((q.Xb - (X(a, b + h) - X(a, b - h)) / (2 * h)).norm(), 1e-9);
    PanelPatch qa = SphereGrid::patch(p, a + h, b), qm = SphereGrid::patch(p, a - h, b);
    EXPECT_LE((q.Xaa - (qa.Xa - qm.Xa) / (2 * h)).norm(), 1e-8);
    EXPECT_LE((q.Xab - (qa.Xb - qm.Xb) / (2 * h)).norm(), 1e-8);
    PanelPatch qb = SphereGrid::patch(p, a, b + h), qn = SphereGrid::patch(p, a, b - h);
    EXPECT_LE((q.Xbb - (qb.Xb - qn.Xb) / (2 * h)).norm(), 1e-8);
  }
}

TEST(SphereGrid, LocateInvertsPosition) {
  for (int p = 0; p < 6; ++p) {
    auto [q, a, b] = SphereGrid::locate(SphereGrid::position(p, 0.4, -0.7));
    EXPECT_EQ(q, p);
    EXPECT_NEAR(a, 0.4, 1e-14);
    EXPECT_NEAR(b, -0.7, 1e-14);
  }
}

TEST(SphereGrid, GhostExchangeIsConsistentAcrossEdges) {
  SphereGrid g(32);
  SphereMap exact = make_sphere_map(g, flat(), random_flat_map(3));
  SphereMap interp(g, flat());
  interp.set_nodes(exact.nodes());
  double worst = 0;
  const int m = g.m();
  for (int p = 0; p < 6; ++p)
    for (int i = -SphereGrid::kGhost; i < m + SphereGrid::kGhost; ++i)
      for (int j = -SphereGrid::kGhost; j < m + SphereGrid::kGhost; ++j)
        worst = std::max(worst, (exact.ext(p, i, j).x - interp.ext(p, i, j).x).norm());
  EXPECT_LE(worst, 1e-6);
}

// ---------------------------------------------------------------------------
// constant and equatorial maps

TEST(SphereMap, ConstantMapIsTrivialEverywhere) {
  SphereGrid g(8);
  for (auto t : {flat(), TargetPtr(make_taubnut())}) {
    SphereMap map = make_sphere_map(g, t, constant_map(t->id(), Vec4(0.3, 0.2, 1.1, 0.4)));
    map.validate();
    EXPECT_EQ(max_norm(triholo_residual(map)), 0.0);
    EXPECT_EQ(max_norm(tension_field(map)), 0.0);
    EXPECT_EQ(map_area(map), 0.0);
    EXPECT_EQ(map_energy(map), 0.0);
    for (auto& d : conformality_defect(map)) {
      EXPECT_EQ(d.length, 0.0);
      EXPECT_EQ(d.angle, 0.0);
    }
    EXPECT_EQ(stokes_pairing(map, Vec3(1, 2, 3)).pairing, 0.0);
  }
}

TEST(SphereMap, EquatorialMapSelectsOneConventionClass) {
  SphereMap map = make_sphere_map(SphereGrid(32), flat(), equatorial_map());
  ConventionScan s = convention_scan(map);
  for (int k = 0; k < 4; ++k) std::cout << s.conventions[k].name() << ' ' << s.sup[k] << '\n';
  auto pass = s.passing(1e-5);
  // (+, left) and (-, right) are the same equation on this map
  ASSERT_EQ(pass.size(), 2u);
  EXPECT_EQ(s.conventions[pass[0]].name(), "+left");
  EXPECT_EQ(s.conventions[pass[1]].name(), "-right");
  for (int k = 0; k < 4; ++k)
    if (std::find(pass.begin(), pass.end(), k) == pass.end()) EXPECT_GE(s.sup[k], 1.0);
}

TEST(SphereMap, EquatorialTensionIsMinusTwoX) {
  SphereMap map = make_sphere_map(SphereGrid(32), flat(), equatorial_map());
  auto tau = tension_field(map);
  double worst = 0;
  for (std::size_t n = 0; n < map.size(); ++n) {
    Vec3 x = map.grid().node_position(n);
    worst = std::max(worst, (tau[n] - Vec4(0, -2 * x[0], -2 * x[1], -2 * x[2])).norm());
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(SphereMap, PlanarImageHasPlanarTension) {
  SphereMap map = make_sphere_map(SphereGrid(16), flat(),
                                  [](const Vec3& x) { return ChartPoint{TargetId::flat, 0, Vec4(x[0], x[1], 0, 0)}; });
  auto tau = tension_field(map);
  for (std::size_t n = 0; n < map.size(); ++n) {
    Vec3 x = map.grid().node_position(n);
    EXPECT_LE(std::abs(tau[n][2]) + std::abs(tau[n][3]), 1e-12);
    EXPECT_NEAR(tau[n][0], -2 * x[0], 1e-3);
  }
}

TEST(SphereMap, TriholomorphicMapIsConformal) {
  SphereMap map = make_sphere_map(SphereGrid(32), flat(), equatorial_map());
  double eps = max_norm(triholo_residual(map));
  for (auto& d : conformality_defect(map)) {
    EXPECT_LE(d.length, 2 * eps + 1e-14);
    EXPECT_LE(d.angle, 2 * eps + 1e-14);
  }
}

TEST(SphereMap, RandomMapIsNotConformal) {
  SphereMap map = make_sphere_map(SphereGrid(8), flat(), random_flat_map(4));
  double m = 0;
  for (auto& d : conformality_defect(map)) m = std::max({m, d.length, d.angle});
  EXPECT_GT(m, 1e-2);
}

TEST(SphereMap, EnergyDominatesTwiceArea) {
  SphereMap conf = make_sphere_map(SphereGrid(32), flat(), equatorial_map());
  double E = map_energy(conf), A = map_area(conf);
  EXPECT_NEAR(A / (4 * kPi), 1.0, 1e-5);
  EXPECT_LE(std::abs(E - 2 * A) / E, 1e-5);
  SphereMap stretched = make_sphere_map(SphereGrid(16), flat(), [](const Vec3& x) {
    return ChartPoint{TargetId::flat, 0, Vec4(0, 2 * x[0], x[1], x[2])};
  });
  EXPECT_GT(map_energy(stretched), 2 * map_area(stretched) * (1 + 1e-3));
  SphereMap rnd = make_sphere_map(SphereGrid(16), flat(), random_flat_map(9));
  EXPECT_GE(map_energy(rnd), 2 * map_area(rnd));
}

TEST(SphereMap, TearingIsRejected) {
  SphereMap map = make_sphere_map(SphereGrid(8), flat(), [](const Vec3& x) {
    return ChartPoint{TargetId::flat, 0, Vec4(x[2] > 0 ? 5.0 : 0.0, 0, 0, 0)};
  });
  EXPECT_THROW(map.validate(), DomainError);
}

// ---------------------------------------------------------------------------
// Stokes pairing

TEST(StokesPairing, ExactTargetPairingVanishesUnderRefinement) {
  SphereMap a = make_sphere_map(SphereGrid(32), make_taubnut(), taubnut_map());
  SphereMap b = make_sphere_map(SphereGrid(64), make_taubnut(), taubnut_map());
  a.validate();
  double worst_a = 0, worst_ratio = 1e300;
  for (const Vec3& u : direction_sample_26()) {
    auto pa = stokes_pairing(a, u), pb = stokes_pairing(b, u);
    ASSERT_TRUE(pa.has_dual);
    worst_a = std::max(worst_a, std::abs(pa.pairing));
    worst_ratio = std::min(worst_ratio, std::abs(pa.pairing) / std::abs(pb.pairing));
    EXPECT_LE(std::abs(pa.dual), 1e-6);
  }
  std::cout << "max |pairing| m=32: " << worst_a << ", min refinement ratio " << worst_ratio << '\n';
  EXPECT_LE(worst_a, 1e-6);
  EXPECT_GE(worst_ratio, 8.0);
}

TEST(StokesPairing, EguchiHansonBoltPairingIsTopological) {
  const double d = 1.0;
  auto t = make_eguchi_hanson(d);
  std::vector<double> vals;
  for (int m : {16, 32}) {
    SphereMap map = make_sphere_map(SphereGrid(m), t, bolt_wrap_map(*t, d));
    map.validate(2.0);
    auto P = stokes_pairing(map, Vec3::UnitZ());
    EXPECT_FALSE(P.has_dual);
    vals.push_back(P.pairing);
  }
  const double bolt_area = 2 * kPi * d;
  std::cout << "bolt pairing " << vals[0] << ' ' << vals[1] << " (area " << bolt_area << ")\n";
  EXPECT_GE(std::abs(vals[1]), 0.5 * bolt_area);
  EXPECT_LE(std::abs(vals[1] - vals[0]), 1e-4 * std::abs(vals[1]));
}

// ---------------------------------------------------------------------------
// jets

TEST(Jets, ZeroJetHasZeroTrace) {
  FlatTarget t;
  Jet2 j;
  j.p = t.point(Vec4::Zero());
  EXPECT_EQ(jet_tension_identity(j, t), 0.0);
}

TEST(Jets, ConformingJetsAreHarmonic) {
  std::mt19937_64 rng(12);
  auto tn = make_taubnut();
  FlatTarget fl;
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    bool use_flat = k % 2 == 0;
    const Target& t = use_flat ? static_cast<const Target&>(fl) : *tn;
    ChartPoint p = use_flat ? fl.point(Vec4(0.1, 0.2, 0.3, 0.4)) : random_point(*tn, rng, 0.5, 5.0);
    Jet2 j = random_conforming_jet(t, p, SphereConvention{}, rng);
    double scale = j.H[0][0].norm();
    worst = std::max(worst, jet_tension_identity(j, t) / scale);
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Jets, ViolatingJetIsRejectedAndCanCarryTension) {
  std::mt19937_64 rng(13);
  FlatTarget t;
  Jet2 j = random_conforming_jet(t, t.point(Vec4::Zero()), SphereConvention{}, rng);
  const double delta = 1e-3;
  Vec4 e(1, 0, 0, 0);
  j.H[1][1] += delta * e;
  EXPECT_THROW(jet_tension_identity(j, t), PreconditionError);
  EXPECT_NEAR(jet_trace(j), delta, 1e-12);
}

TEST(Jets, RigidityForcesZeroDifferential) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> N;
  auto tn = make_taubnut();
  FlatTarget fl;
  for (int k = 0; k < 50; ++k) {
    const Target& t = k % 2 ? static_cast<const Target&>(fl) : *tn;
    ChartPoint p = k % 2 ? fl.point(Vec4(N(rng), N(rng), N(rng), N(rng))) : random_point(*tn, rng, 0.5, 5.0);
    Jet1 j;
    j.p = p;
    j.x = Vec3(N(rng), N(rng), N(rng)).normalized();
    Vec3 r(N(rng), N(rng), N(rng));
    j.v = (r - j.x * j.x.dot(r)).normalized();
    j.dfv = Vec4(N(rng), N(rng), N(rng), N(rng));
    j.dfjv = Vec4(N(rng), N(rng), N(rng), N(rng));
    Mat4 I0 = structure_at(t, p, Vec3(N(rng), N(rng), N(rng)).normalized());
    auto rep = rigidity_check(j, t, I0);
    EXPECT_EQ(rep.kernel_dimension, 0);
    EXPECT_LE(rep.df_norm, 1e-10);
  }
  Jet1 z;
  z.p = fl.point(Vec4::Zero());
  EXPECT_EQ(rigidity_check(z, fl, structure_at(fl, z.p, Vec3::UnitX())).df_norm, 0.0);
}

TEST(Jets, RigidityNeedsDistinctStructures) {
  FlatTarget t;
  Jet1 j;
  j.p = t.point(Vec4::Zero());
  EXPECT_THROW(rigidity_check(j, t, structure_at(t, j.p, j.x)), PreconditionError);
}

// ---------------------------------------------------------------------------
// files

TEST(SphereFile, RoundTripPreservesNodesAndConvention) {
  SphereMap map = make_sphere_map(SphereGrid(8), make_taubnut(), taubnut_map(), SphereConvention{-1, MultSide::left});
  std::stringstream ss;
  write_sphere_map(ss, map);
  EXPECT_EQ(ss.str().substr(0, 5), "FUSP1");
  EXPECT_EQ(ss.str().size(), 8 + 16 + map.size() * 32);
  SphereMap r = read_sphere_map(ss);
  EXPECT_EQ(r.convention().tag(), map.convention().tag());
  for (std::size_t n = 0; n < map.size(); ++n) EXPECT_EQ(r.node(n).x, map.node(n).x);
}
