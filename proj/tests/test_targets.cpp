#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fueterlab/targets.hpp"

using namespace fueterlab;

namespace {

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

const AtiyahHitchinTarget& ah() {
  static auto t = make_atiyah_hitchin();
  return *t;
}

}  // namespace

// ---------------------------------------------------------------------------
// flat quaternions

TEST(FlatTarget, MetricAndTriple) {
  FlatTarget t;
  ChartPoint p = t.point(Vec4(0.3, -1, 2, 0.5));
  EXPECT_EQ(metric_at(t, p), Mat4::Identity());
  auto c = complex_triple_at(t, p);
  Vec4 one(1, 0, 0, 0);
  EXPECT_EQ(c.I[0] * one, Vec4(0, 1, 0, 0));
  EXPECT_EQ(c.I[1] * one, Vec4(0, 0, 1, 0));
  EXPECT_EQ(c.I[2] * one, Vec4(0, 0, 0, 1));
  EXPECT_LE(max_abs(c.I[0] * c.I[1] - c.I[2]), 0.0);
}

TEST(FlatTarget, QuaternionMultiplicationMatrices) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int k = 0; k < 20; ++k) {
    Vec4 p(N(rng), N(rng), N(rng), N(rng)), q(N(rng), N(rng), N(rng), N(rng));
    EXPECT_LE((quat_left(p) * q - quat_right(q) * p).norm(), 1e-14);
  }
  // i * j = k
  EXPECT_EQ(quat_mul(imag_unit(0), imag_unit(1)), imag_unit(2));
}

TEST(FlatTarget, PrimitiveVanishesAtFixedPoints) {
  FlatTarget t;
  for (int i = 0; i < 3; ++i) {
    auto kp = kahler_primitive_at(t, t.point(Vec4(2.5, 0, 0, 0)), i);
    EXPECT_EQ(kp.alpha, Vec4::Zero());
  }
}

TEST(FlatTarget, RadiusIsEuclidean) {
  FlatTarget t;
  EXPECT_DOUBLE_EQ(radius_at(t, t.point(Vec4(3, 4, 0, 0))), 5.0);
}

// ---------------------------------------------------------------------------
// Taub-NUT

TEST(TaubNut, MetricClosedFormAtDistanceTen) {
  auto t = make_taubnut();
  Vec3 y(0, 6, 8);
  ChartPoint p = t->point(Vec4(0, 6, 8, 1.0));
  const double V = 1 + 1 / 20.0;
  // A = -(x dy - y dx) / (2 rho (rho + z))
  Vec4 eta(6 / (2 * 10.0 * 18.0), 0, 0, 0.5);
  Mat4 g = Mat4::Zero();
  g.topLeftCorner<3, 3>() = V * Mat3::Identity();
  g += eta * eta.transpose() / V;
  EXPECT_LE(max_abs(metric_at(*t, p) - g), 1e-12);
  EXPECT_NEAR(metric_at(*t, p)(3, 3), 0.25 / V, 1e-12);
}

TEST(TaubNut, NutIsOutsideTheChart) {
  auto t = make_taubnut();
  try {
    metric_at(*t, t->point(Vec4(0, 0, 0, 0)));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("|y - p_c| >="), std::string::npos);
  }
}

TEST(TaubNut, QuaternionRelationsAtRandomPoints) {
  auto t = make_taubnut();
  std::mt19937_64 rng(17);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    ChartPoint p = random_point(*t, rng, 0.05, 20);
    auto c = complex_triple_at(*t, p);
    Mat4 g = metric_at(*t, p);
    worst = std::max(worst, max_abs(c.I[0] * c.I[1] - c.I[2]));
    worst = std::max(worst, max_abs(c.I[1] * c.I[2] - c.I[0]));
    for (int a = 0; a < 3; ++a) {
      worst = std::max(worst, max_abs(c.I[a] * c.I[a] + Mat4::Identity()));
      worst = std::max(worst, max_abs(c.I[a].transpose() * g * c.I[a] - g) / max_abs(g));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(TaubNut, KahlerFormsAreClosedAndCompatible) {
  auto t = make_taubnut();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    ChartPoint p = random_point(*t, rng, 0.2, 10);
    std::mt19937_64 r2(k);
    std::normal_distribution<double> N;
    Vec3 u = Vec3(N(r2), N(r2), N(r2)).normalized();
    Mat4 w = kahler_at(*t, p, u);
    EXPECT_LE(max_abs(w + w.transpose()), 0.0);
    EXPECT_LE(max_abs(w - structure_at(*t, p, u).transpose() * metric_at(*t, p)), 1e-12 * max_abs(w));
    double dw = exterior_derivative_2form_max(p, [&](const ChartPoint& q) { return t->kahler(q)[0] * u[0] + t->kahler(q)[1] * u[1] + t->kahler(q)[2] * u[2]; }, 1e-3);
    EXPECT_LE(dw, 1e-6);
  }
}

TEST(TaubNut, PrimitiveIsExteriorDerivativeOfAlpha) {
  auto t = make_taubnut();
  std::mt19937_64 rng(23);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    ChartPoint p = random_point(*t, rng, 0.3, 10);
    for (int i = 0; i < 3; ++i) {
      Mat4 da = exterior_derivative_1form(
          p, [&](const ChartPoint& q) { return t->kahler(q)[(i + 2) % 3].transpose() * t->permuting_frame(q)[(i + 1) % 3]; }, 1e-3);
      worst = std::max(worst, max_abs(da - kahler_primitive_at(*t, p, i).omega));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(TaubNut, PrimitiveMatchesAsymptoticModel) {
  // alpha_i ~ x_i (dtheta/2 + A) - x_{i+2} dx_{i+1} at large |x|
  auto t = make_taubnut();
  std::mt19937_64 rng(29);
  for (int k = 0; k < 30; ++k) {
    ChartPoint p = random_point(*t, rng, 50, 50);
    Vec3 y = p.x.head<3>();
    Mat4 ginv = metric_at(*t, p).inverse();
    for (int i = 0; i < 3; ++i) {
      Vec4 model = y[i] * t->eta(0, y);
      model[(i + 1) % 3] -= y[(i + 2) % 3];
      Vec4 a = kahler_primitive_at(*t, p, i).alpha;
      double na = std::sqrt(a.dot(ginv * a)), nd = std::sqrt((a - model).dot(ginv * (a - model)));
      EXPECT_LE(nd, 0.1 * na);
    }
  }
}

TEST(TaubNut, PermutingActionOnKahlerForms) {
  auto t = make_taubnut();
  std::mt19937_64 rng(31);
  double worst = 0;
  for (int k = 0; k < 30; ++k) {
    ChartPoint p = random_point(*t, rng, 0.3, 8);
    auto W = t->kahler(p);
    for (int i = 0; i < 3; ++i) {
      auto v = [&](const ChartPoint& q) { return t->permuting_frame(q)[i]; };
      auto om = [&](int a) { return [&, a](const ChartPoint& q) { return t->kahler(q)[a]; }; };
      Mat4 L0 = lie_derivative_2tensor(p, v, om(i), 1e-3);
      Mat4 L1 = lie_derivative_2tensor(p, v, om((i + 1) % 3), 1e-3);
      Mat4 Lg = lie_derivative_2tensor(p, v, [&](const ChartPoint& q) { return t->metric(q); }, 1e-3);
      worst = std::max(worst, max_abs(L0));
      worst = std::max(worst, max_abs(L1 - Conventions::permuting_sign * W[(i + 2) % 3]));
      worst = std::max(worst, max_abs(Lg));
    }
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(TaubNut, FrameCommutatorsCloseWithOneSign) {
  auto t = make_taubnut();
  std::mt19937_64 rng(37);
  int sign = 0;
  for (int k = 0; k < 20; ++k) {
    ChartPoint p = random_point(*t, rng, 0.3, 8);
    auto v = t->permuting_frame(p);
    for (int i = 0; i < 3; ++i) {
      Vec4 br = lie_bracket(
          p, [&](const ChartPoint& q) { return t->permuting_frame(q)[i]; },
          [&](const ChartPoint& q) { return t->permuting_frame(q)[(i + 1) % 3]; }, 1e-3);
      Vec4 w = v[(i + 2) % 3];
      int s = (br - w).norm() < (br + w).norm() ? 1 : -1;
      if (sign == 0) sign = s;
      EXPECT_EQ(s, sign);
      EXPECT_LE((br - s * w).norm(), 1e-6 * (1 + w.norm()));
    }
  }
}

TEST(TaubNut, GrowthConstantStableUnderDoubling) {
  auto t = make_taubnut();
  auto sup_ratio = [&](double R) {
    std::mt19937_64 rng(41);
    double s = 0;
    for (int k = 0; k < 400; ++k) {
      ChartPoint p = random_point(*t, rng, 0.05 * R, R);
      Mat4 ginv = t->metric(p).inverse();
      for (int i = 0; i < 3; ++i) {
        Vec4 a = kahler_primitive_at(*t, p, i).alpha;
        s = std::max(s, std::sqrt(a.dot(ginv * a)) / (1 + t->radius(p)));
      }
    }
    return s;
  };
  double c1 = sup_ratio(50), c2 = sup_ratio(100);
  EXPECT_LE(std::abs(c2 - c1) / c1, 0.05) << c1 << " " << c2;
}

TEST(TaubNut, ChartTransitionsRoundTrip) {
  auto t = make_taubnut();
  std::mt19937_64 rng(43);
  for (int k = 0; k < 50; ++k) {
    ChartPoint p = random_point(*t, rng, 0.01, 0.2);
    ChartPoint h = t->to_chart(p, 2);
    ChartPoint back = t->to_chart(h, 0);
    EXPECT_LE(chart_delta(*t, p, back).norm(), 1e-10);
    if (t->in_domain(t->to_chart(p, 1))) {
      ChartPoint q = t->to_chart(t->to_chart(p, 1), 0);
      EXPECT_LE(chart_delta(*t, p, q).norm(), 1e-10);
    }
  }
}

TEST(TaubNut, HopfChartIsSmoothThroughTheNut) {
  auto t = make_taubnut();
  // near q = 0 the metric tends to a constant multiple of the identity
  Mat4 g = metric_at(*t, t->point(Vec4(1e-3, 2e-4, -3e-4, 5e-4), 2));
  EXPECT_LE(max_abs(g - g(0, 0) * Mat4::Identity()), 1e-5);
  EXPECT_GT(g(0, 0), 0.0);
  // pullback agrees with the transition Jacobian
  std::mt19937_64 rng(47);
  for (int k = 0; k < 10; ++k) {
    ChartPoint p = random_point(*t, rng, 0.05, 0.2);
    ChartPoint q = t->to_chart(p, 2);
    Mat4 J;
    for (int m = 0; m < 4; ++m)
      J.col(m) = point_partial(q, m, [&](const ChartPoint& z) {
        ChartPoint w = t->to_chart(z, 0);
        Vec4 d = chart_delta(*t, p, w);
        return Vec4(d);
      }, 1e-5);
    Mat4 gh = J.transpose() * t->metric(p) * J;
    EXPECT_LE(max_abs(gh - t->metric(q)), 1e-7 * max_abs(gh));
    auto c = t->triple(q);
    EXPECT_LE(max_abs(c.I[0] * c.I[1] - c.I[2]), 1e-10);
  }
}

TEST(TaubNut, RadiusIsLipschitzAlongRays) {
  auto t = make_taubnut();
  std::mt19937_64 rng(53);
  for (int k = 0; k < 50; ++k) {
    ChartPoint p = random_point(*t, rng, 0.1, 10);
    ChartPoint q = p;
    q.x.head<3>() *= 1.001;
    Vec4 d = q.x - p.x;
    Mat4 g = t->metric(p);
    EXPECT_LE(std::abs(radius_at(*t, q) - radius_at(*t, p)), std::sqrt(d.dot(g * d)) * (1 + 1e-3));
  }
  // radial derivative equals sqrt(V)
  double rho = 2.0, h = 1e-5;
  double dr = (GibbonsHawkingTarget::taubnut_radius(rho + h) - GibbonsHawkingTarget::taubnut_radius(rho - h)) / (2 * h);
  EXPECT_NEAR(dr, std::sqrt(1 + 1 / (2 * rho)), 1e-9);
  EXPECT_NEAR(GibbonsHawkingTarget::taubnut_radius(0), 0.0, 1e-15);
}

// ---------------------------------------------------------------------------
// Eguchi-Hanson contrast target

TEST(EguchiHanson, HasTripleButNoPermutingAction) {
  auto t = make_eguchi_hanson();
  ChartPoint p = t->point(Vec4(0.3, 0.2, 0.1, 1.0));
  auto c = complex_triple_at(*t, p);
  EXPECT_LE(max_abs(c.I[0] * c.I[1] - c.I[2]), 1e-12);
  EXPECT_THROW(kahler_primitive_at(*t, p, 0), UnsupportedError);
  double dw = exterior_derivative_2form_max(p, [&](const ChartPoint& q) { return t->kahler(q)[2]; }, 1e-3);
  EXPECT_LE(dw, 1e-6);
}

// ---------------------------------------------------------------------------
// Atiyah-Hitchin

TEST(AtiyahHitchin, TripleIsUnsupported) {
  ChartPoint p = ah().point(Vec4(5, 1, 0, 0));
  EXPECT_THROW(complex_triple_at(ah(), p), UnsupportedError);
  Mat4 g = metric_at(ah(), p);
  Eigen::SelfAdjointEigenSolver<Mat4> es(g);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(AtiyahHitchin, ProfileInvariants) {
  const AHProfile& P = ah().profile();
  EXPECT_LE(P.first_integral_drift, 1e-8);
  EXPECT_LE(P.ode_residual, 1e-8);
  EXPECT_EQ(P.vanishing_coefficient, 0);
  EXPECT_NEAR(P.eta_bolt, kPi, 1e-8);
  EXPECT_NEAR(P.bolt_scale, kPi, 1e-8);
  EXPECT_LE(P.alf_relative_change, 0.01);
  EXPECT_NEAR(P.alf_limit, -2.0, 0.01);
  for (std::size_t k = 1; k < P.size(); ++k) EXPECT_GT(P.r[k], P.r[k - 1]);
  EXPECT_EQ(ah().profile().radius(kPi), 0.0);
}

TEST(AtiyahHitchin, SeriesMatchesIntegration) {
  // the near-bolt series agrees with the integrated profile a little further out
  const AHProfile& P = ah().profile();
  Eigen::VectorXd s = detail::ah_seed(0.01), y = P.state(kPi + 0.01);
  EXPECT_LE((s.head<3>() - y.head<3>()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AtiyahHitchin, RadiusMonotoneAndZeroOnBolt) {
  ChartPoint bolt = ah().point(Vec4(kPi, 0, 0, 1), 1);
  EXPECT_EQ(radius_at(ah(), bolt), 0.0);
  double prev = -1;
  for (double e = kPi; e < 50; e += 0.37) {
    double r = radius_at(ah(), ah().point(Vec4(e, 1, 0, 0)));
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(AtiyahHitchin, ExportHeaderNamesConventionVersion) {
  std::ostringstream os;
  ah().profile().export_text(os);
  std::string s = os.str();
  EXPECT_EQ(s.rfind("# fueterlab AH profile, convention table v1", 0), 0u);
}
