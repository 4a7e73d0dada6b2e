#pragma once
// Product twistor space Z = S^2 x X. At (x, p)
//   J1 = j (+) I(x),   J2 = j (+) (-I(x)),   I(x) = x_1 I_1 + x_2 I_2 + x_3 I_3,
// with j the round complex structure (j v = x cross v). Coordinates are
// (u, chart coordinates of p), u stereographic on S^2; both sphere charts are
// oriented so that j = [[0, -1], [1, 0]].

#include <iomanip>
#include <ostream>
#include <random>

#include "fueterlab/spheremaps/map.hpp"

namespace fueterlab {

enum class TwistorFlavor { J1 = 1, J2 = 2 };

inline std::string to_string(TwistorFlavor f) { return f == TwistorFlavor::J1 ? "J1" : "J2"; }

struct TwistorPoint {
  Vec3 x = Vec3::UnitZ();
  ChartPoint p;

  void validate() const {
    if (std::abs(x.norm() - 1) > 1e-14) throw PreconditionError("twistor point: |x| must be 1");
  }
};

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

namespace stereo {

// chart 0 projects from the north pole with a reflection, chart 1 from the
// south pole, so that both are orientation preserving for the outward normal
inline Eigen::Vector2d to_plane(const Vec3& x, int chart) {
  if (chart == 0) return Eigen::Vector2d(x[0], -x[1]) / (1 - x[2]);
  return Eigen::Vector2d(x[0], x[1]) / (1 + x[2]);
}

inline Vec3 to_sphere(const Eigen::Vector2d& u, int chart) {
  double s = u.squaredNorm();
  if (chart == 0) return Vec3(2 * u[0], -2 * u[1], s - 1) / (s + 1);
  return Vec3(2 * u[0], 2 * u[1], 1 - s) / (s + 1);
}

// d(to_plane) at x applied to a tangent vector
inline Eigen::Vector2d push(const Vec3& x, const Vec3& v, int chart) {
  if (chart == 0) {
    double d = 1 - x[2];
    return Eigen::Vector2d(v[0] / d + x[0] * v[2] / (d * d), -v[1] / d - x[1] * v[2] / (d * d));
  }
  double d = 1 + x[2];
  return Eigen::Vector2d(v[0] / d - x[0] * v[2] / (d * d), v[1] / d - x[1] * v[2] / (d * d));
}

inline int best_chart(const Vec3& x) { return x[2] <= 0 ? 0 : 1; }

inline Eigen::Matrix2d j_matrix() {
  Eigen::Matrix2d j;
  j << 0, -1, 1, 0;
  return j;
}

}  // namespace stereo

inline Mat4 twistor_fiber_block(TwistorFlavor f, const Target& t, const ChartPoint& p, const Vec3& x) {
  Mat4 I = structure_at(t, p, x);
  return f == TwistorFlavor::J1 ? I : (-I).eval();
}

// 6x6 operator in product coordinates
inline Mat6 twistor_op_at(TwistorFlavor f, const Target& t, const TwistorPoint& tp) {
  tp.validate();
  if (!t.has_complex_triple()) t.triple(tp.p);
  Mat6 J = Mat6::Zero();
  J.topLeftCorner<2, 2>() = stereo::j_matrix();
  J.bottomRightCorner<4, 4>() = twistor_fiber_block(f, t, tp.p, tp.x);
  return J;
}

// ---------------------------------------------------------------------------
// Nijenhuis tensor from brackets of extended vector fields

struct NijenhuisOptions {
  double step = 1e-3;
  int sphere_chart = -1;  // -1: best chart for the point
  // linear parts of the extensions V(xi) = v + Lv (xi - xi0), likewise w
  Mat6 Lv = Mat6::Zero(), Lw = Mat6::Zero();
};

namespace detail {

inline Vec6 twistor_coords(const TwistorPoint& tp, int chart) {
  Vec6 xi;
  xi << stereo::to_plane(tp.x, chart), tp.p.x;
  return xi;
}

template <class Fn>
Mat6 jacobian6(Fn&& F, const Vec6& xi, double h) {
  Mat6 D;
  for (int k = 0; k < 6; ++k) {
    Vec6 e = Vec6::Unit(k) * h;
    D.col(k) = (-F(xi + 2 * e) + 8 * F(xi + e) - 8 * F(xi - e) + F(xi - 2 * e)) / (12 * h);
  }
  return D;
}

}  // namespace detail

// N(v, w) = [Jv, Jw] - J[Jv, w] - J[v, Jw] - [v, w] at tp, with v, w given in
// product coordinates (sphere part in the stereographic chart).
inline Vec6 nijenhuis_sample(TwistorFlavor f, const Target& t, const TwistorPoint& tp, const Vec6& v,
                             const Vec6& w, const NijenhuisOptions& o = {}) {
  tp.validate();
  if (!t.has_complex_triple()) t.triple(tp.p);
  const int chart = o.sphere_chart < 0 ? stereo::best_chart(tp.x) : o.sphere_chart;
  const Vec6 xi0 = detail::twistor_coords(tp, chart);
  auto J = [&](const Vec6& xi) {
    TwistorPoint q{stereo::to_sphere(xi.head<2>(), chart), ChartPoint{tp.p.target, tp.p.chart, xi.tail<4>()}};
    q.x.normalize();
    return twistor_op_at(f, t, q);
  };
  auto V = [&](const Vec6& xi) { return (v + o.Lv * (xi - xi0)).eval(); };
  auto W = [&](const Vec6& xi) { return (w + o.Lw * (xi - xi0)).eval(); };
  auto JV = [&](const Vec6& xi) { return (J(xi) * V(xi)).eval(); };
  auto JW = [&](const Vec6& xi) { return (J(xi) * W(xi)).eval(); };
  // cancellation monitor: roundoff in the differenced fields relative to the step
  const double scale = 1 + J(xi0).cwiseAbs().maxCoeff() * (v.norm() + w.norm());
  if (o.step < 1e-6 || 1e-16 * scale / o.step > 1e-8)
    throw NumericalError("nijenhuis_sample: finite-difference step too small for the field scale");
  const double h = o.step;
  auto bracket = [&](auto&& A, auto&& B) {
    return (detail::jacobian6(B, xi0, h) * A(xi0) - detail::jacobian6(A, xi0, h) * B(xi0)).eval();
  };
  Mat6 J0 = J(xi0);
  return bracket(JV, JW) - J0 * bracket(JV, W) - J0 * bracket(V, JW) - bracket(V, W);
}

struct NijenhuisBatteryRow {
  TwistorFlavor flavor;
  TwistorPoint point;
  double norm = 0;
};

// random twistor points in a target region and random unit tangent pairs
inline std::vector<NijenhuisBatteryRow> nijenhuis_battery(TwistorFlavor f, const Target& t, int samples,
                                                          std::uint64_t seed, double rmin = 0.5, double rmax = 3.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  std::vector<NijenhuisBatteryRow> out;
  for (int k = 0; k < samples; ++k) {
    TwistorPoint tp{Vec3(N(rng), N(rng), N(rng)).normalized(), random_point(t, rng, rmin, rmax)};
    Vec6 v, w;
    for (int c = 0; c < 6; ++c) {
      v[c] = N(rng);
      w[c] = N(rng);
    }
    v.normalize();
    w.normalize();
    out.push_back({f, tp, nijenhuis_sample(f, t, tp, v, w).norm()});
  }
  return out;
}

inline void write_nijenhuis_csv(std::ostream& os, const std::vector<NijenhuisBatteryRow>& rows) {
  os << "flavor,x1,x2,x3,p1,p2,p3,p4,norm\n" << std::setprecision(17);
  for (auto& r : rows) {
    os << to_string(r.flavor);
    for (int i = 0; i < 3; ++i) os << ',' << r.point.x[i];
    for (int i = 0; i < 4; ++i) os << ',' << r.point.p.x[i];
    os << ',' << r.norm << '\n';
  }
}

// ---------------------------------------------------------------------------
// lifts of sphere maps

struct TwistorLift {
  SphereGrid grid;
  TargetPtr target;
  std::vector<TwistorPoint> nodes;
};

inline TwistorLift lift(const SphereMap& map) {
  TwistorLift L{map.grid(), map.target(), {}};
  L.nodes.reserve(map.size());
  for (std::size_t n = 0; n < map.size(); ++n) L.nodes.push_back({map.grid().node_position(n), map.node(n)});
  return L;
}

inline std::vector<ChartPoint> project(const TwistorLift& L) {
  std::vector<ChartPoint> out;
  out.reserve(L.nodes.size());
  for (auto& tp : L.nodes) out.push_back(tp.p);
  return out;
}

struct DbarReport {
  std::vector<Vec6> dbar;        // 2 dbar_{J2} of the lift, applied to e1
  std::vector<Vec6> comparison;  // (0, d1 f - I(x) d2 f)
  std::vector<double> difference;
  double max_difference = 0;
};

// Evaluated along the oriented frame (e1, e2 = j e1) of each node.
inline DbarReport dbar_j2_defect(const SphereMap& map) {
  const Target& t = map.tgt();
  DbarReport R;
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n);
    const Vec3 x = D.patch.X;
    const int chart = stereo::best_chart(x);
    Vec6 df1, df2;
    df1 << stereo::push(x, D.e1, chart), D.d1;
    df2 << stereo::push(x, D.e2, chart), D.d2;
    Mat6 J2 = twistor_op_at(TwistorFlavor::J2, t, {x, D.f});
    Vec6 dbar = df1 + J2 * df2;
    Vec6 cmp;
    cmp << 0, 0, D.d1 - structure_at(t, D.f, x) * D.d2;
    R.dbar.push_back(dbar);
    R.comparison.push_back(cmp);
    R.difference.push_back((dbar - cmp).norm());
    R.max_difference = std::max(R.max_difference, R.difference.back());
  }
  return R;
}

}  // namespace fueterlab
