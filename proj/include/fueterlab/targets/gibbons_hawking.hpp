#pragma once
// Gibbons-Hawking metrics g = V |dy|^2 + eta^2 / V, eta = dtheta/2 + A, dA = *dV.
//
// Charts: 0 uses the configured gauge per center, 1 flips every gauge, and
// chart 2 + c is a Hopf chart (C^2 coordinates) centered at center c, which
// stays smooth through the nut.

#include <complex>
#include <vector>

#include "fueterlab/targets/core.hpp"

namespace fueterlab {

struct GHCenter {
  Vec3 p = Vec3::Zero();
  bool north = true;  // gauge in chart 0: Dirac string below (north) or above (south)
};

class GibbonsHawkingTarget : public Target {
 public:
  GibbonsHawkingTarget(TargetId id, double V0, std::vector<GHCenter> centers, double hopf_radius)
      : id_(id), V0_(V0), centers_(std::move(centers)), hopf_radius_(hopf_radius) {}

  TargetId id() const override { return id_; }
  const std::vector<GHCenter>& centers() const { return centers_; }
  double V0() const { return V0_; }

  int chart_count() const override { return 2 + static_cast<int>(centers_.size()); }
  std::string chart_name(int c) const override {
    if (c == 0) return "gh";
    if (c == 1) return "gh-flip";
    return "hopf-" + std::to_string(c - 2);
  }
  std::string domain_predicate(int c) const override {
    std::ostringstream os;
    if (c < 2)
      os << "|y - p_c| >= " << excision_ << " for every center and the angle to each Dirac string "
         << "satisfies 1 -/+ cos >= " << string_margin_;
    else
      os << kHopfMin << " <= |q|^2 and |q|^2/2 <= " << hopf_radius_;
    return os.str();
  }

  bool in_domain(const ChartPoint& p) const override {
    if (p.chart < 0 || p.chart >= chart_count() || !p.x.allFinite()) return false;
    if (p.chart < 2) {
      Vec3 y = p.x.head<3>();
      for (std::size_t c = 0; c < centers_.size(); ++c) {
        Vec3 r = y - centers_[c].p;
        double rho = r.norm();
        if (rho < excision_) return false;
        bool north = gauge(p.chart, c);
        double m = north ? (rho + r[2]) : (rho - r[2]);
        if (m < string_margin_ * rho) return false;
      }
      return true;
    }
    double q2 = p.x.squaredNorm();
    return q2 >= kHopfMin && 0.5 * q2 <= hopf_radius_;
  }

  Vec4 period(int c) const override {
    return c < 2 ? Vec4(0, 0, 0, Conventions::fiber_period) : Vec4::Zero();
  }
  std::array<bool, 4> translation_symmetric(int c) const override {
    if (c < 2) return {false, false, false, true};
    return {};
  }

  // -------------------------------------------------------------------------
  // transitions

  ChartPoint to_chart(const ChartPoint& p, int chart) const override {
    if (chart < 0 || chart >= chart_count())
      throw DomainError(name() + ": no chart " + std::to_string(chart));
    if (p.chart == chart) return p;
    ChartPoint out{id_, chart, Vec4::Zero()};
    if (p.chart < 2 && chart < 2) {
      Vec3 y = p.x.head<3>();
      out.x << y, reduce(p.x[3] + theta_shift(p.chart, chart, y, -1));
    } else if (p.chart >= 2 && chart < 2) {
      int c = p.chart - 2;
      Vec3 y = hopf_base(c, p.x);
      bool north = gauge(chart, c);
      double th = north ? 2 * std::atan2(p.x[1], p.x[0]) : 2 * std::atan2(p.x[3], p.x[2]);
      // other centers: convert from chart-0 gauges into the requested chart
      th += theta_shift(0, chart, y, c);
      out.x << y, reduce(th);
    } else if (p.chart < 2 && chart >= 2) {
      int c = chart - 2;
      Vec3 y = p.x.head<3>();
      // bring other centers to chart-0 gauge, keep center c in p's gauge
      double th = p.x[3] + theta_shift(p.chart, 0, y, c);
      bool north = gauge(p.chart, c);
      Vec3 r = y - centers_[c].p;
      double rr = 2 * r.norm();
      double ct = std::clamp(r[2] / r.norm(), -1.0, 1.0);
      double ch = std::sqrt(0.5 * (1 + ct)), sh = std::sqrt(0.5 * (1 - ct));
      double ph = std::atan2(r[1], r[0]);
      double s = std::sqrt(rr);
      std::complex<double> z1, z2;
      if (north) {
        z1 = std::polar(s * ch, 0.5 * th);
        z2 = std::polar(s * sh, 0.5 * th - ph);
      } else {
        z2 = std::polar(s * sh, 0.5 * th);
        z1 = std::polar(s * ch, 0.5 * th + ph);
      }
      out.x << z1.real(), z1.imag(), z2.real(), z2.imag();
    } else {
      ChartPoint mid = to_chart(p, 0);
      if (!in_domain(mid)) mid = to_chart(p, 1);
      return to_chart(mid, chart);
    }
    return out;
  }

  int best_chart(const ChartPoint& p) const override {
    Vec3 y = base_point(p);
    for (std::size_t c = 0; c < centers_.size(); ++c)
      if ((y - centers_[c].p).norm() < 0.25 * hopf_radius_) return 2 + static_cast<int>(c);
    double m0 = 1e300, m1 = 1e300;
    for (std::size_t c = 0; c < centers_.size(); ++c) {
      Vec3 r = y - centers_[c].p;
      double ct = r[2] / r.norm();
      double a = 1 + ct, b = 1 - ct;
      m0 = std::min(m0, gauge(0, c) ? a : b);
      m1 = std::min(m1, gauge(1, c) ? a : b);
    }
    return m0 >= m1 ? 0 : 1;
  }

  // base point y in R^3 of any chart point
  Vec3 base_point(const ChartPoint& p) const {
    if (p.chart < 2) return p.x.head<3>();
    return hopf_base(p.chart - 2, p.x);
  }

  // -------------------------------------------------------------------------
  // geometry

  double V(const Vec3& y) const {
    double v = V0_;
    for (auto& c : centers_) v += 0.5 / (y - c.p).norm();
    return v;
  }

  // connection 1-form A (on dy) in a gauge chart
  Vec3 A(int chart, const Vec3& y) const {
    Vec3 a = Vec3::Zero();
    for (std::size_t c = 0; c < centers_.size(); ++c) {
      Vec3 r = y - centers_[c].p;
      double rho = r.norm();
      double den = gauge(chart, c) ? rho * (rho + r[2]) : -rho * (rho - r[2]);
      a += Vec3(r[1], -r[0], 0) / (2 * den);
    }
    return a;
  }

  Vec4 eta(int chart, const Vec3& y) const {
    Vec4 e;
    e << A(chart, y), 0.5;
    return e;
  }

  Mat4 metric(const ChartPoint& p) const override {
    if (p.chart >= 2) {
      Mat4 J;
      ChartPoint g0 = hopf_to_gauge(p, &J);
      return J.transpose() * metric(g0) * J;
    }
    Vec3 y = p.x.head<3>();
    double v = V(y);
    Vec4 e = eta(p.chart, y);
    Mat4 g = Mat4::Zero();
    g.topLeftCorner<3, 3>() = v * Mat3::Identity();
    g += e * e.transpose() / v;
    return g;
  }

  bool has_complex_triple() const override { return true; }

  std::array<Mat4, 3> kahler(const ChartPoint& p) const override {
    if (p.chart >= 2) {
      Mat4 J;
      ChartPoint g0 = hopf_to_gauge(p, &J);
      auto W = kahler(g0);
      for (auto& w : W) w = J.transpose() * w * J;
      return W;
    }
    Vec3 y = p.x.head<3>();
    double v = V(y);
    Vec4 e = eta(p.chart, y);
    std::array<Mat4, 3> W;
    for (int a = 0; a < 3; ++a) {
      Vec4 dx = Vec4::Unit(a);
      W[a] = -(e * dx.transpose() - dx * e.transpose());
      int i = (a + 1) % 3, j = (a + 2) % 3;
      W[a](i, j) += v;
      W[a](j, i) -= v;
    }
    return W;
  }

  ComplexTriple triple(const ChartPoint& p) const override {
    Mat4 g = metric(p);
    auto W = kahler(p);
    Eigen::LDLT<Mat4> ldlt(g);
    ComplexTriple t;
    for (int a = 0; a < 3; ++a) t.I[a] = ldlt.solve(Mat4(W[a].transpose()));
    return t;
  }

  double radius(const ChartPoint& p) const override {
    if (id_ != TargetId::taubnut)
      throw UnsupportedError(name() + ": radius function only defined for Taub-NUT");
    double rho = (base_point(p) - centers_[0].p).norm();
    return taubnut_radius(rho);
  }

  // geodesic distance from the nut along a radial line: int_0^rho sqrt(1 + 1/(2s)) ds
  static double taubnut_radius(double rho) {
    double a = std::sqrt(rho), b = std::sqrt(rho + 0.5);
    return a * b + 0.5 * std::log((a + b) / std::sqrt(0.5));
  }

 protected:
  static constexpr double kHopfMin = 1e-10;

  bool gauge(int chart, std::size_t c) const {
    bool n = centers_[c].north;
    return chart == 1 ? !n : n;
  }

  double reduce(double th) const {
    double P = Conventions::fiber_period;
    th = std::fmod(th, P);
    if (th < 0) th += P;
    return th;
  }

  // theta_to - theta_from = -2 sum_c s_c phi_c, s_c = +1 for north->south, skipping `skip`
  double theta_shift(int from, int to, const Vec3& y, int skip) const {
    double d = 0;
    for (std::size_t c = 0; c < centers_.size(); ++c) {
      if (static_cast<int>(c) == skip) continue;
      bool a = gauge(from, c), b = gauge(to, c);
      if (a == b) continue;
      Vec3 r = y - centers_[c].p;
      double ph = std::atan2(r[1], r[0]);
      d += a ? -2 * ph : 2 * ph;
    }
    return d;
  }

  Vec3 hopf_base(int c, const Vec4& q) const {
    double a = q[0], b = q[1], cc = q[2], d = q[3];
    return centers_[c].p + Vec3(a * cc + b * d, b * cc - a * d, 0.5 * (a * a + b * b - cc * cc - d * d));
  }

  // Hopf chart point -> chart-0 point, with Jacobian d(y, theta)/dq.
  ChartPoint hopf_to_gauge(const ChartPoint& p, Mat4* J) const {
    int c = p.chart - 2;
    const Vec4& q = p.x;
    double a = q[0], b = q[1], cc = q[2], d = q[3];
    ChartPoint g0 = to_chart(p, 0);
    Mat4 M;
    M.row(0) << cc, d, a, b;
    M.row(1) << -d, cc, b, -a;
    M.row(2) << a, b, -cc, -d;
    if (centers_[c].north) {
      double s = a * a + b * b;
      M.row(3) << -2 * b / s, 2 * a / s, 0, 0;
    } else {
      double s = cc * cc + d * d;
      M.row(3) << 0, 0, -2 * d / s, 2 * cc / s;
    }
    *J = M;
    return g0;
  }

  TargetId id_;
  double V0_;
  std::vector<GHCenter> centers_;
  double hopf_radius_;
  double excision_ = 1e-3;
  double string_margin_ = 1e-3;
};

// Taub-NUT: one center, V = 1 + 1/(2 rho), with the rotational SO(3) action
// v_a = (y x e_a) + h_a d_theta, h_a = -2 A(y x e_a) - y_a / rho.
class TaubNutTarget final : public GibbonsHawkingTarget {
 public:
  TaubNutTarget()
      : GibbonsHawkingTarget(TargetId::taubnut, 1.0, std::vector<GHCenter>{{Vec3::Zero(), true}},
                             1.0) {}

  bool has_permuting_frame() const override { return true; }
  std::array<Vec4, 3> permuting_frame(const ChartPoint& p) const override {
    if (p.chart >= 2) {
      Mat4 J;
      ChartPoint g0 = hopf_to_gauge(p, &J);
      auto v = permuting_frame(g0);
      Eigen::PartialPivLU<Mat4> lu(J);
      for (auto& w : v) w = lu.solve(w);
      return v;
    }
    Vec3 y = p.x.head<3>();
    Vec3 a = A(p.chart, y);
    double rho = y.norm();
    std::array<Vec4, 3> v;
    for (int k = 0; k < 3; ++k) {
      Vec3 u = y.cross(Vec3::Unit(k));
      v[k] << u, -2 * a.dot(u) - y[k] / rho;
    }
    return v;
  }
};

inline std::shared_ptr<TaubNutTarget> make_taubnut() { return std::make_shared<TaubNutTarget>(); }

// Two-center Gibbons-Hawking space (V0 = 0), centers at (0, 0, -+d/2). The bolt
// lies over the segment between the centers.
inline std::shared_ptr<GibbonsHawkingTarget> make_eguchi_hanson(double d = 1.0) {
  return std::make_shared<GibbonsHawkingTarget>(
      TargetId::eguchi_hanson, 0.0,
      std::vector<GHCenter>{{Vec3(0, 0, -0.5 * d), true}, {Vec3(0, 0, 0.5 * d), false}}, 0.25 * d);
}

}  // namespace fueterlab
