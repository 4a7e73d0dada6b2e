#pragma once
// Blow-up analysis on flat balls: monotonicity profiles
//   N(r) = (1/r) int_{B_r} |df|^2,   N(r) - N(s) = 2 int_{B_r \ B_s} rho^{-1} |d_rho f|^2
// for Fueter maps, density extrapolation, rescaling and homogeneity, plus the
// axisymmetric covering of the Atiyah-Hitchin bolt.
//
// Ball maps are evaluator-backed. Derivatives are differenced in the chart of
// the base value and measured with the target metric; bolt-valued maps (which
// carry no metric chart) are measured through the isometric Veronese
// embedding n -> (b/sqrt 2) n n^T of the round RP^2 of radius b.

#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>

#include "fueterlab/fields3d/section.hpp"
#include "fueterlab/spheremaps/map.hpp"
#include "fueterlab/targets/atiyah_hitchin.hpp"

namespace fueterlab {

using BallEvaluator = std::function<ChartPoint(const Vec3&)>;

// ---------------------------------------------------------------------------
// bolt points

using Vec9 = Eigen::Matrix<double, 9, 1>;

// the bolt point labelled by the line through +-n, with a canonical sign
inline ChartPoint bolt_point(const Vec3& n) {
  Vec3 u = n.normalized();
  if (u[2] < 0 || (u[2] == 0 && (u[1] < 0 || (u[1] == 0 && u[0] < 0)))) u = -u;
  return ChartPoint{TargetId::atiyah_hitchin, 1, Vec4(kPi, u[0], u[1], u[2])};
}

inline Vec9 veronese(const Vec3& n, double scale) {
  Mat3 P = (scale / std::sqrt(2.0)) * n * n.transpose();
  return Eigen::Map<const Vec9>(P.data());
}

inline double bolt_scale(const Target& t) {
  auto* ah = dynamic_cast<const AtiyahHitchinTarget*>(&t);
  if (!ah) throw PreconditionError("bolt_scale: target is not Atiyah-Hitchin");
  return ah->profile().bolt_scale;
}

namespace detail {

inline bool is_bolt(const ChartPoint& p) { return p.target == TargetId::atiyah_hitchin && p.chart == 1; }

// difference b - a in the representation used to measure a
inline Eigen::VectorXd measured_delta(const Target& t, const ChartPoint& a, const ChartPoint& b) {
  if (is_bolt(a)) {
    if (!is_bolt(b)) throw DomainError("ball map leaves the bolt");
    double s = bolt_scale(t);
    return veronese(b.x.tail<3>(), s) - veronese(a.x.tail<3>(), s);
  }
  return chart_delta(t, a, b);
}

inline double measured_sq_norm(const Target& t, const ChartPoint& a, const Eigen::VectorXd& v) {
  if (is_bolt(a)) return v.squaredNorm();
  Vec4 w = v;
  return w.dot(metric_at(t, a) * w);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ball maps

class BallMap {
 public:
  BallMap(TargetPtr target, BallEvaluator f, Vec3 center, double outer, double inner = 0, int radial_nodes = 10,
          int ntheta = 16, FrameIdent frame = {})
      : target_(std::move(target)), f_(std::move(f)), center_(std::move(center)), outer_(outer), inner_(inner),
        frame_(frame), quad_(center_, {outer}, radial_nodes, ntheta, inner) {
    if (!target_) throw PreconditionError("BallMap: missing target");
    if (!(inner >= 0 && inner < outer)) throw PreconditionError("BallMap: need 0 <= inner < outer");
    frame_.validate();
    GaussRule gl = gauss_legendre(radial_nodes);
    for (double x : gl.x) shells_.push_back(0.5 * (outer + inner) + 0.5 * (outer - inner) * x);
    nodes_.reserve(shells_.size() * quad_.shell.dirs.size());
    for (double s : shells_)
      for (const Vec3& d : quad_.shell.dirs) {
        ChartPoint p = f_(center_ + s * d);
        target_->require_domain(p);
        nodes_.push_back(p);
      }
  }

  const Target& tgt() const { return *target_; }
  const TargetPtr& target() const { return target_; }
  const BallEvaluator& evaluator() const { return f_; }
  const Vec3& center() const { return center_; }
  double outer() const { return outer_; }
  double inner() const { return inner_; }
  const FrameIdent& frame() const { return frame_; }
  int radial_nodes() const { return quad_.radial_nodes; }
  int ntheta() const { return static_cast<int>(std::lround(std::sqrt(quad_.shell.dirs.size() / 2.0))); }
  const std::vector<double>& shells() const { return shells_; }
  const std::vector<Vec3>& directions() const { return quad_.shell.dirs; }
  // nodes are shell-major: node(a, d) at center + shells[a] * directions[d]
  const ChartPoint& node(std::size_t a, std::size_t d) const { return nodes_[a * quad_.shell.dirs.size() + d]; }
  const std::vector<ChartPoint>& nodes() const { return nodes_; }
  Vec3 node_position(std::size_t a, std::size_t d) const { return center_ + shells_[a] * quad_.shell.dirs[d]; }

  bool contains_ball(const Vec3& c, double r, double tol = 1e-12) const {
    double e = (c - center_).norm();
    if (e + r > outer_ * (1 + tol)) return false;
    if (inner_ > 0 && e > tol * outer_ && e - r < inner_ * (1 - tol)) return false;
    return true;
  }

  ChartPoint operator()(const Vec3& y) const { return f_(y); }

 private:
  TargetPtr target_;
  BallEvaluator f_;
  Vec3 center_;
  double outer_, inner_;
  FrameIdent frame_;
  BallQuadrature quad_;
  std::vector<double> shells_;
  std::vector<ChartPoint> nodes_;
};

struct BallJetOptions {
  double fd_rel = 1e-3;  // step relative to the distance from the map center
};

namespace detail {

inline double ball_step(const BallMap& m, const Vec3& y, const BallJetOptions& o) {
  return o.fd_rel * std::max((y - m.center()).norm(), 1e-3 * m.outer());
}

// order-4 derivative of the map along v at y, in the measured representation of f(y)
inline Eigen::VectorXd ball_partial(const BallMap& m, const ChartPoint& fy, const Vec3& y, const Vec3& v,
                                    double h) {
  const Target& t = m.tgt();
  return (8 * (measured_delta(t, fy, m(y + h * v)) - measured_delta(t, fy, m(y - h * v))) -
          (measured_delta(t, fy, m(y + 2 * h * v)) - measured_delta(t, fy, m(y - 2 * h * v)))) /
         (12 * h);
}

}  // namespace detail

inline double energy_density(const BallMap& m, const Vec3& y, const BallJetOptions& o = {}) {
  const ChartPoint fy = m(y);
  const double h = detail::ball_step(m, y, o);
  double e = 0;
  for (int i = 0; i < 3; ++i) e += detail::measured_sq_norm(m.tgt(), fy, detail::ball_partial(m, fy, y, Vec3::Unit(i), h));
  return e;
}

// |d_rho f|^2 about a center
inline double radial_density(const BallMap& m, const Vec3& c, const Vec3& y, const BallJetOptions& o = {}) {
  const ChartPoint fy = m(y);
  Vec3 u = (y - c).normalized();
  return detail::measured_sq_norm(m.tgt(), fy, detail::ball_partial(m, fy, y, u, detail::ball_step(m, y, o)));
}

// |sum_i I_i d_i f| with the map's frame identification
inline double ball_fueter_residual(const BallMap& m, const Vec3& y, const BallJetOptions& o = {}) {
  const ChartPoint fy = m(y);
  const double h = detail::ball_step(m, y, o);
  ComplexTriple T = complex_triple_at(m.tgt(), fy);
  Vec4 r = Vec4::Zero();
  for (int i = 0; i < 3; ++i) {
    Vec4 d = detail::ball_partial(m, fy, y, Vec3::Unit(i), h);
    r += m.frame().apply(T.I, i) * d;
  }
  return std::sqrt(detail::measured_sq_norm(m.tgt(), fy, r));
}

// ---------------------------------------------------------------------------
// monotonicity

struct ProfileOptions {
  int radial_nodes = 10;  // Gauss nodes per radial interval
  int ntheta = 16;        // angular resolution of each shell
  BallJetOptions jet;
};

struct RadialProfile {
  Vec3 center;
  std::vector<double> radii;
  std::vector<double> N;       // (1/r) int_{B_r} |df|^2
  std::vector<double> D;       // 2 int_{B_r \ B_{r_0}} rho^{-1} |d_rho f|^2
  std::vector<double> defect;  // |(N(r) - N(r_0)) - D(r_0, r)|
  double max_pair_defect = 0;  // over all radius pairs
  double fueter_residual = std::numeric_limits<double>::quiet_NaN();  // sup on the quadrature nodes
  bool nondecreasing = true;
};

inline RadialProfile monotonicity_profile(const BallMap& m, const Vec3& c, std::vector<double> radii,
                                          const ProfileOptions& o = {}) {
  if (radii.empty()) throw PreconditionError("monotonicity_profile: no radii");
  std::sort(radii.begin(), radii.end());
  if (!(radii.front() > 0)) throw PreconditionError("monotonicity_profile: radii must be positive");
  if (!m.contains_ball(c, 0)) throw DomainError("monotonicity_profile: center outside the ball map's domain");
  if (!m.contains_ball(c, radii.back())) throw DomainError("monotonicity_profile: radii exceed the ball map's domain");
  const bool concentric = (c - m.center()).norm() <= 1e-14 * m.outer();
  BallQuadrature q(c, radii, o.radial_nodes, o.ntheta, concentric ? m.inner() : 0.0);

  const bool has_triple = m.tgt().has_complex_triple();
  double fres = 0;
  auto e = integrate_ball(
      [&](const Vec3& y) {
        if (has_triple) fres = std::max(fres, ball_fueter_residual(m, y, o.jet));
        return energy_density(m, y, o.jet);
      },
      q);
  auto d = integrate_ball([&](const Vec3& y) { return radial_density(m, c, y, o.jet) / (y - c).norm(); }, q);

  RadialProfile P;
  P.center = c;
  P.radii = radii;
  for (std::size_t k = 0; k < radii.size(); ++k) P.N.push_back(e[k] / radii[k]);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    P.D.push_back(2 * (d[k] - d[0]));
    P.defect.push_back(std::abs((P.N[k] - P.N[0]) - P.D[k]));
    for (std::size_t j = 0; j < k; ++j)
      P.max_pair_defect = std::max(P.max_pair_defect, std::abs((P.N[k] - P.N[j]) - 2 * (d[k] - d[j])));
    if (k > 0 && P.N[k] < P.N[k - 1] * (1 - 1e-12) - 1e-14) P.nondecreasing = false;
  }
  if (has_triple) P.fueter_residual = fres;
  return P;
}

inline void write_profile_csv(std::ostream& os, const RadialProfile& P) {
  os << "r,N,D,defect\n" << std::setprecision(17);
  for (std::size_t k = 0; k < P.radii.size(); ++k)
    os << P.radii[k] << ',' << P.N[k] << ',' << P.D[k] << ',' << P.defect[k] << '\n';
}

// ---------------------------------------------------------------------------
// density

struct DensityOptions {
  double r_max = 0;  // 0: largest ball about the center inside the domain
  int levels = 6;    // radii r_max 2^-k
  ProfileOptions profile;
};

struct DensityEstimate {
  double theta = 0;      // clamped at 0
  double theta_raw = 0;  // extrapolated value before clamping
  double order = 0;      // fitted leading order p in N(r) = theta + C r^p; 0 for a flat profile
  bool flat_profile = false;
  bool noisy = false;  // non-monotone or non-contracting tail: extrapolation unreliable
  std::vector<double> radii, values;
  std::vector<double> sup_gradient;  // max |df| on the nodes of each ball
};

inline DensityEstimate density_estimate(const BallMap& m, const Vec3& c, const DensityOptions& o = {}) {
  if (o.levels < 3) throw PreconditionError("density_estimate: need at least 3 levels");
  double rmax = o.r_max;
  if (rmax <= 0) rmax = m.outer() - (c - m.center()).norm();
  std::vector<double> radii;
  for (int k = o.levels - 1; k >= 0; --k) radii.push_back(rmax * std::ldexp(1.0, -k));
  RadialProfile P = monotonicity_profile(m, c, radii, o.profile);

  DensityEstimate E;
  E.radii = P.radii;
  E.values = P.N;
  for (double r : radii) {
    double g = 0;
    for (const Vec3& d : sphere_product_rule(o.profile.ntheta).dirs)
      for (double s : {0.25, 0.5, 1.0}) g = std::max(g, std::sqrt(energy_density(m, c + s * r * d, o.profile.jet)));
    E.sup_gradient.push_back(g);
  }
  const double N0 = P.N[0], N1 = P.N[1], N2 = P.N[2];
  const double ds = N1 - N0, db = N2 - N1;
  const double scale = std::max({std::abs(N0), std::abs(N1), std::abs(N2), 1e-300});
  if (std::abs(ds) <= 1e-10 * scale && std::abs(db) <= 1e-10 * scale) {
    E.flat_profile = true;
    E.theta_raw = N0;
  } else if (ds == 0 || db / ds <= 1) {
    E.noisy = true;
    E.theta_raw = N0;
  } else {
    E.order = std::log2(db / ds);
    E.theta_raw = N0 - ds / (db / ds - 1);
  }
  if (!P.nondecreasing && !E.flat_profile) E.noisy = true;
  E.theta = std::max(E.theta_raw, 0.0);
  return E;
}

// ---------------------------------------------------------------------------
// rescaling and homogeneity

// y -> f(x + r y) on B_outer(0); the evaluator is composed, not resampled
inline BallMap rescale(const BallMap& m, const Vec3& x, double r, double outer = 1.0) {
  if (!(r > 0)) throw PreconditionError("rescale: factor must be positive");
  const bool concentric = (x - m.center()).norm() <= 1e-14 * m.outer();
  const double inner = concentric ? m.inner() / r : 0.0;
  if (!(outer > inner) || !m.contains_ball(x, r * outer))
    throw DomainError("rescale: rescaled ball leaves the map's domain");
  auto f = m.evaluator();
  return BallMap(m.target(), [f, x, r](const Vec3& y) { return f(x + r * y); }, Vec3::Zero(), outer, inner,
                 m.radial_nodes(), m.ntheta(), m.frame());
}

inline BallMap homogeneous_ball_map(TargetPtr t, const SphereEvaluator& phi, double outer = 1.0, double inner = 0,
                                    int radial_nodes = 10, int ntheta = 16) {
  return BallMap(std::move(t), [phi](const Vec3& y) { return phi(y.normalized()); }, Vec3::Zero(), outer, inner,
                 radial_nodes, ntheta);
}

struct HomogeneityReport {
  double sup = 0;              // sup of rho |d_rho f| over the nodes
  std::vector<double> values;  // per node, shell-major like BallMap::nodes
};

namespace detail {

// differentiation matrix of the Lagrange interpolant through distinct nodes
inline Eigen::MatrixXd lagrange_diff_matrix(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (k != i) w[i] /= x[i] - x[k];
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) {
        D(i, j) = (w[j] / w[i]) / (x[i] - x[j]);
        D(i, i) -= D(i, j);
      }
  }
  return D;
}

}  // namespace detail

// About the grid center the radial derivative is the derivative of the radial
// interpolant through the shell nodes; about any other center it is differenced
// from the evaluator.
inline HomogeneityReport homogeneity_defect(const BallMap& m, const Vec3& c, const BallJetOptions& o = {}) {
  HomogeneityReport R;
  const auto& S = m.shells();
  const auto& dirs = m.directions();
  R.values.resize(S.size() * dirs.size());
  const bool concentric = (c - m.center()).norm() <= 1e-14 * m.outer();
  if (concentric) {
    Eigen::MatrixXd D = detail::lagrange_diff_matrix(S);
    for (std::size_t d = 0; d < dirs.size(); ++d)
      for (std::size_t a = 0; a < S.size(); ++a) {
        const ChartPoint& fa = m.node(a, d);
        Eigen::VectorXd dr;
        for (std::size_t b = 0; b < S.size(); ++b) {
          if (b == a) continue;
          Eigen::VectorXd delta = D(a, b) * detail::measured_delta(m.tgt(), fa, m.node(b, d));
          dr = dr.size() ? (dr + delta).eval() : delta;
        }
        R.values[a * dirs.size() + d] = S[a] * std::sqrt(detail::measured_sq_norm(m.tgt(), fa, dr));
      }
  } else {
    for (std::size_t a = 0; a < S.size(); ++a)
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        Vec3 y = m.node_position(a, d);
        double rho = (y - c).norm();
        R.values[a * dirs.size() + d] = rho > 0 ? rho * std::sqrt(radial_density(m, c, y, o)) : 0.0;
      }
  }
  for (double v : R.values) R.sup = std::max(R.sup, v);
  return R;
}

// ---------------------------------------------------------------------------
// axisymmetric covering of the Atiyah-Hitchin bolt

inline SphereEvaluator bolt_covering() {
  return [](const Vec3& x) { return bolt_point(x); };
}

struct AxisymmetricReport {
  double bolt_radius = 0;
  double bolt_area = 0;           // 2 pi b^2
  double eta_deviation = 0;       // max |eta - eta_bolt| over nodes
  double axis_deviation = 0;      // max ||n| - 1| over nodes
  double antipodal_mismatch = 0;  // max over nodes of |Phi(x) - Phi(-x)| in the embedding
  double tension = 0;             // sup of the tangential Laplacian in the embedding
  double energy = 0;              // int |dPhi|^2 (no 1/2)
  double energy_expected = 0;     // 2 x (degree 2 x bolt area)
  double theta = 0;               // density at 0 of y -> Phi(y/|y|)
  double N1 = 0;                  // N(1) of the same map
  double density_spread = 0;      // max |N(r) - theta| / theta over the dyadic radii
  bool identification_assumed = true;  // covering taken as the restriction of the singular map
};

namespace detail {

// Laplace-Beltrami data of an embedded function at a grid node
struct EmbeddedJet {
  Vec9 F, Fa, Fb, lap;
  PanelPatch patch;
};

inline EmbeddedJet embedded_jet(const SphereGrid& g, const std::function<Vec9(const Vec3&)>& F, int p, int i, int j) {
  const double a = g.coord(i), b = g.coord(j), h = g.delta();
  const Stencil s1 = first_derivative_stencil(4), s2 = second_derivative_stencil(4);
  auto at = [&](int di, int dj) { return F(SphereGrid::position(p, a + di * h, b + dj * h)); };
  EmbeddedJet J;
  J.patch = SphereGrid::patch(p, a, b);
  J.F = at(0, 0);
  Vec9 Faa = Vec9::Zero(), Fbb = Vec9::Zero(), Fab = Vec9::Zero();
  J.Fa = J.Fb = Vec9::Zero();
  for (std::size_t k = 0; k < s1.offsets.size(); ++k) {
    J.Fa += s1.weights[k] * at(s1.offsets[k], 0);
    J.Fb += s1.weights[k] * at(0, s1.offsets[k]);
    for (std::size_t l = 0; l < s1.offsets.size(); ++l)
      Fab += s1.weights[k] * s1.weights[l] * at(s1.offsets[k], s1.offsets[l]);
  }
  for (std::size_t k = 0; k < s2.offsets.size(); ++k) {
    Faa += s2.weights[k] * at(s2.offsets[k], 0);
    Fbb += s2.weights[k] * at(0, s2.offsets[k]);
  }
  J.Fa /= h;
  J.Fb /= h;
  Faa /= h * h;
  Fbb /= h * h;
  Fab /= h * h;
  const PanelPatch& P = J.patch;
  Eigen::Matrix2d Gi = P.G.inverse();
  auto gam = [&](const Vec3& X) { return (Gi * Eigen::Vector2d(X.dot(P.Xa), X.dot(P.Xb))).eval(); };
  Eigen::Vector2d gaa = gam(P.Xaa), gab = gam(P.Xab), gbb = gam(P.Xbb);
  J.lap = Gi(0, 0) * (Faa - gaa[0] * J.Fa - gaa[1] * J.Fb) + 2 * Gi(0, 1) * (Fab - gab[0] * J.Fa - gab[1] * J.Fb) +
          Gi(1, 1) * (Fbb - gbb[0] * J.Fa - gbb[1] * J.Fb);
  return J;
}

}  // namespace detail

inline SphereMap axisymmetric_map(const SphereGrid& g, const std::shared_ptr<AtiyahHitchinTarget>& t,
                                  AxisymmetricReport* report = nullptr, const DensityOptions& dens = {}) {
  if (!t) throw PreconditionError("axisymmetric_map: missing Atiyah-Hitchin profile");
  SphereMap map = make_sphere_map(g, t, bolt_covering());
  if (!report) return map;

  AxisymmetricReport& R = *report;
  R = AxisymmetricReport{};
  const double b = t->profile().bolt_scale;
  R.bolt_radius = b;
  R.bolt_area = 2 * kPi * b * b;
  R.energy_expected = 4 * R.bolt_area;
  auto F = [b](const Vec3& x) { return veronese(bolt_point(x).x.tail<3>(), b); };
  for (std::size_t n = 0; n < map.size(); ++n) {
    const ChartPoint& q = map.node(n);
    R.eta_deviation = std::max(R.eta_deviation, std::abs(q.x[0] - kPi));
    R.axis_deviation = std::max(R.axis_deviation, std::abs(q.x.tail<3>().norm() - 1));
    Vec3 x = g.node_position(n);
    R.antipodal_mismatch = std::max(R.antipodal_mismatch, (F(x) - F(-x)).norm());
    auto [p, i, j] = g.unindex(n);
    auto J = detail::embedded_jet(g, F, p, i, j);
    // tangent plane of the Veronese surface at n: sym(e n^T) for e tangent
    Vec3 nn = bolt_point(x).x.tail<3>();
    auto [e1, e2] = J.patch.frame();
    Mat3 A = e1 * nn.transpose() + nn * e1.transpose(), B = e2 * nn.transpose() + nn * e2.transpose();
    Vec9 T1 = Eigen::Map<const Vec9>(A.data()).normalized(), T2 = Eigen::Map<const Vec9>(B.data()).normalized();
    Vec9 tan = T1 * T1.dot(J.lap) + T2 * T2.dot(J.lap);
    R.tension = std::max(R.tension, tan.norm());
    Eigen::Matrix2d Gi = J.patch.G.inverse();
    double e = Gi(0, 0) * J.Fa.squaredNorm() + 2 * Gi(0, 1) * J.Fa.dot(J.Fb) + Gi(1, 1) * J.Fb.squaredNorm();
    R.energy += g.area_weight(n) * e;
  }
  BallMap hom = homogeneous_ball_map(t, bolt_covering(), 1.0, 0.0, dens.profile.radial_nodes, dens.profile.ntheta);
  DensityEstimate E = density_estimate(hom, Vec3::Zero(), dens);
  R.theta = E.theta;
  for (double v : E.values) R.density_spread = std::max(R.density_spread, std::abs(v - E.theta));
  if (E.theta > 0) R.density_spread /= E.theta;
  R.N1 = monotonicity_profile(hom, Vec3::Zero(), {1.0}, dens.profile).N[0];
  return map;
}

}  // namespace fueterlab
