#pragma once
// Maps S^2 -> target on the cubed sphere and the pointwise checks built on
// them: tri-holomorphic residual, conformality, tension, area, Stokes pairing.

#include <functional>
#include <sstream>

#include "fueterlab/spheremaps/grid.hpp"
#include "fueterlab/targets.hpp"

namespace fueterlab {

enum class MultSide : std::uint32_t { left = 0, right = 1 };

// Residual d1 f + sigma I(x) d2 f. `right` uses raw right multiplication
// q -> q x on the flat target.
struct SphereConvention {
  int sigma = +1;
  MultSide side = MultSide::left;

  std::uint32_t tag() const { return (sigma < 0 ? 1u : 0u) | (side == MultSide::right ? 2u : 0u); }
  static SphereConvention from_tag(std::uint32_t t) {
    if (t > 3) throw PreconditionError("SphereConvention: unknown tag");
    return {(t & 1u) ? -1 : +1, (t & 2u) ? MultSide::right : MultSide::left};
  }
  std::string name() const {
    return std::string(sigma > 0 ? "+" : "-") + (side == MultSide::left ? "left" : "right");
  }
  static std::array<SphereConvention, 4> all() {
    return {SphereConvention{+1, MultSide::left}, SphereConvention{-1, MultSide::left},
            SphereConvention{+1, MultSide::right}, SphereConvention{-1, MultSide::right}};
  }
};

// I(x) at a target point under a convention
inline Mat4 sphere_structure(const Target& t, const ChartPoint& p, const Vec3& x, const SphereConvention& c) {
  if (c.side == MultSide::right) {
    if (t.id() != TargetId::flat)
      throw UnsupportedError("right multiplication is only defined on the flat quaternion target");
    return quat_right(Vec4(0, x[0], x[1], x[2]));
  }
  return structure_at(t, p, x);
}

using SphereEvaluator = std::function<ChartPoint(const Vec3&)>;

class SphereMap {
 public:
  SphereMap(SphereGrid grid, TargetPtr target, SphereConvention conv = {})
      : grid_(std::move(grid)), target_(std::move(target)), conv_(conv) {
    if (!target_) throw PreconditionError("SphereMap: missing target");
  }

  const SphereGrid& grid() const { return grid_; }
  const TargetPtr& target() const { return target_; }
  const Target& tgt() const { return *target_; }
  const SphereConvention& convention() const { return conv_; }
  void set_convention(const SphereConvention& c) { conv_ = c; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<ChartPoint>& nodes() const { return nodes_; }
  const ChartPoint& node(std::size_t n) const { return nodes_[n]; }

  // extended value, -kGhost <= i, j < m + kGhost
  const ChartPoint& ext(int p, int i, int j) const {
    const int w = grid_.m() + 2 * SphereGrid::kGhost;
    return ext_[(static_cast<std::size_t>(p) * w + (i + SphereGrid::kGhost)) * w + (j + SphereGrid::kGhost)];
  }

  // Fill nodes and ghosts from an evaluator, picking each point's best chart.
  void sample(const SphereEvaluator& f) {
    auto pick = [&](ChartPoint q) {
      int c = target_->best_chart(q);
      return c == q.chart ? q : target_->to_chart(q, c);
    };
    fill_ext([&](int p, double a, double b) { return pick(f(SphereGrid::position(p, a, b))); });
  }

  // Nodes only (e.g. loaded from a file); ghosts by 6-point Lagrange
  // interpolation inside the owning panel.
  void set_nodes(std::vector<ChartPoint> nodes) {
    if (nodes.size() != grid_.size()) throw PreconditionError("SphereMap: node count mismatch");
    nodes_ = std::move(nodes);
    std::vector<ChartPoint> saved = nodes_;
    const int m = grid_.m();
    fill_ext([&](int p, double a, double b) {
      // interior points keep their stored values
      double si = (a + kPi / 4) / grid_.delta() - 0.5, sj = (b + kPi / 4) / grid_.delta() - 0.5;
      int i = static_cast<int>(std::lround(si)), j = static_cast<int>(std::lround(sj));
      if (i >= 0 && i < m && j >= 0 && j < m) return saved[grid_.index(p, i, j)];
      auto [q, aa, bb] = SphereGrid::locate(SphereGrid::position(p, a, b));
      return interpolate(saved, q, aa, bb);
    });
  }

  ChartPoint interpolate(const std::vector<ChartPoint>& nodes, int p, double a, double b) const {
    const int m = grid_.m();
    auto stencil = [&](double s, int& i0, std::array<double, 6>& w) {
      i0 = std::clamp(static_cast<int>(std::floor(s)) - 2, 0, m - 6);
      for (int k = 0; k < 6; ++k) {
        double l = 1;
        for (int q = 0; q < 6; ++q)
          if (q != k) l *= (s - (i0 + q)) / double(k - q);
        w[k] = l;
      }
    };
    double si = (a + kPi / 4) / grid_.delta() - 0.5, sj = (b + kPi / 4) / grid_.delta() - 0.5;
    int i0, j0;
    std::array<double, 6> wi, wj;
    stencil(si, i0, wi);
    stencil(sj, j0, wj);
    int ic = std::clamp(static_cast<int>(std::lround(si)), 0, m - 1);
    int jc = std::clamp(static_cast<int>(std::lround(sj)), 0, m - 1);
    ChartPoint base = nodes[grid_.index(p, ic, jc)];
    Vec4 acc = Vec4::Zero();
    for (int k = 0; k < 6; ++k)
      for (int l = 0; l < 6; ++l)
        acc += wi[k] * wj[l] * chart_delta(*target_, base, nodes[grid_.index(p, i0 + k, j0 + l)]);
    base.x += acc;
    return base;
  }

  // containment and a no-tearing bound between neighbors (across panels too)
  void validate(double max_jump = 1.0) const {
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      if (!target_->in_domain(nodes_[n])) {
        std::ostringstream os;
        os << "sphere map: node " << n << " outside chart '" << target_->chart_name(nodes_[n].chart) << "'";
        throw DomainError(os.str());
      }
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      auto [p, i, j] = grid_.unindex(n);
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        double d = chart_delta(*target_, nodes_[n], ext(p, i + di, j + dj)).norm();
        if (d > max_jump) {
          std::ostringstream os;
          os << "sphere map: tearing at node " << n << " (jump " << d << ")";
          throw DomainError(os.str());
        }
      }
    }
  }

 private:
  template <class Fn>
  void fill_ext(Fn&& fn) {
    const int m = grid_.m(), G = SphereGrid::kGhost, w = m + 2 * G;
    ext_.assign(6 * static_cast<std::size_t>(w) * w, ChartPoint{});
    nodes_.resize(grid_.size());
    for (int p = 0; p < 6; ++p)
      for (int i = -G; i < m + G; ++i)
        for (int j = -G; j < m + G; ++j) {
          ChartPoint q = fn(p, grid_.coord(i), grid_.coord(j));
          ext_[(static_cast<std::size_t>(p) * w + (i + G)) * w + (j + G)] = q;
          if (i >= 0 && i < m && j >= 0 && j < m) nodes_[grid_.index(p, i, j)] = q;
        }
  }

  SphereGrid grid_;
  TargetPtr target_;
  SphereConvention conv_;
  std::vector<ChartPoint> nodes_;
  std::vector<ChartPoint> ext_;
};

inline SphereMap make_sphere_map(const SphereGrid& g, TargetPtr t, const SphereEvaluator& f,
                                 SphereConvention conv = {}) {
  SphereMap map(g, std::move(t), conv);
  map.sample(f);
  return map;
}

// ---------------------------------------------------------------------------
// derivatives

// Coordinate derivatives at an extended index (needs |offset| + 2 <= kGhost).
struct SphereDerivs {
  PanelPatch patch;
  ChartPoint f;
  Vec4 fa, fb;
  Vec4 faa, fab, fbb;
  Vec4 d1, d2;  // along the orthonormal frame (e1, e2 = X x e1)
  Vec3 e1, e2;
};

inline SphereDerivs sphere_derivs(const SphereMap& map, int p, int i, int j, bool second = false) {
  const SphereGrid& g = map.grid();
  SphereDerivs D;
  D.f = map.ext(p, i, j);
  D.patch = SphereGrid::patch(p, g.coord(i), g.coord(j));
  const Stencil s1 = first_derivative_stencil(4);
  const double ih = 1.0 / g.delta();
  auto delta = [&](int di, int dj) { return chart_delta(map.tgt(), D.f, map.ext(p, i + di, j + dj)); };
  D.fa = D.fb = Vec4::Zero();
  for (std::size_t k = 0; k < s1.offsets.size(); ++k) {
    D.fa += s1.weights[k] * delta(s1.offsets[k], 0);
    D.fb += s1.weights[k] * delta(0, s1.offsets[k]);
  }
  D.fa *= ih;
  D.fb *= ih;
  if (second) {
    const Stencil s2 = second_derivative_stencil(4);
    D.faa = D.fbb = D.fab = Vec4::Zero();
    for (std::size_t k = 0; k < s2.offsets.size(); ++k) {
      if (s2.offsets[k] == 0) continue;
      D.faa += s2.weights[k] * delta(s2.offsets[k], 0);
      D.fbb += s2.weights[k] * delta(0, s2.offsets[k]);
    }
    for (std::size_t k = 0; k < s1.offsets.size(); ++k)
      for (std::size_t l = 0; l < s1.offsets.size(); ++l)
        D.fab += s1.weights[k] * s1.weights[l] * delta(s1.offsets[k], s1.offsets[l]);
    D.faa *= ih * ih;
    D.fbb *= ih * ih;
    D.fab *= ih * ih;
  }
  std::tie(D.e1, D.e2) = D.patch.frame();
  Eigen::Vector2d c1 = D.patch.coefficients(D.e1), c2 = D.patch.coefficients(D.e2);
  D.d1 = c1[0] * D.fa + c1[1] * D.fb;
  D.d2 = c2[0] * D.fa + c2[1] * D.fb;
  return D;
}

inline SphereDerivs sphere_derivs(const SphereMap& map, std::size_t n, bool second = false) {
  auto [p, i, j] = map.grid().unindex(n);
  return sphere_derivs(map, p, i, j, second);
}

// ---------------------------------------------------------------------------
// pointwise checks

inline std::vector<Vec4> triholo_residual(const SphereMap& map) {
  std::vector<Vec4> r(map.size());
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n);
    Mat4 I = sphere_structure(map.tgt(), D.f, D.patch.X, map.convention());
    r[n] = D.d1 + map.convention().sigma * I * D.d2;
  }
  return r;
}

// Residual of the same map under each of the four conventions (sup norm,
// measured in the target metric).
struct ConventionScan {
  std::array<SphereConvention, 4> conventions = SphereConvention::all();
  std::array<double, 4> sup{};
  std::vector<int> passing(double tol) const {
    std::vector<int> out;
    for (int k = 0; k < 4; ++k)
      if (sup[k] <= tol) out.push_back(k);
    return out;
  }
};

inline double sup_norm(const Target& t, const std::vector<ChartPoint>& at, const std::vector<Vec4>& v) {
  double m = 0;
  for (std::size_t n = 0; n < v.size(); ++n) m = std::max(m, std::sqrt(v[n].dot(t.metric(at[n]) * v[n])));
  return m;
}

inline ConventionScan convention_scan(SphereMap map) {
  ConventionScan s;
  for (int k = 0; k < 4; ++k) {
    map.set_convention(s.conventions[k]);
    s.sup[k] = sup_norm(map.tgt(), map.nodes(), triholo_residual(map));
  }
  return s;
}

struct ConformalityDefect {
  double length = 0;  // | |d1 f| - |d2 f| |
  double angle = 0;   // |g(d1 f, d2 f)|
};

inline std::vector<ConformalityDefect> conformality_defect(const SphereMap& map) {
  std::vector<ConformalityDefect> out(map.size());
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n);
    Mat4 g = map.tgt().metric(D.f);
    out[n].length = std::abs(std::sqrt(D.d1.dot(g * D.d1)) - std::sqrt(D.d2.dot(g * D.d2)));
    out[n].angle = std::abs(D.d1.dot(g * D.d2));
  }
  return out;
}

// tau(f) = trace of the second fundamental form for the round metric, in the
// chart of f(x).
inline std::vector<Vec4> tension_field(const SphereMap& map) {
  const bool flat = map.tgt().id() == TargetId::flat;
  std::vector<Vec4> out(map.size());
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n, true);
    const PanelPatch& P = D.patch;
    Eigen::Matrix2d Gi = P.G.inverse();
    // base Christoffel symbols Gamma^c_ab = G^{cd} X_ab . X_d
    auto gam = [&](const Vec3& Xab) { return (Gi * Eigen::Vector2d(Xab.dot(P.Xa), Xab.dot(P.Xb))).eval(); };
    Eigen::Vector2d gaa = gam(P.Xaa), gab = gam(P.Xab), gbb = gam(P.Xbb);
    Vec4 Haa = D.faa - gaa[0] * D.fa - gaa[1] * D.fb;
    Vec4 Hab = D.fab - gab[0] * D.fa - gab[1] * D.fb;
    Vec4 Hbb = D.fbb - gbb[0] * D.fa - gbb[1] * D.fb;
    if (!flat) {
      auto Gam = christoffel(map.tgt(), D.f);
      for (int k = 0; k < 4; ++k) {
        Haa[k] += D.fa.dot(Gam[k] * D.fa);
        Hab[k] += D.fa.dot(Gam[k] * D.fb);
        Hbb[k] += D.fb.dot(Gam[k] * D.fb);
      }
    }
    out[n] = Gi(0, 0) * Haa + 2 * Gi(0, 1) * Hab + Gi(1, 1) * Hbb;
  }
  return out;
}

// Dirichlet integral int |df|^2 (no 1/2), so that energy >= 2 area with
// equality exactly for conformal maps
inline double map_energy(const SphereMap& map) {
  double acc = 0;
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n);
    Mat4 g = map.tgt().metric(D.f);
    acc += map.grid().area_weight(n) * (D.d1.dot(g * D.d1) + D.d2.dot(g * D.d2));
  }
  return acc;
}

inline double map_area(const SphereMap& map) {
  double acc = 0;
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n);
    Mat4 g = map.tgt().metric(D.f);
    double a = D.d1.dot(g * D.d1), b = D.d2.dot(g * D.d2), c = D.d1.dot(g * D.d2);
    acc += map.grid().area_weight(n) * std::sqrt(std::max(0.0, a * b - c * c));
  }
  return acc;
}

struct StokesPairing {
  Vec3 u;
  double pairing = 0;  // int f^* omega_u
  double dual = 0;     // int d(f^* alpha_u), when a primitive exists
  bool has_dual = false;
};

inline StokesPairing stokes_pairing(const SphereMap& map, const Vec3& u_in) {
  const Target& t = map.tgt();
  if (!t.has_complex_triple()) t.triple(map.node(0));
  StokesPairing out;
  out.u = u_in.normalized();
  const Vec3 u = out.u;
  for (std::size_t n = 0; n < map.size(); ++n) {
    auto D = sphere_derivs(map, n);
    auto W = t.kahler(D.f);
    Mat4 Wu = u[0] * W[0] + u[1] * W[1] + u[2] * W[2];
    out.pairing += map.grid().coord_weight(n) * D.fa.dot(Wu * D.fb);
  }
  out.has_dual = t.has_permuting_frame();
  if (!out.has_dual) return out;
  // beta_c = (f^* alpha_u)(d_c) on nodes and two ghost rings, then d beta by
  // the same order-4 stencil
  const int m = map.grid().m(), G = 2, w = m + 2 * G;
  auto alpha_u = [&](const ChartPoint& q) {
    Vec4 a = Vec4::Zero();
    auto W = t.kahler(q);
    auto v = t.permuting_frame(q);
    for (int i = 0; i < 3; ++i) a += u[i] * (W[(i + 2) % 3].transpose() * v[(i + 1) % 3]);
    return a;
  };
  const Stencil s1 = first_derivative_stencil(4);
  const double ih = 1.0 / map.grid().delta();
  for (int p = 0; p < 6; ++p) {
    std::vector<double> ba(static_cast<std::size_t>(w) * w), bb(ba.size());
    for (int i = -G; i < m + G; ++i)
      for (int j = -G; j < m + G; ++j) {
        auto D = sphere_derivs(map, p, i, j);
        Vec4 a = alpha_u(D.f);
        std::size_t k = static_cast<std::size_t>(i + G) * w + (j + G);
        ba[k] = a.dot(D.fa);
        bb[k] = a.dot(D.fb);
      }
    auto at = [&](const std::vector<double>& v, int i, int j) {
      return v[static_cast<std::size_t>(i + G) * w + (j + G)];
    };
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double dab = 0, dba = 0;
        for (std::size_t k = 0; k < s1.offsets.size(); ++k) {
          dab += s1.weights[k] * at(bb, i + s1.offsets[k], j);
          dba += s1.weights[k] * at(ba, i, j + s1.offsets[k]);
        }
        out.dual += map.grid().coord_weight(map.grid().index(p, i, j)) * (dab - dba) * ih;
      }
  }
  return out;
}

// 26 directions: nonzero vectors of {-1, 0, 1}^3, normalized
inline std::vector<Vec3> direction_sample_26() {
  std::vector<Vec3> out;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a || b || c) out.push_back(Vec3(a, b, c).normalized());
  return out;
}

// ---------------------------------------------------------------------------
// standard maps

// x -> x in the imaginary quaternions
inline SphereEvaluator equatorial_map() {
  return [](const Vec3& x) { return ChartPoint{TargetId::flat, 0, Vec4(0, x[0], x[1], x[2])}; };
}

// The bolt of a two-center Gibbons-Hawking space with centers on the z-axis:
// x -> (segment point, fiber angle 2 phi), poles to the centers.
inline SphereEvaluator bolt_wrap_map(const Target& t, double d) {
  const TargetId id = t.id();
  return [id, d](const Vec3& x) {
    double phi = std::atan2(x[1], x[0]);
    return ChartPoint{id, 0, Vec4(0, 0, -0.5 * d * x[2], 2 * phi)};
  };
}

}  // namespace fueterlab
