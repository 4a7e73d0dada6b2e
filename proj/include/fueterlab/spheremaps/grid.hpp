#pragma once
// Equiangular cubed sphere. Panel p maps (a, b) in (-pi/4, pi/4)^2 to
//   X = P / |P|,  P = c + tan(a) e1 + tan(b) e2,   e1 x e2 = c,
// so (a, b) is positively oriented for the outward normal. Nodes are cell
// centered; coordinates extend past the panel edge for ghost points.

#include <array>
#include <vector>

#include "fueterlab/numerics.hpp"

namespace fueterlab {

struct CubePanel {
  Vec3 c, e1, e2;
};

inline const std::array<CubePanel, 6>& cube_panels() {
  static const std::array<CubePanel, 6> P{{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}},
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}},
      {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}},
      {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},
  }};
  return P;
}

// Embedding and its first and second coordinate derivatives at a point.
struct PanelPatch {
  Vec3 X, Xa, Xb, Xaa, Xab, Xbb;
  Eigen::Matrix2d G;  // induced metric in (a, b)

  double sqrt_det() const { return std::sqrt(G.determinant()); }
  // coefficients of a tangent vector t in the basis (Xa, Xb)
  Eigen::Vector2d coefficients(const Vec3& t) const { return G.ldlt().solve(Eigen::Vector2d(Xa.dot(t), Xb.dot(t))); }
  // orthonormal oriented frame: e1 along Xa, e2 = X x e1
  std::pair<Vec3, Vec3> frame() const {
    Vec3 e1 = Xa.normalized();
    return {e1, X.cross(e1)};
  }
};

class SphereGrid {
 public:
  static constexpr int kGhost = 4;

  explicit SphereGrid(int m, int K = 6) : m_(m), delta_(kPi / (2 * m)) {
    if (m < 8) throw PreconditionError("SphereGrid: need m >= 8 nodes per panel edge");
    auto w = corrected_midpoint_weights(m, K);
    coord_w_.resize(size());
    area_w_.resize(size());
    for (int p = 0; p < 6; ++p)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          std::size_t n = index(p, i, j);
          coord_w_[n] = w[i] * w[j] * delta_ * delta_;
          area_w_[n] = coord_w_[n] * patch(p, coord(i), coord(j)).sqrt_det();
        }
  }

  int m() const { return m_; }
  double delta() const { return delta_; }
  std::size_t size() const { return 6 * static_cast<std::size_t>(m_) * m_; }
  double coord(int i) const { return -kPi / 4 + (i + 0.5) * delta_; }

  std::size_t index(int p, int i, int j) const {
    return (static_cast<std::size_t>(p) * m_ + i) * m_ + j;
  }
  std::array<int, 3> unindex(std::size_t n) const {
    int j = static_cast<int>(n % m_);
    n /= m_;
    int i = static_cast<int>(n % m_);
    return {static_cast<int>(n / m_), i, j};
  }

  // weight for integrating a 2-form written in (a, b) coordinates
  double coord_weight(std::size_t n) const { return coord_w_[n]; }
  // weight for integrating a function against the round area form
  double area_weight(std::size_t n) const { return area_w_[n]; }

  static Vec3 position(int p, double a, double b) {
    const CubePanel& P = cube_panels()[p];
    return (P.c + std::tan(a) * P.e1 + std::tan(b) * P.e2).normalized();
  }
  Vec3 node_position(std::size_t n) const {
    auto [p, i, j] = unindex(n);
    return position(p, coord(i), coord(j));
  }

  static PanelPatch patch(int p, double a, double b) {
    const CubePanel& P = cube_panels()[p];
    const double ta = std::tan(a), tb = std::tan(b);
    const double sa = 1 + ta * ta, sb = 1 + tb * tb;
    Vec3 Pv = P.c + ta * P.e1 + tb * P.e2;
    const double rho = Pv.norm();
    PanelPatch q;
    q.X = Pv / rho;
    Vec3 Pa = sa * P.e1, Pb = sb * P.e2;
    Vec3 Paa = 2 * sa * ta * P.e1, Pbb = 2 * sb * tb * P.e2, Pab = Vec3::Zero();
    auto first = [&](const Vec3& Pd) { return ((Pd - q.X * q.X.dot(Pd)) / rho).eval(); };
    q.Xa = first(Pa);
    q.Xb = first(Pb);
    // d_b d_a X for X = P / |P|
    auto second = [&](const Vec3& Pd, const Vec3& Pe, const Vec3& Pde, const Vec3& Xe) {
      double rho_e = q.X.dot(Pe);
      Vec3 num = Pde - Xe * q.X.dot(Pd) - q.X * (Xe.dot(Pd) + q.X.dot(Pde));
      return (num / rho - (Pd - q.X * q.X.dot(Pd)) * rho_e / (rho * rho)).eval();
    };
    q.Xaa = second(Pa, Pa, Paa, q.Xa);
    q.Xab = second(Pa, Pb, Pab, q.Xb);
    q.Xbb = second(Pb, Pb, Pbb, q.Xb);
    q.G << q.Xa.dot(q.Xa), q.Xa.dot(q.Xb), q.Xa.dot(q.Xb), q.Xb.dot(q.Xb);
    return q;
  }

  // panel owning X (largest |c . X|) and its coordinates there
  static std::tuple<int, double, double> locate(const Vec3& X) {
    int best = 0;
    double bv = -1;
    for (int p = 0; p < 6; ++p) {
      double v = cube_panels()[p].c.dot(X);
      if (v > bv) {
        bv = v;
        best = p;
      }
    }
    const CubePanel& P = cube_panels()[best];
    return {best, std::atan(P.e1.dot(X) / bv), std::atan(P.e2.dot(X) / bv)};
  }

  double total_area() const {
    double a = 0;
    for (double w : area_w_) a += w;
    return a;
  }

 private:
  int m_;
  double delta_;
  std::vector<double> coord_w_, area_w_;
};

}  // namespace fueterlab
