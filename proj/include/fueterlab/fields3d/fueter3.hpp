#pragma once
// The 3D Fueter operator F(f) = sum_i I_i(f) d_i f, its energy identity
//   |grad f|^2 = |F f|^2 - 2 int Lambda,  Lambda = sum_i omega_i(d_{i+1} f, d_{i+2} f),
// and the bound / concentration diagnostics built on it.

#include <algorithm>
#include <sstream>
#include <vector>

#include "fueterlab/fields3d/section.hpp"

namespace fueterlab {

inline std::vector<Vec4> fueter_residual(const Section3& s, int order = 4) {
  std::vector<Vec4> F(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    auto d = s.partials(n, order);
    NodeGeometry G = s.geometry(n);
    F[n] = G.I[0] * d[0] + G.I[1] * d[1] + G.I[2] * d[2];
  }
  return F;
}

// 1/2 int sum_i g(d_i f, d_i f)
inline double energy(const Section3& s, int order = 4) {
  double acc = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    auto d = s.partials(n, order);
    Mat4 g = s.target->metric(s.nodes[n]);
    for (int i = 0; i < 3; ++i) acc += d[i].dot(g * d[i]);
  }
  return 0.5 * acc * std::pow(s.grid.h(), 3);
}

inline double lambda_density(const NodeGeometry& G, const std::array<Vec4, 3>& d) {
  double l = 0;
  for (int i = 0; i < 3; ++i) l += d[(i + 1) % 3].dot(G.W[i] * d[(i + 2) % 3]);
  return Conventions::lambda_sign * l;
}

// int_{T^3} Lambda by pointwise quadrature
inline double lambda_integral(const Section3& s, int order = 4) {
  if (!s.target->has_complex_triple()) s.target->triple(s.nodes.front());
  double acc = 0;
  for (std::size_t n = 0; n < s.size(); ++n) acc += lambda_density(s.geometry(n), s.partials(n, order));
  return acc * std::pow(s.grid.h(), 3);
}

// int Lambda through primitives: Lambda = sum_i (d f^*alpha_i)_{i+1,i+2}, where
// f^*alpha_i is differenced with the same periodic stencil. Only defined for
// targets with a permuting frame.
inline double lambda_integral_stokes(const Section3& s, int order = 4) {
  const Target& t = s.tgt();
  if (!t.has_permuting_frame()) t.permuting_frame(s.nodes.front());
  const std::size_t N = s.size();
  // beta[n][i][b] = alpha_i(f(x_n))(d_b f(x_n))
  std::vector<std::array<Vec3, 3>> beta(N);
  std::vector<std::array<Vec4, 3>> dd(N);
  auto alpha_at = [&](const ChartPoint& p) {
    auto W = t.kahler(p);
    auto v = t.permuting_frame(p);
    std::array<Vec4, 3> a;
    // primitive of omega'_i = sign_i omega_{index_i}
    for (int i = 0; i < 3; ++i) {
      int k = s.frame.index[i];
      a[i] = s.frame.sign[i] * (W[(k + 2) % 3].transpose() * v[(k + 1) % 3]);
    }
    return a;
  };
  for (std::size_t n = 0; n < N; ++n) {
    dd[n] = s.partials(n, order);
    auto a = alpha_at(s.nodes[n]);
    for (int i = 0; i < 3; ++i)
      for (int b = 0; b < 3; ++b) beta[n][i][b] = a[i].dot(dd[n][b]);
  }
  const Stencil st = first_derivative_stencil(order);
  const double ih = 1.0 / s.grid.h();
  auto beta_nb = [&](std::size_t n, int axis, int k, int i, int b) {
    int w = 0;
    std::size_t j = s.grid.neighbor(n, axis, k, &w);
    if (w == 0 || s.monodromy[axis].squaredNorm() == 0) return beta[j][i][b];
    ChartPoint q = s.nodes[j];
    q.x += w * s.monodromy[axis];
    return alpha_at(q)[i].dot(dd[j][b]);
  };
  double acc = 0;
  for (std::size_t n = 0; n < N; ++n) {
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, k = (i + 2) % 3;
      double djk = 0, dkj = 0;
      for (std::size_t m = 0; m < st.offsets.size(); ++m) {
        djk += st.weights[m] * beta_nb(n, j, st.offsets[m], i, k);
        dkj += st.weights[m] * beta_nb(n, k, st.offsets[m], i, j);
      }
      acc += (djk - dkj) * ih;
    }
  }
  return Conventions::lambda_sign * acc * std::pow(s.grid.h(), 3);
}

struct EnergyReport {
  double grad2 = 0;             // |grad f|^2_{L^2}
  double fueter2 = 0;           // |F f|^2_{L^2}
  double lambda = 0;            // int Lambda (through primitives when available)
  double lambda_pointwise = 0;  // int Lambda by pointwise quadrature
  double defect = 0;            // |grad2 - fueter2 + 2 lambda|
  double pointwise_defect = 0;  // same with lambda_pointwise
  double h = 0;
  int sign = Conventions::lambda_sign;
  bool stokes_route = false;

  double relative_defect() const { return grad2 > 0 ? defect / grad2 : defect; }
};

inline EnergyReport energy_identity_report(const Section3& s, int order = 4) {
  EnergyReport r;
  r.h = s.grid.h();
  const double vol = std::pow(r.h, 3);
  for (std::size_t n = 0; n < s.size(); ++n) {
    auto d = s.partials(n, order);
    NodeGeometry G = s.geometry(n);
    Vec4 F = G.I[0] * d[0] + G.I[1] * d[1] + G.I[2] * d[2];
    r.fueter2 += F.dot(G.g * F);
    for (int i = 0; i < 3; ++i) r.grad2 += d[i].dot(G.g * d[i]);
    r.lambda_pointwise += lambda_density(G, d);
  }
  r.fueter2 *= vol;
  r.grad2 *= vol;
  r.lambda_pointwise *= vol;
  r.stokes_route = s.target->has_permuting_frame();
  r.lambda = r.stokes_route ? lambda_integral_stokes(s, order) : r.lambda_pointwise;
  r.defect = std::abs(r.grad2 - r.fueter2 + 2 * r.lambda);
  r.pointwise_defect = std::abs(r.grad2 - r.fueter2 + 2 * r.lambda_pointwise);
  return r;
}

// Fixes the Lambda sign: on a flat section with linear monodromy (nonzero
// int Lambda) only the correct sign makes the identity hold.
inline int lambda_sign_self_test(int n = 16) {
  auto t = std::make_shared<FlatTarget>();
  Grid3 g(n, 1.0);
  Section3 s = sample_section<3>(g, t, [](const Vec3& x) {
    return Vec4(0.3 * x[0] + 0.1 * std::sin(2 * kPi * x[1]), 0.7 * x[1], -0.4 * x[2] + 0.2 * x[0],
                0.5 * x[0] + 0.05 * std::cos(2 * kPi * x[2]));
  });
  s.monodromy = {Vec4(0.3, 0, 0.2, 0.5), Vec4(0, 0.7, 0, 0), Vec4(0, 0, -0.4, 0)};
  EnergyReport r = energy_identity_report(s);
  double lp = r.lambda_pointwise * Conventions::lambda_sign;
  double plus = std::abs(r.grad2 - r.fueter2 + 2 * lp), minus = std::abs(r.grad2 - r.fueter2 - 2 * lp);
  return plus < minus ? +1 : -1;
}

// ---------------------------------------------------------------------------
// energy bound

struct EnergyBoundReport {
  double grad_norm = 0;  // |grad f|_{L^2}
  double k_radius = 0;
  double max_image_radius = 0;
  double ratio = 0;
};

inline EnergyBoundReport energy_bound_check(const Section3& s, double k_radius) {
  EnergyBoundReport r;
  r.k_radius = k_radius;
  std::vector<std::size_t> bad;
  for (std::size_t n = 0; n < s.size(); ++n) {
    double rr = s.target->radius(s.nodes[n]);
    r.max_image_radius = std::max(r.max_image_radius, rr);
    if (rr > k_radius) bad.push_back(n);
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "energy_bound_check: " << bad.size() << " nodes leave K (radius " << k_radius << "):";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 8); ++k) os << ' ' << bad[k];
    if (bad.size() > 8) os << " ...";
    throw DomainError(os.str());
  }
  r.grad_norm = std::sqrt(2 * energy(s));
  r.ratio = k_radius > 0 ? r.grad_norm / k_radius : 0;
  return r;
}

// ---------------------------------------------------------------------------
// concentration scan

struct ConcentrationReport {
  std::vector<double> radii;
  double eps0 = 1e-2;
  std::vector<std::size_t> centers;
  std::vector<std::vector<double>> values;  // values[c][k] = (1/r_k) int_{B_{r_k}} |grad f|^2
  std::vector<std::size_t> flagged;
};

// Trilinear periodic interpolation of a nodal scalar field.
inline double trilinear(const std::vector<double>& v, const Grid3& g, const Vec3& x) {
  double u[3];
  int i0[3];
  for (int a = 0; a < 3; ++a) {
    double s = x[a] / g.h();
    double fl = std::floor(s);
    u[a] = s - fl;
    i0[a] = static_cast<int>(fl);
  }
  double acc = 0;
  for (int c = 0; c < 8; ++c) {
    std::array<int, 3> idx;
    double w = 1;
    for (int a = 0; a < 3; ++a) {
      int b = (c >> a) & 1;
      idx[a] = i0[a] + b;
      w *= b ? u[a] : 1 - u[a];
    }
    acc += w * v[g.index(idx)];
  }
  return acc;
}

inline std::vector<double> grad_density(const Section3& s, int order = 4) {
  std::vector<double> e(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    auto d = s.partials(n, order);
    Mat4 g = s.target->metric(s.nodes[n]);
    e[n] = d[0].dot(g * d[0]) + d[1].dot(g * d[1]) + d[2].dot(g * d[2]);
  }
  return e;
}

inline ConcentrationReport concentration_scan(const Section3& s, std::vector<double> radii,
                                              double eps0 = 1e-2, int center_stride = 1) {
  ConcentrationReport rep;
  std::sort(radii.begin(), radii.end());
  for (double r : radii) {
    if (!(r > 0)) throw PreconditionError("concentration_scan: radii must be positive");
    if (r >= s.grid.L / 4) throw PreconditionError("concentration_scan: radius too large (>= L/4)");
  }
  rep.radii = radii;
  rep.eps0 = eps0;
  if (radii.empty()) return rep;
  auto e = grad_density(s);
  BallQuadrature q(Vec3::Zero(), radii, 6, 8);
  for (std::size_t n = 0; n < s.size(); ++n) {
    auto c = s.grid.coords(n);
    if (c[0] % center_stride || c[1] % center_stride || c[2] % center_stride) continue;
    q.center = s.grid.position(n);
    auto I = integrate_ball([&](const Vec3& x) { return trilinear(e, s.grid, x); }, q);
    for (std::size_t k = 0; k < I.size(); ++k) I[k] /= radii[k];
    if (I.front() > eps0) rep.flagged.push_back(n);
    rep.centers.push_back(n);
    rep.values.push_back(std::move(I));
  }
  return rep;
}

}  // namespace fueterlab
