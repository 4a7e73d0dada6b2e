#pragma once
// Four-dimensional Fueter operator on the flat torus T^4 (coordinates x0..x3,
// x0 the time direction of the cylindrical reduction):
//   F4(f) = df - sum_i I_i df iota(Omega^i),   Omega^i = dx0^dx^i + dx^j^dx^k.
// iota(Omega^i) acts on covectors as the matrix -Omega^i, which is the unique
// choice with iota^2 = -Id and iota(Omega^1) iota(Omega^2) = iota(Omega^3).
// Then column 0 of F4 is the evolution residual d_0 f - sum_i I_i d_i f and
// column i is I_i times it, so pointwise
//   |df|^2 = (1/4) |F4 f|^2 - 2 Lambda4,   Lambda4 = sum_i Omega^i ^ f^*omega_i.

#include <limits>

#include "fueterlab/fields3d/fueter3.hpp"

namespace fueterlab {

struct SelfDualFrame {
  std::array<Mat4, 3> Omega;  // 2-forms as antisymmetric matrices, Omega(e_a, e_b) = Omega(a, b)
  std::array<Mat4, 3> iota;   // endomorphisms of the cotangent space

  SelfDualFrame() {
    for (int i = 0; i < 3; ++i) {
      const int a = i + 1, b = (i + 1) % 3 + 1, c = (i + 2) % 3 + 1;
      Mat4 W = Mat4::Zero();
      W(0, a) = 1;
      W(a, 0) = -1;
      W(b, c) = 1;
      W(c, b) = -1;
      Omega[i] = W;
      iota[i] = -W;
    }
  }

  struct Defects {
    double orthogonality = 0;  // |<Omega^i, Omega^j> - 2 delta_ij| in the entrywise-half inner product
    double square = 0;         // |iota_i^2 + Id|
    double product = 0;        // |iota_1 iota_2 - iota_3| and cyclic
  };

  Defects defects() const {
    Defects d;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double ip = 0.5 * (Omega[i].array() * Omega[j].array()).sum();
        d.orthogonality = std::max(d.orthogonality, std::abs(ip - (i == j ? 2.0 : 0.0)));
      }
      d.square = std::max(d.square, (iota[i] * iota[i] + Mat4::Identity()).cwiseAbs().maxCoeff());
      d.product = std::max(d.product, (iota[i] * iota[(i + 1) % 3] - iota[(i + 2) % 3]).cwiseAbs().maxCoeff());
    }
    return d;
  }
};

// F4 at one node from the partials d_0 f .. d_3 f (columns)
inline Mat4 fueter4_matrix(const NodeGeometry& G, const std::array<Vec4, 4>& d, const SelfDualFrame& F = {}) {
  Mat4 D;
  for (int a = 0; a < 4; ++a) D.col(a) = d[a];
  Mat4 R = D;
  for (int i = 0; i < 3; ++i) R -= G.I[i] * D * F.iota[i];
  return R;
}

inline double matrix_sq_norm(const Mat4& g, const Mat4& A) { return (A.transpose() * g * A).trace(); }

inline std::vector<Mat4> fueter4_residual(const Section4& s, int order = 4) {
  if (!s.target->has_complex_triple()) s.target->triple(s.nodes.front());
  SelfDualFrame F;
  std::vector<Mat4> out(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) out[n] = fueter4_matrix(s.geometry(n), s.partials(n, order), F);
  return out;
}

inline double lambda4_density(const NodeGeometry& G, const std::array<Vec4, 4>& d) {
  double l = 0;
  for (int i = 0; i < 3; ++i) {
    const int a = i + 1, b = (i + 1) % 3 + 1, c = (i + 2) % 3 + 1;
    l += d[0].dot(G.W[i] * d[a]) + d[b].dot(G.W[i] * d[c]);
  }
  return Conventions::lambda_sign * l;
}

// int Lambda4 through primitives: Lambda4 = sum_i Omega^i ^ d(f^*alpha_i), with
// f^*alpha_i differenced by the same periodic stencil
inline double lambda4_integral_stokes(const Section4& s, int order = 4) {
  const Target& t = s.tgt();
  if (!t.has_permuting_frame()) t.permuting_frame(s.nodes.front());
  const std::size_t N = s.size();
  std::vector<std::array<Vec4, 3>> beta(N);  // beta[n][i][mu] = alpha_i(d_mu f)
  std::vector<std::array<Vec4, 4>> dd(N);
  auto alpha_at = [&](const ChartPoint& p) {
    auto W = t.kahler(p);
    auto v = t.permuting_frame(p);
    std::array<Vec4, 3> a;
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
      for (int mu = 0; mu < 4; ++mu) beta[n][i][mu] = a[i].dot(dd[n][mu]);
  }
  const Stencil st = first_derivative_stencil(order);
  const double ih = 1.0 / s.grid.h();
  auto beta_nb = [&](std::size_t n, int axis, int k, int i, int mu) {
    int w = 0;
    std::size_t j = s.grid.neighbor(n, axis, k, &w);
    if (w == 0 || s.monodromy[axis].squaredNorm() == 0) return beta[j][i][mu];
    ChartPoint q = s.nodes[j];
    q.x += w * s.monodromy[axis];
    return alpha_at(q)[i].dot(dd[j][mu]);
  };
  // (d beta)_{mu nu} = d_mu beta_nu - d_nu beta_mu
  auto dbeta = [&](std::size_t n, int i, int mu, int nu) {
    double a = 0, b = 0;
    for (std::size_t m = 0; m < st.offsets.size(); ++m) {
      a += st.weights[m] * beta_nb(n, mu, st.offsets[m], i, nu);
      b += st.weights[m] * beta_nb(n, nu, st.offsets[m], i, mu);
    }
    return (a - b) * ih;
  };
  double acc = 0;
  for (std::size_t n = 0; n < N; ++n)
    for (int i = 0; i < 3; ++i) {
      const int a = i + 1, b = (i + 1) % 3 + 1, c = (i + 2) % 3 + 1;
      acc += dbeta(n, i, 0, a) + dbeta(n, i, b, c);
    }
  return Conventions::lambda_sign * acc * std::pow(s.grid.h(), 4);
}

struct EnergyReport4 {
  double grad2 = 0;         // ||grad f||^2
  double fueter2 = 0;       // ||F4 f||^2
  double half_fueter2 = 0;  // (1/2) ||F4 f||^2, the coefficient of the stated identity
  double lambda = 0;        // int Lambda4 (Stokes route when available)
  double lambda_pointwise = 0;
  double defect = 0;        // |grad2 - (1/2) fueter2 + 2 lambda|
  double lambda_fit = std::numeric_limits<double>::quiet_NaN();  // (grad2 + 2 lambda) / fueter2
  double fit_defect = 0;    // |grad2 - (1/4) fueter2 + 2 lambda|
  bool stokes_route = false;
  double h = 0;

  double relative_defect() const { return defect / std::max(grad2, 1e-300); }
  double relative_fit_defect() const { return fit_defect / std::max(grad2, 1e-300); }
};

inline EnergyReport4 energy_identity4(const Section4& s, int order = 4) {
  if (!s.target->has_complex_triple()) s.target->triple(s.nodes.front());
  SelfDualFrame F;
  EnergyReport4 r;
  r.h = s.grid.h();
  const double vol = std::pow(r.h, 4);
  for (std::size_t n = 0; n < s.size(); ++n) {
    NodeGeometry G = s.geometry(n);
    auto d = s.partials(n, order);
    for (auto& v : d) r.grad2 += v.dot(G.g * v);
    r.fueter2 += matrix_sq_norm(G.g, fueter4_matrix(G, d, F));
    r.lambda_pointwise += lambda4_density(G, d);
  }
  r.grad2 *= vol;
  r.fueter2 *= vol;
  r.lambda_pointwise *= vol;
  r.half_fueter2 = 0.5 * r.fueter2;
  r.stokes_route = s.target->has_permuting_frame();
  r.lambda = r.stokes_route ? lambda4_integral_stokes(s, order) : r.lambda_pointwise;
  r.defect = std::abs(r.grad2 - r.half_fueter2 + 2 * r.lambda);
  r.fit_defect = std::abs(r.grad2 - 0.25 * r.fueter2 + 2 * r.lambda);
  if (r.fueter2 > 0) r.lambda_fit = (r.grad2 + 2 * r.lambda) / r.fueter2;
  return r;
}

// ---------------------------------------------------------------------------
// cylindrical reduction

struct CylinderReport {
  Section4 lift;
  double residual3 = 0;   // ||F3(s3)||_{L2(T^3)}
  double residual4 = 0;   // ||F4(lift)||_{L2(T^4)} / L^{1/2}, per unit time
  double evolution = 0;   // ||d_t f - sum I_i d_i f|| on the lift, per unit time
  double raw_ratio = std::numeric_limits<double>::quiet_NaN();      // residual4 / residual3
  double matched_ratio = std::numeric_limits<double>::quiet_NaN();  // evolution / residual3
};

inline Section4 t_invariant_lift(const Section3& s3) {
  Section4 s(Grid4(s3.grid.n, s3.grid.L), s3.target);
  s.frame = s3.frame;
  const std::size_t n3 = s3.size();
  for (std::size_t i = 0; i < s.size(); ++i) s.nodes[i] = s3.nodes[i % n3];
  for (int a = 0; a < 3; ++a) s.monodromy[a + 1] = s3.monodromy[a];
  return s;
}

inline Vec4 evolution_residual(const NodeGeometry& G, const std::array<Vec4, 4>& d) {
  Vec4 r = d[0];
  for (int i = 0; i < 3; ++i) r -= G.I[i] * d[i + 1];
  return r;
}

inline CylinderReport cylinder_reduction(const Section3& s3, int order = 4) {
  s3.validate();
  CylinderReport R;
  R.lift = t_invariant_lift(s3);
  const double h = s3.grid.h(), L = s3.grid.L;
  auto F3 = fueter_residual(s3, order);
  for (std::size_t n = 0; n < s3.size(); ++n) R.residual3 += F3[n].dot(s3.tgt().metric(s3.nodes[n]) * F3[n]);
  R.residual3 = std::sqrt(R.residual3 * std::pow(h, 3));
  SelfDualFrame F;
  double r4 = 0, ev = 0;
  for (std::size_t n = 0; n < R.lift.size(); ++n) {
    NodeGeometry G = R.lift.geometry(n);
    auto d = R.lift.partials(n, order);
    r4 += matrix_sq_norm(G.g, fueter4_matrix(G, d, F));
    Vec4 e = evolution_residual(G, d);
    ev += e.dot(G.g * e);
  }
  R.residual4 = std::sqrt(r4 * std::pow(h, 4) / L);
  R.evolution = std::sqrt(ev * std::pow(h, 4) / L);
  if (R.residual3 > 0) {
    R.raw_ratio = R.residual4 / R.residual3;
    R.matched_ratio = R.evolution / R.residual3;
  }
  return R;
}

// ---------------------------------------------------------------------------
// trajectories of the evolution equation d_t f = sum_i I_i d_i f

struct TrajectoryReport {
  std::vector<double> sup;                // per interior slice, sup of the residual (target metric)
  std::vector<double> l2;                 // per interior slice, L2 over T^3
  std::vector<std::vector<Vec4>> fields;  // per interior slice, d_t f - sum I_i d_i f
  double start_distance = std::numeric_limits<double>::quiet_NaN();  // sup distance to f_- (chart coordinates)
  double end_distance = std::numeric_limits<double>::quiet_NaN();
};

inline double section_sup_distance(const Section3& a, const Section3& b) {
  if (a.size() != b.size()) throw PreconditionError("section distance: grids differ");
  double m = 0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, chart_delta(a.tgt(), a.nodes[n], b.nodes[n]).norm());
  return m;
}

inline TrajectoryReport trajectory_residual(const std::vector<Section3>& path, double dt,
                                            const Section3* f_minus = nullptr, const Section3* f_plus = nullptr,
                                            int order = 4) {
  if (path.size() < 3) throw PreconditionError("trajectory_residual: need at least 3 slices");
  if (!(dt > 0)) throw PreconditionError("trajectory_residual: time step must be positive");
  for (auto& s : path)
    if (s.grid.n != path.front().grid.n || s.grid.L != path.front().grid.L || s.target->id() != path.front().target->id())
      throw PreconditionError("trajectory_residual: slices must share one grid and target");
  TrajectoryReport R;
  const Target& t = path.front().tgt();
  const double vol = std::pow(path.front().grid.h(), 3);
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    const Section3& s = path[k];
    std::vector<Vec4> field(s.size());
    double sup = 0, l2 = 0;
    for (std::size_t n = 0; n < s.size(); ++n) {
      NodeGeometry G = s.geometry(n);
      Vec4 dtf = (chart_delta(t, s.nodes[n], path[k + 1].nodes[n]) - chart_delta(t, s.nodes[n], path[k - 1].nodes[n])) /
                 (2 * dt);
      auto d = s.partials(n, order);
      Vec4 r = dtf;
      for (int i = 0; i < 3; ++i) r -= G.I[i] * d[i];
      field[n] = r;
      double q = r.dot(G.g * r);
      sup = std::max(sup, std::sqrt(q));
      l2 += q;
    }
    R.sup.push_back(sup);
    R.l2.push_back(std::sqrt(l2 * vol));
    R.fields.push_back(std::move(field));
  }
  if (f_minus) R.start_distance = section_sup_distance(path.front(), *f_minus);
  if (f_plus) R.end_distance = section_sup_distance(path.back(), *f_plus);
  return R;
}

}  // namespace fueterlab
