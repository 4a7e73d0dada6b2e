#pragma once
// Pointwise jet algebra behind harmonicity and rigidity of tri-holomorphic
// spheres. With the residual convention d_v f + sigma I d_{jv} f = 0 a
// conforming jet satisfies
//   df(jv) = sigma I df(v),   H(a, j b) = sigma I H(a, b),   H symmetric,
// which forces H(v, v) + H(jv, jv) = 0.

#include <random>

#include "fueterlab/spheremaps/map.hpp"

namespace fueterlab {

struct Jet1 {
  Vec3 x = Vec3::UnitZ();  // base point on S^2
  Vec3 v = Vec3::UnitX();  // unit tangent; jv = x cross v
  ChartPoint p;            // target point
  Vec4 dfv = Vec4::Zero(), dfjv = Vec4::Zero();

  Vec3 jv() const { return x.cross(v); }
  void validate_frame(double tol = 1e-12) const {
    if (std::abs(x.norm() - 1) > tol || std::abs(v.norm() - 1) > tol || std::abs(x.dot(v)) > tol)
      throw PreconditionError("jet: frame must be orthonormal and tangent to S^2");
  }
};

struct Jet2 : Jet1 {
  // H[a][b] = nabla df(e_a, e_b), e_0 = v, e_1 = jv
  std::array<std::array<Vec4, 2>, 2> H{{{Vec4::Zero(), Vec4::Zero()}, {Vec4::Zero(), Vec4::Zero()}}};
};

inline double jet_trace(const Jet2& jet) { return (jet.H[0][0] + jet.H[1][1]).norm(); }

// max violation of symmetry, I-linearity of df and the second-order relation
inline double jet_relation_defect(const Jet2& jet, const Target& t, const SphereConvention& c) {
  Mat4 I = c.sigma * sphere_structure(t, jet.p, jet.x, c);
  double d = (jet.H[0][1] - jet.H[1][0]).norm();
  d = std::max(d, (jet.dfjv - I * jet.dfv).norm());
  for (int a = 0; a < 2; ++a) {
    // j v = jv, j jv = -v
    d = std::max(d, (jet.H[a][1] - I * jet.H[a][0]).norm());
    d = std::max(d, (-jet.H[a][0] - I * jet.H[a][1]).norm());
  }
  return d;
}

// |trace nabla df| for a conforming jet; precondition error otherwise
inline double jet_tension_identity(const Jet2& jet, const Target& t, const SphereConvention& c = {},
                                   double tol = 1e-10) {
  jet.validate_frame();
  double scale = 1 + jet.dfv.norm() + jet.H[0][0].norm() + jet.H[0][1].norm();
  double d = jet_relation_defect(jet, t, c);
  if (d > tol * scale) {
    std::ostringstream os;
    os << "jet_tension_identity: jet violates the tri-holomorphic relations (defect " << d << ")";
    throw PreconditionError(os.str());
  }
  return jet_trace(jet);
}

// A conforming jet with random first and symmetric second-order data.
inline Jet2 random_conforming_jet(const Target& t, const ChartPoint& p, const SphereConvention& c,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Jet2 j;
  j.p = p;
  j.x = Vec3(N(rng), N(rng), N(rng)).normalized();
  Vec3 r(N(rng), N(rng), N(rng));
  j.v = (r - j.x * j.x.dot(r)).normalized();
  Mat4 I = c.sigma * sphere_structure(t, p, j.x, c);
  j.dfv = Vec4(N(rng), N(rng), N(rng), N(rng));
  j.dfjv = I * j.dfv;
  Vec4 A(N(rng), N(rng), N(rng), N(rng));
  j.H[0][0] = A;
  j.H[0][1] = j.H[1][0] = I * A;
  j.H[1][1] = I * (I * A);
  return j;
}

struct RigidityReport {
  double df_norm = 0;          // norm of df after projection onto the joint solution space
  int kernel_dimension = 0;    // dimension of {df : I(x)-linear and I0-linear}
  double constraint_residual = 0;  // how far the supplied jet is from satisfying both
};

// df o j = sigma I(x) df and df o j = sigma I0 df with I(x) != I0 forces df = 0
// whenever I(x) - I0 is invertible.
inline RigidityReport rigidity_check(const Jet1& jet, const Target& t, const Mat4& I0,
                                     const SphereConvention& c = {}) {
  jet.validate_frame();
  Mat4 I = sphere_structure(t, jet.p, jet.x, c);
  if ((I - I0).cwiseAbs().maxCoeff() <= 1e-12)
    throw PreconditionError("rigidity_check: I(x) equals I0, hypothesis fails");
  Eigen::Matrix<double, 8, 8> C;
  C.topLeftCorner<4, 4>() = c.sigma * I;
  C.topRightCorner<4, 4>() = -Mat4::Identity();
  C.bottomLeftCorner<4, 4>() = c.sigma * I0;
  C.bottomRightCorner<4, 4>() = -Mat4::Identity();
  Eigen::Matrix<double, 8, 1> z;
  z << jet.dfv, jet.dfjv;
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 8>> svd(C, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  RigidityReport r;
  Eigen::Matrix<double, 8, 1> proj = Eigen::Matrix<double, 8, 1>::Zero();
  for (int k = 0; k < 8; ++k)
    if (s[k] <= 1e-10 * s[0]) {
      ++r.kernel_dimension;
      proj += svd.matrixV().col(k) * svd.matrixV().col(k).dot(z);
    }
  r.df_norm = proj.norm();
  r.constraint_residual = (C * z).norm();
  return r;
}

}  // namespace fueterlab
