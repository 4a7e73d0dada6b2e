#pragma once
#include "fueterlab/targets/core.hpp"

namespace fueterlab {

// Left multiplication by q = (a, b, c, d) = a + bi + cj + dk on coordinates.
inline Mat4 quat_left(const Vec4& q) {
  Mat4 m;
  m << q[0], -q[1], -q[2], -q[3],
       q[1], q[0], -q[3], q[2],
       q[2], q[3], q[0], -q[1],
       q[3], -q[2], q[1], q[0];
  return m;
}

inline Mat4 quat_right(const Vec4& q) {
  Mat4 m;
  m << q[0], -q[1], -q[2], -q[3],
       q[1], q[0], q[3], -q[2],
       q[2], -q[3], q[0], q[1],
       q[3], q[2], -q[1], q[0];
  return m;
}

inline Vec4 quat_mul(const Vec4& p, const Vec4& q) { return quat_left(p) * q; }

inline Vec4 imag_unit(int a) {
  Vec4 e = Vec4::Zero();
  e[a + 1] = 1;
  return e;
}

// Flat quaternions with I, J, K = left multiplication by i, j, k.
class FlatTarget final : public Target {
 public:
  TargetId id() const override { return TargetId::flat; }
  int chart_count() const override { return 1; }
  std::string chart_name(int) const override { return "quaternion"; }
  std::string domain_predicate(int) const override { return "coordinates are finite"; }
  bool in_domain(const ChartPoint& p) const override { return p.chart == 0 && p.x.allFinite(); }
  std::array<bool, 4> translation_symmetric(int) const override { return {true, true, true, true}; }

  Mat4 metric(const ChartPoint&) const override { return Mat4::Identity(); }

  bool has_complex_triple() const override { return true; }
  ComplexTriple triple(const ChartPoint&) const override {
    return {{quat_left(imag_unit(0)), quat_left(imag_unit(1)), quat_left(imag_unit(2))}};
  }
  std::array<Mat4, 3> kahler(const ChartPoint& p) const override {
    auto t = triple(p);
    return {t.I[0].transpose(), t.I[1].transpose(), t.I[2].transpose()};
  }

  // rotation of the imaginary part: v_a(q) = Im(q) x e_a
  bool has_permuting_frame() const override { return true; }
  std::array<Vec4, 3> permuting_frame(const ChartPoint& p) const override {
    Vec3 im = p.x.tail<3>();
    std::array<Vec4, 3> v;
    for (int a = 0; a < 3; ++a) {
      Vec3 u = im.cross(Vec3::Unit(a));
      v[a] << 0, u;
    }
    return v;
  }

  double radius(const ChartPoint& p) const override { return p.x.norm(); }
};

}  // namespace fueterlab
