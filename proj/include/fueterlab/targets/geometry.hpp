#pragma once
// Finite-difference differential geometry at a chart point: Christoffel
// symbols, exterior derivatives, Lie derivatives and brackets.

#include <random>
#include <type_traits>

#include "fueterlab/targets/core.hpp"

namespace fueterlab {

namespace detail {
template <class T>
auto evaluated(const T& x) {
  if constexpr (std::is_arithmetic_v<T>)
    return x;
  else
    return x.eval();
}
}  // namespace detail

// Order-4 central difference of a chart-local field along coordinate mu.
template <class Fn>
auto point_partial(const ChartPoint& p, int mu, Fn&& fn, double h) {
  auto at = [&](double s) {
    ChartPoint q = p;
    q.x[mu] += s;
    return detail::evaluated(fn(q));
  };
  using T = decltype(at(0.0));
  T d = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  return d;
}

// Gamma[k](i, j) = Gamma^k_{ij}
inline std::array<Mat4, 4> christoffel(const Target& t, const ChartPoint& p, double h = 1e-4) {
  std::array<Mat4, 4> dg;
  for (int m = 0; m < 4; ++m)
    dg[m] = point_partial(p, m, [&](const ChartPoint& q) { return t.metric(q); }, h);
  Mat4 ginv = t.metric(p).inverse();
  std::array<Mat4, 4> G;
  for (int k = 0; k < 4; ++k) {
    G[k].setZero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int l = 0; l < 4; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G[k](i, j) = 0.5 * s;
      }
  }
  return G;
}

// (d alpha)_{mu nu} = d_mu alpha_nu - d_nu alpha_mu
template <class Fn>
Mat4 exterior_derivative_1form(const ChartPoint& p, Fn&& alpha, double h = 1e-4) {
  Mat4 D;
  for (int m = 0; m < 4; ++m) D.row(m) = point_partial(p, m, alpha, h).transpose();
  return D - D.transpose();
}

// max |(d omega)_{l m n}| over index triples
template <class Fn>
double exterior_derivative_2form_max(const ChartPoint& p, Fn&& omega, double h = 1e-4) {
  std::array<Mat4, 4> d;
  for (int m = 0; m < 4; ++m) d[m] = point_partial(p, m, omega, h);
  double mx = 0;
  for (int l = 0; l < 4; ++l)
    for (int m = l + 1; m < 4; ++m)
      for (int n = m + 1; n < 4; ++n)
        mx = std::max(mx, std::abs(d[l](m, n) + d[m](n, l) + d[n](l, m)));
  return mx;
}

// (L_v T)_{mu nu} for a covariant 2-tensor field T
template <class VFn, class TFn>
Mat4 lie_derivative_2tensor(const ChartPoint& p, VFn&& v, TFn&& T, double h = 1e-4) {
  Vec4 v0 = v(p);
  Mat4 T0 = T(p);
  Mat4 Dv;  // Dv(l, m) = d_m v^l
  Mat4 out = Mat4::Zero();
  for (int m = 0; m < 4; ++m) {
    Dv.col(m) = point_partial(p, m, v, h);
    out += v0[m] * point_partial(p, m, T, h);
  }
  out += T0 * Dv;              // T_{mu l} d_nu v^l
  out += Dv.transpose() * T0;  // T_{l nu} d_mu v^l
  return out;
}

// [X, Y]^l = X^m d_m Y^l - Y^m d_m X^l
template <class XFn, class YFn>
Vec4 lie_bracket(const ChartPoint& p, XFn&& X, YFn&& Y, double h = 1e-4) {
  Vec4 x = X(p), y = Y(p), out = Vec4::Zero();
  for (int m = 0; m < 4; ++m)
    out += x[m] * point_partial(p, m, Y, h) - y[m] * point_partial(p, m, X, h);
  return out;
}

// Random chart-0 point whose base distance from the distinguished locus lies in
// [rmin, rmax]. Gibbons-Hawking points avoid Dirac strings by a wide margin.
inline ChartPoint random_point(const Target& t, std::mt19937_64& rng, double rmin, double rmax) {
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> N(0, 1);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vec4 x;
    switch (t.id()) {
      case TargetId::flat: {
        Vec4 d(N(rng), N(rng), N(rng), N(rng));
        x = d.normalized() * (rmin + (rmax - rmin) * U(rng));
        break;
      }
      case TargetId::taubnut:
      case TargetId::eguchi_hanson: {
        Vec3 d(N(rng), N(rng), N(rng));
        d.normalize();
        if (d[2] < -0.9) continue;
        x << d * (rmin + (rmax - rmin) * U(rng)), Conventions::fiber_period * U(rng);
        break;
      }
      case TargetId::atiyah_hitchin:
        x << kPi + rmin + (rmax - rmin) * U(rng), 0.2 + (kPi - 0.4) * U(rng), 2 * kPi * U(rng),
            2 * kPi * U(rng);
        break;
    }
    ChartPoint p = t.point(x, 0);
    if (t.in_domain(p)) return p;
  }
  throw PreconditionError("random_point: could not sample inside the chart domain");
}

}  // namespace fueterlab
