#pragma once
// Periodic grids, finite differences, quadrature and an adaptive Runge-Kutta
// integrator shared by every other module.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fueterlab/errors.hpp"

namespace fueterlab {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// grids

// Uniform periodic grid on [0,L)^D, nodes at i*h, axis 0 slowest.
template <int D>
struct PeriodicGrid {
  static_assert(D >= 1 && D <= 4);
  int n = 0;
  double L = 1.0;

  PeriodicGrid() = default;
  PeriodicGrid(int n_, double L_) : n(n_), L(L_) {
    if (n <= 0) throw PreconditionError("grid: n must be positive");
    if (!(L > 0)) throw PreconditionError("grid: L must be positive");
  }

  double h() const { return L / n; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < D; ++d) s *= static_cast<std::size_t>(n);
    return s;
  }
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int d = D - 1; d > axis; --d) s *= static_cast<std::size_t>(n);
    return s;
  }
  std::array<int, D> coords(std::size_t idx) const {
    std::array<int, D> c{};
    for (int d = D - 1; d >= 0; --d) {
      c[d] = static_cast<int>(idx % n);
      idx /= n;
    }
    return c;
  }
  std::size_t index(const std::array<int, D>& c) const {
    std::size_t idx = 0;
    for (int d = 0; d < D; ++d) idx = idx * n + static_cast<std::size_t>(((c[d] % n) + n) % n);
    return idx;
  }
  Eigen::Matrix<double, D, 1> position(std::size_t idx) const {
    auto c = coords(idx);
    Eigen::Matrix<double, D, 1> x;
    for (int d = 0; d < D; ++d) x[d] = c[d] * h();
    return x;
  }
  // neighbor k steps along axis; `wraps` gets the signed number of periods crossed
  std::size_t neighbor(std::size_t idx, int axis, int k, int* wraps = nullptr) const {
    auto c = coords(idx);
    int j = c[axis] + k;
    int w = 0;
    while (j < 0) { j += n; --w; }
    while (j >= n) { j -= n; ++w; }
    if (wraps) *wraps = w;
    c[axis] = j;
    return index(c);
  }
};

using Grid3 = PeriodicGrid<3>;
using Grid4 = PeriodicGrid<4>;

// ---------------------------------------------------------------------------
// finite differences

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;  // unscaled (multiply by h^-k)
};

inline Stencil first_derivative_stencil(int order) {
  if (order == 2) return {{-1, 1}, {-0.5, 0.5}};
  if (order == 4) return {{-2, -1, 1, 2}, {1.0 / 12, -2.0 / 3, 2.0 / 3, -1.0 / 12}};
  throw PreconditionError("fd order must be 2 or 4, got " + std::to_string(order));
}

inline Stencil second_derivative_stencil(int order) {
  if (order == 2) return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
  if (order == 4)
    return {{-2, -1, 0, 1, 2}, {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12}};
  throw PreconditionError("fd order must be 2 or 4, got " + std::to_string(order));
}

namespace detail {

// Rejects data whose wrap-around jump is an outlier compared to interior jumps.
template <int D>
void require_periodic(const std::vector<double>& f, const PeriodicGrid<D>& g, int axis) {
  double scale = 0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  const std::size_t N = g.size();
  const std::size_t st = g.stride(axis);
  for (std::size_t idx = 0; idx < N; ++idx) {
    if (g.coords(idx)[axis] != 0) continue;
    double interior = 0;
    for (int i = 0; i + 1 < g.n; ++i)
      interior = std::max(interior, std::abs(f[idx + (i + 1) * st] - f[idx + i * st]));
    double seam = std::abs(f[idx] - f[idx + (g.n - 1) * st]);
    if (seam > 4 * interior + 1e-12 * (1 + scale)) {
      std::ostringstream os;
      os << "fd_partial: data is not periodic along axis " << axis << " (seam jump " << seam
         << " vs interior " << interior << ")";
      throw PreconditionError(os.str());
    }
  }
}

}  // namespace detail

// Periodic central difference of a scalar field.
template <int D>
std::vector<double> fd_partial(const std::vector<double>& f, const PeriodicGrid<D>& g, int axis,
                               int order = 4) {
  if (f.size() != g.size())
    throw PreconditionError("fd_partial: field size does not match grid");
  if (axis < 0 || axis >= D) throw PreconditionError("fd_partial: bad axis");
  const Stencil s = first_derivative_stencil(order);
  detail::require_periodic(f, g, axis);
  std::vector<double> out(f.size());
  const double ih = 1.0 / g.h();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    double acc = 0;
    for (std::size_t k = 0; k < s.offsets.size(); ++k)
      acc += s.weights[k] * (f[g.neighbor(idx, axis, s.offsets[k])] - f[idx]);
    out[idx] = acc * ih;
  }
  return out;
}

template <int D>
double integrate_torus(const std::vector<double>& f, const PeriodicGrid<D>& g) {
  if (f.size() != g.size()) throw PreconditionError("integrate_torus: size mismatch");
  double acc = 0;
  for (double v : f) acc += v;
  return acc * std::pow(g.h(), D);
}

// ---------------------------------------------------------------------------
// quadrature

struct GaussRule {
  std::vector<double> x, w;  // on [-1,1]
};

inline GaussRule gauss_legendre(int n) {
  if (n <= 0) throw PreconditionError("gauss_legendre: n must be positive");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
  }
  return r;
}

// Product rule on the unit sphere: Gauss-Legendre in cos(theta), uniform in phi.
struct ShellRule {
  std::vector<Vec3> dirs;
  std::vector<double> weights;  // sum to 4*pi
};

inline ShellRule sphere_product_rule(int ntheta) {
  GaussRule gl = gauss_legendre(ntheta);
  const int nphi = 2 * ntheta;
  ShellRule s;
  for (int i = 0; i < ntheta; ++i) {
    double ct = gl.x[i], st = std::sqrt(std::max(0.0, 1 - ct * ct));
    for (int j = 0; j < nphi; ++j) {
      double ph = 2 * kPi * (j + 0.5) / nphi;
      s.dirs.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
      s.weights.push_back(gl.w[i] * 2 * kPi / nphi);
    }
  }
  return s;
}

struct BallQuadrature {
  Vec3 center = Vec3::Zero();
  double inner = 0;            // inner radius of the annulus, 0 for a ball
  std::vector<double> radii;   // increasing, all > inner
  int radial_nodes = 8;        // Gauss nodes per radial interval
  ShellRule shell = sphere_product_rule(16);

  BallQuadrature() = default;
  BallQuadrature(Vec3 c, std::vector<double> r, int nr = 8, int ntheta = 16, double inner_ = 0)
      : center(std::move(c)), inner(inner_), radii(std::move(r)), radial_nodes(nr),
        shell(sphere_product_rule(ntheta)) {
    double prev = inner;
    for (double x : radii) {
      if (!(x > prev)) throw PreconditionError("BallQuadrature: radii must increase past inner");
      prev = x;
    }
  }

  double shell_area(double r) const {
    double s = 0;
    for (double w : shell.weights) s += w;
    return s * r * r;
  }
};

// Cumulative integrals over B_{r_k} (or the annulus inner < |x| < r_k).
inline std::vector<double> integrate_ball(const std::function<double(const Vec3&)>& f,
                                          const BallQuadrature& q) {
  std::vector<double> out;
  out.reserve(q.radii.size());
  GaussRule gl = gauss_legendre(q.radial_nodes);
  double acc = 0, lo = q.inner;
  for (double hi : q.radii) {
    double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int a = 0; a < q.radial_nodes; ++a) {
      double rho = mid + half * gl.x[a];
      for (std::size_t d = 0; d < q.shell.dirs.size(); ++d) {
        Vec3 x = q.center + rho * q.shell.dirs[d];
        double v;
        try {
          v = f(x);
        } catch (const std::exception& e) {
          std::ostringstream os;
          os << "integrate_ball: evaluator failed at node (" << x[0] << ", " << x[1] << ", "
             << x[2] << "): " << e.what();
          throw NumericalError(os.str());
        }
        acc += half * gl.w[a] * rho * rho * q.shell.weights[d] * v;
      }
    }
    out.push_back(acc);
    lo = hi;
  }
  return out;
}

// Weights for cell-centered nodes on an interval, midpoint rule with K
// symmetric end corrections chosen to integrate even monomials exactly.
// Returned weights are relative (multiply by the cell width).
inline std::vector<double> corrected_midpoint_weights(int m, int K = 5) {
  if (m < 2 * K) K = m / 2;
  std::vector<double> w(m, 1.0);
  if (K == 0) return w;
  // nodes on [-1,1]
  auto node = [m](int i) { return -1.0 + (2.0 * i + 1.0) / m; };
  const double h = 2.0 / m;
  Eigen::MatrixXd A(K, K);
  Eigen::VectorXd b(K);
  for (int p = 0; p < K; ++p) {
    double exact = 2.0 / (2 * p + 1);
    double mid = 0;
    for (int i = 0; i < m; ++i) mid += h * std::pow(node(i), 2 * p);
    b[p] = exact - mid;
    for (int k = 0; k < K; ++k) A(p, k) = 2 * h * std::pow(node(k), 2 * p);
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  for (int k = 0; k < K; ++k) {
    w[k] += c[k];
    w[m - 1 - k] += c[k];
  }
  return w;
}

// ---------------------------------------------------------------------------
// adaptive Runge-Kutta (Dormand-Prince 5(4))

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0;           // 0: automatic
  double hmin_rel = 1e-13; // underflow threshold relative to max(1,|t|)
  std::size_t max_steps = 2000000;
};

namespace detail {

struct DP5 {
  static constexpr double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
  static constexpr double a[7][6] = {
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr double b[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                  11.0 / 84, 0};
  static constexpr double bs[7] = {5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640,
                                   -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

// One DP5 step; returns the 5th order solution and writes the error estimate.
inline Eigen::VectorXd dp5_step(const OdeRhs& f, double t, const Eigen::VectorXd& y, double h,
                                Eigen::VectorXd* err) {
  std::array<Eigen::VectorXd, 7> k;
  for (int s = 0; s < 7; ++s) {
    Eigen::VectorXd ys = y;
    for (int j = 0; j < s; ++j)
      if (DP5::a[s][j] != 0) ys += h * DP5::a[s][j] * k[j];
    k[s] = f(t + DP5::c[s] * h, ys);
  }
  Eigen::VectorXd y5 = y, e = Eigen::VectorXd::Zero(y.size());
  for (int s = 0; s < 7; ++s) {
    y5 += h * DP5::b[s] * k[s];
    e += h * (DP5::b[s] - DP5::bs[s]) * k[s];
  }
  if (err) *err = e;
  return y5;
}

}  // namespace detail

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> y;
  std::vector<double> local_error;  // scaled error norm of each accepted step (<= 1)
  OdeRhs rhs;

  std::size_t size() const { return t.size(); }

  // Dense output: one extra step of the same scheme from the enclosing node.
  Eigen::VectorXd at(double tq) const {
    if (t.empty()) throw PreconditionError("OdeTrajectory: empty");
    const bool fwd = t.back() >= t.front();
    double lo = fwd ? t.front() : t.back(), hi = fwd ? t.back() : t.front();
    if (tq < lo - 1e-12 * (1 + std::abs(lo)) || tq > hi + 1e-12 * (1 + std::abs(hi)))
      throw DomainError("OdeTrajectory: query outside trajectory span");
    std::size_t k;
    if (fwd)
      k = std::upper_bound(t.begin(), t.end(), tq) - t.begin();
    else
      k = std::upper_bound(t.begin(), t.end(), tq, std::greater<double>()) - t.begin();
    k = k == 0 ? 0 : k - 1;
    if (k >= t.size() - 1) k = t.size() - 1;
    double h = tq - t[k];
    if (h == 0) return y[k];
    return detail::dp5_step(rhs, t[k], y[k], h, nullptr);
  }
};

inline OdeTrajectory rk_integrate(const OdeRhs& f, const Eigen::VectorXd& y0, double t0, double t1,
                                  const OdeOptions& opt = {}) {
  OdeTrajectory tr;
  tr.rhs = f;
  tr.t.push_back(t0);
  tr.y.push_back(y0);
  tr.local_error.push_back(0);
  if (t1 == t0) return tr;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  Eigen::VectorXd y = y0;
  double h = opt.h0 > 0 ? opt.h0 : 1e-3 * std::abs(t1 - t0);
  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    if (dir * (t + dir * h - t1) > 0) h = std::abs(t1 - t);
    Eigen::VectorXd e;
    Eigen::VectorXd yn = detail::dp5_step(f, t, y, dir * h, &e);
    double en = 0;
    bool finite = yn.allFinite() && e.allFinite();
    if (finite) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
        en = std::max(en, std::abs(e[i]) / sc);
      }
    }
    if (finite && en <= 1.0) {
      t += dir * h;
      y = yn;
      tr.t.push_back(t);
      tr.y.push_back(y);
      tr.local_error.push_back(en);
      if (dir * (t - t1) >= 0) return tr;
      double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      double fac = finite ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.1;
      h *= fac;
    }
    if (h < opt.hmin_rel * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "rk_integrate: step-size underflow at t = " << t;
      throw NumericalError(os.str());
    }
  }
  std::ostringstream os;
  os << "rk_integrate: step budget exhausted at t = " << t;
  throw NumericalError(os.str());
}

inline OdeTrajectory rk_integrate(const OdeRhs& f, const Eigen::VectorXd& y0, double t0, double t1,
                                  double tol) {
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol;
  return rk_integrate(f, y0, t0, t1, o);
}

}  // namespace fueterlab
