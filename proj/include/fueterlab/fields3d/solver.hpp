#pragma once
// Residual minimization R(f) = 1/2 |F f|^2_{L^2} by gradient descent with a
// Barzilai-Borwein trial step and Armijo backtracking.

#include <ostream>
#include <string>

#include "fueterlab/fields3d/fueter3.hpp"

namespace fueterlab {

inline double residual_functional(const Section3& s, int order = 4) {
  auto F = fueter_residual(s, order);
  double acc = 0;
  for (std::size_t n = 0; n < s.size(); ++n) acc += F[n].dot(s.target->metric(s.nodes[n]) * F[n]);
  return 0.5 * acc * std::pow(s.grid.h(), 3);
}

namespace detail {

inline void require_single_chart(const Section3& s) {
  for (auto& p : s.nodes)
    if (p.chart != s.nodes.front().chart)
      throw PreconditionError("solver: all nodes must share one chart");
}

// [g | I_1 | I_2 | I_3] at p, with the frame identification applied
inline Eigen::Matrix<double, 4, 16> structure_block(const Section3& s, const ChartPoint& p) {
  Eigen::Matrix<double, 4, 16> B;
  B.leftCols<4>() = s.target->metric(p);
  auto T = s.target->triple(p);
  for (int a = 0; a < 3; ++a) B.middleCols<4>(4 + 4 * a) = s.frame.apply(T.I, a);
  return B;
}

}  // namespace detail

// Exact gradient of the discrete R with respect to nodal chart coordinates.
inline std::vector<Vec4> discrete_gradient(const Section3& s, int order = 4, double fd_step = 1e-5) {
  detail::require_single_chart(s);
  const std::size_t N = s.size();
  const bool constant = s.target->id() == TargetId::flat;
  std::vector<Vec4> grad(N, Vec4::Zero());
  // c[i][m] = I_i^T g F_m
  std::array<std::vector<Vec4>, 3> c;
  for (auto& v : c) v.resize(N);
  for (std::size_t m = 0; m < N; ++m) {
    auto d = s.partials(m, order);
    NodeGeometry G = s.geometry(m);
    Vec4 F = G.I[0] * d[0] + G.I[1] * d[1] + G.I[2] * d[2];
    Vec4 gF = G.g * F;
    for (int i = 0; i < 3; ++i) c[i][m] = G.I[i].transpose() * gF;
    if (!constant) {
      for (int mu = 0; mu < 4; ++mu) {
        Eigen::Matrix<double, 4, 16> dB = point_partial(
            s.nodes[m], mu, [&](const ChartPoint& q) { return detail::structure_block(s, q); }, fd_step);
        Mat4 dg = dB.leftCols<4>();
        double v = 0.5 * F.dot(dg * F);
        for (int i = 0; i < 3; ++i) v += gF.dot(dB.middleCols<4>(4 + 4 * i) * d[i]);
        grad[m][mu] += v;
      }
    }
  }
  // nonlocal part: D_i^T = -D_i on periodic stencils
  const Stencil st = first_derivative_stencil(order);
  const double ih = 1.0 / s.grid.h();
  for (std::size_t n = 0; n < N; ++n)
    for (int i = 0; i < 3; ++i) {
      Vec4 acc = Vec4::Zero();
      for (std::size_t k = 0; k < st.offsets.size(); ++k)
        acc += st.weights[k] * c[i][s.grid.neighbor(n, i, st.offsets[k])];
      grad[n] -= acc * ih;
    }
  const double vol = std::pow(s.grid.h(), 3);
  for (auto& g : grad) g *= vol;
  return grad;
}

struct SolveOptions {
  double tol = 1e-12;        // stop when R <= tol
  int max_iter = 20000;
  double armijo = 1e-4;
  int max_backtrack = 60;
  int order = 4;
};

struct SolveLogRow {
  int iter = 0;
  double R = 0;
  double step = 0;
  double gradnorm = 0;
};

struct SolveResult {
  Section3 section;
  std::vector<SolveLogRow> log;
  bool converged = false;
  std::string status;
  int iterations = 0;
  double R = 0;
};

inline void write_solve_log_csv(std::ostream& os, const std::vector<SolveLogRow>& log) {
  os << "iter,R,step,gradnorm\n";
  os << std::setprecision(17);
  for (auto& r : log) os << r.iter << ',' << r.R << ',' << r.step << ',' << r.gradnorm << '\n';
}

inline SolveResult solve_fueter(const Section3& init, const SolveOptions& opt = {}) {
  init.validate();
  detail::require_single_chart(init);
  SolveResult res;
  Section3 f = init;
  double R = residual_functional(f, opt.order);
  res.log.push_back({0, R, 0, 0});
  if (R <= opt.tol) {
    res.section = f;
    res.converged = true;
    res.status = "converged";
    res.R = R;
    return res;
  }
  auto G = discrete_gradient(f, opt.order);
  auto norm2 = [](const std::vector<Vec4>& v) {
    double a = 0;
    for (auto& x : v) a += x.squaredNorm();
    return a;
  };
  double g2 = norm2(G);
  res.log.back().gradnorm = std::sqrt(g2);
  double alpha = 1.0 / std::sqrt(g2 / f.size()) * 1e-3;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Section3 trial = f;
    double Rt = R;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtrack; ++bt) {
      for (std::size_t n = 0; n < f.size(); ++n) trial.nodes[n].x = f.nodes[n].x - alpha * G[n];
      bool inside = true;
      for (auto& p : trial.nodes)
        if (!f.target->in_domain(p)) {
          inside = false;
          break;
        }
      if (inside) {
        Rt = residual_functional(trial, opt.order);
        if (Rt <= R - opt.armijo * alpha * g2) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.status = "line-search failure";
      break;
    }
    auto Gn = discrete_gradient(trial, opt.order);
    // Barzilai-Borwein step for the next iteration
    double ss = 0, sy = 0;
    for (std::size_t n = 0; n < f.size(); ++n) {
      Vec4 sv = trial.nodes[n].x - f.nodes[n].x;
      ss += sv.squaredNorm();
      sy += sv.dot(Gn[n] - G[n]);
    }
    double used = alpha;
    alpha = sy > 0 ? ss / sy : 2 * alpha;
    f = std::move(trial);
    G = std::move(Gn);
    R = Rt;
    g2 = norm2(G);
    res.log.push_back({it, R, used, std::sqrt(g2)});
    res.iterations = it;
    if (R <= opt.tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
  }
  if (!res.converged && res.status.empty()) res.status = "budget exhausted";
  res.section = std::move(f);
  res.R = R;
  return res;
}

// max over nodes of |f - mean f| in chart coordinates
inline double nodal_spread(const Section3& s) {
  Vec4 mean = Vec4::Zero();
  for (auto& p : s.nodes) mean += p.x;
  mean /= static_cast<double>(s.size());
  double m = 0;
  for (auto& p : s.nodes) m = std::max(m, (p.x - mean).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace fueterlab
