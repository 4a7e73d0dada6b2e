#pragma once
// Grid sections of the trivial bundle T^3 x X and their chart-aware
// finite-difference derivatives.

#include <functional>
#include <random>
#include <vector>

#include "fueterlab/targets.hpp"

namespace fueterlab {

// e_i -> sign_i * I_{index_i}
struct FrameIdent {
  std::array<int, 3> index{0, 1, 2};
  std::array<int, 3> sign{1, 1, 1};

  void validate() const {
    std::array<bool, 3> seen{};
    for (int k : index) {
      if (k < 0 || k > 2 || seen[k]) throw PreconditionError("FrameIdent: index must permute {0,1,2}");
      seen[k] = true;
    }
    int perm = ((index[1] - index[0] + 3) % 3 == 1) ? 1 : -1;
    if (perm * sign[0] * sign[1] * sign[2] != 1)
      throw PreconditionError("FrameIdent: assignment must satisfy I_1 I_2 = I_3");
  }
  template <class Arr>
  Mat4 apply(const Arr& I, int i) const { return sign[i] * I[index[i]]; }
};

// Per-node target data used by residual and energy computations.
struct NodeGeometry {
  Mat4 g;
  std::array<Mat4, 3> I;  // already composed with the frame identification
  std::array<Mat4, 3> W;
};

template <int D>
struct GridSection {
  PeriodicGrid<D> grid;
  TargetPtr target;
  std::vector<ChartPoint> nodes;
  FrameIdent frame;
  // f(x + L e_a) = f(x) + monodromy[a], along translation-symmetric chart coordinates
  std::array<Vec4, D> monodromy;

  GridSection() { monodromy.fill(Vec4::Zero()); }
  GridSection(PeriodicGrid<D> g, TargetPtr t) : grid(g), target(std::move(t)), nodes(g.size()) {
    monodromy.fill(Vec4::Zero());
  }

  const Target& tgt() const { return *target; }
  std::size_t size() const { return nodes.size(); }
  bool has_monodromy() const {
    for (auto& m : monodromy)
      if (m.squaredNorm() > 0) return true;
    return false;
  }

  // Domain containment, monodromy admissibility and a tearing bound.
  void validate(double max_jump = 1.0) const {
    if (!target) throw PreconditionError("section: missing target");
    if (nodes.size() != grid.size()) throw PreconditionError("section: node count mismatch");
    frame.validate();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!target->in_domain(nodes[i])) {
        std::ostringstream os;
        os << "section: node " << i << " outside chart '" << target->chart_name(nodes[i].chart)
           << "' where " << target->domain_predicate(nodes[i].chart);
        throw DomainError(os.str());
      }
    }
    for (int a = 0; a < D; ++a) {
      if (monodromy[a].squaredNorm() == 0) continue;
      for (auto& p : nodes) {
        auto sym = target->translation_symmetric(p.chart);
        for (int k = 0; k < 4; ++k)
          if (monodromy[a][k] != 0 && !sym[k])
            throw PreconditionError("section: monodromy along a non-symmetric coordinate");
      }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (int a = 0; a < D; ++a) {
        Vec4 d = neighbor_delta(i, a, 1);
        if (d.norm() > max_jump) {
          std::ostringstream os;
          os << "section: tearing between node " << i << " and its neighbor along axis " << a
             << " (jump " << d.norm() << ")";
          throw DomainError(os.str());
        }
      }
  }

  // value of the neighbor k steps along `axis`, in node i's chart, as a delta
  Vec4 neighbor_delta(std::size_t i, int axis, int k) const {
    int w = 0;
    std::size_t j = grid.neighbor(i, axis, k, &w);
    ChartPoint q = nodes[j];
    if (w != 0) q.x += w * monodromy[axis];
    if (q.chart != nodes[i].chart) {
      q = target->to_chart(q, nodes[i].chart);
      if (!target->in_domain(q)) {
        std::ostringstream os;
        os << "differencing: neighbor of node " << i << " leaves chart '"
           << target->chart_name(nodes[i].chart) << "'";
        throw DomainError(os.str());
      }
    }
    Vec4 d = q.x - nodes[i].x;
    Vec4 P = target->period(nodes[i].chart);
    for (int c = 0; c < 4; ++c) d[c] = wrap_symmetric(d[c], P[c]);
    return d;
  }

  // order-2/4 partial derivative at node i
  Vec4 partial(std::size_t i, int axis, int order = 4) const {
    const Stencil s = first_derivative_stencil(order);
    Vec4 acc = Vec4::Zero();
    for (std::size_t k = 0; k < s.offsets.size(); ++k) acc += s.weights[k] * neighbor_delta(i, axis, s.offsets[k]);
    return acc / grid.h();
  }

  std::array<Vec4, D> partials(std::size_t i, int order = 4) const {
    std::array<Vec4, D> d;
    for (int a = 0; a < D; ++a) d[a] = partial(i, a, order);
    return d;
  }

  NodeGeometry geometry(std::size_t i) const {
    NodeGeometry G;
    const ChartPoint& p = nodes[i];
    G.g = target->metric(p);
    auto W = target->kahler(p);
    auto T = target->triple(p);
    for (int a = 0; a < 3; ++a) {
      G.I[a] = frame.apply(T.I, a);
      G.W[a] = frame.apply(W, a);
    }
    return G;
  }
};

using Section3 = GridSection<3>;
using Section4 = GridSection<4>;

// Sample fn(x) -> chart coordinates on the grid (chart fixed).
template <int D>
GridSection<D> sample_section(const PeriodicGrid<D>& g, TargetPtr t,
                              const std::function<Vec4(const Eigen::Matrix<double, D, 1>&)>& fn,
                              int chart = 0) {
  GridSection<D> s(g, std::move(t));
  for (std::size_t i = 0; i < g.size(); ++i) s.nodes[i] = ChartPoint{s.target->id(), chart, fn(g.position(i))};
  return s;
}

// Random smooth section: base + sum of low Fourier modes with random amplitudes.
// Each mode component has amplitude <= `amplitude` / (number of modes).
template <int D>
GridSection<D> random_smooth_section(const PeriodicGrid<D>& g, TargetPtr t, const Vec4& base,
                                     const Vec4& amplitude, std::mt19937_64& rng, int kmax = 2,
                                     int modes = 6) {
  std::uniform_int_distribution<int> K(-kmax, kmax);
  std::uniform_real_distribution<double> U(-1, 1), Ph(0, 2 * kPi);
  struct Mode {
    Eigen::Matrix<double, D, 1> k;
    Vec4 amp, phase;
  };
  std::vector<Mode> ms;
  for (int m = 0; m < modes; ++m) {
    Mode md;
    for (int d = 0; d < D; ++d) md.k[d] = K(rng);
    for (int c = 0; c < 4; ++c) {
      md.amp[c] = amplitude[c] * U(rng) / modes;
      md.phase[c] = Ph(rng);
    }
    ms.push_back(md);
  }
  const double w = 2 * kPi / g.L;
  return sample_section<D>(g, t, [&](const Eigen::Matrix<double, D, 1>& x) {
    Vec4 v = base;
    for (auto& md : ms)
      for (int c = 0; c < 4; ++c) v[c] += md.amp[c] * std::cos(w * md.k.dot(x) + md.phase[c]);
    return v;
  });
}

}  // namespace fueterlab
