#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>

#include "fueterlab/numerics.hpp"

namespace fueterlab {

enum class TargetId : std::uint32_t { flat = 1, taubnut = 2, eguchi_hanson = 3, atiyah_hitchin = 4 };

inline std::string to_string(TargetId t) {
  switch (t) {
    case TargetId::flat: return "flat";
    case TargetId::taubnut: return "taubnut";
    case TargetId::eguchi_hanson: return "eguchi-hanson";
    case TargetId::atiyah_hitchin: return "atiyah-hitchin";
  }
  return "unknown";
}

inline TargetId target_from_string(const std::string& s) {
  if (s == "flat" || s == "flat-h") return TargetId::flat;
  if (s == "taubnut" || s == "taub-nut") return TargetId::taubnut;
  if (s == "eguchi-hanson" || s == "eh") return TargetId::eguchi_hanson;
  if (s == "atiyah-hitchin" || s == "ah") return TargetId::atiyah_hitchin;
  throw PreconditionError("unknown target id '" + s + "'");
}

// Every sign choice the library makes, in one place. Files record `version`.
struct Conventions {
  static constexpr std::uint32_t version = 1;
  // L_{v_i} omega_{i+1} = permuting_sign * omega_{i+2}
  static constexpr int permuting_sign = +1;
  // Gibbons-Hawking fiber period; eta = dtheta/2 + A
  static constexpr double fiber_period = 4 * kPi;
  // Lambda integrand: sum_i omega_i(d_{i+1} f, d_{i+2} f)
  static constexpr int lambda_sign = +1;
  // iota(Omega_i) = iota_sign * Omega_i as a matrix on cotangent vectors
  static constexpr int iota_sign = -1;
  // canonical tri-holomorphic convention: residual d1 f + sigma I(x) d2 f, left multiplication
  static constexpr int triholo_sigma = +1;
};

struct ChartPoint {
  TargetId target = TargetId::flat;
  int chart = 0;
  Vec4 x = Vec4::Zero();
};

struct ComplexTriple {
  std::array<Mat4, 3> I;  // I, J, K
};

class Target {
 public:
  virtual ~Target() = default;

  virtual TargetId id() const = 0;
  std::string name() const { return to_string(id()); }

  virtual int chart_count() const = 0;
  virtual std::string chart_name(int chart) const = 0;
  virtual std::string domain_predicate(int chart) const = 0;
  virtual bool in_domain(const ChartPoint& p) const = 0;

  void require_domain(const ChartPoint& p) const {
    if (p.target != id())
      throw DomainError("point belongs to target " + to_string(p.target) + ", not " + name());
    if (p.chart < 0 || p.chart >= chart_count())
      throw DomainError(name() + ": no chart " + std::to_string(p.chart));
    if (!in_domain(p)) {
      std::ostringstream os;
      os << name() << ": point (" << p.x.transpose() << ") outside chart '" << chart_name(p.chart)
         << "' where " << domain_predicate(p.chart);
      throw DomainError(os.str());
    }
  }

  // coordinate periods (0 = not periodic)
  virtual Vec4 period(int /*chart*/) const { return Vec4::Zero(); }
  // coordinates whose translations are isometries preserving the hyperkahler triple
  virtual std::array<bool, 4> translation_symmetric(int /*chart*/) const { return {}; }

  virtual ChartPoint to_chart(const ChartPoint& p, int chart) const {
    if (p.chart == chart) return p;
    throw DomainError(name() + ": no transition to chart " + std::to_string(chart));
  }
  virtual int best_chart(const ChartPoint& p) const { return p.chart; }

  ChartPoint point(const Vec4& x, int chart = 0) const { return ChartPoint{id(), chart, x}; }

  virtual Mat4 metric(const ChartPoint& p) const = 0;

  virtual bool has_complex_triple() const { return false; }
  virtual ComplexTriple triple(const ChartPoint&) const {
    throw UnsupportedError(name() + ": no closed-form complex structures");
  }
  // omega_a as matrices: omega_a(v,w) = v^T W_a w = g(I_a v, w)
  virtual std::array<Mat4, 3> kahler(const ChartPoint& p) const {
    const Mat4 g = metric(p);
    const ComplexTriple t = triple(p);
    return {t.I[0].transpose() * g, t.I[1].transpose() * g, t.I[2].transpose() * g};
  }

  virtual bool has_permuting_frame() const { return false; }
  virtual std::array<Vec4, 3> permuting_frame(const ChartPoint&) const {
    throw UnsupportedError(name() + ": no permuting SO(3) action");
  }

  virtual double radius(const ChartPoint& p) const = 0;
};

using TargetPtr = std::shared_ptr<const Target>;

// ---------------------------------------------------------------------------
// chart-aware differences

inline double wrap_symmetric(double d, double P) {
  if (P <= 0) return d;
  d = std::fmod(d, P);
  if (d > 0.5 * P) d -= P;
  if (d <= -0.5 * P) d += P;
  return d;
}

// `to - from` in the chart of `from`, unwrapping periodic coordinates.
inline Vec4 chart_delta(const Target& t, const ChartPoint& from, const ChartPoint& to) {
  ChartPoint q = to.chart == from.chart ? to : t.to_chart(to, from.chart);
  Vec4 d = q.x - from.x;
  Vec4 P = t.period(from.chart);
  for (int k = 0; k < 4; ++k) d[k] = wrap_symmetric(d[k], P[k]);
  return d;
}

// ---------------------------------------------------------------------------
// spec-level evaluators

inline Mat4 metric_at(const Target& t, const ChartPoint& p) {
  t.require_domain(p);
  return t.metric(p);
}

inline ComplexTriple complex_triple_at(const Target& t, const ChartPoint& p) {
  if (!t.has_complex_triple()) return t.triple(p);  // throws unsupported
  t.require_domain(p);
  return t.triple(p);
}

inline Mat4 structure_at(const Target& t, const ChartPoint& p, const Vec3& u) {
  ComplexTriple c = complex_triple_at(t, p);
  return u[0] * c.I[0] + u[1] * c.I[1] + u[2] * c.I[2];
}

inline Mat4 kahler_at(const Target& t, const ChartPoint& p, const Vec3& u) {
  if (!t.has_complex_triple()) t.triple(p);
  t.require_domain(p);
  auto W = t.kahler(p);
  return u[0] * W[0] + u[1] * W[1] + u[2] * W[2];
}

struct KahlerPrimitive {
  Mat4 omega;
  Vec4 alpha;
};

// alpha_i = iota_{v_{i+1}} omega_{i+2}, i in {0,1,2}
inline KahlerPrimitive kahler_primitive_at(const Target& t, const ChartPoint& p, int i) {
  if (!t.has_permuting_frame()) t.permuting_frame(p);
  if (i < 0 || i > 2) throw PreconditionError("kahler_primitive_at: index must be 0, 1 or 2");
  t.require_domain(p);
  auto W = t.kahler(p);
  auto v = t.permuting_frame(p);
  return {W[i], W[(i + 2) % 3].transpose() * v[(i + 1) % 3]};
}

inline double radius_at(const Target& t, const ChartPoint& p) {
  t.require_domain(p);
  return t.radius(p);
}

}  // namespace fueterlab
