#pragma once
// Atiyah-Hitchin metric as a Bianchi IX profile
//   ds^2 = f^2 deta^2 + a^2 s1^2 + b^2 s2^2 + c^2 s3^2,   f = -b / eta,
//   a' = f ((b - c)^2 - a^2) / (2bc)  (and cyclically),
// shot outward from the near-bolt series at eta = pi. The bolt (a = 0) is a
// round RP^2 of radius pi; c tends to -2 (the ALF circle).

#include <iomanip>
#include <ostream>
#include <vector>

#include "fueterlab/targets/core.hpp"

namespace fueterlab {

namespace detail {

inline Eigen::VectorXd ah_rhs(double eta, const Eigen::VectorXd& y) {
  const double a = y[0], b = y[1], c = y[2];
  const double f = -b / eta;
  Eigen::VectorXd d(4);
  d[0] = f * ((b - c) * (b - c) - a * a) / (2 * b * c);
  d[1] = f * ((c - a) * (c - a) - b * b) / (2 * c * a);
  d[2] = f * ((a - b) * (a - b) - c * c) / (2 * a * b);
  d[3] = std::abs(f);
  return d;
}

// series about the bolt, delta = eta - pi
inline Eigen::VectorXd ah_seed(double d) {
  const double p = kPi;
  Eigen::VectorXd y(4);
  y[0] = 2 * d - d * d / (2 * p) + 3 * std::pow(d, 5) / (16 * std::pow(p, 4));
  y[1] = p + d / 2 + d * d / (4 * p) - 3 * std::pow(d, 4) / (64 * std::pow(p, 3));
  y[2] = -p + d / 2 - d * d / (2 * p) + 3 * std::pow(d, 3) / (8 * p * p) -
         15 * std::pow(d, 4) / (64 * std::pow(p, 3));
  y[3] = d - d * d / (4 * p);
  return y;
}

}  // namespace detail

struct AHProfile {
  std::vector<double> eta, a, b, c, f, r;
  double eta_bolt = kPi;
  double bolt_scale = kPi;  // radius of the round RP^2
  int vanishing_coefficient = 0;
  double first_integral_drift = 0;  // max |(bc - ab)/eta^2 + 1|
  double ode_residual = 0;          // max relative residual of the ODE along the table
  double alf_limit = 0;             // c at the table end
  double alf_relative_change = 0;   // |c(end) - c(end/2)| / |c(end)|
  double tolerance = 0;
  OdeTrajectory trajectory;

  std::size_t size() const { return eta.size(); }
  double eta_max() const { return eta.back(); }

  Eigen::VectorXd state(double e) const {
    if (e < eta_bolt - 1e-14 || e > eta_max() * (1 + 1e-14))
      throw DomainError("AHProfile: parameter outside [bolt, table end]");
    if (e <= eta.front()) {
      Eigen::VectorXd y = detail::ah_seed(std::max(0.0, e - kPi));
      return y;
    }
    return trajectory.at(std::min(e, eta_max()));
  }
  // geodesic distance from the bolt along a radial line
  double radius(double e) const { return state(e)[3]; }
  Vec3 coefficients(double e) const {
    auto y = state(e);
    return {y[0], y[1], y[2]};
  }

  void export_text(std::ostream& os) const {
    os << "# fueterlab AH profile, convention table v" << Conventions::version
       << "; columns: eta a b c f r\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < eta.size(); ++k)
      os << eta[k] << ' ' << a[k] << ' ' << b[k] << ' ' << c[k] << ' ' << f[k] << ' ' << r[k] << '\n';
  }
};

inline AHProfile ah_profile(double tolerance = 1e-12, double eta_max = 1000.0) {
  if (!(tolerance > 0)) throw PreconditionError("ah_profile: tolerance must be positive");
  AHProfile P;
  P.tolerance = tolerance;
  const double d0 = 1e-3;
  const double e0 = kPi + d0;
  OdeOptions o;
  o.rtol = tolerance;
  o.atol = tolerance;
  o.h0 = 1e-4;
  try {
    P.trajectory = rk_integrate(detail::ah_rhs, detail::ah_seed(d0), e0, eta_max, o);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("ah_profile: ") + e.what());
  }
  const auto& T = P.trajectory;
  for (std::size_t k = 0; k < T.size(); ++k) {
    const auto& y = T.y[k];
    P.eta.push_back(T.t[k]);
    P.a.push_back(y[0]);
    P.b.push_back(y[1]);
    P.c.push_back(y[2]);
    P.f.push_back(-y[1] / T.t[k]);
    P.r.push_back(y[3]);
    double Q = (y[1] * y[2] - y[0] * y[1]) / (T.t[k] * T.t[k]);
    P.first_integral_drift = std::max(P.first_integral_drift, std::abs(Q + 1));
  }
  // bolt: the coefficient that is smallest at the seed, extrapolated to zero
  // with the quadratic through the first three table rows
  const auto& y0 = T.y.front();
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(y0[i]) < std::abs(y0[k])) k = i;
  P.vanishing_coefficient = k;
  auto quad = [&](int i, double e) {
    double v = 0;
    for (int m = 0; m < 3; ++m) {
      double l = 1;
      for (int n = 0; n < 3; ++n)
        if (n != m) l *= (e - T.t[n]) / (T.t[m] - T.t[n]);
      v += l * T.y[m][i];
    }
    return v;
  };
  double e = e0;
  for (int it = 0; it < 50; ++it) {
    double hd = 1e-6;
    double step = quad(k, e) / ((quad(k, e + hd) - quad(k, e - hd)) / (2 * hd));
    e -= step;
    if (std::abs(step) < 1e-15) break;
  }
  P.eta_bolt = e;
  double bb = 0;
  for (int i = 0; i < 3; ++i)
    if (i != k) bb += 0.5 * std::abs(quad(i, e));
  P.bolt_scale = bb;
  // ODE residual: fourth-order differences of the dense output against the RHS
  for (std::size_t j = 1; j + 1 < T.size(); j += 7) {
    double e = T.t[j];
    double h = 1e-2 * std::min(1.0, e - kPi);
    if (e - 2 * h <= T.t.front() || e + 2 * h >= T.t.back()) continue;
    Eigen::VectorXd d = (T.at(e - 2 * h) - 8 * T.at(e - h) + 8 * T.at(e + h) - T.at(e + 2 * h)) / (12 * h);
    Eigen::VectorXd g = detail::ah_rhs(e, T.y[j]);
    for (int i = 0; i < 4; ++i)
      P.ode_residual = std::max(P.ode_residual, std::abs(d[i] - g[i]) / (1 + std::abs(g[i])));
  }
  P.alf_limit = P.c.back();
  double half = P.trajectory.at(0.5 * eta_max)[2];
  P.alf_relative_change = std::abs(P.c.back() - half) / std::abs(P.c.back());
  return P;
}

// Target backed by the profile. Chart 0: (eta, theta, phi, psi) Euler angles;
// chart 1: bolt points (eta_bolt, n) labelled by the axis direction n (up to sign).
class AtiyahHitchinTarget final : public Target {
 public:
  explicit AtiyahHitchinTarget(std::shared_ptr<const AHProfile> prof) : prof_(std::move(prof)) {
    if (!prof_) throw PreconditionError("Atiyah-Hitchin target: missing profile");
  }
  const AHProfile& profile() const { return *prof_; }

  TargetId id() const override { return TargetId::atiyah_hitchin; }
  int chart_count() const override { return 2; }
  std::string chart_name(int c) const override { return c == 0 ? "euler" : "bolt-axis"; }
  std::string domain_predicate(int c) const override {
    if (c == 0) return "eta_bolt <= eta <= table end and 0 < theta < pi";
    return "eta == eta_bolt and |n| = 1";
  }
  bool in_domain(const ChartPoint& p) const override {
    if (!p.x.allFinite()) return false;
    if (p.chart == 0)
      return p.x[0] >= kPi && p.x[0] <= prof_->eta_max() && p.x[1] > 1e-9 && p.x[1] < kPi - 1e-9;
    if (p.chart == 1)
      return p.x[0] == kPi && std::abs(p.x.tail<3>().norm() - 1) <= 1e-12;
    return false;
  }
  Vec4 period(int c) const override { return c == 0 ? Vec4(0, 0, 2 * kPi, 2 * kPi) : Vec4::Zero(); }

  Mat4 metric(const ChartPoint& p) const override {
    if (p.chart != 0)
      throw DomainError("atiyah-hitchin: chart 'bolt-axis' labels bolt points only; no metric");
    const double e = p.x[0];
    if (e - kPi < 1e-12) throw DomainError("atiyah-hitchin: Euler chart degenerates on the bolt");
    Vec3 co = prof_->coefficients(e);
    const double f = co[1] / e;
    const double th = p.x[1], ps = p.x[3];
    // sigma_i as covectors on (eta, theta, phi, psi)
    Vec4 s1(0, -std::sin(ps), std::cos(ps) * std::sin(th), 0);
    Vec4 s2(0, std::cos(ps), std::sin(ps) * std::sin(th), 0);
    Vec4 s3(0, 0, std::cos(th), 1);
    Mat4 g = Mat4::Zero();
    g(0, 0) = f * f;
    g += co[0] * co[0] * s1 * s1.transpose() + co[1] * co[1] * s2 * s2.transpose() +
         co[2] * co[2] * s3 * s3.transpose();
    return g;
  }

  double radius(const ChartPoint& p) const override {
    if (p.chart == 1) return 0.0;
    return prof_->radius(p.x[0]);
  }

 private:
  std::shared_ptr<const AHProfile> prof_;
};

inline std::shared_ptr<AtiyahHitchinTarget> make_atiyah_hitchin(double tol = 1e-12,
                                                                double eta_max = 1000.0) {
  return std::make_shared<AtiyahHitchinTarget>(std::make_shared<AHProfile>(ah_profile(tol, eta_max)));
}

}  // namespace fueterlab
