#pragma once
// Fourier solver for the constant-coefficient flat Fueter operator on T^3.
// In Fourier space F = i S(xi), S(xi) = sum_i xi_i I_i, S^2 = -|xi|^2, so
//   F f = r  <=>  f^ = i S(xi) r^ / |xi|^2   away from the kernel.

#include <complex>
#include <fftw3.h>

#include "fueterlab/fields3d/section.hpp"

namespace fueterlab {

enum class Symbol { spectral, fd4 };

inline Mat4 fueter_symbol(const Vec3& xi, const FrameIdent& frame = {}) {
  FlatTarget t;
  auto T = t.triple(t.point(Vec4::Zero()));
  return xi[0] * frame.apply(T.I, 0) + xi[1] * frame.apply(T.I, 1) + xi[2] * frame.apply(T.I, 2);
}

// wavenumber seen by the differencing scheme for Fourier index j on n nodes
inline double effective_wavenumber(int j, int n, double L, Symbol sym) {
  int m = j <= n / 2 ? j : j - n;
  double k = 2 * kPi * m / L, h = L / n;
  if (sym == Symbol::fd4) return (8 * std::sin(k * h) - std::sin(2 * k * h)) / (6 * h);
  if (2 * j == n) return 0.0;  // Nyquist
  return k;
}

namespace detail {

class Fft3 {
 public:
  explicit Fft3(int n) : n_(n), N_(static_cast<std::size_t>(n) * n * n) {
    buf_ = fftw_alloc_complex(N_);
    fwd_ = fftw_plan_dft_3d(n, n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_3d(n, n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft3() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  std::vector<std::complex<double>> forward(const std::vector<double>& v) {
    for (std::size_t i = 0; i < N_; ++i) {
      buf_[i][0] = v[i];
      buf_[i][1] = 0;
    }
    fftw_execute(fwd_);
    std::vector<std::complex<double>> out(N_);
    for (std::size_t i = 0; i < N_; ++i) out[i] = {buf_[i][0], buf_[i][1]};
    return out;
  }
  std::vector<double> backward_real(const std::vector<std::complex<double>>& v) {
    for (std::size_t i = 0; i < N_; ++i) {
      buf_[i][0] = v[i].real();
      buf_[i][1] = v[i].imag();
    }
    fftw_execute(bwd_);
    std::vector<double> out(N_);
    for (std::size_t i = 0; i < N_; ++i) out[i] = buf_[i][0] / static_cast<double>(N_);
    return out;
  }

 private:
  int n_;
  std::size_t N_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

inline void require_flat(const Section3& s) {
  if (s.target->id() != TargetId::flat)
    throw UnsupportedError("linear_oracle: only defined for the flat quaternion target");
}

// Apply `op(xi, fhat) -> fhat'` mode by mode to the four components.
template <class Op>
std::vector<Vec4> spectral_map(const Grid3& g, const std::vector<Vec4>& in, Symbol sym, Op&& op) {
  const std::size_t N = g.size();
  Fft3 fft(g.n);
  std::array<std::vector<std::complex<double>>, 4> hat;
  for (int c = 0; c < 4; ++c) {
    std::vector<double> comp(N);
    for (std::size_t i = 0; i < N; ++i) comp[i] = in[i][c];
    hat[c] = fft.forward(comp);
  }
  for (std::size_t i = 0; i < N; ++i) {
    auto jc = g.coords(i);
    Vec3 xi(effective_wavenumber(jc[0], g.n, g.L, sym), effective_wavenumber(jc[1], g.n, g.L, sym),
            effective_wavenumber(jc[2], g.n, g.L, sym));
    Eigen::Vector4cd v;
    for (int c = 0; c < 4; ++c) v[c] = hat[c][i];
    v = op(xi, v);
    for (int c = 0; c < 4; ++c) hat[c][i] = v[c];
  }
  std::vector<Vec4> out(N);
  for (int c = 0; c < 4; ++c) {
    auto comp = fft.backward_real(hat[c]);
    for (std::size_t i = 0; i < N; ++i) out[i][c] = comp[i];
  }
  return out;
}

}  // namespace detail

// Kernel projection of `init` (constants, plus Nyquist modes for the fd4 symbol).
inline Section3 linear_oracle_project(const Section3& init, Symbol sym = Symbol::fd4) {
  detail::require_flat(init);
  if (init.has_monodromy()) throw PreconditionError("linear_oracle: periodic sections only");
  std::vector<Vec4> v(init.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = init.nodes[i].x;
  const double tiny = 1e-12 * init.grid.n / init.grid.L;
  auto out = detail::spectral_map(init.grid, v, sym, [&](const Vec3& xi, const Eigen::Vector4cd& f) {
    return xi.norm() <= tiny ? f : Eigen::Vector4cd::Zero().eval();
  });
  Section3 s = init;
  for (std::size_t i = 0; i < v.size(); ++i) s.nodes[i].x = out[i];
  return s;
}

// Solve F f = rhs; `kernel` supplies the kernel component of the answer.
inline Section3 linear_oracle_solve(const Section3& kernel, const std::vector<Vec4>& rhs,
                                    Symbol sym = Symbol::fd4) {
  detail::require_flat(kernel);
  if (rhs.size() != kernel.size()) throw PreconditionError("linear_oracle: rhs size mismatch");
  Section3 base = linear_oracle_project(kernel, sym);
  const double tiny = 1e-12 * kernel.grid.n / kernel.grid.L;
  double scale = 0;
  for (auto& r : rhs) scale = std::max(scale, r.cwiseAbs().maxCoeff());
  const std::complex<double> I(0, 1);
  double leak = 0;
  auto out = detail::spectral_map(kernel.grid, rhs, sym, [&](const Vec3& xi, const Eigen::Vector4cd& r) {
    double k2 = xi.squaredNorm();
    if (std::sqrt(k2) <= tiny) {
      leak = std::max(leak, r.cwiseAbs().maxCoeff());
      return Eigen::Vector4cd::Zero().eval();
    }
    Eigen::Matrix4cd S = fueter_symbol(xi, kernel.frame).cast<std::complex<double>>();
    return (I * S * r / k2).eval();
  });
  if (leak > 1e-9 * (1 + scale) * kernel.size())
    throw PreconditionError("linear_oracle: rhs has a component along the kernel (not in the range)");
  Section3 s = base;
  for (std::size_t i = 0; i < s.size(); ++i) s.nodes[i].x += out[i];
  return s;
}

}  // namespace fueterlab
