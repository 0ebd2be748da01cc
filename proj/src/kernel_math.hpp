#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

// Shared scalar cores for the transcendental kernels.  The AVX2 backend
// mirrors these operation-for-operation (same fused multiply-adds, same
// polynomial, same blend points), which is what makes the two backends
// bit-identical.  Do not "simplify" expressions here without changing the
// SIMD side in lockstep.

namespace voltwatch::kernels::detail {

inline constexpr double kExpHi = 709.0;    // above: saturate to +inf
inline constexpr double kExpLo = -708.0;   // below: saturate to 0
inline constexpr double kLog2E = 1.4426950408889634073599;
inline constexpr double kLn2Hi = 6.93145751953125e-1;
inline constexpr double kLn2Lo = 1.42860682030941723212e-6;

// Rational approximation of exp on |r| <= ln(2)/2 (Cephes coefficients).
inline constexpr double kExpP0 = 1.26177193074810590878e-4;
inline constexpr double kExpP1 = 3.02994407707441961300e-2;
inline constexpr double kExpP2 = 9.99999999999999999910e-1;
inline constexpr double kExpQ0 = 3.00198505138664455042e-6;
inline constexpr double kExpQ1 = 2.52448340349684104192e-3;
inline constexpr double kExpQ2 = 2.27265548208155028766e-1;
inline constexpr double kExpQ3 = 2.00000000000000000005e0;

// Rational approximation of tanh on |x| < 0.625 (Cephes coefficients):
// tanh(x) = x + x^3 * P(x^2) / Q(x^2), Q monic.  Above the cutoff the
// exp-based identity is used, where 1 - 2/(e+1) no longer cancels.
inline constexpr double kTanhCut = 0.625;
inline constexpr double kTanhP0 = -9.64399179425052238628e-1;
inline constexpr double kTanhP1 = -9.92877231001918586564e1;
inline constexpr double kTanhP2 = -1.61468768441708447952e3;
inline constexpr double kTanhQ0 = 1.12811678491632931402e2;
inline constexpr double kTanhQ1 = 2.23548839060100448583e3;
inline constexpr double kTanhQ2 = 4.84406305325125486048e3;

inline double exp_core(double x) {
  if (x > kExpHi) return std::numeric_limits<double>::infinity();
  if (x < kExpLo) return 0.0;
  if (std::isnan(x)) return x;
  // x = n ln2 + r, |r| <= ln2/2; ln2 split hi/lo keeps r exact to the last bit.
  const double n = std::floor(std::fma(kLog2E, x, 0.5));
  double r = std::fma(n, -kLn2Hi, x);
  r = std::fma(n, -kLn2Lo, r);
  const double r2 = r * r;
  const double px =
      r * std::fma(std::fma(kExpP0, r2, kExpP1), r2, kExpP2);
  const double qx = std::fma(
      std::fma(std::fma(kExpQ0, r2, kExpQ1), r2, kExpQ2), r2, kExpQ3);
  const double e = 1.0 + 2.0 * (px / (qx - px));
  // 2^n by direct exponent construction; n is in [-1021, 1023] here.
  const auto bits =
      static_cast<std::uint64_t>(static_cast<std::int64_t>(n) + 1023) << 52;
  return e * std::bit_cast<double>(bits);
}

inline double sigmoid_core(double x) {
  const double e = exp_core(-x);
  return 1.0 / (1.0 + e);
}

inline double tanh_core(double x) {
  const double a = std::fabs(x);
  double t;
  if (a < kTanhCut) {
    const double z = a * a;
    double p = kTanhP0;
    p = std::fma(p, z, kTanhP1);
    p = std::fma(p, z, kTanhP2);
    double q = z + kTanhQ0;
    q = std::fma(q, z, kTanhQ1);
    q = std::fma(q, z, kTanhQ2);
    t = std::fma(a * z, p / q, a);
  } else {
    const double e = exp_core(2.0 * a);
    t = 1.0 - 2.0 / (e + 1.0);
  }
  return std::copysign(t, x);
}

inline double relu_core(double x) { return x > 0.0 ? x : 0.0; }

// Reductions accumulate into four interleaved lanes combined as
// (s0+s1)+(s2+s3); the SIMD backend produces the same partial sums.

inline double dot_core(const double* a, const double* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) s[k & 3] = std::fma(a[k], b[k], s[k & 3]);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

inline double sq_err_sum_core(const double* a, const double* b,
                              std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    const double d = a[k] - b[k];
    s[k & 3] = std::fma(d, d, s[k & 3]);
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

inline double sum_sq_core(const double* a, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) s[k & 3] = std::fma(a[k], a[k], s[k & 3]);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

}  // namespace voltwatch::kernels::detail
