// AVX2+FMA backend.  Bit-identical to the scalar reference: same reduction
// lane structure, same fused multiply-adds, same exp polynomial evaluated in
// the same order.  Vector tails fall back to the shared scalar cores, which
// follow the identical operation sequence.

#if defined(VOLTWATCH_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "kernel_math.hpp"
#include "voltwatch/kernels.hpp"

namespace voltwatch::kernels {
namespace {

using detail::exp_core;
using detail::relu_core;
using detail::sigmoid_core;
using detail::sq_err_sum_core;
using detail::tanh_core;

const __m256d kOne = _mm256_set1_pd(1.0);
const __m256d kTwo = _mm256_set1_pd(2.0);
const __m256d kZero = _mm256_setzero_pd();
const __m256d kSignMask = _mm256_set1_pd(-0.0);

// --- exp ---------------------------------------------------------------

inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(detail::kExpHi);
  const __m256d lo = _mm256_set1_pd(detail::kExpLo);
  const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d isnan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  // Clamp so the main path stays in a safe exponent range; saturated and NaN
  // lanes are blended back afterwards.  max/min return the second operand on
  // NaN, so xc is always finite.
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n = _mm256_floor_pd(
      _mm256_fmadd_pd(_mm256_set1_pd(detail::kLog2E), xc, _mm256_set1_pd(0.5)));
  __m256d r = _mm256_fmadd_pd(n, _mm256_set1_pd(-detail::kLn2Hi), xc);
  r = _mm256_fmadd_pd(n, _mm256_set1_pd(-detail::kLn2Lo), r);
  const __m256d r2 = _mm256_mul_pd(r, r);
  const __m256d px = _mm256_mul_pd(
      r, _mm256_fmadd_pd(
             _mm256_fmadd_pd(_mm256_set1_pd(detail::kExpP0), r2,
                             _mm256_set1_pd(detail::kExpP1)),
             r2, _mm256_set1_pd(detail::kExpP2)));
  const __m256d qx = _mm256_fmadd_pd(
      _mm256_fmadd_pd(
          _mm256_fmadd_pd(_mm256_set1_pd(detail::kExpQ0), r2,
                          _mm256_set1_pd(detail::kExpQ1)),
          r2, _mm256_set1_pd(detail::kExpQ2)),
      r2, _mm256_set1_pd(detail::kExpQ3));
  const __m256d e = _mm256_add_pd(
      kOne, _mm256_mul_pd(kTwo, _mm256_div_pd(px, _mm256_sub_pd(qx, px))));

  const __m128i n32 = _mm256_cvtpd_epi32(n);  // n is integral: exact
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  __m256d res = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));

  res = _mm256_blendv_pd(res, _mm256_set1_pd(HUGE_VAL), over);
  res = _mm256_blendv_pd(res, kZero, under);
  res = _mm256_blendv_pd(res, x, isnan);
  return res;
}

inline __m256d sigmoid4(__m256d x) {
  const __m256d e = exp4(_mm256_xor_pd(x, kSignMask));
  return _mm256_div_pd(kOne, _mm256_add_pd(kOne, e));
}

inline __m256d tanh4(__m256d x) {
  const __m256d a = _mm256_andnot_pd(kSignMask, x);
  // rational branch: a + a^3 * P(a^2)/Q(a^2)
  const __m256d z = _mm256_mul_pd(a, a);
  __m256d p = _mm256_set1_pd(detail::kTanhP0);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(detail::kTanhP1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(detail::kTanhP2));
  __m256d q = _mm256_add_pd(z, _mm256_set1_pd(detail::kTanhQ0));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(detail::kTanhQ1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(detail::kTanhQ2));
  const __m256d ts =
      _mm256_fmadd_pd(_mm256_mul_pd(a, z), _mm256_div_pd(p, q), a);
  // large branch: 1 - 2/(exp(2a)+1)
  const __m256d e = exp4(_mm256_mul_pd(kTwo, a));
  const __m256d tb = _mm256_sub_pd(kOne, _mm256_div_pd(kTwo, _mm256_add_pd(e, kOne)));
  const __m256d small =
      _mm256_cmp_pd(a, _mm256_set1_pd(detail::kTanhCut), _CMP_LT_OQ);
  const __m256d t = _mm256_blendv_pd(tb, ts, small);
  // copysign(t, x): t is non-negative in both branches.
  return _mm256_or_pd(t, _mm256_and_pd(x, kSignMask));
}

inline __m256d relu4(__m256d x) {
  // compare+mask, not max_pd: max(0.0, -0.0) would yield -0.0 and diverge
  // from the scalar backend.
  return _mm256_and_pd(_mm256_cmp_pd(x, kZero, _CMP_GT_OQ), x);
}

// --- reductions ----------------------------------------------------------

inline double dot4(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc);
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; k < n; ++k) s[k & 3] = std::fma(a[k], b[k], s[k & 3]);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

void k_matvec(const double* w, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot4(w + r * cols, x, cols);
}

void k_matvec_t_acc(const double* w, const double* dy, double* dx,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    const __m256d g4 = _mm256_set1_pd(g);
    const double* row = w + r * cols;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d acc = _mm256_fmadd_pd(g4, _mm256_loadu_pd(row + c),
                                          _mm256_loadu_pd(dx + c));
      _mm256_storeu_pd(dx + c, acc);
    }
    for (; c < cols; ++c) dx[c] = std::fma(g, row[c], dx[c]);
  }
}

void k_ger_acc(double* a, const double* y, const double* x, std::size_t rows,
               std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = y[r];
    const __m256d g4 = _mm256_set1_pd(g);
    double* row = a + r * cols;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d acc = _mm256_fmadd_pd(g4, _mm256_loadu_pd(x + c),
                                          _mm256_loadu_pd(row + c));
      _mm256_storeu_pd(row + c, acc);
    }
    for (; c < cols; ++c) row[c] = std::fma(g, x[c], row[c]);
  }
}

// --- elementwise ---------------------------------------------------------

void k_add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k,
                     _mm256_add_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
  for (; k < n; ++k) out[k] = a[k] + b[k];
}

void k_sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k,
                     _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
  for (; k < n; ++k) out[k] = a[k] - b[k];
}

void k_mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k,
                     _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
  for (; k < n; ++k) out[k] = a[k] * b[k];
}

void k_mul_acc(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k,
                     _mm256_fmadd_pd(_mm256_loadu_pd(a + k),
                                     _mm256_loadu_pd(b + k),
                                     _mm256_loadu_pd(out + k)));
  for (; k < n; ++k) out[k] = std::fma(a[k], b[k], out[k]);
}

void k_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a4 = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(
        y + k, _mm256_fmadd_pd(a4, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  for (; k < n; ++k) y[k] = std::fma(alpha, x[k], y[k]);
}

void k_scale(const double* a, double alpha, double* out, std::size_t n) {
  const __m256d a4 = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(a + k), a4));
  for (; k < n; ++k) out[k] = a[k] * alpha;
}

void k_vexp(const double* a, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, exp4(_mm256_loadu_pd(a + k)));
  for (; k < n; ++k) out[k] = exp_core(a[k]);
}

void k_sigmoid(const double* a, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, sigmoid4(_mm256_loadu_pd(a + k)));
  for (; k < n; ++k) out[k] = sigmoid_core(a[k]);
}

void k_vtanh(const double* a, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, tanh4(_mm256_loadu_pd(a + k)));
  for (; k < n; ++k) out[k] = tanh_core(a[k]);
}

void k_relu(const double* a, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, relu4(_mm256_loadu_pd(a + k)));
  for (; k < n; ++k) out[k] = relu_core(a[k]);
}

void k_sigmoid_bwd_acc(const double* y, const double* dy, double* dx,
                       std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d y4 = _mm256_loadu_pd(y + k);
    const __m256d t = _mm256_sub_pd(kOne, y4);
    const __m256d u = _mm256_mul_pd(y4, t);
    _mm256_storeu_pd(
        dx + k, _mm256_fmadd_pd(_mm256_loadu_pd(dy + k), u, _mm256_loadu_pd(dx + k)));
  }
  for (; k < n; ++k) {
    const double t = 1.0 - y[k];
    const double u = y[k] * t;
    dx[k] = std::fma(dy[k], u, dx[k]);
  }
}

void k_tanh_bwd_acc(const double* y, const double* dy, double* dx,
                    std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d y4 = _mm256_loadu_pd(y + k);
    const __m256d yy = _mm256_mul_pd(y4, y4);
    const __m256d t = _mm256_sub_pd(kOne, yy);
    _mm256_storeu_pd(
        dx + k, _mm256_fmadd_pd(_mm256_loadu_pd(dy + k), t, _mm256_loadu_pd(dx + k)));
  }
  for (; k < n; ++k) {
    const double yy = y[k] * y[k];
    const double t = 1.0 - yy;
    dx[k] = std::fma(dy[k], t, dx[k]);
  }
}

void k_relu_bwd_acc(const double* y, const double* dy, double* dx,
                    std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(y + k), kZero, _CMP_GT_OQ);
    const __m256d gated = _mm256_and_pd(mask, _mm256_loadu_pd(dy + k));
    _mm256_storeu_pd(dx + k, _mm256_add_pd(_mm256_loadu_pd(dx + k), gated));
  }
  for (; k < n; ++k) dx[k] = dx[k] + (y[k] > 0.0 ? dy[k] : 0.0);
}

double k_dot(const double* a, const double* b, std::size_t n) {
  return dot4(a, b, n);
}

double k_sq_err_sum(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; k < n; ++k) {
    const double d = a[k] - b[k];
    s[k & 3] = std::fma(d, d, s[k & 3]);
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double k_sum_sq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_loadu_pd(a + k);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; k < n; ++k) s[k & 3] = std::fma(a[k], a[k], s[k & 3]);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

void k_adam_step(double* theta, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double inv_bc1, double inv_bc2) {
  const double om1s = 1.0 - beta1;
  const double om2s = 1.0 - beta2;
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d om1 = _mm256_set1_pd(om1s);
  const __m256d om2 = _mm256_set1_pd(om2s);
  const __m256d ib1 = _mm256_set1_pd(inv_bc1);
  const __m256d ib2 = _mm256_set1_pd(inv_bc2);
  const __m256d ep4 = _mm256_set1_pd(eps);
  const __m256d lr4 = _mm256_set1_pd(lr);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d g4 = _mm256_loadu_pd(g + k);
    const __m256d gm = _mm256_mul_pd(om1, g4);
    const __m256d m4 = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + k), gm);
    const __m256d gg = _mm256_mul_pd(g4, g4);
    const __m256d gv = _mm256_mul_pd(om2, gg);
    const __m256d v4 = _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + k), gv);
    const __m256d mhat = _mm256_mul_pd(m4, ib1);
    const __m256d vhat = _mm256_mul_pd(v4, ib2);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vhat), ep4);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(lr4, mhat), den);
    const __m256d th = _mm256_sub_pd(_mm256_loadu_pd(theta + k), upd);
    _mm256_storeu_pd(m + k, m4);
    _mm256_storeu_pd(v + k, v4);
    _mm256_storeu_pd(theta + k, th);
  }
  for (; k < n; ++k) {
    const double gm = om1s * g[k];
    m[k] = std::fma(beta1, m[k], gm);
    const double gg = g[k] * g[k];
    const double gv = om2s * gg;
    v[k] = std::fma(beta2, v[k], gv);
    const double mhat = m[k] * inv_bc1;
    const double vhat = v[k] * inv_bc2;
    const double den = std::sqrt(vhat) + eps;
    theta[k] = theta[k] - (lr * mhat) / den;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table = {
      "avx2",
      k_matvec,
      k_matvec_t_acc,
      k_ger_acc,
      k_add,
      k_sub,
      k_mul,
      k_mul_acc,
      k_axpy,
      k_scale,
      k_vexp,
      k_sigmoid,
      k_vtanh,
      k_relu,
      k_sigmoid_bwd_acc,
      k_tanh_bwd_acc,
      k_relu_bwd_acc,
      k_dot,
      k_sq_err_sum,
      k_sum_sq,
      k_adam_step,
  };
  return table;
}

}  // namespace voltwatch::kernels

#endif  // VOLTWATCH_HAVE_AVX2
