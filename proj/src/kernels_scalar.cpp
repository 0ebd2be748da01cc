#include <cmath>
#include <cstddef>

#include "kernel_math.hpp"
#include "voltwatch/kernels.hpp"

// Scalar reference backend.  This is the semantic ground truth: the AVX2
// backend must match it bit-for-bit, and the equivalence suite enforces that.

namespace voltwatch::kernels {
namespace {

using detail::dot_core;
using detail::exp_core;
using detail::relu_core;
using detail::sigmoid_core;
using detail::sq_err_sum_core;
using detail::sum_sq_core;
using detail::tanh_core;

void k_matvec(const double* w, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r)
    y[r] = dot_core(w + r * cols, x, cols);
}

void k_matvec_t_acc(const double* w, const double* dy, double* dx,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c)
      dx[c] = std::fma(g, row[c], dx[c]);
  }
}

void k_ger_acc(double* a, const double* y, const double* x, std::size_t rows,
               std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = y[r];
    double* row = a + r * cols;
    for (std::size_t c = 0; c < cols; ++c)
      row[c] = std::fma(g, x[c], row[c]);
  }
}

void k_add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + b[k];
}

void k_sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] - b[k];
}

void k_mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
}

void k_mul_acc(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = std::fma(a[k], b[k], out[k]);
}

void k_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] = std::fma(alpha, x[k], y[k]);
}

void k_scale(const double* a, double alpha, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * alpha;
}

void k_vexp(const double* a, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = exp_core(a[k]);
}

void k_sigmoid(const double* a, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = sigmoid_core(a[k]);
}

void k_vtanh(const double* a, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = tanh_core(a[k]);
}

void k_relu(const double* a, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = relu_core(a[k]);
}

void k_sigmoid_bwd_acc(const double* y, const double* dy, double* dx,
                       std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 1.0 - y[k];
    const double u = y[k] * t;
    dx[k] = std::fma(dy[k], u, dx[k]);
  }
}

void k_tanh_bwd_acc(const double* y, const double* dy, double* dx,
                    std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double yy = y[k] * y[k];
    const double t = 1.0 - yy;
    dx[k] = std::fma(dy[k], t, dx[k]);
  }
}

void k_relu_bwd_acc(const double* y, const double* dy, double* dx,
                    std::size_t n) {
  // Written as an unconditional add of a masked value so the -0.0 + 0.0
  // normalization matches the SIMD mask-and-add form exactly.
  for (std::size_t k = 0; k < n; ++k)
    dx[k] = dx[k] + (y[k] > 0.0 ? dy[k] : 0.0);
}

double k_dot(const double* a, const double* b, std::size_t n) {
  return dot_core(a, b, n);
}

double k_sq_err_sum(const double* a, const double* b, std::size_t n) {
  return sq_err_sum_core(a, b, n);
}

double k_sum_sq(const double* a, std::size_t n) { return sum_sq_core(a, n); }

void k_adam_step(double* theta, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double inv_bc1, double inv_bc2) {
  const double om1 = 1.0 - beta1;
  const double om2 = 1.0 - beta2;
  for (std::size_t k = 0; k < n; ++k) {
    const double gm = om1 * g[k];
    m[k] = std::fma(beta1, m[k], gm);
    const double gg = g[k] * g[k];
    const double gv = om2 * gg;
    v[k] = std::fma(beta2, v[k], gv);
    const double mhat = m[k] * inv_bc1;
    const double vhat = v[k] * inv_bc2;
    const double den = std::sqrt(vhat) + eps;
    theta[k] = theta[k] - (lr * mhat) / den;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      "scalar",
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
