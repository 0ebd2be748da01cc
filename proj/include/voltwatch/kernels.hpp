#pragma once

#include <cstddef>
#include <string>

namespace voltwatch::kernels {

// ---------------------------------------------------------------------------
// Low-level numeric kernels.
//
// Every dense inner loop in the project goes through this table: matrix-vector
// products, elementwise activations and their backward rules, reductions, and
// the Adam parameter update.  Two backends exist — a scalar reference and an
// AVX2+FMA implementation — and they are bit-identical by construction: both
// use the same operation order (4-lane interleaved reductions, explicit fused
// multiply-adds, a shared polynomial exp).  The active backend is picked at
// startup from CPU capabilities and can be overridden by the environment
// variable VOLTWATCH_KERNELS=scalar|avx2|auto or by select_backend().
//
// Contracts: buffers must not alias unless a kernel's name says it
// accumulates into its output; sizes are in elements; inputs are finite
// (exp/sigmoid/tanh additionally saturate cleanly for large magnitudes).
// ---------------------------------------------------------------------------

struct KernelTable {
  const char* name;

  // y = W x            (W is rows x cols, row-major; x has cols; y has rows)
  void (*matvec)(const double* w, const double* x, double* y,
                 std::size_t rows, std::size_t cols);
  // dx += W^T dy       (same W; dy has rows; dx has cols)
  void (*matvec_t_acc)(const double* w, const double* dy, double* dx,
                       std::size_t rows, std::size_t cols);
  // A += y x^T         (A is rows x cols; y has rows; x has cols)
  void (*ger_acc)(double* a, const double* y, const double* x,
                  std::size_t rows, std::size_t cols);

  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out += a .* b
  void (*mul_acc)(const double* a, const double* b, double* out, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(const double* a, double alpha, double* out, std::size_t n);

  void (*vexp)(const double* a, double* out, std::size_t n);
  void (*sigmoid)(const double* a, double* out, std::size_t n);
  void (*vtanh)(const double* a, double* out, std::size_t n);
  void (*relu)(const double* a, double* out, std::size_t n);

  // Backward rules; y is the forward *output*, dy the incoming gradient.
  void (*sigmoid_bwd_acc)(const double* y, const double* dy, double* dx,
                          std::size_t n);
  void (*tanh_bwd_acc)(const double* y, const double* dy, double* dx,
                       std::size_t n);
  void (*relu_bwd_acc)(const double* y, const double* dy, double* dx,
                       std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sq_err_sum)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);

  // One bias-corrected Adam step over n elements.  inv_bc1 = 1/(1-beta1^t),
  // inv_bc2 = 1/(1-beta2^t) are precomputed by the caller.
  void (*adam_step)(double* theta, double* m, double* v, const double* g,
                    std::size_t n, double lr, double beta1, double beta2,
                    double eps, double inv_bc1, double inv_bc2);
};

const KernelTable& scalar_table();

// Throws std::logic_error if this build has no AVX2 backend (non-x86 target).
const KernelTable& avx2_table();

// True when the backend was compiled in AND the CPU reports AVX2+FMA.
bool avx2_supported();

// The backend currently in use.
const KernelTable& active();

// "scalar", "avx2", or "auto".  Throws std::invalid_argument for unknown
// names or for "avx2" on hardware without AVX2+FMA.
void select_backend(const std::string& name);

}  // namespace voltwatch::kernels
