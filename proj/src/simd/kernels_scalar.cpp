#include "fd3/simd/kernels.hpp"

namespace fd3::simd::detail {
namespace {

void gemm_f32(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
              const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
              float* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (std::size_t p = 0; p < k; ++p) {
        const float av = trans_a ? a[p * lda + i] : a[i * lda + p];
        const float bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      float& dst = c[i * ldc + j];
      dst = (beta == 0.0f ? 0.0f : beta * dst) + alpha * acc;
    }
  }
}

void axpby_f64(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void lerp_f64(std::size_t n, double a, const double* x, const double* y, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * (y[i] - x[i]);
}

void axpy_f64(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void fir_f64(std::size_t n, const double* taps, std::size_t num_taps, std::size_t stride,
             const double* in, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < num_taps; ++t) acc += taps[t] * in[i + t * stride];
    out[i] = acc;
  }
}

double sum_sq_diff_f64(std::size_t n, const double* a, const double* b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::scalar, gemm_f32, axpby_f64, lerp_f64, axpy_f64, fir_f64, sum_sq_diff_f64};
  return t;
}

}  // namespace fd3::simd::detail
