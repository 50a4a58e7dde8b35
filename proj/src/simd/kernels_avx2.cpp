// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "fd3/simd/kernels.hpp"

namespace fd3::simd::detail {
namespace {

inline __m256i tail_mask(std::size_t count) {
  alignas(32) static const int kBits[16] = {-1, -1, -1, -1, -1, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0};
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kBits + 8 - count));
}

inline float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_movehdup_ps(s));
  return _mm_cvtss_f32(s);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

// C[MR x 8*NC] += alpha * A[MR x K] * B[K x 8*NC]; A element (r, p) lives at
// a[r * a_rs + p * a_cs] so the same kernel serves A and A^T. When `masked`,
// the last 8-column chunk is partial and uses `mask`.
template <int MR, int NC>
void axpy_panel(std::size_t k, const float* a, std::size_t a_rs, std::size_t a_cs, const float* b,
                std::size_t ldb, float alpha, float* c, std::size_t ldc, bool masked,
                __m256i mask) {
  __m256 acc[MR][NC];
  for (int r = 0; r < MR; ++r)
    for (int q = 0; q < NC; ++q) acc[r][q] = _mm256_setzero_ps();

  for (std::size_t p = 0; p < k; ++p) {
    const float* brow = b + p * ldb;
    __m256 bv[NC];
    for (int q = 0; q < NC; ++q) {
      bv[q] = (masked && q == NC - 1) ? _mm256_maskload_ps(brow + 8 * q, mask)
                                      : _mm256_loadu_ps(brow + 8 * q);
    }
    for (int r = 0; r < MR; ++r) {
      const __m256 av = _mm256_set1_ps(a[r * a_rs + p * a_cs]);
      for (int q = 0; q < NC; ++q) acc[r][q] = _mm256_fmadd_ps(av, bv[q], acc[r][q]);
    }
  }

  const __m256 va = _mm256_set1_ps(alpha);
  for (int r = 0; r < MR; ++r) {
    float* crow = c + r * ldc;
    for (int q = 0; q < NC; ++q) {
      if (masked && q == NC - 1) {
        __m256 cur = _mm256_maskload_ps(crow + 8 * q, mask);
        cur = _mm256_fmadd_ps(va, acc[r][q], cur);
        _mm256_maskstore_ps(crow + 8 * q, mask, cur);
      } else {
        __m256 cur = _mm256_loadu_ps(crow + 8 * q);
        cur = _mm256_fmadd_ps(va, acc[r][q], cur);
        _mm256_storeu_ps(crow + 8 * q, cur);
      }
    }
  }
}

template <int MR>
void axpy_rows(std::size_t n, std::size_t k, const float* a, std::size_t a_rs, std::size_t a_cs,
               const float* b, std::size_t ldb, float alpha, float* c, std::size_t ldc) {
  const __m256i none = _mm256_setzero_si256();
  std::size_t j = 0;
  for (; j + 32 <= n; j += 32) axpy_panel<MR, 4>(k, a, a_rs, a_cs, b + j, ldb, alpha, c + j, ldc, false, none);
  const std::size_t rem = n - j;
  if (rem == 0) return;
  const std::size_t partial = rem % 8;
  const std::size_t chunks = rem / 8 + (partial ? 1 : 0);
  const bool masked = partial != 0;
  const __m256i mask = masked ? tail_mask(partial) : none;
  switch (chunks) {
    case 1: axpy_panel<MR, 1>(k, a, a_rs, a_cs, b + j, ldb, alpha, c + j, ldc, masked, mask); break;
    case 2: axpy_panel<MR, 2>(k, a, a_rs, a_cs, b + j, ldb, alpha, c + j, ldc, masked, mask); break;
    case 3: axpy_panel<MR, 3>(k, a, a_rs, a_cs, b + j, ldb, alpha, c + j, ldc, masked, mask); break;
    default: axpy_panel<MR, 4>(k, a, a_rs, a_cs, b + j, ldb, alpha, c + j, ldc, masked, mask); break;
  }
}

// C[MR x NR] += alpha * A[MR x K] * B[NR x K]^T using 8-wide dot products.
template <int MR, int NR>
void dot_block(std::size_t k, const float* a, std::size_t lda, const float* b, std::size_t ldb,
               float alpha, float* c, std::size_t ldc) {
  __m256 acc[MR][NR];
  for (int r = 0; r < MR; ++r)
    for (int q = 0; q < NR; ++q) acc[r][q] = _mm256_setzero_ps();

  std::size_t p = 0;
  for (; p + 8 <= k; p += 8) {
    __m256 bv[NR];
    for (int q = 0; q < NR; ++q) bv[q] = _mm256_loadu_ps(b + q * ldb + p);
    for (int r = 0; r < MR; ++r) {
      const __m256 av = _mm256_loadu_ps(a + r * lda + p);
      for (int q = 0; q < NR; ++q) acc[r][q] = _mm256_fmadd_ps(av, bv[q], acc[r][q]);
    }
  }
  if (p < k) {
    const __m256i mask = tail_mask(k - p);
    __m256 bv[NR];
    for (int q = 0; q < NR; ++q) bv[q] = _mm256_maskload_ps(b + q * ldb + p, mask);
    for (int r = 0; r < MR; ++r) {
      const __m256 av = _mm256_maskload_ps(a + r * lda + p, mask);
      for (int q = 0; q < NR; ++q) acc[r][q] = _mm256_fmadd_ps(av, bv[q], acc[r][q]);
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int q = 0; q < NR; ++q) c[r * ldc + q] += alpha * hsum(acc[r][q]);
}

template <int MR>
void dot_rows(std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
              std::size_t ldb, float alpha, float* c, std::size_t ldc) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) dot_block<MR, 4>(k, a, lda, b + j * ldb, ldb, alpha, c + j, ldc);
  switch (n - j) {
    case 1: dot_block<MR, 1>(k, a, lda, b + j * ldb, ldb, alpha, c + j, ldc); break;
    case 2: dot_block<MR, 2>(k, a, lda, b + j * ldb, ldb, alpha, c + j, ldc); break;
    case 3: dot_block<MR, 3>(k, a, lda, b + j * ldb, ldb, alpha, c + j, ldc); break;
    default: break;
  }
}

void gemm_f32(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
              const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
              float* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    float* row = c + i * ldc;
    if (beta == 0.0f) {
      for (std::size_t j = 0; j < n; ++j) row[j] = 0.0f;
    } else if (beta != 1.0f) {
      for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0f) return;

  if (!trans_b) {
    const std::size_t a_rs = trans_a ? 1 : lda;
    const std::size_t a_cs = trans_a ? lda : 1;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) axpy_rows<4>(n, k, a + i * a_rs, a_rs, a_cs, b, ldb, alpha, c + i * ldc, ldc);
    switch (m - i) {
      case 1: axpy_rows<1>(n, k, a + i * a_rs, a_rs, a_cs, b, ldb, alpha, c + i * ldc, ldc); break;
      case 2: axpy_rows<2>(n, k, a + i * a_rs, a_rs, a_cs, b, ldb, alpha, c + i * ldc, ldc); break;
      case 3: axpy_rows<3>(n, k, a + i * a_rs, a_rs, a_cs, b, ldb, alpha, c + i * ldc, ldc); break;
      default: break;
    }
    return;
  }

  if (!trans_a) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) dot_rows<4>(n, k, a + i * lda, lda, b, ldb, alpha, c + i * ldc, ldc);
    switch (m - i) {
      case 1: dot_rows<1>(n, k, a + i * lda, lda, b, ldb, alpha, c + i * ldc, ldc); break;
      case 2: dot_rows<2>(n, k, a + i * lda, lda, b, ldb, alpha, c + i * ldc, ldc); break;
      case 3: dot_rows<3>(n, k, a + i * lda, lda, b, ldb, alpha, c + i * ldc, ldc); break;
      default: break;
    }
    return;
  }

  // A^T * B^T is not on any hot path.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * lda + i] * b[j * ldb + p];
      c[i * ldc + j] += alpha * acc;
    }
  }
}

void axpby_f64(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i) out[i] = std::fma(a, x[i], b * y[i]);
}

void lerp_f64(std::size_t n, double a, const double* x, const double* y, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(y + i), vx);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, d, vx));
  }
  for (; i < n; ++i) out[i] = std::fma(a, y[i] - x[i], x[i]);
}

void axpy_f64(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void fir_f64(std::size_t n, const double* taps, std::size_t num_taps, std::size_t stride,
             const double* in, double* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t t = 0; t < num_taps; ++t) {
      const __m256d w = _mm256_set1_pd(taps[t]);
      const double* src = in + i + t * stride;
      acc0 = _mm256_fmadd_pd(w, _mm256_loadu_pd(src), acc0);
      acc1 = _mm256_fmadd_pd(w, _mm256_loadu_pd(src + 4), acc1);
    }
    _mm256_storeu_pd(out + i, acc0);
    _mm256_storeu_pd(out + i + 4, acc1);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < num_taps; ++t) acc = std::fma(taps[t], in[i + t * stride], acc);
    out[i] = acc;
  }
}

double sum_sq_diff_f64(std::size_t n, const double* a, const double* b) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::avx2, gemm_f32, axpby_f64, lerp_f64, axpy_f64, fir_f64, sum_sq_diff_f64};
  return t;
}

}  // namespace fd3::simd::detail
