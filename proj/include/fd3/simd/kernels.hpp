#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops shared by the image operators and the network.
//
// Every kernel has a portable scalar reference and, where the CPU supports it,
// an AVX2+FMA variant. The variant is chosen once per process; setting the
// environment variable FD3_SIMD=scalar forces the reference path.
namespace fd3::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Row-major single-precision GEMM:
//   C[M x N] = alpha * op(A) * op(B) + beta * C
// op(A) is M x K, op(B) is K x N. beta == 0 overwrites C without reading it.
using GemmF32 = void (*)(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                         float alpha, const float* a, std::size_t lda, const float* b,
                         std::size_t ldb, float beta, float* c, std::size_t ldc);

// out[i] = a * x[i] + b * y[i]
using AxpbyF64 = void (*)(std::size_t n, double a, const double* x, double b, const double* y,
                          double* out);

// out[i] = x[i] + a * (y[i] - x[i])
using LerpF64 = void (*)(std::size_t n, double a, const double* x, const double* y, double* out);

// y[i] += a * x[i]
using AxpyF64 = void (*)(std::size_t n, double a, const double* x, double* y);

// out[i] = sum_k taps[k] * in[i + k * stride] for i < n.
// `in` must hold n + (num_taps - 1) * stride elements.
using FirF64 = void (*)(std::size_t n, const double* taps, std::size_t num_taps, std::size_t stride,
                        const double* in, double* out);

// sum_i (a[i] - b[i])^2
using SumSqDiffF64 = double (*)(std::size_t n, const double* a, const double* b);

struct KernelTable {
  Isa isa;
  GemmF32 gemm_f32;
  AxpbyF64 axpby_f64;
  LerpF64 lerp_f64;
  AxpyF64 axpy_f64;
  FirF64 fir_f64;
  SumSqDiffF64 sum_sq_diff_f64;
};

bool supported(Isa isa);

// Table for a specific ISA. Throws ArgumentError when the CPU lacks it.
const KernelTable& table(Isa isa);

// Table selected for this process.
const KernelTable& active();

namespace detail {
const KernelTable& scalar_table();
#if defined(FD3_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace fd3::simd
