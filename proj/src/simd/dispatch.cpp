#include <cstdlib>
#include <string>

#include "fd3/error.hpp"
#include "fd3/simd/kernels.hpp"

namespace fd3::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(FD3_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw ArgumentError("SIMD variant '" + std::string(isa_name(isa)) + "' is not supported on this CPU");
  }
#if defined(FD3_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("FD3_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return detail::scalar_table();
    if (supported(Isa::avx2)) return table(Isa::avx2);
    return detail::scalar_table();
  }();
  return chosen;
}

}  // namespace fd3::simd
