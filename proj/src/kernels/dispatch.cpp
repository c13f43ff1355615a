#include <atomic>
#include <cstdlib>
#include <string_view>

#include "eigenrec/errors.hpp"
#include "eigenrec/kernels.hpp"
#include "kernels_impl.hpp"

namespace eigenrec::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar,   "scalar",     scalar::dot,   scalar::axpy,
                              scalar::gemv,  scalar::gemv_t, scalar::ger, scalar::herm_quadratic};

#if defined(EIGENREC_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2,   "avx2",     avx2::dot,   avx2::axpy,
                            avx2::gemv,  avx2::gemv_t, avx2::ger, avx2::herm_quadratic};
#endif

bool cpu_has_avx2() noexcept {
#if defined(EIGENREC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("EIGENREC_SIMD");
  const std::string_view choice = env ? env : "auto";
  if (choice == "scalar") return &kScalar;
  if (const KernelTable* wide = avx2_table()) return wide;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(EIGENREC_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) {
  if (isa == Isa::scalar) {
    current().store(&kScalar);
    return;
  }
  const KernelTable* wide = avx2_table();
  if (!wide) throw InvalidInput("avx2 kernels are not available on this build or CPU");
  current().store(wide);
}

}  // namespace eigenrec::kernels
