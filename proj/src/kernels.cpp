#include "seqfdr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "seqfdr/error.hpp"

namespace seqfdr::kernels {

#ifndef SEQFDR_BUILD_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* best_available() {
  if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2()) return t;
  return &scalar_table();
}

const KernelTable* initial() {
  if (const char* env = std::getenv("SEQFDR_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return &scalar_table();
    if (v == "avx2" && avx2_table() != nullptr && cpu_has_avx2()) return avx2_table();
  }
  return best_available();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Level level) {
  switch (level) {
    case Level::Scalar:
      current().store(&scalar_table(), std::memory_order_release);
      return;
    case Level::Avx2:
      if (avx2_table() == nullptr || !cpu_has_avx2())
        throw DomainError("AVX2 kernels are not available on this build or CPU");
      current().store(avx2_table(), std::memory_order_release);
      return;
  }
}

void select(std::string_view name) {
  if (name == "auto") {
    current().store(best_available(), std::memory_order_release);
  } else if (name == "scalar") {
    select(Level::Scalar);
  } else if (name == "avx2") {
    select(Level::Avx2);
  } else {
    throw DomainError("unknown SIMD level '" + std::string(name) + "'");
  }
}

}  // namespace seqfdr::kernels
