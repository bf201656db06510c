#include "fhjam/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace fhjam::kernels {

#if !defined(FHJAM_HAVE_AVX2)
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool cpu_has_avx2() noexcept {
#if defined(FHJAM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select() noexcept {
    const char* force = std::getenv("FHJAM_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "1") == 0) return scalar_table();
    if (cpu_has_avx2()) {
        if (const KernelTable* t = avx2_table()) return *t;
    }
    return scalar_table();
}

} // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

const char* isa_name(Isa isa) noexcept {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

} // namespace fhjam::kernels
