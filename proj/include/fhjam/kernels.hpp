#pragma once

// Data-parallel inner loops used by the decoder and the mutual-information
// engine. Each kernel has a portable scalar reference implementation and an
// AVX2/FMA variant; the variant is picked once at startup from CPUID.
//
// The two variants agree to rounding only (the vector versions reassociate
// sums). Within one process the selection never changes, so results stay
// reproducible run to run.

#include <cstddef>
#include <span>

namespace fhjam::kernels {

enum class Isa { Scalar, Avx2 };

/// Table of kernel entry points for one instruction set.
struct KernelTable {
    Isa isa;
    /// sum_i (a[i] - b[i])^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// out[i] = a[i] + b[i] + c[i]
    void (*add3)(const double* a, const double* b, const double* c, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table() noexcept;

bool cpu_has_avx2() noexcept;

/// The table selected for this process. Honours FHJAM_FORCE_SCALAR=1.
const KernelTable& active() noexcept;

const char* isa_name(Isa isa) noexcept;

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void add3(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                 std::span<double> out) {
    active().add3(a.data(), b.data(), c.data(), out.data(), out.size());
}

} // namespace fhjam::kernels
