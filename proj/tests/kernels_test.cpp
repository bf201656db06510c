#include "fhjam/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace fhjam::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n) {
    std::normal_distribution<double> nd(0.0, 3.0);
    std::vector<double> v(n);
    for (auto& x : v) x = nd(gen);
    return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(acc);
}

double naive_sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - b[i];
        acc += d * d;
    }
    return static_cast<double>(acc);
}

double abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] * b[i]) + a[i] * a[i] + b[i] * b[i];
    return acc;
}

} // namespace

TEST_CASE("scalar kernels match a long-double reference") {
    std::mt19937_64 gen(11);
    const auto& s = scalar_table();
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 100u, 1023u}) {
        const auto a = random_vector(gen, n), b = random_vector(gen, n);
        const double scale = abs_sum(a, b) + 1.0;
        CHECK(std::abs(s.dot(a.data(), b.data(), n) - naive_dot(a, b)) <= 1e-14 * scale);
        CHECK(std::abs(s.squared_distance(a.data(), b.data(), n) - naive_sqdist(a, b)) <= 1e-14 * scale);
    }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const KernelTable* v = avx2_table();
    if (v == nullptr || !cpu_has_avx2()) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    const auto& s = scalar_table();
    std::mt19937_64 gen(12);
    for (std::size_t n = 0; n <= 67; ++n) {
        const auto a = random_vector(gen, n), b = random_vector(gen, n), c = random_vector(gen, n);
        const double scale = abs_sum(a, b) + 1.0;
        CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= 1e-13 * scale);
        CHECK(std::abs(v->squared_distance(a.data(), b.data(), n) - s.squared_distance(a.data(), b.data(), n)) <=
              1e-13 * scale);

        // Elementwise kernels are exact: no reassociation happens.
        std::vector<double> y1 = c, y2 = c;
        s.axpy(0.37, a.data(), y1.data(), n);
        v->axpy(0.37, a.data(), y2.data(), n);
        CHECK(y1 == y2);
        std::vector<double> o1(n), o2(n);
        s.add3(a.data(), b.data(), c.data(), o1.data(), n);
        v->add3(a.data(), b.data(), c.data(), o2.data(), n);
        CHECK(o1 == o2);
    }
}

TEST_CASE("dispatch picks a table consistent with the CPU") {
    const auto& t = active();
    if (t.isa == Isa::Avx2) CHECK(cpu_has_avx2());
    CHECK(std::string(isa_name(t.isa)).size() > 0);
    std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    CHECK(dot(a, b) == doctest::Approx(32.0));
    CHECK(squared_distance(a, b) == doctest::Approx(27.0));
}
