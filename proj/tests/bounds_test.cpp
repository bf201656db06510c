#include "fhjam/bounds.hpp"
#include "fhjam/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace fhjam;

namespace {

// Water level by bisection on sum_k max(0, c - sigma2_k) = lambda.
double oracle_level(const std::vector<double>& s2, double lambda) {
    if (lambda == 0.0) return *std::min_element(s2.begin(), s2.end());
    double lo = 0.0, hi = *std::max_element(s2.begin(), s2.end()) + lambda;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        double fill = 0.0;
        for (double s : s2) fill += std::max(0.0, mid - s);
        (fill < lambda ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> random_sigma2(std::mt19937_64& gen, std::size_t K, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(K);
    for (auto& x : v) x = u(gen);
    return v;
}

} // namespace

TEST_CASE("waterfill examples") {
    const auto a = waterfill(std::vector<double>{1, 1}, 2.0);
    CHECK(a.c == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a.lambda == std::vector<double>{1.0, 1.0});
    CHECK(a.active_count() == 2);

    const auto b = waterfill(std::vector<double>{1, 4}, 1.0);
    CHECK(b.c == 2.0);
    CHECK(b.lambda == std::vector<double>{1.0, 0.0});
    CHECK(b.active == std::vector<bool>{true, false});

    const auto z = waterfill(std::vector<double>{1, 4}, 0.0);
    CHECK(z.c == 1.0);
    CHECK(z.lambda == std::vector<double>{0.0, 0.0});
    CHECK(z.active_count() == 0);

    CHECK_THROWS_AS(waterfill(std::vector<double>{}, 1.0), ContractViolation);
    CHECK_THROWS_AS(waterfill(std::vector<double>{1.0, 0.0}, 1.0), ContractViolation);
    CHECK_THROWS_AS(waterfill(std::vector<double>{1.0}, -1.0), ContractViolation);
}

TEST_CASE("waterfill invariants on random instances") {
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<std::size_t> kd(1, 8);
    std::uniform_real_distribution<double> ld(0.0, 10.0);
    for (int t = 0; t < 2000; ++t) {
        const auto s2 = random_sigma2(gen, kd(gen), 0.1, 5.0);
        const double lambda = t % 10 == 0 ? 0.0 : ld(gen);
        const auto w = waterfill(s2, lambda);
        double total = 0.0;
        for (std::size_t k = 0; k < s2.size(); ++k) {
            total += w.lambda[k];
            if (w.active[k]) {
                CHECK(std::abs(s2[k] + w.lambda[k] - w.c) <= 1e-9);
            } else {
                CHECK(w.lambda[k] == 0.0);
                CHECK(s2[k] >= w.c - 1e-9);
            }
        }
        CHECK(std::abs(total - lambda) <= 1e-9);
        CHECK(std::abs(w.c - oracle_level(s2, lambda)) <= 1e-9 * std::max(1.0, w.c));
    }
}

TEST_CASE("closed-form bounds") {
    const std::vector<double> flat{1, 1}, tilt{1, 4};
    CHECK(cr_lower(2.0, 2.0, flat) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cr_lower(0.0, 2.0, flat) == 0.0);
    CHECK(cr_lower(6.0, 1.0, tilt) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(cr_upper_gaussian(0.0, 0.0, std::vector<double>{1.0}, 1) == 0.0);
    CHECK(cr_upper_gaussian(2.0, 2.0, flat, 2) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK_THROWS_AS(cr_upper_gaussian(2.0, 2.0, flat, 1), Infeasible);

    CHECK(subband_capacity(3.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(subband_capacity(0.0, 1.0, 1.0) == 0.0);
    CHECK(subband_capacity(6.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(subband_capacity(1.0, 1.0, 0.0), ContractViolation);
}

TEST_CASE("upper minus lower is exactly log2 K") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (std::size_t K = 1; K <= 8; ++K) {
        for (int t = 0; t < 50; ++t) {
            const auto s2 = random_sigma2(gen, K, 0.2, 4.0);
            const double g = u(gen), l = u(gen);
            const double lo = cr_lower(g, l, s2);
            const double up = cr_upper_gaussian(g, l, s2, K);
            CHECK(up == lo + std::log2(double(K)));
        }
    }
}

TEST_CASE("lower bound dominates every single-band capacity") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    std::uniform_int_distribution<std::size_t> kd(1, 8);
    for (int t = 0; t < 2000; ++t) {
        const auto s2 = random_sigma2(gen, kd(gen), 0.05, 6.0);
        const double g = u(gen), l = u(gen);
        CHECK(cr_lower(g, l, s2) >= best_subband_capacity(g, l, s2) - 1e-15);
    }
}

TEST_CASE("monotonicity in gamma and lambda") {
    const std::vector<double> s2{0.5, 1.0, 3.0};
    double prev = -1.0;
    for (double g = 0.0; g <= 10.0; g += 0.25) {
        const double v = cr_lower(g, 1.0, s2);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 1e9;
    double prev_c = 0.0;
    for (double l = 0.0; l <= 10.0; l += 0.25) {
        const double v = cr_lower(2.0, l, s2);
        const double c = waterfill(s2, l).c;
        CHECK(v <= prev);
        CHECK(c >= prev_c);
        prev = v;
        prev_c = c;
    }
}

TEST_CASE("brute-force check of the jammer's min-max allocation") {
    const auto one = verify_rhslower(3.0, 1.5, std::vector<double>{2.0}, 11);
    CHECK(one.brute_min == doctest::Approx(subband_capacity(3.0, 1.5, 2.0)).epsilon(1e-14));
    CHECK(one.waterfill_value == doctest::Approx(subband_capacity(3.0, 1.5, 2.0)).epsilon(1e-14));

    const auto flat = verify_rhslower(2.0, 2.0, std::vector<double>{1, 1}, 101);
    CHECK(flat.slack() >= 0.0);
    CHECK(flat.slack() <= 0.02);
    CHECK(flat.grid_points == 101);

    const auto tilt = verify_rhslower(6.0, 1.0, std::vector<double>{1, 4}, 101);
    CHECK(tilt.argmin[0] == doctest::Approx(1.0));
    CHECK(tilt.argmin[1] == 0.0);
    CHECK(tilt.slack() == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(verify_rhslower(1.0, 1.0, std::vector<double>{1.0}, 1), ContractViolation);
}
