#include "fhjam/error.hpp"
#include "fhjam/minimax.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace fhjam;

namespace {

double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// H(B) - H(B|A) summed straight from the table.
double oracle_mi(const std::vector<std::vector<double>>& j) {
    std::vector<double> pb(j[0].size(), 0.0);
    double hba = 0.0;
    for (const auto& row : j) {
        const double pa = std::accumulate(row.begin(), row.end(), 0.0);
        for (std::size_t b = 0; b < row.size(); ++b) {
            pb[b] += row[b];
            if (row[b] > 0) hba -= row[b] * std::log2(row[b] / pa);
        }
    }
    double hb = 0.0;
    for (double v : pb)
        if (v > 0) hb -= v * std::log2(v);
    return hb - hba;
}

Table2 to_table(const std::vector<std::vector<double>>& j) {
    Table2 t{j.size(), j[0].size(), {}};
    for (const auto& row : j) t.p.insert(t.p.end(), row.begin(), row.end());
    return t;
}

std::vector<double> random_law(std::mt19937_64& gen, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = e(gen);
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v) x /= s;
    return v;
}

Joint3 random_joint(std::mt19937_64& gen, std::size_t X, std::size_t K, std::size_t Y, bool with_zero) {
    Joint3 j;
    for (std::size_t x = 0; x < X; ++x) j.x_values.push_back(double(x) + 1.0);
    if (with_zero) j.x_values[0] = 0.0;
    j.bands = K;
    j.outputs = Y;
    j.p = random_law(gen, X * K * Y);
    if (with_zero) {
        // x = 0 only on band 0.
        for (std::size_t k = 1; k < K; ++k)
            for (std::size_t y = 0; y < Y; ++y) j.p[(0 * K + k) * Y + y] = 0.0;
        const double s = std::accumulate(j.p.begin(), j.p.end(), 0.0);
        for (auto& v : j.p) v /= s;
    }
    return j;
}

double rows_mi(const Joint3& j) {
    std::vector<std::vector<double>> rows;
    std::vector<double> zero(j.outputs, 0.0);
    for (std::size_t x = 0; x < j.x_values.size(); ++x)
        for (std::size_t k = 0; k < j.bands; ++k) {
            std::vector<double> r(j.outputs);
            for (std::size_t y = 0; y < j.outputs; ++y) r[y] = j(x, k, y);
            if (j.x_values[x] == 0.0) {
                for (std::size_t y = 0; y < j.outputs; ++y) zero[y] += r[y];
            } else if (std::accumulate(r.begin(), r.end(), 0.0) > 0.0) {
                rows.push_back(r);
            }
        }
    if (std::accumulate(zero.begin(), zero.end(), 0.0) > 0.0) rows.push_back(zero);
    return oracle_mi(rows);
}

} // namespace

TEST_CASE("mutual information examples") {
    CHECK(mutual_information(to_table({{0.06, 0.14}, {0.24, 0.56}})) == doctest::Approx(0.0).epsilon(1e-14));
    Table2 diag{4, 4, std::vector<double>(16, 0.0)};
    for (std::size_t i = 0; i < 4; ++i) diag.p[i * 5] = 0.25;
    CHECK(mutual_information(diag) == doctest::Approx(2.0).epsilon(1e-14));
    const std::vector<std::vector<double>> j{{0.4, 0.1}, {0.1, 0.4}};
    CHECK(mutual_information(to_table(j)) == doctest::Approx(oracle_mi(j)).epsilon(1e-13));
    CHECK(mutual_information(to_table(j)) == doctest::Approx(0.2781).epsilon(1e-4));

    CHECK_THROWS_AS(mutual_information(to_table({{0.6, -0.1}, {0.25, 0.25}})), ContractViolation);
    CHECK_THROWS_AS(mutual_information(to_table({{0.5, 0.1}, {0.1, 0.1}})), ContractViolation);
}

TEST_CASE("mutual information matches the entropy oracle on random tables") {
    std::mt19937_64 gen(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t A = 1 + gen() % 6, B = 1 + gen() % 6;
        const auto p = random_law(gen, A * B);
        std::vector<std::vector<double>> rows(A, std::vector<double>(B));
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t b = 0; b < B; ++b) rows[a][b] = p[a * B + b];
        CHECK(std::abs(mutual_information(Table2{A, B, p}) - oracle_mi(rows)) <= 1e-12);
    }
}

TEST_CASE("chain-rule decomposition") {
    std::mt19937_64 gen(12);
    SUBCASE("single band") {
        auto j = random_joint(gen, 3, 1, 4, false);
        const auto d = mi_decomposition_check(j);
        CHECK(d.lhs == doctest::Approx(d.rhs).epsilon(1e-12));
        CHECK(d.lhs == doctest::Approx(rows_mi(j)).epsilon(1e-12));
    }
    SUBCASE("constant nonzero x carries only hopping information") {
        auto j = random_joint(gen, 1, 3, 5, false);
        const auto d = mi_decomposition_check(j);
        Table2 band{3, 5, j.p};
        CHECK(d.lhs == doctest::Approx(mutual_information(band)).epsilon(1e-12));
        CHECK(d.rhs == doctest::Approx(d.lhs).epsilon(1e-12));
    }
    SUBCASE("random joints, with and without a zero symbol") {
        for (int t = 0; t < 500; ++t) {
            const std::size_t X = 1 + gen() % 4, K = 1 + gen() % 3, Y = 1 + gen() % 8;
            const auto j = random_joint(gen, X, K, Y, t % 2 == 1);
            const auto d = mi_decomposition_check(j);
            CHECK(std::abs(d.lhs - d.rhs) <= 1e-9);
            CHECK(std::abs(d.lhs - rows_mi(j)) <= 1e-9);
        }
    }
    SUBCASE("zero on two bands is rejected") {
        auto j = random_joint(gen, 2, 2, 3, false);
        j.x_values[0] = 0.0;
        CHECK_THROWS_AS(mi_decomposition_check(j), ContractViolation);
    }
}

TEST_CASE("Blahut-Arimoto on closed-form channels") {
    const auto id = blahut_arimoto(to_table({{1, 0}, {0, 1}}), {}, 0.0);
    CHECK(id.capacity == doctest::Approx(1.0).epsilon(1e-6));

    const double e = 0.11;
    const auto bsc = blahut_arimoto(to_table({{1 - e, e}, {e, 1 - e}}), {}, 0.0);
    CHECK(std::abs(bsc.capacity - (1 - h2(e))) <= 1e-6);
    CHECK(bsc.upper >= bsc.capacity);
    CHECK(bsc.input[0] == doctest::Approx(0.5).epsilon(1e-3));

    // Z channel: capacity log2(1 + (1-e) e^(e/(1-e))) for the 0->1 flip case.
    const double z = 0.3;
    const auto zc = blahut_arimoto(to_table({{1, 0}, {z, 1 - z}}), {}, 0.0);
    const double zexact = std::log2(1 + (1 - z) * std::pow(z, z / (1 - z)));
    CHECK(std::abs(zc.capacity - zexact) <= 1e-6);

    CHECK_THROWS_AS(blahut_arimoto(to_table({{0.5, 0.4}, {0.5, 0.5}}), {}, 0.0), ContractViolation);
    BlahutArimotoOptions zero_tol;
    zero_tol.tol = 0.0;
    CHECK_THROWS_AS(blahut_arimoto(to_table({{1, 0}, {0, 1}}), {}, 0.0, zero_tol), ContractViolation);
}

TEST_CASE("Blahut-Arimoto with a cost budget") {
    // Ternary noiseless channel where one symbol costs 1: at budget b the
    // optimum is max H(p) with p_2 <= b.
    const Table2 w = to_table({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const std::vector<double> cost{0, 0, 1};
    const auto free = blahut_arimoto(w, cost, 1.0);
    CHECK(free.capacity == doctest::Approx(std::log2(3.0)).epsilon(1e-6));
    const auto tight = blahut_arimoto(w, cost, 0.1);
    const double exact = h2(0.1) + 0.9;
    CHECK(std::abs(tight.capacity - exact) <= 1e-6);
    CHECK(tight.cost <= 0.1 + 1e-9);
    const auto none = blahut_arimoto(w, cost, 0.0);
    CHECK(none.capacity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(none.input[2] == 0.0);
    CHECK_THROWS_AS(blahut_arimoto(w, std::vector<double>{1, 1, 1}, 0.5), ContractViolation);
}

TEST_CASE("quantized AWGN calibration and refinement") {
    const FhChannel ch(std::vector<double>{1.0});
    const AmplitudeGrid still{0.0, 0.0, 1.0};
    auto capacity = [&](AmplitudeGrid in, OutputBins out) {
        const DiscretizedGame g(ch, 1, {in, still, out});
        REQUIRE(g.jams().size() == 1);
        return blahut_arimoto(g.mix(std::vector<double>{1.0}), g.input_cost(), 3.0).capacity;
    };
    const double base = capacity({-4, 4, 0.25}, {-12, 12, 0.1});
    CHECK(std::abs(base - 1.0) <= 0.05);
    CHECK(base <= 1.0);
    CHECK(capacity({-4, 4, 0.125}, {-12, 12, 0.1}) >= base - 1e-6);
    CHECK(capacity({-4, 4, 0.25}, {-12, 12, 0.05}) >= base - 1e-6);
    CHECK(capacity({-4, 4, 0.5}, {-12, 12, 0.1}) <= base + 1e-6);
}

TEST_CASE("discretized game invariants") {
    const FhChannel ch(std::vector<double>{1.0, 2.0, 0.5});
    const GameGrids grids{{-1, 1, 0.5}, {-1, 1, 1}, {-3, 3, 1}};
    const DiscretizedGame g(ch, 2, grids);
    CHECK(g.inputs().size() == 1 + 3 * 4);
    for (const auto& a : g.inputs())
        if (a.x == 0.0) CHECK(a.band == 0);
    // 3 bands, amplitudes {-1, 0, 1}, at most two nonzero: 27 - 8.
    CHECK(g.jams().size() == 19);
    for (std::size_t j = 0; j < g.jams().size(); ++j) {
        CHECK(g.jams()[j].support() <= 2);
        CHECK(g.jam_cost()[j] == g.jams()[j].power());
    }
    for (std::size_t a = 0; a < g.inputs().size(); ++a) {
        CHECK(g.input_cost()[a] == g.inputs()[a].x * g.inputs()[a].x);
        for (std::size_t j = 0; j < g.jams().size(); ++j) {
            const auto row = g.transition(a, j);
            CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-9);
        }
    }
    const DiscretizedGame g4(ch, 2, grids, 4);
    for (std::size_t a = 0; a < g.inputs().size(); ++a)
        for (std::size_t j = 0; j < g.jams().size(); ++j) {
            const auto r1 = g.transition(a, j), r4 = g4.transition(a, j);
            CHECK(std::equal(r1.begin(), r1.end(), r4.begin()));
        }

    CHECK_THROWS_AS(DiscretizedGame(ch, 2, {{0.5, 1, 0.5}, {-1, 1, 1}, {-3, 3, 1}}), ContractViolation);
    CHECK_THROWS_AS(DiscretizedGame(ch, 4, grids), ContractViolation);
    CHECK_THROWS_AS(DiscretizedGame(ch, 2, {{1, -1, 0.5}, {-1, 1, 1}, {-3, 3, 1}}), ContractViolation);
    CHECK_THROWS_AS(DiscretizedGame(ch, 2, {{-1, 1, 0.5}, {-1, 1, 1}, {3, 3, 1}}), ContractViolation);
}

TEST_CASE("minimax estimate on small instances") {
    const FhChannel one(std::vector<double>{1.0});
    const GameGrids grids{{-4, 4, 0.25}, {-1, 1, 0.5}, {-12, 12, 0.1}};
    MinimaxOptions opts;
    opts.iterations = 20;
    opts.gap_target = 0.02;

    const auto quiet = minimax_estimate(one, 3.0, JamBudget{0.0, 1}, grids, opts);
    CHECK(std::abs(quiet.value - 1.0) <= 0.07);
    CHECK(quiet.gap <= 0.02);
    CHECK(quiet.gap >= 0.0);
    CHECK(quiet.jam_power() == 0.0);
    CHECK(quiet.input_power() <= 3.0 + 1e-9);

    const auto mute = minimax_estimate(one, 0.0, JamBudget{1.0, 1}, grids, opts);
    CHECK(mute.value == 0.0);

    const FhChannel two(std::vector<double>{1.0, 1.0});
    MinimaxOptions few;
    few.iterations = 5;
    const auto game = minimax_estimate(two, 2.0, JamBudget{2.0, 2}, {{-3, 3, 0.5}, {-2, 2, 1}, {-6, 6, 1}}, few);
    CHECK(game.gap >= 0.0);
    CHECK(game.lower <= game.value);
    CHECK(game.value <= game.upper);
    CHECK(game.trace.size() == 6);
    CHECK(game.input_power() <= 2.0 + 1e-6);
    CHECK(game.jam_power() <= 2.0 + 1e-6);
    CHECK(std::accumulate(game.input_dist.begin(), game.input_dist.end(), 0.0) == doctest::Approx(1.0));
    CHECK(std::accumulate(game.jam_dist.begin(), game.jam_dist.end(), 0.0) == doctest::Approx(1.0));

    few.threads = 3;
    const auto again = minimax_estimate(two, 2.0, JamBudget{2.0, 2}, {{-3, 3, 0.5}, {-2, 2, 1}, {-6, 6, 1}}, few);
    CHECK(again.value == game.value);
    CHECK(again.jam_dist == game.jam_dist);

    CHECK_THROWS_AS(minimax_estimate(one, 1.0, JamBudget{1.0, 1}, {{1, 0, 1}, {0, 0, 1}, {-1, 1, 1}}),
                    ContractViolation);
    few.iterations = 0;
    CHECK_THROWS_AS(minimax_estimate(one, 1.0, JamBudget{1.0, 1}, grids, few), ContractViolation);
}

TEST_CASE("capped simplex projection") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 4.0);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + gen() % 7;
        std::vector<double> v(n), cost(n);
        for (auto& x : v) x = nd(gen);
        for (auto& c : cost) c = ud(gen);
        cost[0] = 0.0;
        const double budget = ud(gen) * 0.5;
        const auto q = project_capped_simplex(v, cost, budget);
        double sum = 0.0, spend = 0.0, dist = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(q[i] >= 0.0);
            sum += q[i];
            spend += q[i] * cost[i];
            dist += (q[i] - v[i]) * (q[i] - v[i]);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(spend <= budget + 1e-9);
        // No random feasible point is closer.
        for (int s = 0; s < 50; ++s) {
            auto r = random_law(gen, n);
            double rs = 0.0;
            for (std::size_t i = 0; i < n; ++i) rs += r[i] * cost[i];
            if (rs > budget) {
                const double f = budget / rs;
                for (std::size_t i = 0; i < n; ++i) r[i] *= f;
                r[0] += 1.0 - f;
            }
            double rd = 0.0;
            for (std::size_t i = 0; i < n; ++i) rd += (r[i] - v[i]) * (r[i] - v[i]);
            CHECK(dist <= rd + 1e-12);
        }
    }
    const std::vector<double> inside{0.2, 0.3, 0.5}, free(3, 0.0);
    const auto same = project_capped_simplex(inside, free, 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(inside[i]).epsilon(1e-12));
    CHECK_THROWS_AS(project_capped_simplex(inside, std::vector<double>{1, 1, 1}, 0.5), ContractViolation);
}

TEST_CASE("symmetry mean residual") {
    const std::size_t K = 3;
    const auto canon = canonical_mean_map(K);
    std::mt19937_64 gen(14);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        const InputAtom a{nd(gen), gen() % K}, b{nd(gen), gen() % K};
        CHECK(symmetry_mean_residual(a, b, canon, K) == 0.0);
    }
    const MeanMap zero = [K](double, std::size_t) { return std::vector<double>(K, 0.0); };
    CHECK(symmetry_mean_residual({1.0, 0}, {0.0, 0}, zero, K) == doctest::Approx(1.0));

    for (int t = 0; t < 100; ++t) {
        const double eps = std::ldexp(1.0, -int(gen() % 20));
        const std::size_t coord = gen() % K;
        const InputAtom a{nd(gen), gen() % K}, b{nd(gen), gen() % K};
        const MeanMap bumped = [&](double x, std::size_t k) {
            auto m = canon(x, k);
            if (x == b.x && k == b.band) m[coord] += eps;
            return m;
        };
        CHECK(symmetry_mean_residual(a, b, bumped, K) == doctest::Approx(eps).epsilon(1e-9));
    }
    CHECK_THROWS_AS(symmetry_mean_residual({1.0, 3}, {0.0, 0}, canon, K), ContractViolation);
}

TEST_CASE("Jensen power bound") {
    const auto canon1 = canonical_mean_map(1);
    const InputLaw pm1{{{-1.0, 0}, {1.0, 0}}, {0.5, 0.5}};
    const auto b1 = jensen_power_bound(pm1, 1.0, canon1, 1);
    CHECK(b1.bound == doctest::Approx(1.0).epsilon(1e-15));
    const InputLaw pm2{{{-2.0, 0}, {2.0, 0}}, {0.5, 0.5}};
    const auto b4 = jensen_power_bound(pm2, 4.0, canon1, 1);
    CHECK(b4.bound == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(b4.mean_power == doctest::Approx(4.0));

    const InputLaw pm{{{-std::sqrt(2.0), 0}, {std::sqrt(2.0), 0}}, {0.5, 0.5}};
    CHECK(jensen_power_bound(pm, 2.0, canon1, 1).tau_lower(1.0) >= 2.0 - 1e-12);

    std::mt19937_64 gen(15);
    std::uniform_real_distribution<double> ud(0.1, 3.0);
    for (int t = 0; t < 100; ++t) {
        const std::size_t K = 1 + gen() % 4;
        const double gamma = ud(gen);
        InputLaw law;
        const std::size_t levels = 1 + gen() % 4;
        const auto w = random_law(gen, levels * K);
        double power = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double x = ud(gen);
            law.atoms.push_back({x, i % K});
            law.atoms.push_back({-x, i % K});
            law.prob.push_back(w[i] / 2);
            law.prob.push_back(w[i] / 2);
            power += w[i] * x * x;
        }
        const double scale = std::sqrt(gamma / power);
        for (auto& a : law.atoms) a.x *= scale;
        const auto jb = jensen_power_bound(law, gamma, canonical_mean_map(K), K);
        CHECK(jb.bound >= gamma - 1e-9);
        CHECK(jb.mean_power >= gamma - 1e-9);
        CHECK(jb.projected >= jb.bound - 1e-9);
    }

    CHECK_THROWS_AS(jensen_power_bound(pm1, 1.5, canon1, 1), ContractViolation);
    const InputLaw lopsided{{{-1.0, 0}, {1.0, 0}, {2.0, 0}}, {0.5, 0.25, 0.25}};
    CHECK_THROWS_AS(jensen_power_bound(lopsided, 1.75, canon1, 1), ContractViolation);
    const MeanMap none = [](double, std::size_t) { return std::vector<double>(1, 0.0); };
    CHECK_THROWS_AS(jensen_power_bound(pm1, 1.0, none, 1), ContractViolation);
}
