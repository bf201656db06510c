#include "fhjam/jammer.hpp"

#include "fhjam/bounds.hpp"
#include "fhjam/kernels.hpp"
#include "fhjam/parallel.hpp"

#include <charconv>
#include <cmath>
#include <random>

namespace fhjam {

void JamBudget::validate(std::size_t K) const {
    require(std::isfinite(lambda) && lambda >= 0.0, "JamBudget: lambda must be nonnegative");
    require(J >= 1 && J <= K, "JamBudget: J must lie in 1..K");
}

bool check_jam_constraint(const BlockMatrix& jam, const JamBudget& budget) {
    if (!jam.all_finite()) return false;
    for (std::size_t i = 0; i < jam.cols(); ++i)
        if (jam.column_support(i) > budget.J) return false;
    return jam.power() <= double(jam.cols()) * budget.lambda * (1.0 + 1e-12);
}

BlockMatrix jam_none(std::size_t K, std::size_t n) { return BlockMatrix(K, n); }

BlockMatrix jam_tone(std::size_t K, std::size_t n, std::size_t band, const JamBudget& budget) {
    require(band < K, "jam_tone: band out of range");
    require(budget.lambda >= 0.0, "jam_tone: lambda must be nonnegative");
    BlockMatrix out(K, n);
    const double a = std::sqrt(budget.lambda);
    for (double& v : out.row(band)) v = a;
    return out;
}

namespace {

void clip_to_budget(BlockMatrix& m, double budget) {
    const double p = m.power();
    if (p <= budget) return;
    m *= std::sqrt(budget / p);
    while (m.power() > budget)
        for (double& v : m.values()) v = std::nextafter(v, 0.0);
}

} // namespace

BlockMatrix jam_waterfilling_gaussian(const FhChannel& ch, const JamBudget& budget, std::size_t n, Stream& rng) {
    const std::size_t K = ch.bands();
    budget.validate(K);
    const WaterfillResult w = waterfill(ch.sigma2(), budget.lambda);
    if (w.active_count() > budget.J)
        throw Infeasible("jam_waterfilling_gaussian: " + std::to_string(w.active_count()) +
                         " active bands but J = " + std::to_string(budget.J));
    BlockMatrix out(K, n);
    if (budget.lambda == 0.0) return out;
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < K; ++k) {
        if (!w.active[k]) continue;
        const double sd = std::sqrt(w.lambda[k]);
        for (double& v : out.row(k)) v = sd * normal(rng);
    }
    clip_to_budget(out, double(n) * budget.lambda);
    return out;
}

BlockMatrix jam_mimic(const Codebook& cb, std::size_t m_prime, const JamBudget& budget) {
    require(budget.J >= 1, "jam_mimic: J must be at least 1");
    const BlockMatrix c = encode(cb, m_prime);
    if (c.power() > double(cb.blocklength()) * budget.lambda)
        throw Infeasible("jam_mimic: codeword power exceeds n * Lambda (the replay attack needs Gamma <= Lambda)");
    return c;
}

AttackResult attack_error_floor(const Codebook& cb, const FhChannel& ch, const JamBudget& budget, std::size_t trials,
                                StreamKey key, unsigned threads) {
    require(cb.messages() >= 2, "attack_error_floor: need at least two messages");
    require(trials >= 1, "attack_error_floor: need at least one trial");
    require(cb.bands() == ch.bands(), "attack_error_floor: codebook and channel disagree on K");
    const double cap = double(cb.blocklength()) * budget.lambda;
    for (std::size_t m = 0; m < cb.messages(); ++m)
        if (cb.codeword_power(m) > cap)
            throw Infeasible("attack_error_floor: codeword " + std::to_string(m) + " exceeds the jammer budget");

    struct Outcome {
        std::uint32_t attack;
        bool cross;
        bool wrong;
    };
    std::vector<Outcome> outcomes(trials);
    parallel_for(trials, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const StreamKey tk = key.child(t);
            Stream rng(tk.child(0));
            const std::size_t m = rng.below(cb.messages());
            const std::size_t mp = rng.below(cb.messages());
            const BlockMatrix y = transmit_block(ch, cb.codeword(m), jam_mimic(cb, mp, budget), tk.child(1));
            outcomes[t] = {static_cast<std::uint32_t>(mp), m != mp, decode_min_distance(cb, y) != m};
        }
    });

    AttackResult r;
    r.per_attack.resize(cb.messages());
    for (const auto& o : outcomes) {
        ++r.overall.trials;
        ++r.per_attack[o.attack].trials;
        if (o.cross) ++r.cross.trials;
        if (o.wrong) {
            ++r.overall.errors;
            ++r.per_attack[o.attack].errors;
            if (o.cross) ++r.cross.errors;
        }
    }
    for (std::size_t a = 0; a < r.per_attack.size(); ++a) {
        if (r.per_attack[a].trials > 0 && r.per_attack[a].rate() > r.worst_error) {
            r.worst_error = r.per_attack[a].rate();
            r.worst_attack = a;
        }
    }
    return r;
}

void validate_strategy_name(std::string_view strategy) {
    if (strategy == "none" || strategy == "waterfill" || strategy == "mimic") return;
    if (strategy.starts_with("tone:")) {
        const auto digits = strategy.substr(5);
        std::size_t k = 0;
        const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && p == digits.data() + digits.size() && k >= 1) return;
    }
    throw ContractViolation("unknown jammer strategy '" + std::string(strategy) +
                            "' (expected none | tone:<k> | waterfill | mimic)");
}

JamProvider make_jam_provider(std::string_view strategy, const JamBudget& budget) {
    validate_strategy_name(strategy);
    if (strategy == "none") {
        return [](const Codebook& cb, const FhChannel&, std::size_t n, Stream&) { return jam_none(cb.bands(), n); };
    }
    if (strategy == "waterfill") {
        return [budget](const Codebook&, const FhChannel& ch, std::size_t n, Stream& rng) {
            return jam_waterfilling_gaussian(ch, budget, n, rng);
        };
    }
    if (strategy == "mimic") {
        return [budget](const Codebook& cb, const FhChannel&, std::size_t, Stream& rng) {
            return jam_mimic(cb, rng.below(cb.messages()), budget);
        };
    }
    std::size_t k = 0;
    const auto digits = strategy.substr(5);
    std::from_chars(digits.data(), digits.data() + digits.size(), k);
    return [budget, band = k - 1](const Codebook& cb, const FhChannel&, std::size_t n, Stream&) {
        return jam_tone(cb.bands(), n, band, budget);
    };
}

} // namespace fhjam
