#pragma once

// Jamming strategies inside the constraint set: per-column support of at
// most J bands and total block power at most n * Lambda.

#include "fhjam/channel.hpp"
#include "fhjam/coding.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fhjam {

struct JamBudget {
    double lambda = 0.0;
    std::size_t J = 1;

    /// Throws ContractViolation unless lambda >= 0 and 1 <= J <= K.
    void validate(std::size_t K) const;
};

/// Every column has at most J nonzero rows and power <= n Lambda (1 + 1e-12).
bool check_jam_constraint(const BlockMatrix& jam, const JamBudget& budget);

BlockMatrix jam_none(std::size_t K, std::size_t n);

/// Constant sqrt(Lambda) on one band.
BlockMatrix jam_tone(std::size_t K, std::size_t n, std::size_t band, const JamBudget& budget);

/// Independent Gaussian rows with the waterfilling variances on the active
/// bands. Block power above n Lambda is scaled back onto the budget.
/// Throws Infeasible when J is smaller than the active set.
BlockMatrix jam_waterfilling_gaussian(const FhChannel& ch, const JamBudget& budget, std::size_t n, Stream& rng);

/// Replays codeword m' as the jamming sequence. Throws Infeasible when that
/// codeword is stronger than the jammer's budget.
BlockMatrix jam_mimic(const Codebook& cb, std::size_t m_prime, const JamBudget& budget);

struct AttackResult {
    /// Average error with (m, m') uniform and independent.
    ErrorEstimate overall;
    /// Restricted to trials with m != m'.
    ErrorEstimate cross;
    /// Per-replayed-codeword error, indexed by m'.
    std::vector<ErrorEstimate> per_attack;
    std::size_t worst_attack = 0;
    double worst_error = 0.0;
};

/// Monte Carlo of the codeword-replay attack. Trial t draws (m, m') from
/// key.child(t).child(0) and the noise from key.child(t).child(1).
AttackResult attack_error_floor(const Codebook& cb, const FhChannel& ch, const JamBudget& budget, std::size_t trials,
                                StreamKey key, unsigned threads = 1);

/// Strategy names: "none", "tone:<k>" (k one-based), "waterfill", "mimic".
/// Mimic draws the replayed message uniformly per block.
JamProvider make_jam_provider(std::string_view strategy, const JamBudget& budget);

/// Throws ContractViolation on an unknown or malformed strategy name.
void validate_strategy_name(std::string_view strategy);

} // namespace fhjam
