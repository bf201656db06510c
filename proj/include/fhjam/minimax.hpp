#pragma once

// Numerical engine for the mutual-information game
//
//     sup_{(X,kappa): E X^2 <= Gamma}  min_{(iota,S): E|S|^2 <= Lambda}  I(X e_kappa ; Y)
//
// on finite input/jammer alphabets with quantised outputs, plus the finite
// identities and bounds used to reason about it.

#include "fhjam/channel.hpp"
#include "fhjam/jammer.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fhjam {

/// Row-major table of nonnegative reals.
struct Table2 {
    std::size_t rows = 0, cols = 0;
    std::vector<double> p;

    double operator()(std::size_t r, std::size_t c) const { return p[r * cols + c]; }
};

/// I(A;B) in bits for a joint table p(a,b). Entries must be nonnegative and
/// sum to 1 within 1e-12.
double mutual_information(const Table2& joint);

/// Joint law of (X, kappa, Y): p[(x * K + k) * Y + y], x indexing
/// x_values.
struct Joint3 {
    std::vector<double> x_values;
    std::size_t bands = 0;
    std::size_t outputs = 0;
    std::vector<double> p;

    double operator()(std::size_t x, std::size_t k, std::size_t y) const { return p[(x * bands + k) * outputs + y]; }
};

struct Decomposition {
    double lhs = 0.0; ///< I(X e_kappa ; Y)
    double rhs = 0.0; ///< I(X ; Y | kappa) + I(kappa ; Y)
};

/// Evaluates both sides of the chain-rule split of I(X e_kappa; Y). The left
/// side merges (x, k) pairs that give the same channel input vector, so it
/// requires x = 0 to carry mass for at most one band.
Decomposition mi_decomposition_check(const Joint3& joint);

struct BlahutArimotoOptions {
    double tol = 1e-6;                   ///< bits, on the upper/lower bracket
    std::size_t max_iterations = 200000; ///< per multiplier value
    std::span<const double> warm_start;  ///< optional initial input law
};

struct BlahutArimotoResult {
    double capacity = 0.0; ///< I(p*, W) in bits; p* meets the cost budget
    double upper = 0.0;    ///< Lagrangian upper bound in bits
    std::vector<double> input;
    double multiplier = 0.0; ///< cost multiplier (nats per unit cost)
    double cost = 0.0;       ///< E_{p*}[cost]
    std::size_t iterations = 0;
};

/// Cost-constrained capacity of a row-stochastic channel. With an empty
/// cost vector (or an infinite budget) this is the unconstrained capacity.
BlahutArimotoResult blahut_arimoto(const Table2& transition, std::span<const double> cost, double budget,
                                   const BlahutArimotoOptions& options = {});

/// Arithmetic grid min, min + step, ..., max (inclusive to rounding).
struct AmplitudeGrid {
    double min = 0.0, max = 0.0, step = 1.0;

    std::vector<double> values() const;

    friend bool operator==(const AmplitudeGrid&, const AmplitudeGrid&) = default;
};

/// Per-band quantiser: edges lo, lo + width, ..., hi give
/// round((hi - lo) / width) bins; the outermost two extend to +-infinity.
struct OutputBins {
    double lo = -1.0, hi = 1.0, width = 1.0;

    std::size_t count() const;
    /// The count - 1 finite edges between bins.
    std::vector<double> interior_edges() const;

    friend bool operator==(const OutputBins&, const OutputBins&) = default;
};

struct GameGrids {
    AmplitudeGrid input;
    AmplitudeGrid jam;
    OutputBins output;
};

struct InputAtom {
    double x = 0.0;
    std::size_t band = 0;
};

struct JamAtom {
    std::vector<double> s; ///< length K; nonzero entries are the jammed bands

    std::size_t support() const noexcept;
    double power() const noexcept;
};

/// Finite game: sender atoms (x, k), jammer atoms (I, s) with |I| <= J and
/// per-band amplitudes from the jam grid, product-quantised outputs, and
/// the transition law P(output cell | input atom, jam atom).
class DiscretizedGame {
public:
    DiscretizedGame(const FhChannel& ch, std::size_t J, const GameGrids& grids, unsigned threads = 1);

    std::size_t bands() const noexcept { return K_; }
    std::span<const InputAtom> inputs() const noexcept { return inputs_; }
    std::span<const JamAtom> jams() const noexcept { return jams_; }
    std::span<const double> input_cost() const noexcept { return input_cost_; }
    std::span<const double> jam_cost() const noexcept { return jam_cost_; }
    std::size_t outputs() const noexcept { return outputs_; }

    /// P(. | input a, jam j) over the output cells.
    std::span<const double> transition(std::size_t a, std::size_t j) const {
        return {table_.data() + (a * jams_.size() + j) * outputs_, outputs_};
    }

    /// Channel seen by the sender when the jammer mixes with q:
    /// W_q(y|a) = sum_j q_j P(y|a,j). Rows with skip[a] set are left zero.
    Table2 mix(std::span<const double> q, std::span<const bool> skip = {}) const;

private:
    std::size_t K_;
    std::vector<InputAtom> inputs_;
    std::vector<JamAtom> jams_;
    std::vector<double> input_cost_, jam_cost_;
    std::size_t outputs_;
    std::vector<double> table_;
};

/// I(p, W) in bits for an input law and a row-stochastic channel.
double channel_information(std::span<const double> input, const Table2& channel);

struct MinimaxOptions {
    std::size_t iterations = 200;
    /// Stop early once the gap falls to this value (0 disables).
    double gap_target = 0.0;
    double ba_tol = 1e-5;
    std::size_t jam_steps = 40;
    unsigned threads = 1;
};

struct GapSample {
    std::size_t iteration = 0;
    double upper = 0.0; ///< sender best response value against the jam average
    double lower = 0.0; ///< jammer best response value against the input average
    double gap = 0.0;
};

struct SaddleEstimate {
    double value = 0.0; ///< I at the averaged pair, bits
    double upper = 0.0;
    double lower = 0.0;
    double gap = 0.0; ///< upper - lower >= 0
    std::size_t iterations = 0;
    std::vector<InputAtom> input_atoms;
    std::vector<double> input_dist;
    std::vector<JamAtom> jam_atoms;
    std::vector<double> jam_dist;
    std::vector<GapSample> trace;

    double input_power() const;
    double jam_power() const;
};

/// Fictitious play: each round the sender best-responds (Blahut-Arimoto)
/// to the running jam average and the jammer best-responds (projected
/// gradient on the convex objective) to the running input average; both
/// averages are uniform over past best responses.
SaddleEstimate minimax_estimate(const DiscretizedGame& game, double gamma, double lambda,
                                const MinimaxOptions& options = {});

SaddleEstimate minimax_estimate(const FhChannel& ch, double gamma, const JamBudget& budget, const GameGrids& grids,
                                const MinimaxOptions& options = {});

/// Euclidean projection onto {q >= 0, sum q = 1, <cost, q> <= budget}.
std::vector<double> project_capped_simplex(std::span<const double> v, std::span<const double> cost, double budget);

/// Mean of the jammer's symmetrising input for sender input (x, k).
using MeanMap = std::function<std::vector<double>(double x, std::size_t k)>;

/// ||x e_k + mean(x', k') - x' e_k' - mean(x, k)||.
double symmetry_mean_residual(const InputAtom& a, const InputAtom& b, const MeanMap& mean, std::size_t K);

/// mean(x, k) = x e_k: replaying the sender's own input.
MeanMap canonical_mean_map(std::size_t K);

struct InputLaw {
    std::vector<InputAtom> atoms;
    std::vector<double> prob;
};

struct JensenBound {
    /// sum P(x,k) ||mean(x,k)||^2, Jensen's lower bound on E||Z||^2.
    double mean_power = 0.0;
    /// min over support pairs (x',k') of
    /// sum_k P(k) sum_x P(x|k) |x - x' [k'=k] + mean(x',k')_k|^2.
    double projected = 0.0;
    /// sum_k P(k) min_a sum_x P(x|k) |x - a|^2; equals E X^2 for laws
    /// symmetric on every band.
    double bound = 0.0;

    double tau_lower(double lambda) const { return bound / lambda; }
};

/// Lower bound on the power any symmetrising jammer must spend against a
/// full-power, band-wise symmetric input law. Requires E X^2 = gamma within
/// 1e-9, P(x|k) = P(-x|k), and zero mean residual on every support pair.
JensenBound jensen_power_bound(const InputLaw& law, double gamma, const MeanMap& mean, std::size_t K);

} // namespace fhjam
