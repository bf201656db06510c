#pragma once

// Closed-form capacity quantities for the jammed FH channel. All rates are
// in bits per channel use.

#include <cstddef>
#include <span>
#include <vector>

namespace fhjam {

/// Jammer power allocation that raises every band it touches to a common
/// level c: lambda_k = c - sigma2_k on the active bands {k : sigma2_k < c},
/// zero elsewhere, with sum lambda_k = Lambda.
struct WaterfillResult {
    double c = 0.0;
    std::vector<double> lambda;
    std::vector<bool> active;

    std::size_t active_count() const noexcept;
};

/// Solves for the water level on the sorted active prefix. With Lambda = 0
/// the level is min_k sigma2_k and every allocation is zero.
WaterfillResult waterfill(std::span<const double> sigma2, double lambda);

/// (1/2) log2(1 + Gamma / c), c from waterfill. Achievable on a single band.
double cr_lower(double gamma, double lambda, std::span<const double> sigma2);

/// cr_lower + log2(K). Valid for Gaussian noise when the jammer can cover
/// the whole active set; throws Infeasible when J < |active|.
double cr_upper_gaussian(double gamma, double lambda, std::span<const double> sigma2, std::size_t J);

/// (1/2) log2(1 + Gamma / (sigma2_k + Lambda)): both parties on one band.
double subband_capacity(double gamma, double lambda, double sigma2_k);

/// max_k subband_capacity(Gamma, Lambda, sigma2_k).
double best_subband_capacity(double gamma, double lambda, std::span<const double> sigma2);

struct RhsLowerCheck {
    /// min over the simplex grid of max_k (1/2) log2(1 + Gamma/(sigma2_k + lambda_k)).
    double brute_min = 0.0;
    /// (1/2) log2(1 + Gamma/c) at the waterfilling allocation.
    double waterfill_value = 0.0;
    /// Grid allocation attaining brute_min (first one found in
    /// lexicographic order).
    std::vector<double> argmin;
    std::size_t grid_points = 0;

    double slack() const noexcept { return brute_min - waterfill_value; }
};

/// Brute-force check that waterfilling minimises the best single-band rate.
/// Each allocation is Lambda * i_k / (grid_steps - 1) with sum i_k =
/// grid_steps - 1; the enumeration is exponential in K, keep K small.
RhsLowerCheck verify_rhslower(double gamma, double lambda, std::span<const double> sigma2, std::size_t grid_steps);

} // namespace fhjam
