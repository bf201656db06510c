#include "fhjam/bounds.hpp"

#include "fhjam/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fhjam {

std::size_t WaterfillResult::active_count() const noexcept {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

WaterfillResult waterfill(std::span<const double> sigma2, double lambda) {
    require(!sigma2.empty(), "waterfill: need at least one band");
    for (double s : sigma2) require(std::isfinite(s) && s > 0.0, "waterfill: noise variances must be positive");
    require(std::isfinite(lambda) && lambda >= 0.0, "waterfill: jammer power must be nonnegative");

    const std::size_t K = sigma2.size();
    WaterfillResult r;
    r.lambda.assign(K, 0.0);
    r.active.assign(K, false);

    if (lambda == 0.0) {
        r.c = *std::min_element(sigma2.begin(), sigma2.end());
        return r;
    }

    std::vector<double> sorted(sigma2.begin(), sigma2.end());
    std::sort(sorted.begin(), sorted.end());
    double prefix = 0.0;
    for (std::size_t j = 1; j <= K; ++j) {
        prefix += sorted[j - 1];
        const double level = (lambda + prefix) / double(j);
        if (j == K || level <= sorted[j]) {
            r.c = level;
            break;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (sigma2[k] < r.c) {
            r.active[k] = true;
            r.lambda[k] = r.c - sigma2[k];
        }
    }
    return r;
}

double cr_lower(double gamma, double lambda, std::span<const double> sigma2) {
    require(std::isfinite(gamma) && gamma >= 0.0, "cr_lower: sender power must be nonnegative");
    const WaterfillResult w = waterfill(sigma2, lambda);
    return 0.5 * std::log2(1.0 + gamma / w.c);
}

double cr_upper_gaussian(double gamma, double lambda, std::span<const double> sigma2, std::size_t J) {
    const WaterfillResult w = waterfill(sigma2, lambda);
    if (J < w.active_count())
        throw Infeasible("cr_upper_gaussian: J = " + std::to_string(J) + " cannot cover the " +
                         std::to_string(w.active_count()) + " waterfilled bands");
    return cr_lower(gamma, lambda, sigma2) + std::log2(double(sigma2.size()));
}

double subband_capacity(double gamma, double lambda, double sigma2_k) {
    require(sigma2_k > 0.0, "subband_capacity: noise variance must be positive");
    return 0.5 * std::log2(1.0 + gamma / (sigma2_k + lambda));
}

double best_subband_capacity(double gamma, double lambda, std::span<const double> sigma2) {
    require(!sigma2.empty(), "best_subband_capacity: need at least one band");
    double best = -std::numeric_limits<double>::infinity();
    for (double s : sigma2) best = std::max(best, subband_capacity(gamma, lambda, s));
    return best;
}

namespace {

// Visits every composition of `total` into parts.size() nonnegative parts.
template <class Visit>
void compositions(std::vector<std::size_t>& parts, std::size_t pos, std::size_t remaining, Visit& visit) {
    if (pos + 1 == parts.size()) {
        parts[pos] = remaining;
        visit(parts);
        return;
    }
    for (std::size_t i = 0; i <= remaining; ++i) {
        parts[pos] = i;
        compositions(parts, pos + 1, remaining - i, visit);
    }
}

} // namespace

RhsLowerCheck verify_rhslower(double gamma, double lambda, std::span<const double> sigma2, std::size_t grid_steps) {
    require(grid_steps >= 2, "verify_rhslower: need at least two grid steps");
    require(!sigma2.empty(), "verify_rhslower: need at least one band");
    const std::size_t K = sigma2.size();
    const std::size_t total = grid_steps - 1;

    RhsLowerCheck out;
    out.waterfill_value = cr_lower(gamma, lambda, sigma2);
    out.brute_min = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> parts(K, 0);
    auto visit = [&](const std::vector<std::size_t>& p) {
        ++out.grid_points;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double alloc = lambda * double(p[k]) / double(total);
            worst = std::max(worst, 0.5 * std::log2(1.0 + gamma / (sigma2[k] + alloc)));
        }
        if (worst < out.brute_min) {
            out.brute_min = worst;
            out.argmin.resize(K);
            for (std::size_t k = 0; k < K; ++k) out.argmin[k] = lambda * double(p[k]) / double(total);
        }
    };
    compositions(parts, 0, total, visit);
    return out;
}

} // namespace fhjam
