#include "fhjam/minimax.hpp"

#include "fhjam/error.hpp"
#include "fhjam/kernels.hpp"
#include "fhjam/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

namespace fhjam {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_distribution(std::span<const double> p, double tol, const char* what) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ContractViolation(std::string(what) + ": negative or non-finite entry");
        total += v;
    }
    if (std::abs(total - 1.0) > tol) throw ContractViolation(std::string(what) + ": probabilities do not sum to 1");
}

} // namespace

double mutual_information(const Table2& joint) {
    require(joint.rows >= 1 && joint.cols >= 1 && joint.p.size() == joint.rows * joint.cols,
            "mutual_information: table shape mismatch");
    check_distribution(joint.p, 1e-12, "mutual_information");
    std::vector<double> pa(joint.rows, 0.0), pb(joint.cols, 0.0);
    for (std::size_t a = 0; a < joint.rows; ++a)
        for (std::size_t b = 0; b < joint.cols; ++b) {
            pa[a] += joint(a, b);
            pb[b] += joint(a, b);
        }
    double info = 0.0;
    for (std::size_t a = 0; a < joint.rows; ++a)
        for (std::size_t b = 0; b < joint.cols; ++b) {
            const double v = joint(a, b);
            if (v > 0.0) info += v * std::log(v / (pa[a] * pb[b]));
        }
    return std::max(0.0, info / kLn2);
}

Decomposition mi_decomposition_check(const Joint3& joint) {
    const std::size_t X = joint.x_values.size(), K = joint.bands, Y = joint.outputs;
    require(X >= 1 && K >= 1 && Y >= 1 && joint.p.size() == X * K * Y, "mi_decomposition_check: table shape mismatch");
    check_distribution(joint.p, 1e-12, "mi_decomposition_check");
    for (std::size_t i = 0; i < X; ++i)
        for (std::size_t j = i + 1; j < X; ++j)
            require(joint.x_values[i] != joint.x_values[j], "mi_decomposition_check: duplicate x value");

    auto mass = [&](std::size_t x, std::size_t k) {
        double m = 0.0;
        for (std::size_t y = 0; y < Y; ++y) m += joint(x, k, y);
        return m;
    };

    // Left side: group (x, k) by the channel input vector x e_k. Only x = 0
    // collapses across bands.
    std::size_t zero_bands = 0;
    for (std::size_t x = 0; x < X; ++x)
        if (joint.x_values[x] == 0.0)
            for (std::size_t k = 0; k < K; ++k)
                if (mass(x, k) > 0.0) ++zero_bands;
    if (zero_bands > 1)
        throw ContractViolation("mi_decomposition_check: x = 0 carries mass on several bands, so x e_kappa "
                                "does not identify (x, kappa)");

    Table2 merged;
    merged.cols = Y;
    std::vector<double> zero_row(Y, 0.0);
    bool has_zero = false;
    for (std::size_t x = 0; x < X; ++x)
        for (std::size_t k = 0; k < K; ++k) {
            if (joint.x_values[x] == 0.0) {
                has_zero = true;
                for (std::size_t y = 0; y < Y; ++y) zero_row[y] += joint(x, k, y);
                continue;
            }
            for (std::size_t y = 0; y < Y; ++y) merged.p.push_back(joint(x, k, y));
            ++merged.rows;
        }
    if (has_zero) {
        merged.p.insert(merged.p.end(), zero_row.begin(), zero_row.end());
        ++merged.rows;
    }

    Decomposition d;
    d.lhs = mutual_information(merged);

    // Right side: I(X;Y|kappa) + I(kappa;Y).
    Table2 band_out{K, Y, std::vector<double>(K * Y, 0.0)};
    for (std::size_t x = 0; x < X; ++x)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t y = 0; y < Y; ++y) band_out.p[k * Y + y] += joint(x, k, y);
    double conditional = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double pk = 0.0;
        for (std::size_t y = 0; y < Y; ++y) pk += band_out(k, y);
        if (pk <= 0.0) continue;
        Table2 given{X, Y, std::vector<double>(X * Y)};
        double total = 0.0;
        for (std::size_t x = 0; x < X; ++x)
            for (std::size_t y = 0; y < Y; ++y) total += (given.p[x * Y + y] = joint(x, k, y));
        for (double& v : given.p) v /= total;
        conditional += pk * mutual_information(given);
    }
    d.rhs = conditional + mutual_information(band_out);
    return d;
}

// ---------------------------------------------------------------------------
// Blahut-Arimoto

namespace {

void check_channel(const Table2& w) {
    require(w.rows >= 1 && w.cols >= 1 && w.p.size() == w.rows * w.cols, "channel: table shape mismatch");
    for (std::size_t a = 0; a < w.rows; ++a) {
        double total = 0.0;
        for (std::size_t y = 0; y < w.cols; ++y) {
            const double v = w(a, y);
            if (!(v >= 0.0) || !std::isfinite(v)) throw ContractViolation("channel: negative or non-finite entry");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("channel: row is not stochastic");
    }
}

double expected(std::span<const double> p, std::span<const double> cost) {
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) acc += p[a] * cost[a];
    return acc;
}

// q_a proportional to p_a exp(mu (d_a - s cost_a)), written into q.
void tilt(std::span<const double> p, std::span<const double> d, std::span<const double> cost, double mu, double s,
          std::vector<double>& q) {
    const std::size_t A = p.size();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < A; ++a)
        if (p[a] > 0.0) top = std::max(top, std::log(p[a]) + mu * (d[a] - s * cost[a]));
    double norm = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
        q[a] = p[a] > 0.0 ? std::exp(std::log(p[a]) + mu * (d[a] - s * cost[a]) - top) : 0.0;
        norm += q[a];
    }
    for (double& v : q) v /= norm;
}

// Tilt of p that meets the budget: s = 0 when that is already feasible,
// otherwise the smallest s found by bisection with E_q[cost] <= budget.
void tilt_to_budget(std::span<const double> p, std::span<const double> d, std::span<const double> cost, double mu,
                    double budget, std::vector<double>& q) {
    tilt(p, d, cost, mu, 0.0, q);
    if (expected(q, cost) <= budget) return;
    double lo = 0.0, hi = 1.0;
    for (;;) {
        tilt(p, d, cost, mu, hi, q);
        if (expected(q, cost) <= budget) break;
        lo = hi;
        hi *= 2.0;
        require(hi < 1e300, "blahut_arimoto: cost multiplier diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        tilt(p, d, cost, mu, mid, q);
        if (expected(q, cost) <= budget)
            hi = mid;
        else
            lo = mid;
    }
    tilt(p, d, cost, mu, hi, q);
}

// min_{s >= 0} max_a (d_a - s cost_a) + s budget, over admissible atoms. The
// function is convex and piecewise linear in s with slope budget - cost of
// the maximiser; the minimum sits where that slope changes sign.
std::pair<double, double> dual_bound(std::span<const double> admissible, std::span<const double> d,
                                     std::span<const double> cost, double budget) {
    auto value = [&](double s, double& slope) {
        double best = -std::numeric_limits<double>::infinity();
        double best_cost = 0.0;
        for (std::size_t a = 0; a < d.size(); ++a) {
            if (admissible[a] <= 0.0) continue;
            const double v = d[a] - s * cost[a];
            if (v > best || (v == best && cost[a] < best_cost)) {
                best = v;
                best_cost = cost[a];
            }
        }
        slope = budget - best_cost;
        return best + s * budget;
    };
    double slope = 0.0;
    double v0 = value(0.0, slope);
    if (slope >= 0.0) return {v0, 0.0};
    double lo = 0.0, hi = 1.0;
    while (value(hi, slope), slope < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) break;
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        value(mid, slope);
        if (slope < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double s1 = 0.0, s2 = 0.0;
    const double a = value(lo, s1), b = value(hi, s2);
    return a <= b ? std::pair{a, lo} : std::pair{b, hi};
}

// r = sum_a p_a W_a, d_a = D(W_a || r) in nats for live atoms; returns I(p).
double divergences(const Table2& w, std::span<const double> wlogw, std::span<const double> p, std::vector<double>& d,
                   std::vector<double>& r, std::vector<double>& logr) {
    const auto& k = kernels::active();
    const std::size_t A = w.rows, Y = w.cols;
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t a = 0; a < A; ++a)
        if (p[a] > 0.0) k.axpy(p[a], w.p.data() + a * Y, r.data(), Y);
    for (std::size_t y = 0; y < Y; ++y) logr[y] = r[y] > 0.0 ? std::log(r[y]) : 0.0;
    double info = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
        const double* row = w.p.data() + a * Y;
        d[a] = wlogw[a] - k.dot(row, logr.data(), Y);
        if (p[a] > 0.0) {
            info += p[a] * d[a];
        } else {
            // An unused atom that reaches outputs r never produces.
            for (std::size_t y = 0; y < Y; ++y)
                if (row[y] > 0.0 && r[y] <= 0.0) {
                    d[a] = std::numeric_limits<double>::infinity();
                    break;
                }
        }
    }
    return info;
}

// Dense solve with partial pivoting; false when the system is singular.
bool solve_dense(std::vector<double>& m, std::vector<double>& rhs, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
        if (!(std::abs(m[piv * n + c]) > 1e-300)) return false;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m[c * n + j], m[piv * n + j]);
            std::swap(rhs[c], rhs[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r * n + c] / m[c * n + c];
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
            rhs[r] -= f * rhs[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double v = rhs[c];
        for (std::size_t j = c + 1; j < n; ++j) v -= m[c * n + j] * rhs[j];
        rhs[c] = v / m[c * n + c];
    }
    return true;
}

// Primal active-set Newton ascent for I(p) subject to sum p = 1 and, when
// the budget binds, E[cost] = budget. Each step is a Newton step on the
// face spanned by the working set, cut at the boundary (the blocking atom
// leaves the set) and backtracked until I does not decrease. When the face
// is solved, the atom whose optimality condition d_a - s cost_a <= lambda is
// most violated joins the set. The result is a candidate only; the caller
// certifies it with the dual bound.
std::vector<double> newton_polish(const Table2& w, std::span<const double> wlogw, std::span<const double> cost,
                                  std::span<const double> start, bool binding) {
    const std::size_t A = w.rows, Y = w.cols;
    std::vector<double> p(start.begin(), start.end());
    std::vector<char> working(A);
    for (std::size_t a = 0; a < A; ++a) working[a] = p[a] > 0.0;

    std::vector<char> barred(A, 0);
    std::vector<double> d(A), r(Y), logr(Y), inv_r(Y), scaled(Y), trial(A), dt(A);
    double info = divergences(w, wlogw, p, d, r, logr);
    for (int it = 0; it < 400; ++it) {
        std::vector<std::size_t> sup;
        for (std::size_t a = 0; a < A; ++a)
            if (working[a]) sup.push_back(a);
        bool varied = false;
        for (std::size_t a : sup) varied = varied || cost[a] != cost[sup.front()];
        const bool use_cost = binding && varied;
        const std::size_t n = sup.size(), N = n + 1 + (use_cost ? 1 : 0);
        for (std::size_t y = 0; y < Y; ++y) inv_r[y] = r[y] > 0.0 ? 1.0 / r[y] : 0.0;

        // [H 1 c; 1' 0 0; c' 0 0] [dp; nu] = [1 - d; 0; 0], H_ab = -sum_y W_ay W_by / r_y.
        std::vector<double> m(N * N, 0.0), rhs(N, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* wi = w.p.data() + sup[i] * Y;
            for (std::size_t y = 0; y < Y; ++y) scaled[y] = wi[y] * inv_r[y];
            for (std::size_t j = i; j < n; ++j)
                m[i * N + j] = m[j * N + i] = -kernels::active().dot(scaled.data(), w.p.data() + sup[j] * Y, Y);
            m[i * N + n] = m[n * N + i] = 1.0;
            if (use_cost) m[i * N + n + 1] = m[(n + 1) * N + i] = cost[sup[i]];
            rhs[i] = 1.0 - d[sup[i]];
        }
        if (!solve_dense(m, rhs, N)) break;

        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(rhs[i]));
        bool solved = step < 1e-10;
        if (!solved) {
            double alpha = 1.0;
            std::size_t blocking = A;
            for (std::size_t i = 0; i < n; ++i)
                if (rhs[i] < 0.0 && -p[sup[i]] / rhs[i] < alpha) {
                    alpha = -p[sup[i]] / rhs[i];
                    blocking = sup[i];
                }
            if (blocking != A && p[blocking] == 0.0) {
                // A freshly added atom that wants to go negative.
                working[blocking] = 0;
                barred[blocking] = 1;
                continue;
            }
            double trial_info = -std::numeric_limits<double>::infinity();
            for (; alpha > 1e-14; alpha *= 0.5, blocking = A) {
                trial = p;
                for (std::size_t i = 0; i < n; ++i) trial[sup[i]] = std::max(0.0, p[sup[i]] + alpha * rhs[i]);
                if (blocking != A) trial[blocking] = 0.0;
                trial_info = divergences(w, wlogw, trial, dt, r, logr);
                if (trial_info >= info) break;
            }
            if (trial_info >= info) {
                if (blocking != A) working[blocking] = 0;
                std::fill(barred.begin(), barred.end(), 0);
                p.swap(trial);
                d.swap(dt);
                info = trial_info;
                continue;
            }
            // No progress at working precision: the face is as good as solved.
            divergences(w, wlogw, p, d, r, logr);
            solved = true;
        }

        // Face solved: lambda = 1 - nu_1, s = -nu_2. Bring in the most
        // violated outside atom, if any.
        const double s = use_cost ? -rhs[n + 1] : 0.0;
        if (s < 0.0) break;
        std::size_t enter = A;
        double worst = 1e-12;
        for (std::size_t a = 0; a < A; ++a) {
            if (working[a] || barred[a]) continue;
            const double v = d[a] - 1.0 + rhs[n] - s * cost[a];
            if (v > worst) {
                worst = v;
                enter = a;
            }
        }
        if (enter == A) break;
        working[enter] = 1;
    }
    return p;
}
} // namespace

double channel_information(std::span<const double> input, const Table2& channel) {
    require(input.size() == channel.rows, "channel_information: input law length must match channel rows");
    const auto& k = kernels::active();
    const std::size_t Y = channel.cols;
    std::vector<double> r(Y, 0.0);
    for (std::size_t a = 0; a < channel.rows; ++a)
        if (input[a] > 0.0) k.axpy(input[a], channel.p.data() + a * Y, r.data(), Y);
    double info = 0.0;
    for (std::size_t a = 0; a < channel.rows; ++a) {
        if (input[a] <= 0.0) continue;
        double row = 0.0;
        for (std::size_t y = 0; y < Y; ++y) {
            const double v = channel(a, y);
            if (v > 0.0) row += v * std::log(v / r[y]);
        }
        info += input[a] * row;
    }
    return std::max(0.0, info / kLn2);
}

BlahutArimotoResult blahut_arimoto(const Table2& transition, std::span<const double> cost, double budget,
                                   const BlahutArimotoOptions& options) {
    check_channel(transition);
    require(options.tol > 0.0, "blahut_arimoto: tolerance must be positive");
    const std::size_t A = transition.rows, Y = transition.cols;
    require(cost.empty() || cost.size() == A, "blahut_arimoto: cost vector length must match inputs");
    for (double c : cost) require(std::isfinite(c) && c >= 0.0, "blahut_arimoto: costs must be finite and nonnegative");
    require(!(budget < 0.0), "blahut_arimoto: budget must be nonnegative");

    // An unconstrained problem is the zero-cost special case.
    std::vector<double> costs(cost.begin(), cost.end());
    if (costs.empty() || !std::isfinite(budget)) {
        costs.assign(A, 0.0);
        budget = 0.0;
    }
    const double cheapest = *std::min_element(costs.begin(), costs.end());
    require(budget >= cheapest, "blahut_arimoto: budget is below the cheapest input");

    std::vector<double> p(A, 1.0 / double(A));
    if (options.warm_start.size() == A) {
        double total = 0.0;
        for (double v : options.warm_start) total += std::max(v, 0.0);
        if (total > 0.0)
            for (std::size_t a = 0; a < A; ++a)
                p[a] = 0.999 * std::max(options.warm_start[a], 0.0) / total + 0.001 / double(A);
    }
    if (budget == cheapest) {
        // Only the cheapest inputs are admissible.
        for (std::size_t a = 0; a < A; ++a) p[a] = costs[a] == cheapest ? 1.0 : 0.0;
    }

    std::vector<double> wlogw(A, 0.0);
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t y = 0; y < Y; ++y) {
            const double v = transition(a, y);
            if (v > 0.0) wlogw[a] += v * std::log(v);
        }

    std::vector<double> admissible(A, 1.0);
    for (std::size_t a = 0; a < A; ++a)
        if (budget == cheapest && costs[a] != cheapest) admissible[a] = 0.0;
    const std::size_t cheap_atom =
        static_cast<std::size_t>(std::min_element(costs.begin(), costs.end()) - costs.begin());

    std::vector<double> d(A, 0.0), prev(A), r(Y), logr(Y), dq(A);
    const std::vector<double> flat(A, 0.0);
    tilt_to_budget(std::vector<double>(p), flat, costs, 1.0, budget, p);

    // Each step tilts p by exp(mu D(W_a || r)) and re-solves the cost
    // multiplier so the new law meets the budget exactly. mu = 1 is the
    // classical update; larger steps are tried while I(p) keeps increasing
    // and dropped on the first decrease. Every so often a Newton polish on
    // the apparent support is tried, which fixes the slow tail of atoms
    // that are leaving the support. The bracket is [I(p), dual bound].
    const double tol = options.tol * kLn2;
    double mu = 1.0, prev_info = -std::numeric_limits<double>::infinity();
    double best_upper = std::numeric_limits<double>::infinity(), best_s = 0.0, info = 0.0;
    BlahutArimotoResult res;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        info = divergences(transition, wlogw, p, d, r, logr);
        res.iterations = it + 1;
        if (mu > 1.0 && info < prev_info) {
            p = prev;
            mu = 1.0;
            continue;
        }
        const auto [upper, s] = dual_bound(admissible, d, costs, budget);
        if (upper < best_upper) {
            best_upper = upper;
            best_s = s;
        }
        if (best_upper - info < tol) break;

        if (it % 50 == 25) {
            std::vector<double> q = newton_polish(transition, wlogw, costs, p, best_s > 0.0);
            for (int fix = 0; expected(q, costs) > budget && fix < 8; ++fix) {
                // Shift the rounding excess onto the cheapest atom.
                const double e = expected(q, costs);
                const double theta = std::min(1.0, (e - budget) / (e - cheapest) * (1.0 + 1e-6));
                for (double& v : q) v *= 1.0 - theta;
                q[cheap_atom] += theta;
            }
            if (expected(q, costs) <= budget) {
                const double q_info = divergences(transition, wlogw, q, dq, r, logr);
                const auto [q_upper, q_s] = dual_bound(admissible, dq, costs, budget);
                if (q_upper < best_upper) {
                    best_upper = q_upper;
                    best_s = q_s;
                }
                if (q_info > info && best_upper - q_info < tol) {
                    p = std::move(q);
                    info = q_info;
                    break;
                }
            }
        }

        prev = p;
        prev_info = info;
        tilt_to_budget(prev, d, costs, mu, budget, p);
        mu = std::min(mu * 1.5, 64.0);
    }

    res.input = p;
    res.capacity = std::max(0.0, info / kLn2);
    res.upper = best_upper / kLn2;
    res.multiplier = best_s;
    res.cost = cost.empty() ? 0.0 : expected(p, cost);
    return res;
}

// ---------------------------------------------------------------------------
// Discretised game

std::vector<double> AmplitudeGrid::values() const {
    require(std::isfinite(min) && std::isfinite(max) && min <= max, "AmplitudeGrid: need min <= max");
    require(std::isfinite(step) && step > 0.0, "AmplitudeGrid: step must be positive");
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = min + double(i) * step;
        if (std::abs(v[i]) < 1e-9 * step) v[i] = 0.0;
    }
    return v;
}

std::size_t OutputBins::count() const {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "OutputBins: need lo < hi");
    require(std::isfinite(width) && width > 0.0, "OutputBins: width must be positive");
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / width));
    require(n >= 1, "OutputBins: range shorter than one bin");
    return n;
}

std::vector<double> OutputBins::interior_edges() const {
    const std::size_t n = count();
    std::vector<double> e(n - 1);
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = lo + double(i) * width;
    return e;
}

std::size_t JamAtom::support() const noexcept {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](double v) { return v != 0.0; }));
}

double JamAtom::power() const noexcept {
    double acc = 0.0;
    for (double v : s) acc += v * v;
    return acc;
}

namespace {

// Upper-tail Gaussian probability Q(z), accurate in both tails.
double gaussian_q(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::vector<double> gaussian_bin_probs(double mean, double sd, std::span<const double> edges) {
    const std::size_t B = edges.size() + 1;
    std::vector<double> out(B);
    for (std::size_t b = 0; b < B; ++b) {
        const double lo = b == 0 ? -std::numeric_limits<double>::infinity() : (edges[b - 1] - mean) / sd;
        const double hi = b + 1 == B ? std::numeric_limits<double>::infinity() : (edges[b] - mean) / sd;
        // Q(lo) - Q(hi) loses nothing in the upper tail; mirror for the lower one.
        out[b] = lo >= 0.0 ? gaussian_q(lo) - gaussian_q(hi) : gaussian_q(-hi) - gaussian_q(-lo);
        out[b] = std::max(out[b], 0.0);
    }
    return out;
}

std::vector<double> finite_bin_probs(double mean, std::span<const SupportPoint> law, std::span<const double> edges) {
    std::vector<double> out(edges.size() + 1, 0.0);
    for (const auto& [v, p] : law) {
        const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), mean + v) - edges.begin());
        out[b] += p;
    }
    return out;
}

} // namespace

DiscretizedGame::DiscretizedGame(const FhChannel& ch, std::size_t J, const GameGrids& grids, unsigned threads)
    : K_(ch.bands()) {
    require(J >= 1 && J <= K_, "DiscretizedGame: J must lie in 1..K");
    const auto xs = grids.input.values();
    const auto ss = grids.jam.values();
    require(std::find(xs.begin(), xs.end(), 0.0) != xs.end(), "DiscretizedGame: input grid must contain 0");
    require(std::find(ss.begin(), ss.end(), 0.0) != ss.end(), "DiscretizedGame: jam grid must contain 0");
    const auto edges = grids.output.interior_edges();
    const std::size_t B = edges.size() + 1;

    for (std::size_t k = 0; k < K_; ++k)
        for (double x : xs)
            if (x != 0.0 || k == 0) inputs_.push_back({x, k});
    for (const auto& a : inputs_) input_cost_.push_back(a.x * a.x);

    double jam_atoms = 1.0;
    for (std::size_t k = 0; k < K_; ++k) jam_atoms *= double(ss.size());
    require(jam_atoms <= 1e6, "DiscretizedGame: jam grid too large for K");
    std::vector<std::size_t> odo(K_, 0);
    for (;;) {
        JamAtom atom;
        atom.s.resize(K_);
        for (std::size_t k = 0; k < K_; ++k) atom.s[k] = ss[odo[K_ - 1 - k]];
        if (atom.support() <= J) jams_.push_back(std::move(atom));
        std::size_t pos = 0;
        while (pos < K_ && ++odo[pos] == ss.size()) odo[pos++] = 0;
        if (pos == K_) break;
    }
    for (const auto& j : jams_) jam_cost_.push_back(j.power());

    double cells = 1.0;
    for (std::size_t k = 0; k < K_; ++k) cells *= double(B);
    require(cells * double(inputs_.size()) * double(jams_.size()) <= 2e8, "DiscretizedGame: transition table too large");
    outputs_ = static_cast<std::size_t>(cells);
    table_.assign(inputs_.size() * jams_.size() * outputs_, 0.0);

    std::vector<double> sd(K_);
    for (std::size_t k = 0; k < K_; ++k) sd[k] = std::sqrt(ch.sigma2(k));
    const auto* finite = std::get_if<FiniteSupportNoise>(&ch.noise());

    const std::size_t pairs = inputs_.size() * jams_.size();
    parallel_for(pairs, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> cell, next;
        for (std::size_t idx = begin; idx < end; ++idx) {
            const InputAtom& in = inputs_[idx / jams_.size()];
            const JamAtom& jam = jams_[idx % jams_.size()];
            cell.assign(1, 1.0);
            for (std::size_t l = 0; l < K_; ++l) {
                const double mean = (l == in.band ? in.x : 0.0) + jam.s[l];
                const auto band = finite ? finite_bin_probs(mean, finite->bands[l], edges)
                                         : gaussian_bin_probs(mean, sd[l], edges);
                next.assign(cell.size() * B, 0.0);
                for (std::size_t c = 0; c < cell.size(); ++c)
                    for (std::size_t b = 0; b < B; ++b) next[c * B + b] = cell[c] * band[b];
                cell.swap(next);
            }
            std::copy(cell.begin(), cell.end(), table_.begin() + static_cast<std::ptrdiff_t>(idx * outputs_));
        }
    });
    for (std::size_t idx = 0; idx < pairs; ++idx) {
        const double total = std::accumulate(table_.begin() + static_cast<std::ptrdiff_t>(idx * outputs_),
                                             table_.begin() + static_cast<std::ptrdiff_t>((idx + 1) * outputs_), 0.0);
        require(std::abs(total - 1.0) <= 1e-9, "DiscretizedGame: transition row does not sum to 1");
    }
}

Table2 DiscretizedGame::mix(std::span<const double> q, std::span<const bool> skip) const {
    require(q.size() == jams_.size(), "DiscretizedGame::mix: jam law length mismatch");
    require(skip.empty() || skip.size() == inputs_.size(), "DiscretizedGame::mix: skip mask length mismatch");
    const auto& k = kernels::active();
    Table2 w{inputs_.size(), outputs_, std::vector<double>(inputs_.size() * outputs_, 0.0)};
    for (std::size_t a = 0; a < inputs_.size(); ++a) {
        if (!skip.empty() && skip[a]) continue;
        double* row = w.p.data() + a * outputs_;
        for (std::size_t j = 0; j < jams_.size(); ++j)
            if (q[j] > 0.0) k.axpy(q[j], transition(a, j).data(), row, outputs_);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Projection and the jammer's best response

namespace {

std::vector<double> project_simplex(std::span<const double> v) {
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1.0) / double(i + 1);
        if (u[i] > t) theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
    return out;
}

double dot_plain(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace

std::vector<double> project_capped_simplex(std::span<const double> v, std::span<const double> cost, double budget) {
    require(!v.empty() && v.size() == cost.size(), "project_capped_simplex: size mismatch");
    require(budget >= *std::min_element(cost.begin(), cost.end()), "project_capped_simplex: empty feasible set");
    std::vector<double> q = project_simplex(v);
    if (dot_plain(q, cost) <= budget) return q;
    std::vector<double> shifted(v.size());
    auto at = [&](double mu) {
        for (std::size_t i = 0; i < v.size(); ++i) shifted[i] = v[i] - mu * cost[i];
        return project_simplex(shifted);
    };
    double lo = 0.0, hi = 1.0;
    while (dot_plain(at(hi), cost) > budget) {
        lo = hi;
        hi *= 2.0;
        require(hi < 1e300, "project_capped_simplex: multiplier diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dot_plain(at(mid), cost) > budget)
            lo = mid;
        else
            hi = mid;
    }
    return at(hi);
}

namespace {

class JamObjective {
public:
    JamObjective(const DiscretizedGame& g, std::span<const double> p, unsigned threads)
        : g_(g), p_(p), skip_(new bool[p.size()]), threads_(threads) {
        for (std::size_t a = 0; a < p.size(); ++a) skip_[a] = !(p[a] > 0.0);
    }

    double value(std::span<const double> q) const {
        const Table2 w = mix(q);
        return channel_information(p_, w);
    }

    std::vector<double> gradient(std::span<const double> q) const {
        const auto& k = kernels::active();
        const Table2 w = mix(q);
        const std::size_t A = w.rows, Y = w.cols;
        std::vector<double> r(Y, 0.0);
        for (std::size_t a = 0; a < A; ++a)
            if (!skip_[a]) k.axpy(p_[a], w.p.data() + a * Y, r.data(), Y);
        // d I / d W(y|a) = p_a log(W(y|a) / r(y)), chained through W_q.
        std::vector<double> logratio(A * Y, 0.0);
        for (std::size_t a = 0; a < A; ++a) {
            if (skip_[a]) continue;
            for (std::size_t y = 0; y < Y; ++y) {
                const double v = w(a, y);
                logratio[a * Y + y] = r[y] > 0.0 ? std::log(std::max(v, 1e-300) / r[y]) : 0.0;
            }
        }
        std::vector<double> grad(g_.jams().size(), 0.0);
        parallel_for(grad.size(), threads_, [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
                double acc = 0.0;
                for (std::size_t a = 0; a < A; ++a)
                    if (!skip_[a]) acc += p_[a] * k.dot(g_.transition(a, j).data(), logratio.data() + a * Y, Y);
                grad[j] = acc / kLn2;
            }
        });
        return grad;
    }

private:
    Table2 mix(std::span<const double> q) const { return g_.mix(q, {skip_.get(), p_.size()}); }

    const DiscretizedGame& g_;
    std::span<const double> p_;
    std::unique_ptr<bool[]> skip_;
    unsigned threads_;
};

struct JamResponse {
    double value = 0.0;
    std::vector<double> q;
};

// Projected gradient with backtracking on the convex objective q -> I(p, W_q).
JamResponse jammer_best_response(const DiscretizedGame& g, std::span<const double> p, std::vector<double> q,
                                 double lambda, std::size_t steps, double& eta, unsigned threads) {
    const JamObjective f(g, p, threads);
    double fq = f.value(q);
    for (std::size_t s = 0; s < steps; ++s) {
        const auto grad = f.gradient(q);
        std::vector<double> trial(q.size()), qn;
        double fn = fq;
        bool accepted = false;
        while (eta > 1e-12) {
            for (std::size_t j = 0; j < q.size(); ++j) trial[j] = q[j] - eta * grad[j];
            qn = project_capped_simplex(trial, g.jam_cost(), lambda);
            fn = f.value(qn);
            double lin = 0.0, sq = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                const double d = qn[j] - q[j];
                lin += grad[j] * d;
                sq += d * d;
            }
            if (fn <= fq + lin + sq / (2.0 * eta) + 1e-15) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted || !(fn < fq)) break;
        const double gain = fq - fn;
        q = std::move(qn);
        fq = fn;
        eta *= 1.5;
        if (gain < 1e-10) break;
    }
    return {fq, std::move(q)};
}

} // namespace

double SaddleEstimate::input_power() const {
    double acc = 0.0;
    for (std::size_t a = 0; a < input_atoms.size(); ++a) acc += input_dist[a] * input_atoms[a].x * input_atoms[a].x;
    return acc;
}

double SaddleEstimate::jam_power() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < jam_atoms.size(); ++j) acc += jam_dist[j] * jam_atoms[j].power();
    return acc;
}

SaddleEstimate minimax_estimate(const DiscretizedGame& game, double gamma, double lambda,
                                const MinimaxOptions& options) {
    require(options.iterations >= 1, "minimax_estimate: need at least one iteration");
    require(!game.inputs().empty() && !game.jams().empty(), "minimax_estimate: empty grids");
    require(std::isfinite(gamma) && gamma >= 0.0, "minimax_estimate: gamma must be nonnegative");
    require(std::isfinite(lambda) && lambda >= 0.0, "minimax_estimate: lambda must be nonnegative");

    const std::size_t A = game.inputs().size(), Jn = game.jams().size();
    const auto cheapest = [](std::span<const double> c) {
        return static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    };
    std::vector<double> p_avg(A, 0.0), q_avg(Jn, 0.0);
    p_avg[cheapest(game.input_cost())] = 1.0;
    q_avg[cheapest(game.jam_cost())] = 1.0;

    SaddleEstimate est;
    std::vector<double> p_warm;
    double eta = 1.0;

    auto evaluate = [&](std::size_t iteration, std::vector<double>& p_br, std::vector<double>& q_br) {
        const Table2 w = game.mix(q_avg);
        BlahutArimotoOptions ba;
        ba.tol = options.ba_tol;
        ba.warm_start = p_warm;
        BlahutArimotoResult sender = blahut_arimoto(w, game.input_cost(), gamma, ba);
        const double here = channel_information(p_avg, w);
        JamResponse jam = jammer_best_response(game, p_avg, q_avg, lambda, options.jam_steps, eta, options.threads);
        GapSample s;
        s.iteration = iteration;
        s.upper = std::max(sender.capacity, here);
        s.lower = std::min(jam.value, here);
        s.gap = s.upper - s.lower;
        est.trace.push_back(s);
        est.value = here;
        est.upper = s.upper;
        est.lower = s.lower;
        est.gap = s.gap;
        p_warm = sender.input;
        p_br = std::move(sender.input);
        q_br = std::move(jam.q);
    };

    std::vector<double> p_br, q_br;
    std::size_t t = 1;
    for (; t <= options.iterations; ++t) {
        evaluate(t, p_br, q_br);
        if (options.gap_target > 0.0 && est.gap <= options.gap_target) break;
        const double w = 1.0 / double(t);
        for (std::size_t a = 0; a < A; ++a) p_avg[a] = t == 1 ? p_br[a] : p_avg[a] + w * (p_br[a] - p_avg[a]);
        for (std::size_t j = 0; j < Jn; ++j) q_avg[j] = t == 1 ? q_br[j] : q_avg[j] + w * (q_br[j] - q_avg[j]);
    }
    if (t > options.iterations) {
        // Score the final averages.
        evaluate(t, p_br, q_br);
        t = options.iterations;
    }
    est.iterations = t;
    est.input_atoms.assign(game.inputs().begin(), game.inputs().end());
    est.jam_atoms.assign(game.jams().begin(), game.jams().end());
    est.input_dist = std::move(p_avg);
    est.jam_dist = std::move(q_avg);
    return est;
}

SaddleEstimate minimax_estimate(const FhChannel& ch, double gamma, const JamBudget& budget, const GameGrids& grids,
                                const MinimaxOptions& options) {
    budget.validate(ch.bands());
    const DiscretizedGame game(ch, budget.J, grids, options.threads);
    return minimax_estimate(game, gamma, budget.lambda, options);
}

// ---------------------------------------------------------------------------
// Symmetrisation diagnostics

double symmetry_mean_residual(const InputAtom& a, const InputAtom& b, const MeanMap& mean, std::size_t K) {
    require(a.band < K && b.band < K, "symmetry_mean_residual: band out of range");
    const auto ma = mean(a.x, a.band);
    const auto mb = mean(b.x, b.band);
    require(ma.size() == K && mb.size() == K, "symmetry_mean_residual: mean map must return K entries");
    double acc = 0.0;
    for (std::size_t l = 0; l < K; ++l) {
        const double d = ((l == a.band ? a.x : 0.0) - ma[l]) + (mb[l] - (l == b.band ? b.x : 0.0));
        acc += d * d;
    }
    return std::sqrt(acc);
}

MeanMap canonical_mean_map(std::size_t K) {
    return [K](double x, std::size_t k) {
        std::vector<double> m(K, 0.0);
        m.at(k) = x;
        return m;
    };
}

JensenBound jensen_power_bound(const InputLaw& law, double gamma, const MeanMap& mean, std::size_t K) {
    const std::size_t n = law.atoms.size();
    require(n >= 1 && law.prob.size() == n, "jensen_power_bound: atoms and probabilities differ in length");
    check_distribution(law.prob, 1e-12, "jensen_power_bound");
    double power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        require(law.atoms[i].band < K, "jensen_power_bound: band out of range");
        power += law.prob[i] * law.atoms[i].x * law.atoms[i].x;
    }
    require(std::abs(power - gamma) <= 1e-9, "jensen_power_bound: input law must use exactly gamma");

    std::vector<double> pk(K, 0.0);
    for (std::size_t i = 0; i < n; ++i) pk[law.atoms[i].band] += law.prob[i];
    for (std::size_t k = 0; k < K; ++k) {
        // P(x|k) = P(-x|k): compare the mass at each |x| level with signs.
        for (std::size_t i = 0; i < n; ++i) {
            if (law.atoms[i].band != k || law.atoms[i].x == 0.0) continue;
            double plus = 0.0, minus = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (law.atoms[j].band != k) continue;
                if (std::abs(law.atoms[j].x - law.atoms[i].x) <= 1e-12) plus += law.prob[j];
                if (std::abs(law.atoms[j].x + law.atoms[i].x) <= 1e-12) minus += law.prob[j];
            }
            require(std::abs(plus - minus) <= 1e-12, "jensen_power_bound: input law is not symmetric on a band");
        }
    }

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i)
        if (law.prob[i] > 0.0) support.push_back(i);
    for (std::size_t i : support)
        for (std::size_t j : support)
            require(symmetry_mean_residual(law.atoms[i], law.atoms[j], mean, K) <= 1e-9,
                    "jensen_power_bound: mean map violates the symmetrisation mean condition");

    JensenBound out;
    for (std::size_t i : support) {
        const auto m = mean(law.atoms[i].x, law.atoms[i].band);
        double sq = 0.0;
        for (double v : m) sq += v * v;
        out.mean_power += law.prob[i] * sq;
    }

    out.projected = std::numeric_limits<double>::infinity();
    for (std::size_t j : support) {
        const InputAtom& ref = law.atoms[j];
        const auto mref = mean(ref.x, ref.band);
        double acc = 0.0;
        for (std::size_t i : support) {
            const std::size_t k = law.atoms[i].band;
            const double d = law.atoms[i].x - (k == ref.band ? ref.x : 0.0) + mref[k];
            acc += law.prob[i] * d * d;
        }
        out.projected = std::min(out.projected, acc);
    }

    // min_a sum_x P(x|k) |x - a|^2 is attained at the conditional mean.
    for (std::size_t k = 0; k < K; ++k) {
        if (pk[k] <= 0.0) continue;
        double m1 = 0.0;
        for (std::size_t i : support)
            if (law.atoms[i].band == k) m1 += law.prob[i] / pk[k] * law.atoms[i].x;
        double var = 0.0;
        for (std::size_t i : support)
            if (law.atoms[i].band == k) var += law.prob[i] / pk[k] * (law.atoms[i].x - m1) * (law.atoms[i].x - m1);
        out.bound += pk[k] * var;
    }
    return out;
}

} // namespace fhjam
