#pragma once

// Experiment plumbing: the text config, Monte Carlo campaigns, bound sweeps
// and the CSV / SVG writers used by the command-line tool.

#include "fhjam/channel.hpp"
#include "fhjam/coding.hpp"
#include "fhjam/jammer.hpp"
#include "fhjam/minimax.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fhjam {

/// Parsed experiment description. Text form:
///
///     [channel]
///     K = 2
///     sigma2 = 1, 1
///     [power]
///     gamma = 4
///     ...
///
/// Bands in the text are one-based. Unknown keys, duplicate keys and values
/// that downstream modules would reject are reported with their line.
struct ExperimentConfig {
    // [channel]
    std::size_t K = 1;
    std::vector<double> sigma2{1.0};
    std::string noise = "gaussian"; ///< gaussian | binary (+-sigma, equiprobable)

    // [power]
    double gamma = 1.0;
    double lambda = 1.0;
    std::size_t J = 1;

    // [code]
    std::vector<std::size_t> n{16};
    std::size_t M = 0;      ///< 0: derive from rate
    double rate = 0.25;     ///< bits per channel use, used when M == 0
    std::string hopping = "message"; ///< message | uniform | fixed:<k>

    // [jammer]
    std::vector<std::string> strategies{"none"};

    // [run]
    std::string name = "experiment";
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::string out = ".";
    bool nats = false;
    unsigned threads = 1;

    // [sweep]
    std::vector<double> sweep_gamma;
    std::vector<double> sweep_lambda;

    // [mi]
    AmplitudeGrid mi_input{-4.0, 4.0, 0.5};
    AmplitudeGrid mi_jam{-2.5, 2.5, 0.5};
    OutputBins mi_output{-8.0, 8.0, 0.5};
    std::size_t mi_iterations = 200;
    double mi_tol = 1e-5;
    double mi_gap_target = 0.0;
    std::size_t mi_jam_steps = 40;

    /// Throws ConfigError. A seed must be present unless seed_override is set.
    static ExperimentConfig parse(std::string_view text, std::optional<std::uint64_t> seed_override = {});
    static ExperimentConfig load(const std::filesystem::path& path,
                                 std::optional<std::uint64_t> seed_override = {});
    std::string serialize() const;

    FhChannel channel() const;
    JamBudget budget() const { return {lambda, J}; }
    HoppingPolicy hopping_policy() const;
    /// Messages for blocklength n: M if set, else round(2^(rate n)).
    std::size_t messages(std::size_t blocklength) const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ResultRow {
    std::string experiment;
    std::size_t n = 0;
    std::size_t M = 0;
    double rate_bits = 0.0; ///< log2(M) / n
    std::string strategy;
    ErrorEstimate estimate;
    double wall_seconds = 0.0;
};

/// One row per (n, strategy), in config order. The codebook for each n is
/// shared by all strategies. Deterministic given the seed for any thread
/// count; wall-clock time is the only nondeterministic field.
std::vector<ResultRow> run_error_simulation(const ExperimentConfig& cfg);

/// Results CSV (without timings) and the separate timing CSV.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool nats);
void write_timing_csv(std::ostream& out, const std::vector<ResultRow>& rows);

struct AttackRow {
    std::size_t n = 0;
    std::size_t M = 0;
    AttackResult result;
};

/// Replay attack for every n of the config (Gamma <= Lambda required).
/// With `codebooks` given, those are attacked instead of fresh ones.
std::vector<AttackRow> run_attack(const ExperimentConfig& cfg, const std::vector<Codebook>* codebooks = nullptr);
void write_attack_csv(std::ostream& out, const std::vector<AttackRow>& rows);

/// Codebook used for blocklength index i of the config (shared by
/// simulate and attack).
Codebook config_codebook(const ExperimentConfig& cfg, std::size_t n_index);

/// CSV over the (gamma, lambda) grid of the [sweep] section (falls back to
/// the single configured point). When J is too small for the waterfilling
/// jammer the upper-bound cell reads "n/a"; with require_upper that case
/// throws Infeasible instead.
void sweep_bounds(std::ostream& out, const ExperimentConfig& cfg, bool require_upper = false);

void write_waterfill_csv(std::ostream& out, const ExperimentConfig& cfg);

/// saddle.csv, input_dist.csv, jam_dist.csv and gap_trace.csv under dir.
void write_saddle(const std::filesystem::path& dir, const SaddleEstimate& est, const ExperimentConfig& cfg);

/// Shortest round-trip decimal form.
std::string format_number(double v);

enum class PlotKind { ErrorVsN, BoundsVsGamma };

PlotKind parse_plot_kind(std::string_view name);

/// Renders a CSV as an SVG line chart. error_vs_n needs n, strategy and
/// error columns and draws one polyline per strategy; bounds_vs_gamma needs
/// gamma, lambda and the bound columns and draws one polyline per (bound,
/// lambda). Throws FormatError on missing columns.
std::string render_plot(std::istream& csv, PlotKind kind);
void emit_plot(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg);

} // namespace fhjam
