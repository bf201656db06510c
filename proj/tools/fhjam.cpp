// fhjam: command-line front end for the FH jamming toolkit.
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible request,
// 4 any other runtime failure.

#include "fhjam/bounds.hpp"
#include "fhjam/error.hpp"
#include "fhjam/harness.hpp"
#include "fhjam/kernels.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace fhjam;

namespace {

enum Exit { Ok = 0, ConfigFailure = 2, InfeasibleRequest = 3, RuntimeFailure = 4 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool nats = false;
    unsigned threads = 0;
};

ExperimentConfig load_config(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig::parse("", c.seed) : ExperimentConfig::load(c.config, c.seed);
    if (!c.out.empty()) cfg.out = c.out;
    if (c.nats) cfg.nats = true;
    if (c.threads) cfg.threads = c.threads;
    return cfg;
}

std::ofstream open_output(const ExperimentConfig& cfg, const char* name) {
    fs::create_directories(cfg.out);
    std::ofstream f(fs::path(cfg.out) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(cfg.out) / name).string());
    return f;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "root seed (overrides the config)");
    sub->add_option("--out", c.out, "output directory (overrides the config)");
    sub->add_flag("--nats", c.nats, "report information in nats");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1u, 1024u));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-hopping jamming toolkit: bounds, Monte Carlo and the minimax MI game"};
    app.require_subcommand(1);

    Common common;
    bool upper = false;
    auto* bounds = app.add_subcommand("bounds", "capacity bounds over the [sweep] grid -> bounds.csv");
    add_common(bounds, common);
    bounds->add_flag("--upper", upper, "fail with exit code 3 when the Gaussian upper bound is unavailable");

    auto* wf = app.add_subcommand("waterfill", "jammer waterfilling allocation -> waterfill.csv");
    add_common(wf, common);

    auto* sim = app.add_subcommand("simulate", "error Monte Carlo per (n, strategy) -> results.csv, timing.csv");
    add_common(sim, common);

    std::string save_cb, load_cb;
    auto* attack = app.add_subcommand("attack", "codeword replay attack -> attack.csv");
    add_common(attack, common);
    attack->add_option("--save-codebook", save_cb, "write the attacked codebook (first n) to this file");
    attack->add_option("--load-codebook", load_cb, "attack this codebook instead of a generated one")
        ->check(CLI::ExistingFile);

    auto* mi = app.add_subcommand("mi", "fictitious-play saddle estimate -> saddle.csv and friends");
    add_common(mi, common);

    std::string plot_csv, plot_kind, plot_svg;
    auto* plot = app.add_subcommand("plot", "render a results CSV as SVG");
    plot->add_option("--csv", plot_csv, "input CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("--kind", plot_kind, "error_vs_n | bounds_vs_gamma")->required();
    plot->add_option("--svg", plot_svg, "output file (default: CSV path with .svg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : ConfigFailure;
    }

    try {
        if (plot->parsed()) {
            const fs::path svg = plot_svg.empty() ? fs::path(plot_csv).replace_extension(".svg") : fs::path(plot_svg);
            emit_plot(plot_csv, parse_plot_kind(plot_kind), svg);
            std::cout << svg.string() << '\n';
            return Ok;
        }

        const ExperimentConfig cfg = load_config(common);
        if (bounds->parsed()) {
            std::ostringstream csv;
            sweep_bounds(csv, cfg, upper);
            open_output(cfg, "bounds.csv") << csv.str();
            std::cout << csv.str();
        } else if (wf->parsed()) {
            std::ostringstream csv;
            write_waterfill_csv(csv, cfg);
            open_output(cfg, "waterfill.csv") << csv.str();
            std::cout << csv.str();
        } else if (sim->parsed()) {
            std::clog << "kernels: " << kernels::isa_name(kernels::active().isa) << ", threads: " << cfg.threads
                      << '\n';
            const auto rows = run_error_simulation(cfg);
            std::ostringstream csv;
            write_results_csv(csv, rows, cfg.nats);
            open_output(cfg, "results.csv") << csv.str();
            auto timing = open_output(cfg, "timing.csv");
            write_timing_csv(timing, rows);
            std::cout << csv.str();
        } else if (attack->parsed()) {
            std::vector<Codebook> books;
            if (!load_cb.empty()) {
                std::ifstream in(load_cb, std::ios::binary);
                books.push_back(read_codebook(in));
            } else {
                for (std::size_t i = 0; i < cfg.n.size(); ++i) books.push_back(config_codebook(cfg, i));
            }
            if (!save_cb.empty()) {
                if (fs::path(save_cb).has_parent_path()) fs::create_directories(fs::path(save_cb).parent_path());
                std::ofstream outf(save_cb, std::ios::binary);
                write_codebook(outf, books.front());
                if (!outf) throw std::runtime_error("cannot write " + save_cb);
            }
            const auto rows = run_attack(cfg, &books);
            std::ostringstream csv;
            write_attack_csv(csv, rows);
            open_output(cfg, "attack.csv") << csv.str();
            std::cout << csv.str();
        } else if (mi->parsed()) {
            MinimaxOptions opts;
            opts.iterations = cfg.mi_iterations;
            opts.gap_target = cfg.mi_gap_target;
            opts.ba_tol = cfg.mi_tol;
            opts.jam_steps = cfg.mi_jam_steps;
            opts.threads = cfg.threads;
            const SaddleEstimate est =
                minimax_estimate(cfg.channel(), cfg.gamma, cfg.budget(), {cfg.mi_input, cfg.mi_jam, cfg.mi_output}, opts);
            fs::create_directories(cfg.out);
            write_saddle(cfg.out, est, cfg);
            std::cout << "value " << format_number(est.value) << " bits, gap " << format_number(est.gap)
                      << " after " << est.iterations << " iterations\n";
        }
        return Ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return InfeasibleRequest;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return RuntimeFailure;
    }
}
