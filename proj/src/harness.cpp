#include "fhjam/harness.hpp"

#include "fhjam/bounds.hpp"
#include "fhjam/error.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fhjam {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Thrown by value parsers; turned into a ConfigError with line and key.
struct BadValue {
    std::string what;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double to_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) throw BadValue{"expected a number, got '" + std::string(s) + "'"};
    if (!std::isfinite(v)) throw BadValue{"value must be finite"};
    return v;
}

std::uint64_t to_u64(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw BadValue{"expected a nonnegative integer, got '" + std::string(s) + "'"};
    return v;
}

bool to_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

std::vector<double> to_doubles(std::string_view s) {
    std::vector<double> out;
    for (auto part : split(s, ',')) out.push_back(to_double(part));
    return out;
}

AmplitudeGrid to_grid(std::string_view s) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw BadValue{"expected min:max:step"};
    return {to_double(parts[0]), to_double(parts[1]), to_double(parts[2])};
}

std::string grid_text(double a, double b, double c) {
    return format_number(a) + ":" + format_number(b) + ":" + format_number(c);
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
    return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"channel.K", [](auto& c, auto v) { c.K = to_u64(v); }},
        {"channel.sigma2", [](auto& c, auto v) { c.sigma2 = to_doubles(v); }},
        {"channel.noise", [](auto& c, auto v) { c.noise = std::string(v); }},
        {"power.gamma", [](auto& c, auto v) { c.gamma = to_double(v); }},
        {"power.lambda", [](auto& c, auto v) { c.lambda = to_double(v); }},
        {"power.J", [](auto& c, auto v) { c.J = to_u64(v); }},
        {"code.n",
         [](auto& c, auto v) {
             c.n.clear();
             for (auto part : split(v, ',')) c.n.push_back(to_u64(part));
         }},
        {"code.M", [](auto& c, auto v) { c.M = to_u64(v); }},
        {"code.rate", [](auto& c, auto v) { c.rate = to_double(v); }},
        {"code.hopping", [](auto& c, auto v) { c.hopping = std::string(v); }},
        {"jammer.strategy",
         [](auto& c, auto v) {
             c.strategies.clear();
             for (auto part : split(v, ',')) c.strategies.emplace_back(part);
         }},
        {"run.name", [](auto& c, auto v) { c.name = std::string(v); }},
        {"run.trials", [](auto& c, auto v) { c.trials = to_u64(v); }},
        {"run.seed", [](auto& c, auto v) { c.seed = to_u64(v); }},
        {"run.out", [](auto& c, auto v) { c.out = std::string(v); }},
        {"run.nats", [](auto& c, auto v) { c.nats = to_bool(v); }},
        {"run.threads",
         [](auto& c, auto v) {
             const auto t = to_u64(v);
             if (t > 1024) throw BadValue{"at most 1024 threads"};
             c.threads = static_cast<unsigned>(t);
         }},
        {"sweep.gamma", [](auto& c, auto v) { c.sweep_gamma = to_doubles(v); }},
        {"sweep.lambda", [](auto& c, auto v) { c.sweep_lambda = to_doubles(v); }},
        {"mi.input", [](auto& c, auto v) { c.mi_input = to_grid(v); }},
        {"mi.jam", [](auto& c, auto v) { c.mi_jam = to_grid(v); }},
        {"mi.output",
         [](auto& c, auto v) {
             const auto g = to_grid(v);
             c.mi_output = {g.min, g.max, g.step};
         }},
        {"mi.iterations", [](auto& c, auto v) { c.mi_iterations = to_u64(v); }},
        {"mi.tol", [](auto& c, auto v) { c.mi_tol = to_double(v); }},
        {"mi.gap_target", [](auto& c, auto v) { c.mi_gap_target = to_double(v); }},
        {"mi.jam_steps", [](auto& c, auto v) { c.mi_jam_steps = to_u64(v); }},
    };
    return table;
}

bool valid_hopping(std::string_view h, std::size_t K) {
    if (h == "message" || h == "uniform") return true;
    if (!h.starts_with("fixed:")) return false;
    try {
        const auto k = to_u64(h.substr(6));
        return k >= 1 && k <= K;
    } catch (const BadValue&) {
        return false;
    }
}

} // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text, std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg;
    std::map<std::string, std::size_t, std::less<>> seen;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream lines{std::string(text)};
    for (std::string raw; std::getline(lines, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const char* known[] = {"channel", "power", "code", "jammer", "run", "sweep", "mi"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                throw ConfigError(line_no, section, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected key = value");
        const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(line_no, key, "unknown key");
        if (seen.count(key)) throw ConfigError(line_no, key, "duplicate key (first set on line " +
                                                                 std::to_string(seen[key]) + ")");
        seen[key] = line_no;
        try {
            it->second(cfg, value);
        } catch (const BadValue& e) {
            throw ConfigError(line_no, key, e.what);
        }
    }

    auto fail = [&](const std::string& key, const std::string& what) {
        const auto it = seen.find(key);
        throw ConfigError(it == seen.end() ? 0 : it->second, key, what);
    };

    if (seed_override) {
        cfg.seed = *seed_override;
    } else if (!seen.count("run.seed")) {
        fail("run.seed", "a seed is required");
    }
    if (cfg.K < 1) fail("channel.K", "need at least one band");
    if (!seen.count("channel.sigma2")) cfg.sigma2.assign(cfg.K, 1.0);
    if (cfg.sigma2.size() != cfg.K) fail("channel.sigma2", "expected K = " + std::to_string(cfg.K) + " variances");
    for (double s : cfg.sigma2)
        if (!(s > 0.0)) fail("channel.sigma2", "noise variances must be positive");
    if (cfg.noise != "gaussian" && cfg.noise != "binary") fail("channel.noise", "expected gaussian or binary");
    if (!(cfg.gamma > 0.0)) fail("power.gamma", "sender power must be positive");
    if (cfg.lambda < 0.0) fail("power.lambda", "jammer power must be nonnegative");
    if (cfg.J < 1 || cfg.J > cfg.K) fail("power.J", "J must lie in 1..K");
    if (cfg.n.empty()) fail("code.n", "need at least one blocklength");
    for (auto n : cfg.n)
        if (n < 1) fail("code.n", "blocklengths must be positive");
    if (seen.count("code.M") && seen.count("code.rate")) fail("code.rate", "give either M or rate, not both");
    if (seen.count("code.M") && cfg.M < 1) fail("code.M", "need at least one message");
    if (cfg.M == 0 && !(cfg.rate > 0.0)) fail("code.rate", "rate must be positive");
    for (auto n : cfg.n) {
        const double msgs = cfg.M ? double(cfg.M) : std::round(std::exp2(cfg.rate * double(n)));
        if (msgs > double(1u << 22) || msgs * double(cfg.K * n) > double(1u << 27))
            fail(cfg.M ? "code.M" : "code.rate", "codebook for n = " + std::to_string(n) + " is too large");
    }
    if (!valid_hopping(cfg.hopping, cfg.K)) fail("code.hopping", "expected message, uniform or fixed:<k> with k in 1..K");
    if (cfg.strategies.empty()) fail("jammer.strategy", "need at least one strategy");
    for (const auto& s : cfg.strategies) {
        try {
            validate_strategy_name(s);
        } catch (const ContractViolation& e) {
            fail("jammer.strategy", e.what());
        }
        if (s.starts_with("tone:") && to_u64(std::string_view(s).substr(5)) > cfg.K)
            fail("jammer.strategy", "tone band exceeds K");
    }
    if (cfg.trials < 1) fail("run.trials", "need at least one trial");
    if (cfg.threads < 1) fail("run.threads", "need at least one thread");
    if (cfg.name.empty() || cfg.name.find(',') != std::string::npos) fail("run.name", "name must be nonempty without commas");
    for (double g : cfg.sweep_gamma)
        if (g < 0.0) fail("sweep.gamma", "values must be nonnegative");
    for (double l : cfg.sweep_lambda)
        if (l < 0.0) fail("sweep.lambda", "values must be nonnegative");
    try {
        const auto xs = cfg.mi_input.values();
        if (std::find(xs.begin(), xs.end(), 0.0) == xs.end()) fail("mi.input", "grid must contain 0");
    } catch (const ContractViolation& e) {
        fail("mi.input", e.what());
    }
    try {
        const auto ss = cfg.mi_jam.values();
        if (std::find(ss.begin(), ss.end(), 0.0) == ss.end()) fail("mi.jam", "grid must contain 0");
    } catch (const ContractViolation& e) {
        fail("mi.jam", e.what());
    }
    try {
        (void)cfg.mi_output.count();
    } catch (const ContractViolation& e) {
        fail("mi.output", e.what());
    }
    if (cfg.mi_iterations < 1) fail("mi.iterations", "need at least one iteration");
    if (!(cfg.mi_tol > 0.0)) fail("mi.tol", "tolerance must be positive");
    if (cfg.mi_gap_target < 0.0) fail("mi.gap_target", "must be nonnegative");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), seed_override);
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream o;
    auto num = [](double v) { return format_number(v); };
    o << "[channel]\n";
    o << "K = " << K << "\n";
    o << "sigma2 = " << join<double>(sigma2, num) << "\n";
    o << "noise = " << noise << "\n";
    o << "\n[power]\n";
    o << "gamma = " << num(gamma) << "\n";
    o << "lambda = " << num(lambda) << "\n";
    o << "J = " << J << "\n";
    o << "\n[code]\n";
    o << "n = " << join<std::size_t>(n, [](std::size_t v) { return std::to_string(v); }) << "\n";
    if (M)
        o << "M = " << M << "\n";
    else
        o << "rate = " << num(rate) << "\n";
    o << "hopping = " << hopping << "\n";
    o << "\n[jammer]\n";
    o << "strategy = " << join<std::string>(strategies, [](const std::string& s) { return s; }) << "\n";
    o << "\n[run]\n";
    o << "name = " << name << "\n";
    o << "trials = " << trials << "\n";
    o << "seed = " << seed << "\n";
    o << "out = " << out << "\n";
    o << "nats = " << (nats ? "true" : "false") << "\n";
    o << "threads = " << threads << "\n";
    if (!sweep_gamma.empty() || !sweep_lambda.empty()) {
        o << "\n[sweep]\n";
        if (!sweep_gamma.empty()) o << "gamma = " << join<double>(sweep_gamma, num) << "\n";
        if (!sweep_lambda.empty()) o << "lambda = " << join<double>(sweep_lambda, num) << "\n";
    }
    o << "\n[mi]\n";
    o << "input = " << grid_text(mi_input.min, mi_input.max, mi_input.step) << "\n";
    o << "jam = " << grid_text(mi_jam.min, mi_jam.max, mi_jam.step) << "\n";
    o << "output = " << grid_text(mi_output.lo, mi_output.hi, mi_output.width) << "\n";
    o << "iterations = " << mi_iterations << "\n";
    o << "tol = " << num(mi_tol) << "\n";
    o << "gap_target = " << num(mi_gap_target) << "\n";
    o << "jam_steps = " << mi_jam_steps << "\n";
    return o.str();
}

FhChannel ExperimentConfig::channel() const {
    if (noise == "binary") {
        FiniteSupportNoise fs;
        for (double s : sigma2) {
            const double a = std::sqrt(s);
            fs.bands.push_back({{-a, 0.5}, {a, 0.5}});
        }
        return FhChannel(sigma2, fs);
    }
    return FhChannel(sigma2);
}

HoppingPolicy ExperimentConfig::hopping_policy() const {
    if (hopping == "uniform") return HoppingPolicy::uniform();
    if (hopping.starts_with("fixed:")) return HoppingPolicy::fixed(to_u64(std::string_view(hopping).substr(6)) - 1);
    return HoppingPolicy::message_keyed();
}

std::size_t ExperimentConfig::messages(std::size_t blocklength) const {
    if (M) return M;
    return static_cast<std::size_t>(std::llround(std::exp2(rate * double(blocklength))));
}

// ---------------------------------------------------------------------------
// Campaigns

Codebook config_codebook(const ExperimentConfig& cfg, std::size_t n_index) {
    const std::size_t n = cfg.n.at(n_index);
    return generate_random_code(cfg.K, n, cfg.messages(n), cfg.gamma, cfg.hopping_policy(),
                                StreamKey(cfg.seed).child(1).child(n_index));
}

std::vector<ResultRow> run_error_simulation(const ExperimentConfig& cfg) {
    const FhChannel ch = cfg.channel();
    const StreamKey cells = StreamKey(cfg.seed).child(2);
    std::vector<ResultRow> rows;
    for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
        const Codebook cb = config_codebook(cfg, ni);
        for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
            const auto provider = make_jam_provider(cfg.strategies[si], cfg.budget());
            const auto t0 = std::chrono::steady_clock::now();
            ResultRow row;
            row.experiment = cfg.name;
            row.n = cb.blocklength();
            row.M = cb.messages();
            row.rate_bits = std::log2(double(cb.messages())) / double(cb.blocklength());
            row.strategy = cfg.strategies[si];
            row.estimate = empirical_error(cb, ch, provider, cfg.trials,
                                           cells.child(ni * cfg.strategies.size() + si), cfg.threads);
            row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool nats) {
    out << "experiment,n,M," << (nats ? "rate_nats" : "rate_bits") << ",strategy,trials,errors,error,std_error\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.n << ',' << r.M << ',' << format_number(nats ? r.rate_bits * kLn2 : r.rate_bits)
            << ',' << r.strategy << ',' << r.estimate.trials << ',' << r.estimate.errors << ','
            << format_number(r.estimate.rate()) << ',' << format_number(r.estimate.standard_error()) << '\n';
    }
}

void write_timing_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "experiment,n,strategy,wall_seconds\n";
    for (const auto& r : rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_seconds);
        out << r.experiment << ',' << r.n << ',' << r.strategy << ',' << buf << '\n';
    }
}

std::vector<AttackRow> run_attack(const ExperimentConfig& cfg, const std::vector<Codebook>* codebooks) {
    const FhChannel ch = cfg.channel();
    const StreamKey keys = StreamKey(cfg.seed).child(3);
    std::vector<AttackRow> rows;
    const std::size_t count = codebooks ? codebooks->size() : cfg.n.size();
    for (std::size_t i = 0; i < count; ++i) {
        const Codebook cb = codebooks ? (*codebooks)[i] : config_codebook(cfg, i);
        rows.push_back({cb.blocklength(), cb.messages(),
                        attack_error_floor(cb, ch, cfg.budget(), cfg.trials, keys.child(i), cfg.threads)});
    }
    return rows;
}

void write_attack_csv(std::ostream& out, const std::vector<AttackRow>& rows) {
    out << "n,M,trials,error,std_error,cross_trials,cross_error,cross_std_error,worst_replayed,worst_error\n";
    for (const auto& r : rows) {
        const auto& a = r.result;
        out << r.n << ',' << r.M << ',' << a.overall.trials << ',' << format_number(a.overall.rate()) << ','
            << format_number(a.overall.standard_error()) << ',' << a.cross.trials << ','
            << format_number(a.cross.rate()) << ',' << format_number(a.cross.standard_error()) << ','
            << a.worst_attack + 1 << ',' << format_number(a.worst_error) << '\n';
    }
}

void sweep_bounds(std::ostream& out, const ExperimentConfig& cfg, bool require_upper) {
    const std::vector<double> gammas = cfg.sweep_gamma.empty() ? std::vector<double>{cfg.gamma} : cfg.sweep_gamma;
    const std::vector<double> lambdas =
        cfg.sweep_lambda.empty() ? std::vector<double>{cfg.lambda} : cfg.sweep_lambda;
    const char* unit = cfg.nats ? "nats" : "bits";
    const double scale = cfg.nats ? kLn2 : 1.0;
    out << "gamma,lambda,K,J,c,cr_lower_" << unit << ",cr_upper_" << unit << ",best_subband_" << unit << "\n";
    for (double g : gammas) {
        for (double l : lambdas) {
            const WaterfillResult w = waterfill(cfg.sigma2, l);
            const double lower = cr_lower(g, l, cfg.sigma2);
            std::string upper = "n/a";
            if (w.active_count() <= cfg.J) {
                upper = format_number(cr_upper_gaussian(g, l, cfg.sigma2, cfg.J) * scale);
            } else if (require_upper) {
                (void)cr_upper_gaussian(g, l, cfg.sigma2, cfg.J);
            }
            out << format_number(g) << ',' << format_number(l) << ',' << cfg.K << ',' << cfg.J << ','
                << format_number(w.c) << ',' << format_number(lower * scale) << ',' << upper << ','
                << format_number(best_subband_capacity(g, l, cfg.sigma2) * scale) << '\n';
        }
    }
}

void write_waterfill_csv(std::ostream& out, const ExperimentConfig& cfg) {
    const WaterfillResult w = waterfill(cfg.sigma2, cfg.lambda);
    out << "band,sigma2,allocation,level,active\n";
    for (std::size_t k = 0; k < cfg.K; ++k)
        out << k + 1 << ',' << format_number(cfg.sigma2[k]) << ',' << format_number(w.lambda[k]) << ','
            << format_number(w.c) << ',' << (w.active[k] ? 1 : 0) << '\n';
}

void write_saddle(const std::filesystem::path& dir, const SaddleEstimate& est, const ExperimentConfig& cfg) {
    const char* unit = cfg.nats ? "nats" : "bits";
    const double scale = cfg.nats ? kLn2 : 1.0;
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error(std::string("cannot write ") + (dir / name).string());
        return f;
    };
    {
        auto f = open("saddle.csv");
        f << "gamma,lambda,J,value_" << unit << ",upper_" << unit << ",lower_" << unit << ",gap_" << unit
          << ",iterations,input_power,jam_power\n";
        f << format_number(cfg.gamma) << ',' << format_number(cfg.lambda) << ',' << cfg.J << ','
          << format_number(est.value * scale) << ',' << format_number(est.upper * scale) << ','
          << format_number(est.lower * scale) << ',' << format_number(est.gap * scale) << ',' << est.iterations
          << ',' << format_number(est.input_power()) << ',' << format_number(est.jam_power()) << '\n';
    }
    {
        auto f = open("input_dist.csv");
        f << "x,band,probability\n";
        for (std::size_t a = 0; a < est.input_atoms.size(); ++a)
            if (est.input_dist[a] > 0.0)
                f << format_number(est.input_atoms[a].x) << ',' << est.input_atoms[a].band + 1 << ','
                  << format_number(est.input_dist[a]) << '\n';
    }
    {
        auto f = open("jam_dist.csv");
        for (std::size_t k = 0; k < cfg.K; ++k) f << "s_" << k + 1 << ',';
        f << "probability\n";
        for (std::size_t j = 0; j < est.jam_atoms.size(); ++j) {
            if (!(est.jam_dist[j] > 0.0)) continue;
            for (double s : est.jam_atoms[j].s) f << format_number(s) << ',';
            f << format_number(est.jam_dist[j]) << '\n';
        }
    }
    {
        auto f = open("gap_trace.csv");
        f << "iteration,upper_" << unit << ",lower_" << unit << ",gap_" << unit << "\n";
        for (const auto& s : est.trace)
            f << s.iteration << ',' << format_number(s.upper * scale) << ',' << format_number(s.lower * scale) << ','
              << format_number(s.gap * scale) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Plots

PlotKind parse_plot_kind(std::string_view name) {
    if (name == "error_vs_n") return PlotKind::ErrorVsN;
    if (name == "bounds_vs_gamma") return PlotKind::BoundsVsGamma;
    throw ContractViolation("unknown plot kind '" + std::string(name) + "' (expected error_vs_n | bounds_vs_gamma)");
}

namespace {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::initializer_list<const char*> names) const {
        for (const char* name : names) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
        }
        throw FormatError(std::string("CSV is missing column '") + *names.begin() + "'");
    }

    std::optional<std::size_t> optional_column(std::initializer_list<const char*> names) const {
        try {
            return column(names);
        } catch (const FormatError&) {
            return std::nullopt;
        }
    }
};

Csv read_csv(std::istream& in) {
    Csv csv;
    std::string line;
    if (!std::getline(in, line)) throw FormatError("CSV is empty");
    for (auto f : split(line, ',')) csv.header.emplace_back(f);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> row;
        for (auto f : split(line, ',')) row.emplace_back(f);
        if (row.size() != csv.header.size()) throw FormatError("CSV row has the wrong number of fields");
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

double cell_number(const std::string& s) {
    try {
        return to_double(s);
    } catch (const BadValue& e) {
        throw FormatError("CSV: " + e.what);
    }
}

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

Series& series_for(std::vector<Series>& all, const std::string& label) {
    for (auto& s : all)
        if (s.label == label) return s;
    all.push_back({label, {}});
    return all.back();
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string render_svg(std::vector<Series> series, const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, bool y_from_zero) {
    constexpr double W = 720, H = 420, L = 70, R = 200, T = 40, B = 55;
    double x0 = INFINITY, x1 = -INFINITY, y0 = y_from_zero ? 0.0 : INFINITY, y1 = -INFINITY;
    for (auto& s : series) {
        std::stable_sort(s.points.begin(), s.points.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [x, y] : s.points) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
    if (!std::isfinite(y1)) y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y1 += pad;
    if (!y_from_zero) y0 -= pad;

    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << fixed2(W / 2 - R / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        o << "<line x1=\"" << fixed2(px(xv)) << "\" y1=\"" << H - B << "\" x2=\"" << fixed2(px(xv)) << "\" y2=\""
          << H - B + 5 << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << fixed2(px(xv)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
          << tick_label(xv) << "</text>\n";
        o << "<line x1=\"" << L - 5 << "\" y1=\"" << fixed2(py(yv)) << "\" x2=\"" << L << "\" y2=\""
          << fixed2(py(yv)) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << L - 8 << "\" y=\"" << fixed2(py(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << fixed2((L + W - R) / 2) << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
      << escape_xml(xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << fixed2((T + H - B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed2((T + H - B) / 2) << ")\">" << escape_xml(ylabel) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % std::size(palette)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t p = 0; p < series[i].points.size(); ++p)
            o << (p ? " " : "") << fixed2(px(series[i].points[p].first)) << ','
              << fixed2(py(series[i].points[p].second));
        o << "\"/>\n";
        for (const auto& [x, y] : series[i].points)
            o << "<circle cx=\"" << fixed2(px(x)) << "\" cy=\"" << fixed2(py(y)) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
        const double ly = T + 10 + 18.0 * double(i);
        o << "<line x1=\"" << W - R + 15 << "\" y1=\"" << fixed2(ly) << "\" x2=\"" << W - R + 40 << "\" y2=\""
          << fixed2(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - R + 46 << "\" y=\"" << fixed2(ly + 4) << "\">" << escape_xml(series[i].label)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace

std::string render_plot(std::istream& in, PlotKind kind) {
    const Csv csv = read_csv(in);
    std::vector<Series> series;
    if (kind == PlotKind::ErrorVsN) {
        const auto cn = csv.column({"n"});
        const auto cs = csv.column({"strategy"});
        const auto ce = csv.column({"error"});
        for (const auto& row : csv.rows)
            series_for(series, row[cs]).points.emplace_back(cell_number(row[cn]), cell_number(row[ce]));
        return render_svg(std::move(series), "Empirical error vs blocklength", "n", "error", true);
    }
    const auto cg = csv.column({"gamma"});
    const auto cl = csv.column({"lambda"});
    const auto lower = csv.column({"cr_lower_bits", "cr_lower_nats"});
    const auto sub = csv.column({"best_subband_bits", "best_subband_nats"});
    const auto upper = csv.optional_column({"cr_upper_bits", "cr_upper_nats"});
    const bool nats = csv.header[lower].ends_with("nats");
    for (const auto& row : csv.rows) {
        const std::string tag = " (lambda=" + row[cl] + ")";
        const double g = cell_number(row[cg]);
        series_for(series, "cr_lower" + tag).points.emplace_back(g, cell_number(row[lower]));
        if (upper && row[*upper] != "n/a")
            series_for(series, "cr_upper" + tag).points.emplace_back(g, cell_number(row[*upper]));
        series_for(series, "best_subband" + tag).points.emplace_back(g, cell_number(row[sub]));
    }
    return render_svg(std::move(series), "Capacity bounds vs sender power", "gamma",
                      nats ? "nats per use" : "bits per use", true);
}

void emit_plot(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg) {
    std::ifstream in(csv);
    if (!in) throw FormatError("cannot open " + csv.string());
    const std::string text = render_plot(in, kind);
    std::ofstream out(svg, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + svg.string());
    out << text;
}

} // namespace fhjam
