#include "fhjam/coding.hpp"

#include "fhjam/kernels.hpp"
#include "fhjam/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

namespace fhjam {

Codebook::Codebook(std::size_t K, std::size_t n, double gamma, std::span<const BlockMatrix> codewords)
    : K_(K), n_(n), M_(codewords.size()), gamma_(gamma) {
    entries_.reserve(M_ * K_ * n_);
    for (const auto& c : codewords) {
        require(c.rows() == K_ && c.cols() == n_, "Codebook: codeword shape must be K x n");
        entries_.insert(entries_.end(), c.values().begin(), c.values().end());
    }
    validate();
}

Codebook::Codebook(std::size_t K, std::size_t n, std::size_t M, double gamma, std::vector<double> entries)
    : K_(K), n_(n), M_(M), gamma_(gamma), entries_(std::move(entries)) {
    require(entries_.size() == M_ * K_ * n_, "Codebook: entry count must be M*K*n");
    validate();
}

void Codebook::validate() const {
    require(K_ >= 1 && n_ >= 1, "Codebook: K and n must be positive");
    require(M_ >= 1, "Codebook: need at least one message");
    require(std::isfinite(gamma_) && gamma_ > 0.0, "Codebook: gamma must be positive");
    const double budget = double(n_) * gamma_;
    for (std::size_t m = 0; m < M_; ++m) {
        const auto c = codeword_values(m);
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t nz = 0;
            for (std::size_t k = 0; k < K_; ++k) {
                require(std::isfinite(c[k * n_ + i]), "Codebook: non-finite entry");
                if (c[k * n_ + i] != 0.0) ++nz;
            }
            require(nz <= 1, "Codebook: more than one active band in a column");
        }
        require(codeword_power(m) <= budget, "Codebook: codeword exceeds the power budget n*gamma");
    }
}

std::span<const double> Codebook::codeword_values(std::size_t m) const {
    require(m < M_, "Codebook: message index out of range");
    return {entries_.data() + m * K_ * n_, K_ * n_};
}

BlockMatrix Codebook::codeword(std::size_t m) const {
    const auto c = codeword_values(m);
    return BlockMatrix(K_, n_, std::vector<double>(c.begin(), c.end()));
}

double Codebook::codeword_power(std::size_t m) const {
    const auto c = codeword_values(m);
    return kernels::dot(c, c);
}

Codebook generate_random_code(std::size_t K, std::size_t n, std::size_t M, double gamma, HoppingPolicy policy,
                              StreamKey key) {
    require(K >= 1 && n >= 1 && M >= 1, "generate_random_code: K, n and M must be positive");
    require(std::isfinite(gamma) && gamma > 0.0, "generate_random_code: gamma must be positive");
    if (policy.kind == HoppingPolicy::Kind::FixedBand)
        require(policy.band < K, "generate_random_code: fixed band out of range");

    std::vector<std::size_t> shared_hops;
    if (policy.kind == HoppingPolicy::Kind::UniformRandom) {
        Stream hop(key.child(std::numeric_limits<std::uint64_t>::max()));
        shared_hops.resize(n);
        for (auto& b : shared_hops) b = hop.below(K);
    }

    const double sd = std::sqrt(0.98 * gamma);
    const double budget = double(n) * gamma;
    std::vector<double> entries(M * K * n, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        Stream rng(key.child(m));
        std::normal_distribution<double> normal(0.0, sd);
        double* c = entries.data() + m * K * n;
        std::vector<std::size_t> bands(n);
        std::vector<double> amps(n);
        for (std::size_t i = 0; i < n; ++i) {
            switch (policy.kind) {
            case HoppingPolicy::Kind::FixedBand: bands[i] = policy.band; break;
            case HoppingPolicy::Kind::UniformRandom: bands[i] = shared_hops[i]; break;
            case HoppingPolicy::Kind::MessageKeyed: bands[i] = rng.below(K); break;
            }
            amps[i] = normal(rng);
        }
        for (std::size_t i = 0; i < n; ++i) c[bands[i] * n + i] = amps[i];
        std::span<double> cw(c, K * n);
        const double power = kernels::dot(cw, cw);
        if (power > budget) {
            // Rescale onto the sphere, then shave ulps until the stored
            // codeword passes the same power check the Codebook applies.
            const double scale = std::sqrt(budget / power);
            for (double& v : cw) v *= scale;
            while (kernels::dot(cw, cw) > budget)
                for (double& v : cw) v = std::nextafter(v, 0.0);
        }
    }
    return Codebook(K, n, M, gamma, std::move(entries));
}

BlockMatrix encode(const Codebook& cb, std::size_t m) {
    require(m < cb.messages(), "encode: message index out of range");
    return cb.codeword(m);
}

std::size_t decode_min_distance(const Codebook& cb, const BlockMatrix& y) {
    require(y.rows() == cb.bands() && y.cols() == cb.blocklength(), "decode_min_distance: output shape mismatch");
    // Distances are accumulated in fixed-size chunks so a candidate can be
    // dropped as soon as its partial sum exceeds the best full distance.
    // Partial sums of nonnegative terms never decrease, so this returns the
    // same index as a full scan.
    constexpr std::size_t chunk = 64;
    const auto& k = kernels::active();
    const std::size_t len = cb.bands() * cb.blocklength();
    const double* yv = y.values().data();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < cb.messages(); ++m) {
        const double* c = cb.entries().data() + m * len;
        double d = 0.0;
        std::size_t off = 0;
        for (; off < len; off += chunk) {
            d += k.squared_distance(yv + off, c + off, std::min(chunk, len - off));
            if (d > best_d) break;
        }
        if (off >= len && d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return best;
}

double ErrorEstimate::standard_error() const noexcept {
    if (trials == 0) return 0.0;
    const double e = rate();
    return std::sqrt(e * (1.0 - e) / double(trials));
}

ErrorEstimate empirical_error(const Codebook& cb, const FhChannel& ch, const JamProvider& jam, std::size_t trials,
                              StreamKey key, unsigned threads) {
    require(trials >= 1, "empirical_error: need at least one trial");
    require(cb.bands() == ch.bands(), "empirical_error: codebook and channel disagree on K");
    std::vector<std::uint8_t> wrong(trials, 0);
    parallel_for(trials, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const StreamKey tk = key.child(t);
            Stream rng(tk.child(0));
            const std::size_t m = rng.below(cb.messages());
            const BlockMatrix s = jam(cb, ch, cb.blocklength(), rng);
            const BlockMatrix y = transmit_block(ch, cb.codeword(m), s, tk.child(1));
            wrong[t] = decode_min_distance(cb, y) != m ? 1 : 0;
        }
    });
    ErrorEstimate est;
    est.trials = trials;
    for (auto w : wrong) est.errors += w;
    return est;
}

namespace {

constexpr char kMagic[4] = {'F', 'H', 'C', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "codebook container assumes a little-endian host");
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) throw FormatError("codebook: truncated container");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace

void write_codebook(std::ostream& out, const Codebook& cb) {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, cb.bands());
    put<std::uint64_t>(out, cb.blocklength());
    put<std::uint64_t>(out, cb.messages());
    put<double>(out, cb.gamma());
    for (double v : cb.entries()) put<double>(out, v);
    if (!out) throw FormatError("codebook: write failed");
}

Codebook read_codebook(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("codebook: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw FormatError("codebook: unsupported version " + std::to_string(version));
    const auto K = get<std::uint64_t>(in);
    const auto n = get<std::uint64_t>(in);
    const auto M = get<std::uint64_t>(in);
    const auto gamma = get<double>(in);
    if (K == 0 || n == 0 || M == 0 || K * n > (std::uint64_t{1} << 40) / M)
        throw FormatError("codebook: implausible header");
    std::vector<double> entries(M * K * n);
    for (double& v : entries) v = get<double>(in);
    try {
        return Codebook(K, n, M, gamma, std::move(entries));
    } catch (const ContractViolation& e) {
        throw FormatError(std::string("codebook: ") + e.what());
    }
}

} // namespace fhjam
