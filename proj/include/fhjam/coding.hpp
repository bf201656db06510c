#pragma once

#include "fhjam/channel.hpp"
#include "fhjam/rng.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace fhjam {

/// How a code chooses the band for each symbol.
///  - FixedBand: every symbol of every codeword on one band.
///  - UniformRandom: one pseudo-random band sequence shared by all messages
///    (hopping that carries no information).
///  - MessageKeyed: each message has its own i.i.d. uniform band sequence, so
///    the hop pattern itself carries information.
struct HoppingPolicy {
    enum class Kind { FixedBand, UniformRandom, MessageKeyed };

    Kind kind = Kind::MessageKeyed;
    std::size_t band = 0;

    static HoppingPolicy fixed(std::size_t band) { return {Kind::FixedBand, band}; }
    static HoppingPolicy uniform() { return {Kind::UniformRandom, 0}; }
    static HoppingPolicy message_keyed() { return {Kind::MessageKeyed, 0}; }

    friend bool operator==(const HoppingPolicy&, const HoppingPolicy&) = default;
};

/// M codewords, each a K x n matrix with at most one nonzero entry per
/// column and power at most n * gamma. Codewords are stored contiguously so
/// the decoder can stream through them.
class Codebook {
public:
    Codebook(std::size_t K, std::size_t n, double gamma, std::span<const BlockMatrix> codewords);
    Codebook(std::size_t K, std::size_t n, std::size_t M, double gamma, std::vector<double> entries);

    std::size_t bands() const noexcept { return K_; }
    std::size_t blocklength() const noexcept { return n_; }
    std::size_t messages() const noexcept { return M_; }
    double gamma() const noexcept { return gamma_; }

    /// Row-major entries of codeword m.
    std::span<const double> codeword_values(std::size_t m) const;
    BlockMatrix codeword(std::size_t m) const;
    double codeword_power(std::size_t m) const;
    std::span<const double> entries() const noexcept { return entries_; }

    friend bool operator==(const Codebook&, const Codebook&) = default;

private:
    void validate() const;

    std::size_t K_ = 0, n_ = 0, M_ = 0;
    double gamma_ = 0.0;
    std::vector<double> entries_;
};

/// Gaussian random code: amplitudes i.i.d. N(0, 0.98 gamma), bands by
/// policy, any codeword above n * gamma rescaled onto the power sphere.
/// Message m draws from key.child(m); the shared hop pattern of
/// UniformRandom from a dedicated child.
Codebook generate_random_code(std::size_t K, std::size_t n, std::size_t M, double gamma, HoppingPolicy policy,
                              StreamKey key);

BlockMatrix encode(const Codebook& cb, std::size_t m);

/// argmin_m ||y - codeword m||_F^2; ties go to the smallest index.
std::size_t decode_min_distance(const Codebook& cb, const BlockMatrix& y);

/// A jamming strategy. It sees the code, the channel and its own random
/// stream, never the transmitted message.
using JamProvider = std::function<BlockMatrix(const Codebook&, const FhChannel&, std::size_t n, Stream&)>;

struct ErrorEstimate {
    std::size_t errors = 0;
    std::size_t trials = 0;

    double rate() const noexcept { return trials == 0 ? 0.0 : double(errors) / double(trials); }
    /// sqrt(e (1 - e) / trials)
    double standard_error() const noexcept;
};

/// Monte Carlo estimate of the average decoding error with uniform messages.
/// Trial t uses key.child(t): child 0 drives the message and the jammer,
/// child 1 the noise.
ErrorEstimate empirical_error(const Codebook& cb, const FhChannel& ch, const JamProvider& jam, std::size_t trials,
                              StreamKey key, unsigned threads = 1);

/// Binary container: "FHCB", u32 version, u64 K, n, M, f64 gamma, then
/// M*K*n little-endian doubles (codeword-major, each row-major).
void write_codebook(std::ostream& out, const Codebook& cb);
Codebook read_codebook(std::istream& in);

} // namespace fhjam
