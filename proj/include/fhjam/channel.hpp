#pragma once

// The frequency-hopping channel: K parallel additive-noise subbands. One
// channel use maps a sender symbol (amplitude on one band) and a jammer
// symbol (amplitudes on a band subset) to
//
//     y = x e_k + s o e_I + N
//
// Band and message indices are zero-based throughout the library; the CLI
// and config files use one-based band numbers.

#include "fhjam/error.hpp"
#include "fhjam/rng.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace fhjam {

/// Real K x n matrix, row-major. Column i is the i-th channel input/output
/// vector; row k is the time series on band k.
class BlockMatrix {
public:
    BlockMatrix() = default;
    BlockMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    BlockMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t k, std::size_t i) noexcept { return data_[k * cols_ + i]; }
    double operator()(std::size_t k, std::size_t i) const noexcept { return data_[k * cols_ + i]; }

    std::span<double> row(std::size_t k) noexcept { return {data_.data() + k * cols_, cols_}; }
    std::span<const double> row(std::size_t k) const noexcept { return {data_.data() + k * cols_, cols_}; }
    std::vector<double> column(std::size_t i) const;

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    /// Sum of squared entries.
    double power() const noexcept;
    /// Number of nonzero entries in column i.
    std::size_t column_support(std::size_t i) const noexcept;
    bool all_finite() const noexcept;

    bool same_shape(const BlockMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    BlockMatrix& operator+=(const BlockMatrix& other);
    BlockMatrix& operator-=(const BlockMatrix& other);
    BlockMatrix& operator*=(double factor) noexcept;

    friend bool operator==(const BlockMatrix&, const BlockMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b);
BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b);

struct SupportPoint {
    double value;
    double probability;
};

struct GaussianNoise {};

/// Per-band finite-support noise laws. Each band must be mean-zero.
struct FiniteSupportNoise {
    std::vector<std::vector<SupportPoint>> bands;
};

using NoiseKind = std::variant<GaussianNoise, FiniteSupportNoise>;

class FhChannel {
public:
    /// Gaussian noise with the given per-band variances.
    explicit FhChannel(std::vector<double> sigma2);
    /// Finite-support noise; the variances are the laws' second moments.
    explicit FhChannel(FiniteSupportNoise noise);
    /// Finite-support noise with declared variances that must match the
    /// second moments to 1e-9.
    FhChannel(std::vector<double> sigma2, NoiseKind noise);

    std::size_t bands() const noexcept { return sigma2_.size(); }
    std::span<const double> sigma2() const noexcept { return sigma2_; }
    double sigma2(std::size_t k) const { return sigma2_.at(k); }
    const NoiseKind& noise() const noexcept { return noise_; }
    bool gaussian() const noexcept { return std::holds_alternative<GaussianNoise>(noise_); }

    friend bool operator==(const FhChannel& a, const FhChannel& b);

private:
    void validate() const;

    std::vector<double> sigma2_;
    NoiseKind noise_;
};

struct SenderSymbol {
    double x = 0.0;
    std::size_t band = 0;
};

/// One jammer channel use: a band subset and a length-K amplitude vector
/// that vanishes off the subset.
class JamSymbol {
public:
    JamSymbol() = default;
    JamSymbol(std::vector<std::size_t> bands, std::vector<double> s);

    static JamSymbol none(std::size_t K) { return JamSymbol({}, std::vector<double>(K, 0.0)); }

    std::span<const std::size_t> bands() const noexcept { return bands_; }
    std::span<const double> amplitudes() const noexcept { return s_; }
    double power() const noexcept;
    /// True iff the subset has at most J bands.
    bool within(std::size_t J) const noexcept { return bands_.size() <= J; }

private:
    std::vector<std::size_t> bands_;
    std::vector<double> s_;
};

/// Single channel use with caller-supplied noise vector.
std::vector<double> transmit(const FhChannel& ch, const SenderSymbol& sym, const JamSymbol& jam,
                             std::span<const double> noise);

/// K x n noise matrix. Column i is drawn from Stream(key.child(i)).
BlockMatrix sample_noise(const FhChannel& ch, std::size_t n, StreamKey key);

/// codeword + jam + sample_noise(ch, n, key).
BlockMatrix transmit_block(const FhChannel& ch, const BlockMatrix& codeword, const BlockMatrix& jam, StreamKey key);

} // namespace fhjam
