#include "fhjam/channel.hpp"

#include "fhjam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace fhjam {

BlockMatrix::BlockMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, "BlockMatrix: data size does not match rows*cols");
}

std::vector<double> BlockMatrix::column(std::size_t i) const {
    require(i < cols_, "BlockMatrix::column: index out of range");
    std::vector<double> c(rows_);
    for (std::size_t k = 0; k < rows_; ++k) c[k] = (*this)(k, i);
    return c;
}

double BlockMatrix::power() const noexcept {
    return kernels::dot(data_, data_);
}

std::size_t BlockMatrix::column_support(std::size_t i) const noexcept {
    std::size_t nz = 0;
    for (std::size_t k = 0; k < rows_; ++k)
        if ((*this)(k, i) != 0.0) ++nz;
    return nz;
}

bool BlockMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

BlockMatrix& BlockMatrix::operator+=(const BlockMatrix& other) {
    require(same_shape(other), "BlockMatrix: shape mismatch in +=");
    kernels::axpy(1.0, other.data_, data_);
    return *this;
}

BlockMatrix& BlockMatrix::operator-=(const BlockMatrix& other) {
    require(same_shape(other), "BlockMatrix: shape mismatch in -=");
    kernels::axpy(-1.0, other.data_, data_);
    return *this;
}

BlockMatrix& BlockMatrix::operator*=(double factor) noexcept {
    for (double& v : data_) v *= factor;
    return *this;
}

BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b) { return a += b; }
BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b) { return a -= b; }

namespace {

std::vector<double> second_moments(const FiniteSupportNoise& noise) {
    std::vector<double> m;
    m.reserve(noise.bands.size());
    for (const auto& band : noise.bands) {
        double acc = 0.0;
        for (const auto& [v, p] : band) acc += p * v * v;
        m.push_back(acc);
    }
    return m;
}

} // namespace

FhChannel::FhChannel(std::vector<double> sigma2) : sigma2_(std::move(sigma2)), noise_(GaussianNoise{}) {
    validate();
}

FhChannel::FhChannel(FiniteSupportNoise noise) : sigma2_(second_moments(noise)), noise_(std::move(noise)) {
    validate();
}

FhChannel::FhChannel(std::vector<double> sigma2, NoiseKind noise)
    : sigma2_(std::move(sigma2)), noise_(std::move(noise)) {
    validate();
}

void FhChannel::validate() const {
    require(!sigma2_.empty(), "FhChannel: need at least one band");
    for (double s : sigma2_) require(std::isfinite(s) && s > 0.0, "FhChannel: noise variances must be positive");
    if (const auto* fs = std::get_if<FiniteSupportNoise>(&noise_)) {
        require(fs->bands.size() == sigma2_.size(), "FhChannel: one finite-support law per band");
        for (std::size_t k = 0; k < fs->bands.size(); ++k) {
            const auto& band = fs->bands[k];
            require(!band.empty(), "FhChannel: empty finite-support law");
            double total = 0.0, mean = 0.0, second = 0.0;
            for (const auto& [v, p] : band) {
                require(std::isfinite(v) && p >= 0.0, "FhChannel: bad support point");
                total += p;
                mean += p * v;
                second += p * v * v;
            }
            require(std::abs(total - 1.0) <= 1e-12, "FhChannel: finite-support probabilities must sum to 1");
            require(std::abs(mean) <= 1e-9, "FhChannel: finite-support noise must be mean-zero");
            require(std::abs(second - sigma2_[k]) <= 1e-9, "FhChannel: second moment does not match sigma2");
        }
    }
}

bool operator==(const FhChannel& a, const FhChannel& b) {
    if (a.sigma2_ != b.sigma2_ || a.noise_.index() != b.noise_.index()) return false;
    const auto* fa = std::get_if<FiniteSupportNoise>(&a.noise_);
    if (fa == nullptr) return true;
    const auto& fb = std::get<FiniteSupportNoise>(b.noise_);
    if (fa->bands.size() != fb.bands.size()) return false;
    for (std::size_t k = 0; k < fa->bands.size(); ++k) {
        if (fa->bands[k].size() != fb.bands[k].size()) return false;
        for (std::size_t j = 0; j < fa->bands[k].size(); ++j)
            if (fa->bands[k][j].value != fb.bands[k][j].value ||
                fa->bands[k][j].probability != fb.bands[k][j].probability)
                return false;
    }
    return true;
}

JamSymbol::JamSymbol(std::vector<std::size_t> bands, std::vector<double> s) : bands_(std::move(bands)), s_(std::move(s)) {
    std::sort(bands_.begin(), bands_.end());
    require(std::adjacent_find(bands_.begin(), bands_.end()) == bands_.end(), "JamSymbol: duplicate band");
    for (std::size_t b : bands_) require(b < s_.size(), "JamSymbol: band index out of range");
    for (std::size_t l = 0; l < s_.size(); ++l) {
        if (s_[l] != 0.0)
            require(std::binary_search(bands_.begin(), bands_.end(), l),
                    "JamSymbol: nonzero amplitude outside the jammed band set");
    }
}

double JamSymbol::power() const noexcept {
    double acc = 0.0;
    for (double v : s_) acc += v * v;
    return acc;
}

std::vector<double> transmit(const FhChannel& ch, const SenderSymbol& sym, const JamSymbol& jam,
                             std::span<const double> noise) {
    const std::size_t K = ch.bands();
    require(sym.band < K, "transmit: sender band out of range");
    require(jam.amplitudes().size() == K, "transmit: jam vector length must equal K");
    require(noise.size() == K, "transmit: noise vector length must equal K");
    std::vector<double> y(K);
    for (std::size_t l = 0; l < K; ++l) y[l] = (l == sym.band ? sym.x : 0.0) + jam.amplitudes()[l] + noise[l];
    return y;
}

namespace {

double draw_finite(const std::vector<SupportPoint>& law, Stream& rng) {
    const double u = std::generate_canonical<double, 64>(rng);
    double cum = 0.0;
    for (const auto& [v, p] : law) {
        cum += p;
        if (u < cum) return v;
    }
    return law.back().value;
}

} // namespace

BlockMatrix sample_noise(const FhChannel& ch, std::size_t n, StreamKey key) {
    require(n >= 1, "sample_noise: blocklength must be positive");
    const std::size_t K = ch.bands();
    BlockMatrix out(K, n);
    if (ch.gaussian()) {
        std::vector<double> sd(K);
        for (std::size_t k = 0; k < K; ++k) sd[k] = std::sqrt(ch.sigma2(k));
        for (std::size_t i = 0; i < n; ++i) {
            Stream rng(key.child(i));
            std::normal_distribution<double> normal;
            for (std::size_t k = 0; k < K; ++k) out(k, i) = sd[k] * normal(rng);
        }
    } else {
        const auto& laws = std::get<FiniteSupportNoise>(ch.noise()).bands;
        for (std::size_t i = 0; i < n; ++i) {
            Stream rng(key.child(i));
            for (std::size_t k = 0; k < K; ++k) out(k, i) = draw_finite(laws[k], rng);
        }
    }
    return out;
}

BlockMatrix transmit_block(const FhChannel& ch, const BlockMatrix& codeword, const BlockMatrix& jam, StreamKey key) {
    require(codeword.rows() == ch.bands(), "transmit_block: codeword must have K rows");
    require(codeword.same_shape(jam), "transmit_block: codeword and jam shapes differ");
    const BlockMatrix noise = sample_noise(ch, codeword.cols(), key);
    BlockMatrix out(codeword.rows(), codeword.cols());
    kernels::add3(codeword.values(), jam.values(), noise.values(), out.values());
    return out;
}

} // namespace fhjam
