#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace yoloea {

/// Dense (n, c, h, w) tensor of doubles, row-major with channels major
/// within each sample.
class FeatureMap
{
public:
    struct Dims
    {
        std::size_t n = 0, c = 0, h = 0, w = 0;

        std::size_t size() const noexcept { return n * c * h * w; }
        std::size_t plane() const noexcept { return h * w; }
        friend bool operator==(const Dims&, const Dims&) = default;
    };

    FeatureMap() = default;
    /// Zero-filled map. Throws ShapeError if any dimension is zero.
    explicit FeatureMap(Dims dims, double fill = 0.0);
    /// Throws ShapeError if data.size() != dims.size().
    FeatureMap(Dims dims, std::vector<double> data);

    const Dims& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept
    {
        return data_[offset(n, c, y, x)];
    }
    double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept
    {
        return data_[offset(n, c, y, x)];
    }

    /// Spatial plane of sample n, channel c.
    std::span<double> plane(std::size_t n, std::size_t c) noexcept
    {
        return std::span<double>(data_).subspan(offset(n, c, 0, 0), dims_.plane());
    }
    std::span<const double> plane(std::size_t n, std::size_t c) const noexcept
    {
        return std::span<const double>(data_).subspan(offset(n, c, 0, 0), dims_.plane());
    }

    bool all_finite() const noexcept;

private:
    std::size_t offset(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept
    {
        return ((n * dims_.c + c) * dims_.h + y) * dims_.w + x;
    }

    Dims dims_;
    std::vector<double> data_;
};

/// One value per channel of a single sample.
using ChannelVector = std::vector<double>;

struct EcaConfig
{
    int gamma = 2;
    int b = 1;
};

/// Shared 1-D kernel over the channel axis, no bias.
struct EcaWeights
{
    std::vector<double> w;

    std::size_t k() const noexcept { return w.size(); }
};

/// Odd integer nearest to (log2(c) + b) / gamma; ties round up, never below 1.
int adaptive_kernel_size(std::size_t channels, const EcaConfig& cfg = {});

/// Deterministic kernel initialisation, uniform in [-0.5, 0.5].
EcaWeights random_eca_weights(std::size_t k, std::uint64_t seed);

/// Per-sample channel means over the spatial plane.
std::vector<ChannelVector> global_avg_pool(const FeatureMap& x);

/// Zero-padded cross-correlation, output length equals input length:
/// out[j] = sum_m w[m] * signal[j + m - (k - 1) / 2].
ChannelVector conv1d_same(std::span<const double> signal, const EcaWeights& weights);

struct EcaCache
{
    FeatureMap input;
    std::vector<ChannelVector> pooled;
    std::vector<ChannelVector> logits;
    /// Sigmoid of the logits, the per-channel attention weights.
    std::vector<ChannelVector> attention;
    EcaWeights weights;
};

struct EcaForward
{
    FeatureMap output;
    EcaCache cache;
};

/// out(i, j, :, :) = sigmoid(conv1d_same(gap(x)_i))_j * x(i, j, :, :).
/// Throws ShapeError unless k is odd and k <= 2c - 1.
EcaForward eca_forward(const FeatureMap& x, const EcaWeights& weights);

struct EcaGradients
{
    FeatureMap grad_input;
    std::vector<double> grad_weights;
};

/// Reverse-mode derivatives of eca_forward. Throws ShapeError when
/// grad_out does not match the cached input dims.
EcaGradients eca_backward(const EcaCache& cache, const FeatureMap& grad_out);

} // namespace yoloea
