#include "yoloea/attention.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "yoloea/errors.hpp"

namespace yoloea {

namespace {

double sigmoid(double z) noexcept
{
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_kernel(const EcaWeights& weights, std::size_t channels)
{
    const std::size_t k = weights.k();
    if (channels == 0)
        throw ShapeError("feature map has no channels");
    if (k == 0 || k % 2 == 0)
        throw ShapeError("kernel size must be odd, got " + std::to_string(k));
    if (k > 2 * channels - 1)
        throw ShapeError("kernel size " + std::to_string(k) + " exceeds 2c-1 for c=" +
                         std::to_string(channels));
}

} // namespace

FeatureMap::FeatureMap(Dims dims, double fill)
    : dims_(dims)
{
    if (dims.n == 0 || dims.c == 0 || dims.h == 0 || dims.w == 0)
        throw ShapeError("feature map dimensions must be positive");
    data_.assign(dims.size(), fill);
}

FeatureMap::FeatureMap(Dims dims, std::vector<double> data)
    : FeatureMap(dims)
{
    if (data.size() != dims.size())
        throw ShapeError("feature map data has " + std::to_string(data.size()) + " values, expected " +
                         std::to_string(dims.size()));
    data_ = std::move(data);
}

bool FeatureMap::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

int adaptive_kernel_size(std::size_t channels, const EcaConfig& cfg)
{
    if (channels == 0)
        throw std::invalid_argument("channel count must be positive");
    if (cfg.gamma < 1 || cfg.b < 0)
        throw std::invalid_argument("ECA config requires gamma >= 1 and b >= 0");

    const double t = (std::log2(static_cast<double>(channels)) + cfg.b) / cfg.gamma;
    if (t <= 1.0)
        return 1;
    // Largest odd integer <= t, then move up when t is at least as close to the next one.
    int lower = static_cast<int>(std::floor(t));
    if (lower % 2 == 0)
        --lower;
    return (t - lower >= 1.0) ? lower + 2 : lower;
}

EcaWeights random_eca_weights(std::size_t k, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    EcaWeights weights;
    weights.w.resize(k);
    for (double& v : weights.w)
        v = dist(rng);
    return weights;
}

std::vector<ChannelVector> global_avg_pool(const FeatureMap& x)
{
    const auto& d = x.dims();
    const double inv = 1.0 / static_cast<double>(d.plane());
    std::vector<ChannelVector> pooled(d.n, ChannelVector(d.c, 0.0));
    for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < d.c; ++j) {
            double sum = 0.0;
            for (double v : x.plane(i, j))
                sum += v;
            pooled[i][j] = sum * inv;
        }
    return pooled;
}

ChannelVector conv1d_same(std::span<const double> signal, const EcaWeights& weights)
{
    const auto c = static_cast<std::ptrdiff_t>(signal.size());
    const auto k = static_cast<std::ptrdiff_t>(weights.k());
    const std::ptrdiff_t pad = (k - 1) / 2;
    ChannelVector out(signal.size(), 0.0);
    for (std::ptrdiff_t j = 0; j < c; ++j) {
        double acc = 0.0;
        for (std::ptrdiff_t m = 0; m < k; ++m) {
            const std::ptrdiff_t src = j + m - pad;
            if (src >= 0 && src < c)
                acc += weights.w[static_cast<std::size_t>(m)] * signal[static_cast<std::size_t>(src)];
        }
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

EcaForward eca_forward(const FeatureMap& x, const EcaWeights& weights)
{
    const auto& d = x.dims();
    check_kernel(weights, d.c);

    EcaForward result{x, {}};
    EcaCache& cache = result.cache;
    cache.input = x;
    cache.weights = weights;
    cache.pooled = global_avg_pool(x);
    cache.logits.reserve(d.n);
    cache.attention.reserve(d.n);

    for (std::size_t i = 0; i < d.n; ++i) {
        ChannelVector z = conv1d_same(cache.pooled[i], weights);
        ChannelVector omega(d.c);
        std::transform(z.begin(), z.end(), omega.begin(), sigmoid);
        for (std::size_t j = 0; j < d.c; ++j)
            for (double& v : result.output.plane(i, j))
                v *= omega[j];
        cache.logits.push_back(std::move(z));
        cache.attention.push_back(std::move(omega));
    }
    return result;
}

EcaGradients eca_backward(const EcaCache& cache, const FeatureMap& grad_out)
{
    const auto& d = cache.input.dims();
    if (!(grad_out.dims() == d))
        throw ShapeError("gradient dims do not match the cached input");

    const auto c = static_cast<std::ptrdiff_t>(d.c);
    const auto k = static_cast<std::ptrdiff_t>(cache.weights.k());
    const std::ptrdiff_t pad = (k - 1) / 2;
    const double inv_plane = 1.0 / static_cast<double>(d.plane());

    EcaGradients grads{FeatureMap(d), std::vector<double>(cache.weights.k(), 0.0)};

    for (std::size_t i = 0; i < d.n; ++i) {
        const ChannelVector& omega = cache.attention[i];
        const ChannelVector& pooled = cache.pooled[i];

        // Hadamard product, then sigmoid.
        ChannelVector d_logit(d.c, 0.0);
        for (std::size_t j = 0; j < d.c; ++j) {
            const auto g = grad_out.plane(i, j);
            const auto xin = cache.input.plane(i, j);
            double d_omega = 0.0;
            for (std::size_t p = 0; p < g.size(); ++p)
                d_omega += g[p] * xin[p];
            d_logit[j] = d_omega * omega[j] * (1.0 - omega[j]);
        }

        // Cross-correlation: z[j] = sum_m w[m] s[j + m - pad].
        ChannelVector d_pooled(d.c, 0.0);
        for (std::ptrdiff_t j = 0; j < c; ++j) {
            const double dz = d_logit[static_cast<std::size_t>(j)];
            for (std::ptrdiff_t m = 0; m < k; ++m) {
                const std::ptrdiff_t src = j + m - pad;
                if (src < 0 || src >= c)
                    continue;
                grads.grad_weights[static_cast<std::size_t>(m)] += dz * pooled[static_cast<std::size_t>(src)];
                d_pooled[static_cast<std::size_t>(src)] += dz * cache.weights.w[static_cast<std::size_t>(m)];
            }
        }

        // Direct path through the product plus the mean-pooling path.
        for (std::size_t j = 0; j < d.c; ++j) {
            const auto g = grad_out.plane(i, j);
            auto gx = grads.grad_input.plane(i, j);
            const double pool_term = d_pooled[j] * inv_plane;
            for (std::size_t p = 0; p < g.size(); ++p)
                gx[p] = g[p] * omega[j] + pool_term;
        }
    }
    return grads;
}

} // namespace yoloea
