#pragma once

#include <sfsn/core.hpp>
#include <sfsn/pyramid.hpp>

namespace sfsn {

/// Unit-sum sampled Gaussian of radius ceil(3σ).
inline std::vector<double> gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidArgument("gaussian_kernel: sigma must be positive");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        total += v;
    }
    for (double& v : k)
        v /= total;
    return k;
}

/// Separable Gaussian blur with mirrored (edge not repeated) boundaries.
inline GrayImage gaussian_blur(const GrayImage& img, double sigma)
{
    const auto k = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
    const std::size_t w = img.width(), h = img.height();

    GrayImage tmp(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        auto src = img.row(y);
        auto dst = tmp.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       src[detail::reflect(static_cast<std::ptrdiff_t>(x) + t, w)];
            dst[x] = acc;
        }
    }
    GrayImage out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        auto dst = out.row(y);
        for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
            const double kv = k[static_cast<std::size_t>(t + radius)];
            auto src = tmp.row(detail::reflect(static_cast<std::ptrdiff_t>(y) + t, h));
            for (std::size_t x = 0; x < w; ++x)
                dst[x] += kv * src[x];
        }
    }
    return out;
}

} // namespace sfsn
