#pragma once

// Multi-scale decomposition: low-pass (Gaussian) and Laplacian band-pass
// pyramids built on the 5-tap binomial kernel.

#include <sfsn/core.hpp>

#include <array>
#include <optional>

namespace sfsn {

struct Pyramid {
    std::vector<Plane> levels;      // finest first
    TransformMode mode = TransformMode::Laplacian;
    std::optional<Plane> residual;  // Laplacian mode only
};

namespace detail {

inline constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
inline constexpr std::array<double, 5> kBinomialUp = {1.0 / 8, 4.0 / 8, 6.0 / 8, 4.0 / 8, 1.0 / 8};

/// Mirror index into [0, n) without repeating the edge sample (…2 1 | 0 1 2 … n-2 n-1 | n-2 …).
inline std::size_t reflect(std::ptrdiff_t i, std::size_t n) noexcept
{
    if (n == 1)
        return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    i %= period;
    if (i < 0)
        i += period;
    if (i >= static_cast<std::ptrdiff_t>(n))
        i = period - i;
    return static_cast<std::size_t>(i);
}

/// Horizontal pass evaluated at columns 0, step, 2·step, …
template <std::size_t N>
Plane filter_rows(const Plane& in, const std::array<double, N>& kernel, std::size_t step = 1)
{
    constexpr auto radius = static_cast<std::ptrdiff_t>(N / 2);
    const std::size_t w = in.width(), h = in.height();
    const std::size_t out_w = (w + step - 1) / step;
    Plane out(out_w, h);
    for (std::size_t y = 0; y < h; ++y) {
        auto src = in.row(y);
        auto dst = out.row(y);
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            const auto x = static_cast<std::ptrdiff_t>(ox * step);
            double acc = 0.0;
            for (std::ptrdiff_t t = -radius; t <= radius; ++t)
                acc += kernel[static_cast<std::size_t>(t + radius)] * src[reflect(x + t, w)];
            dst[ox] = acc;
        }
    }
    return out;
}

/// Vertical pass evaluated at rows 0, step, 2·step, …
template <std::size_t N>
Plane filter_cols(const Plane& in, const std::array<double, N>& kernel, std::size_t step = 1)
{
    constexpr auto radius = static_cast<std::ptrdiff_t>(N / 2);
    const std::size_t w = in.width(), h = in.height();
    const std::size_t out_h = (h + step - 1) / step;
    Plane out(w, out_h);
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        const auto y = static_cast<std::ptrdiff_t>(oy * step);
        auto dst = out.row(oy);
        for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
            const double k = kernel[static_cast<std::size_t>(t + radius)];
            auto src = in.row(reflect(y + t, h));
            for (std::size_t x = 0; x < w; ++x)
                dst[x] += k * src[x];
        }
    }
    return out;
}

inline Plane subtract(const Plane& a, const Plane& b)
{
    std::vector<double> out(a.size());
    auto ap = a.pixels(), bp = b.pixels();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = ap[i] - bp[i];
    return Plane(a.width(), a.height(), std::move(out));
}

inline Plane add(const Plane& a, const Plane& b)
{
    std::vector<double> out(a.size());
    auto ap = a.pixels(), bp = b.pixels();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = ap[i] + bp[i];
    return Plane(a.width(), a.height(), std::move(out));
}

} // namespace detail

/// Binomial low-pass followed by keeping even-indexed rows and columns.
inline Plane pyr_reduce(const Plane& in)
{
    return detail::filter_cols(detail::filter_rows(in, detail::kBinomial, 2), detail::kBinomial, 2);
}

/// Zero-insertion upsampling to width × height followed by the binomial
/// kernel with gain 2 per axis. `coarse` must be ceil(width/2) × ceil(height/2).
inline Plane pyr_expand(const Plane& coarse, std::size_t width, std::size_t height)
{
    if (coarse.width() != (width + 1) / 2 || coarse.height() != (height + 1) / 2)
        throw DimensionMismatch("pyr_expand: " + shape_string(coarse) + " cannot expand to " +
                                std::to_string(width) + "x" + std::to_string(height));
    Plane up(width, height);
    for (std::size_t y = 0; y < coarse.height(); ++y)
        for (std::size_t x = 0; x < coarse.width(); ++x)
            up(2 * x, 2 * y) = coarse(x, y);
    return detail::filter_cols(detail::filter_rows(up, detail::kBinomialUp), detail::kBinomialUp);
}

inline Pyramid decompose(const GrayImage& img, const MetricConfig& cfg)
{
    validate(cfg);
    const std::size_t k = cfg.scales;
    const std::size_t cw = level_dimension(img.width(), k - 1);
    const std::size_t ch = level_dimension(img.height(), k - 1);
    if (cw < cfg.window_size || ch < cfg.window_size)
        throw ImageTooSmall("image " + shape_string(img) + " gives a " + std::to_string(cw) + "x" +
                            std::to_string(ch) + " level at scale " + std::to_string(k) +
                            ", smaller than the " + std::to_string(cfg.window_size) + "-pixel window");

    Pyramid pyr;
    pyr.mode = cfg.transform_mode;
    pyr.levels.reserve(k);

    if (cfg.transform_mode == TransformMode::Lowpass) {
        pyr.levels.push_back(img);
        for (std::size_t i = 1; i < k; ++i)
            pyr.levels.push_back(pyr_reduce(pyr.levels.back()));
        return pyr;
    }

    Plane current = img;
    for (std::size_t i = 0; i < k; ++i) {
        Plane coarser = pyr_reduce(current);
        pyr.levels.push_back(detail::subtract(current, pyr_expand(coarser, current.width(), current.height())));
        current = std::move(coarser);
    }
    pyr.residual = std::move(current);
    return pyr;
}

/// Inverse of a Laplacian decomposition: expand the residual and add band-pass
/// levels coarse to fine.
inline GrayImage reconstruct(const Pyramid& pyr)
{
    if (pyr.mode != TransformMode::Laplacian)
        throw InvalidArgument("reconstruct: only Laplacian pyramids are invertible");
    if (!pyr.residual || pyr.levels.empty())
        throw InvalidArgument("reconstruct: pyramid has no residual or no levels");
    Plane img = *pyr.residual;
    for (auto it = pyr.levels.rbegin(); it != pyr.levels.rend(); ++it)
        img = detail::add(pyr_expand(img, it->width(), it->height()), *it);
    return img;
}

} // namespace sfsn
