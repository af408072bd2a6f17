#pragma once

// Structural fidelity: the covariance-over-deviation kernel evaluated on
// sliding windows of each subband, averaged per subband, and combined across
// scales as a weighted geometric product.

#include <sfsn/core.hpp>
#include <sfsn/pyramid.hpp>

#include <limits>

namespace sfsn {

/// Population (divide-by-N) second moments of one window pair.
struct PatchStats {
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double sigma_xy = 0.0;
};

/// Per-scale values below this are clamped before exponentiation.
inline constexpr double kScaleFloor = 1e-6;

/// (σxy + C) / (σx·σy + C). In [-1, 1] whenever |σxy| ≤ σx·σy.
inline double sf_local(const PatchStats& s, double stabilizer) noexcept
{
    return (s.sigma_xy + stabilizer) / (s.sigma_x * s.sigma_y + stabilizer);
}

namespace detail {

/// Fixed-order pairwise summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v) noexcept
{
    if (v.size() <= 8) {
        double acc = 0.0;
        for (double d : v)
            acc += d;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Window sums at every (stride-sampled) valid position. Each sum is formed
/// directly from its window, so there is no running-sum drift.
inline std::vector<double> window_sums(std::span<const double> values, std::size_t width,
                                       std::size_t height, std::size_t win, std::size_t stride)
{
    const std::size_t nx = (width - win) / stride + 1;
    const std::size_t ny = (height - win) / stride + 1;
    std::vector<double> out(nx * ny);
    std::vector<double> col(width);
    for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t top = j * stride;
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t r = 0; r < win; ++r) {
            const double* src = values.data() + (top + r) * width;
            for (std::size_t x = 0; x < width; ++x)
                col[x] += src[x];
        }
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t left = i * stride;
            double acc = 0.0;
            for (std::size_t c = 0; c < win; ++c)
                acc += col[left + c];
            out[j * nx + i] = acc;
        }
    }
    return out;
}

} // namespace detail

/// Moments from raw window sums over n samples. Variances are floored at zero
/// and the covariance is clipped to the Cauchy–Schwarz bound.
inline PatchStats patch_stats_from_sums(double sx, double sy, double sxx, double syy, double sxy,
                                        double n) noexcept
{
    const double mx = sx / n;
    const double my = sy / n;
    const double vx = std::max(sxx / n - mx * mx, 0.0);
    const double vy = std::max(syy / n - my * my, 0.0);
    const double bound = std::sqrt(vx * vy);
    PatchStats s;
    s.sigma_x = std::sqrt(vx);
    s.sigma_y = std::sqrt(vy);
    s.sigma_xy = std::clamp(sxy / n - mx * my, -bound, bound);
    return s;
}

/// Every local fidelity value of one subband pair, in raster order of window positions.
inline std::vector<double> sf_local_map(const Plane& x, const Plane& y, const MetricConfig& cfg)
{
    validate_pair(x, y);
    const std::size_t win = cfg.window_size;
    if (x.width() < win || x.height() < win)
        throw ImageTooSmall("subband " + shape_string(x) + " is smaller than the " + std::to_string(win) +
                            "-pixel window");
    if (cfg.window_stride < 1)
        throw InvalidConfig("window_stride must be >= 1");

    const std::size_t w = x.width(), h = x.height();
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    auto xp = x.pixels(), yp = y.pixels();
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = xp[i] * xp[i];
        yy[i] = yp[i] * yp[i];
        xy[i] = xp[i] * yp[i];
    }
    const std::size_t stride = cfg.window_stride;
    const auto sx = detail::window_sums(xp, w, h, win, stride);
    const auto sy = detail::window_sums(yp, w, h, win, stride);
    const auto sxx = detail::window_sums(xx, w, h, win, stride);
    const auto syy = detail::window_sums(yy, w, h, win, stride);
    const auto sxy = detail::window_sums(xy, w, h, win, stride);

    const auto n = static_cast<double>(win * win);
    std::vector<double> local(sx.size());
    for (std::size_t i = 0; i < local.size(); ++i)
        local[i] = sf_local(patch_stats_from_sums(sx[i], sy[i], sxx[i], syy[i], sxy[i], n), cfg.stabilizer);
    return local;
}

/// Mean of the local fidelity values over all fully interior windows.
inline double sf_subband(const Plane& x, const Plane& y, const MetricConfig& cfg)
{
    const auto local = sf_local_map(x, y, cfg);
    return detail::pairwise_sum(local) / static_cast<double>(local.size());
}

struct FidelityResult {
    double sf = 1.0;
    std::vector<double> per_scale;
    bool clamped = false;  // some per-scale value fell below kScaleFloor
};

inline FidelityResult sf_overall_detailed(const Pyramid& px, const Pyramid& py, const MetricConfig& cfg)
{
    validate(cfg);
    if (px.levels.size() != cfg.alpha.size() || py.levels.size() != cfg.alpha.size())
        throw InvalidConfig("pyramids have " + std::to_string(px.levels.size()) + " and " +
                            std::to_string(py.levels.size()) + " levels but alpha has " +
                            std::to_string(cfg.alpha.size()) + " weights");
    if (px.mode != py.mode)
        throw InvalidArgument("reference and test pyramids use different transform modes");

    FidelityResult r;
    r.per_scale.reserve(px.levels.size());
    for (std::size_t k = 0; k < px.levels.size(); ++k) {
        double v = sf_subband(px.levels[k], py.levels[k], cfg);
        r.per_scale.push_back(v);
        if (v < kScaleFloor) {
            v = kScaleFloor;
            r.clamped = true;
        }
        r.sf *= std::pow(v, cfg.alpha[k]);
    }
    return r;
}

inline double sf_overall(const Pyramid& px, const Pyramid& py, const MetricConfig& cfg)
{
    return sf_overall_detailed(px, py, cfg).sf;
}

/// Peak signal-to-noise ratio in dB for peak 255; +inf when the images are identical.
inline double psnr(const GrayImage& x, const GrayImage& y)
{
    validate_pair(x, y);
    std::vector<double> sq(x.size());
    auto xp = x.pixels(), yp = y.pixels();
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const double d = xp[i] - yp[i];
        sq[i] = d * d;
    }
    const double mse = detail::pairwise_sum(sq) / static_cast<double>(sq.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace sfsn
