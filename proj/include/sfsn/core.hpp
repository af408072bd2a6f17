#pragma once

// Shared image and configuration types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfsn {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ImageTooSmall : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// GrayImage

/// Single-channel real-valued plane, row-major. Pixel intensities use the
/// nominal 8-bit range [0, 255]; transform coefficients share the type.
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(std::size_t width, std::size_t height, double fill = 0.0)
        : width_(width), height_(height), data_(width * height, fill)
    {
        check_shape();
        if (!std::isfinite(fill))
            throw InvalidArgument("GrayImage: fill value is not finite");
    }

    GrayImage(std::size_t width, std::size_t height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        check_shape();
        if (data_.size() != width_ * height_)
            throw InvalidArgument("GrayImage: data length " + std::to_string(data_.size()) +
                                  " != " + std::to_string(width_) + "x" + std::to_string(height_));
        for (double v : data_)
            if (!std::isfinite(v))
                throw InvalidArgument("GrayImage: non-finite sample");
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x]; }
    double& operator()(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }

    std::span<const double> pixels() const noexcept { return data_; }
    std::span<double> pixels() noexcept { return data_; }

    std::span<const double> row(std::size_t y) const noexcept { return {data_.data() + y * width_, width_}; }
    std::span<double> row(std::size_t y) noexcept { return {data_.data() + y * width_, width_}; }

    bool same_shape(const GrayImage& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    void check_shape() const
    {
        if (width_ == 0 || height_ == 0)
            throw InvalidArgument("GrayImage: width and height must be >= 1");
    }

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

/// Coefficient planes reuse the image type.
using Plane = GrayImage;

inline std::string shape_string(const GrayImage& img)
{
    return std::to_string(img.width()) + "x" + std::to_string(img.height());
}

/// BT.601 luma. Planes must share dimensions.
inline GrayImage to_gray(const GrayImage& r, const GrayImage& g, const GrayImage& b)
{
    if (!r.same_shape(g) || !r.same_shape(b))
        throw DimensionMismatch("to_gray: channel planes differ in size (" + shape_string(r) + ", " +
                                shape_string(g) + ", " + shape_string(b) + ")");
    std::vector<double> out(r.size());
    auto rp = r.pixels(), gp = g.pixels(), bp = b.pixels();
    // 0.299 R + 0.587 G + 0.114 B, arranged so that R = G = B maps to G exactly.
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = gp[i] + 0.299 * (rp[i] - gp[i]) + 0.114 * (bp[i] - gp[i]);
    return GrayImage(r.width(), r.height(), std::move(out));
}

/// Reference and test must be aligned; we never resample.
inline void validate_pair(const GrayImage& x, const GrayImage& y)
{
    if (!x.same_shape(y))
        throw DimensionMismatch("reference is " + shape_string(x) + " but test is " + shape_string(y));
}

// ---------------------------------------------------------------------------
// MetricConfig

enum class TransformMode { Laplacian, Lowpass };

inline const char* to_string(TransformMode m) noexcept
{
    return m == TransformMode::Laplacian ? "laplacian" : "lowpass";
}

inline TransformMode parse_transform_mode(const std::string& s)
{
    if (s == "laplacian")
        return TransformMode::Laplacian;
    if (s == "lowpass")
        return TransformMode::Lowpass;
    throw InvalidConfig("unknown transform mode '" + s + "' (expected laplacian|lowpass)");
}

/// Published MS-SSIM scale weights, finest scale first.
inline constexpr double kMsSsimWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

/// Scale weights for K scales. K = 5 gives the MS-SSIM weights verbatim;
/// K < 5 takes the first K and renormalizes them to unit sum; K > 5 is uniform.
inline std::vector<double> default_alpha(std::size_t scales)
{
    if (scales == 0)
        throw InvalidConfig("scales must be >= 1");
    if (scales == 5)
        return {std::begin(kMsSsimWeights), std::end(kMsSsimWeights)};
    if (scales > 5)
        return std::vector<double>(scales, 1.0 / static_cast<double>(scales));
    std::vector<double> alpha(kMsSsimWeights, kMsSsimWeights + scales);
    const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (double& a : alpha)
        a /= total;
    return alpha;
}

struct MetricConfig {
    std::size_t scales = 5;
    std::vector<double> alpha = default_alpha(5);
    std::size_t window_size = 11;
    std::size_t window_stride = 1;
    double stabilizer = (0.03 * 255.0) * (0.03 * 255.0) / 2.0;
    std::size_t histogram_bins = 511;
    double histogram_lo = -255.0;
    double histogram_hi = 255.0;
    double w_f = 0.9;
    double w_n = 0.1;
    TransformMode transform_mode = TransformMode::Laplacian;
    bool sn_normalized = false;

    /// Changes K and resets alpha to default_alpha(K).
    MetricConfig& set_scales(std::size_t k)
    {
        scales = k;
        alpha = default_alpha(k);
        return *this;
    }

    friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

/// Checks the size-independent invariants. Image-size constraints are
/// enforced when a pyramid is built.
inline void validate(const MetricConfig& cfg)
{
    if (cfg.scales < 1)
        throw InvalidConfig("scales must be >= 1");
    if (cfg.alpha.size() != cfg.scales)
        throw InvalidConfig("alpha has " + std::to_string(cfg.alpha.size()) + " weights for " +
                            std::to_string(cfg.scales) + " scales");
    for (double a : cfg.alpha)
        if (!(a > 0.0) || !std::isfinite(a))
            throw InvalidConfig("alpha weights must be positive and finite");
    if (cfg.window_size < 3 || cfg.window_size % 2 == 0)
        throw InvalidConfig("window_size must be odd and >= 3");
    if (cfg.window_stride < 1)
        throw InvalidConfig("window_stride must be >= 1");
    if (!(cfg.stabilizer > 0.0) || !std::isfinite(cfg.stabilizer))
        throw InvalidConfig("stabilizer C must be positive");
    if (cfg.histogram_bins < 2)
        throw InvalidConfig("histogram_bins must be >= 2");
    if (!(cfg.histogram_hi > cfg.histogram_lo) || !std::isfinite(cfg.histogram_lo) ||
        !std::isfinite(cfg.histogram_hi))
        throw InvalidConfig("histogram range must satisfy lo < hi");
    if (!std::isfinite(cfg.w_f) || !std::isfinite(cfg.w_n))
        throw InvalidConfig("fusion weights must be finite");
}

/// Dimension of pyramid level `level` (0-based) for an input dimension `n`:
/// each decimation keeps ceil(n / 2) samples.
constexpr std::size_t level_dimension(std::size_t n, std::size_t level) noexcept
{
    for (std::size_t k = 0; k < level; ++k)
        n = (n + 1) / 2;
    return n;
}

/// Largest K whose coarsest level still holds one window in both axes (0 if none).
constexpr std::size_t max_scales(std::size_t width, std::size_t height, std::size_t window) noexcept
{
    if (window < 2)
        return 0;
    std::size_t k = 0;
    while (level_dimension(width, k) >= window && level_dimension(height, k) >= window)
        ++k;
    return k;
}

namespace detail {

inline void append_double(std::string& out, double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Canonical text form of every field; input to the digest.
inline std::string canonical_string(const MetricConfig& cfg)
{
    std::string s = "scales=" + std::to_string(cfg.scales) + ";alpha=";
    for (std::size_t i = 0; i < cfg.alpha.size(); ++i) {
        if (i)
            s += ',';
        detail::append_double(s, cfg.alpha[i]);
    }
    s += ";window=" + std::to_string(cfg.window_size);
    s += ";stride=" + std::to_string(cfg.window_stride);
    s += ";C=";
    detail::append_double(s, cfg.stabilizer);
    s += ";bins=" + std::to_string(cfg.histogram_bins);
    s += ";range=";
    detail::append_double(s, cfg.histogram_lo);
    s += ',';
    detail::append_double(s, cfg.histogram_hi);
    s += ";wf=";
    detail::append_double(s, cfg.w_f);
    s += ";wn=";
    detail::append_double(s, cfg.w_n);
    s += ";mode=";
    s += to_string(cfg.transform_mode);
    s += ";sn_normalized=";
    s += cfg.sn_normalized ? '1' : '0';
    return s;
}

/// Stable 64-bit FNV-1a digest of the canonical config text, as 16 hex digits.
inline std::string config_digest(const MetricConfig& cfg)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a(canonical_string(cfg))));
    return buf;
}

} // namespace sfsn
