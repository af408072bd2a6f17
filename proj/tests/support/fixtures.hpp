#pragma once

#include <sfsn/core.hpp>
#include <sfsn/degrade.hpp>
#include <sfsn/image_io.hpp>

#include <filesystem>
#include <random>
#include <string>

namespace sfsn::fixtures {

inline std::filesystem::path data_dir()
{
    return SFSN_TEST_DATA_DIR;
}

/// Natural photographs shipped under tests/data.
inline std::vector<std::string> photo_names()
{
    return {"camera.png", "astronaut.png", "coffee.png", "chelsea.png"};
}

inline GrayImage load_photo(const std::string& name)
{
    return load_image(data_dir() / name);
}

/// Uniform noise in [lo, hi].
inline GrayImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng, double lo = 0.0,
                              double hi = 255.0)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> data(w * h);
    for (double& v : data)
        v = dist(rng);
    return GrayImage(w, h, std::move(data));
}

/// Smooth structured content: blurred noise plus a gradient, in [0, 255].
inline GrayImage textured_image(std::size_t w, std::size_t h, std::mt19937_64& rng)
{
    GrayImage base = gaussian_blur(random_image(w, h, rng), 1.5);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double g = 60.0 * static_cast<double>(x + y) / static_cast<double>(w + h);
            base(x, y) = std::clamp(0.7 * base(x, y) + g + 10.0, 0.0, 255.0);
        }
    return base;
}

inline double max_abs_diff(const GrayImage& a, const GrayImage& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.pixels()[i] - b.pixels()[i]));
    return m;
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        std::mt19937_64 rng(rd());
        path_ = std::filesystem::temp_directory_path() / ("sfsn_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace sfsn::fixtures
