#include <gtest/gtest.h>

#include <sfsn/fidelity.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace sfsn;
using sfsn::fixtures::random_image;

namespace {

constexpr double kC = 29.26125;

GrayImage ramp_patch(std::size_t n)
{
    // values i - mean for i = 0..n*n-1: zero mean, variance (N^2 - 1) / 12
    std::vector<double> v(n * n);
    const double mean = static_cast<double>(n * n - 1) / 2.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<double>(i) - mean;
    return GrayImage(n, n, std::move(v));
}

GrayImage negate(const GrayImage& img)
{
    GrayImage out = img;
    for (double& v : out.pixels())
        v = -v;
    return out;
}

} // namespace

TEST(SfLocal, IdenticalPatches)
{
    PatchStats s{3.0, 3.0, 9.0};
    EXPECT_EQ(sf_local(s, kC), 1.0);
}

TEST(SfLocal, FlatPatchesAreStabilized)
{
    EXPECT_EQ(sf_local(PatchStats{0.0, 0.0, 0.0}, kC), 1.0);
    EXPECT_EQ(sf_local(PatchStats{0.0, 0.0, 0.0}, 1e-9), 1.0);
}

TEST(SfLocal, NegatedRampPatch)
{
    const auto x = ramp_patch(11);
    const auto y = negate(x);
    const double var = (121.0 * 121.0 - 1.0) / 12.0;  // 1220
    const double expected = (-var + kC) / (var + kC);

    // brute-force moments
    double vx = 0, vy = 0, cxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        vx += x.pixels()[i] * x.pixels()[i];
        vy += y.pixels()[i] * y.pixels()[i];
        cxy += x.pixels()[i] * y.pixels()[i];
    }
    vx /= 121.0;
    vy /= 121.0;
    cxy /= 121.0;
    EXPECT_NEAR(vx, var, 1e-9);
    EXPECT_NEAR(sf_local(PatchStats{std::sqrt(vx), std::sqrt(vy), cxy}, kC), expected, 1e-14);

    MetricConfig cfg;
    EXPECT_NEAR(sf_subband(x, y, cfg), expected, 1e-12);
    EXPECT_NEAR(sf_subband(x, y, cfg), oracle::sf_subband_naive(x, y, 11, 1, kC), 1e-12);
}

TEST(SfLocal, BoundedByCauchySchwarzProperty)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> sd(0.0, 80.0), unit(-1.0, 1.0), cdist(1e-3, 100.0);
    for (int i = 0; i < 10000; ++i) {
        const double sx = sd(rng), sy = sd(rng);
        const PatchStats s{sx, sy, unit(rng) * sx * sy};
        const double v = sf_local(s, cdist(rng));
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(PatchStats, FromSumsRespectsBounds)
{
    // one sample repeated: variance 0 even with cancellation
    const auto s = patch_stats_from_sums(121 * 200.1, 121 * 3.0, 121 * 200.1 * 200.1, 121 * 9.0, 121 * 600.3, 121);
    EXPECT_GE(s.sigma_x, 0.0);
    EXPECT_LE(std::abs(s.sigma_xy), s.sigma_x * s.sigma_y + 1e-300);
}

TEST(SfSubband, IdentityIsExactlyOne)
{
    std::mt19937_64 rng(8);
    MetricConfig cfg;
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_image(11 + rng() % 40, 11 + rng() % 40, rng);
        EXPECT_EQ(sf_subband(x, x, cfg), 1.0);
    }
    GrayImage flat(20, 20, 17.0);
    EXPECT_EQ(sf_subband(flat, flat, cfg), 1.0);
}

TEST(SfSubband, ConstantOffsetLeavesValueAtOne)
{
    std::mt19937_64 rng(12);
    MetricConfig cfg;
    const auto x = random_image(32, 32, rng);
    GrayImage y = x;
    for (double& v : y.pixels())
        v += 5.0;
    EXPECT_NEAR(sf_subband(x, y, cfg), 1.0, 1e-12);
}

TEST(SfSubband, MatchesBruteForceOracle)
{
    std::mt19937_64 rng(13);
    MetricConfig cfg;
    const auto x = random_image(32, 32, rng), y = random_image(32, 32, rng);
    EXPECT_NEAR(sf_subband(x, y, cfg), oracle::sf_subband_naive(x, y, 11, 1, cfg.stabilizer), 1e-10);
}

TEST(SfSubband, OracleEquivalenceProperty)
{
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> noise(-30.0, 30.0);
    for (int trial = 0; trial < 40; ++trial) {
        MetricConfig cfg;
        cfg.window_size = std::array<std::size_t, 4>{3, 5, 7, 11}[rng() % 4];
        cfg.window_stride = 1 + rng() % 3;
        cfg.stabilizer = std::array<double, 3>{0.01, 1.0, 29.26125}[rng() % 3];
        const std::size_t w = cfg.window_size + rng() % (49 - cfg.window_size);
        const std::size_t h = cfg.window_size + rng() % (49 - cfg.window_size);
        const auto x = random_image(w, h, rng, -128.0, 128.0);
        GrayImage y = x;
        for (double& v : y.pixels())
            v = 0.6 * v + noise(rng);
        const double oracle_value =
            oracle::sf_subband_naive(x, y, cfg.window_size, cfg.window_stride, cfg.stabilizer);
        EXPECT_NEAR(sf_subband(x, y, cfg), oracle_value, 1e-10) << w << "x" << h;
    }
}

TEST(SfSubband, SymmetricAndShiftInvariantProperty)
{
    std::mt19937_64 rng(15);
    MetricConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t w = 11 + rng() % 40, h = 11 + rng() % 40;
        const auto a = random_image(w, h, rng), b = random_image(w, h, rng);
        EXPECT_EQ(sf_subband(a, b, cfg), sf_subband(b, a, cfg));
        GrayImage a2 = a, b2 = b;
        for (double& v : a2.pixels())
            v += 12.0;
        for (double& v : b2.pixels())
            v += 12.0;
        EXPECT_NEAR(sf_subband(a2, b2, cfg), sf_subband(a, b, cfg), 1e-10);
        for (double v : sf_local_map(a, b, cfg)) {
            ASSERT_GE(v, -1.0);
            ASSERT_LE(v, 1.0);
        }
    }
}

TEST(SfSubband, Errors)
{
    MetricConfig cfg;
    EXPECT_THROW(sf_subband(GrayImage(10, 30), GrayImage(10, 30), cfg), ImageTooSmall);
    EXPECT_THROW(sf_subband(GrayImage(20, 30), GrayImage(30, 20), cfg), DimensionMismatch);
}

TEST(SfSubband, StrideSamplesPositions)
{
    MetricConfig cfg;
    cfg.window_stride = 4;
    // 11 + 4*3 = 23: 4 positions per axis
    EXPECT_EQ(sf_local_map(GrayImage(23, 23), GrayImage(23, 23), cfg).size(), 16u);
    EXPECT_EQ(sf_local_map(GrayImage(26, 11), GrayImage(26, 11), cfg).size(), 4u);
}

TEST(SfOverall, IdentityPyramids)
{
    std::mt19937_64 rng(16);
    for (auto mode : {TransformMode::Laplacian, TransformMode::Lowpass}) {
        MetricConfig cfg;
        cfg.transform_mode = mode;
        const auto p = decompose(random_image(200, 180, rng), cfg);
        const auto r = sf_overall_detailed(p, p, cfg);
        EXPECT_EQ(r.sf, 1.0);
        EXPECT_FALSE(r.clamped);
        EXPECT_EQ(r.per_scale.size(), 5u);
    }
}

TEST(SfOverall, SingleScaleEqualsSubband)
{
    std::mt19937_64 rng(17);
    MetricConfig cfg;
    cfg.set_scales(1);
    ASSERT_EQ(cfg.alpha, std::vector<double>{1.0});
    const auto x = random_image(40, 40, rng), y = random_image(40, 40, rng);
    const auto px = decompose(x, cfg), py = decompose(y, cfg);
    const double sub = sf_subband(px.levels[0], py.levels[0], cfg);
    if (sub >= kScaleFloor)
        EXPECT_DOUBLE_EQ(sf_overall(px, py, cfg), sub);
}

TEST(SfOverall, WeightedGeometricProduct)
{
    // Pyramids whose levels give exactly known per-scale values: level k holds
    // a plane and a scaled copy mixed so that sf_subband is computed, then the
    // product is checked against pow of those values.
    MetricConfig cfg;
    cfg.set_scales(3);
    cfg.alpha = {0.2, 0.3, 0.5};
    std::mt19937_64 rng(18);
    Pyramid px, py;
    px.mode = py.mode = TransformMode::Lowpass;
    std::vector<double> per;
    for (int k = 0; k < 3; ++k) {
        auto a = random_image(30, 30, rng, -50, 50);
        auto b = a;
        auto n = random_image(30, 30, rng, -50, 50);
        for (std::size_t i = 0; i < b.size(); ++i)
            b.pixels()[i] = b.pixels()[i] + (0.3 + 0.4 * k) * n.pixels()[i];
        per.push_back(sf_subband(a, b, cfg));
        px.levels.push_back(a);
        py.levels.push_back(b);
    }
    const double expected = std::pow(per[0], 0.2) * std::pow(per[1], 0.3) * std::pow(per[2], 0.5);
    EXPECT_NEAR(sf_overall(px, py, cfg), expected, 1e-14);
}

TEST(SfOverall, ClosedFormProductExample)
{
    // 0.9^0.2 * 0.8^0.3 * 0.7^0.5, evaluated to 30 digits with mpmath
    const double oracle_value = 0.76616889767735062112;
    const double product = std::pow(0.9, 0.2) * std::pow(0.8, 0.3) * std::pow(0.7, 0.5);
    EXPECT_NEAR(product, oracle_value, 1e-15);
}

TEST(SfOverall, ClampsNegativeScales)
{
    MetricConfig cfg;
    cfg.set_scales(1);
    const auto x = ramp_patch(11);
    Pyramid px, py;
    px.mode = py.mode = TransformMode::Lowpass;
    px.levels = {x};
    py.levels = {negate(x)};
    const auto r = sf_overall_detailed(px, py, cfg);
    EXPECT_TRUE(r.clamped);
    EXPECT_LT(r.per_scale[0], 0.0);
    EXPECT_DOUBLE_EQ(r.sf, kScaleFloor);
    EXPECT_GT(r.sf, 0.0);
}

TEST(SfOverall, LevelCountMismatch)
{
    MetricConfig cfg;
    Pyramid p;
    p.levels = {Plane(20, 20), Plane(20, 20)};
    EXPECT_THROW(sf_overall(p, p, cfg), InvalidConfig);
}

TEST(Psnr, Cases)
{
    std::mt19937_64 rng(19);
    const auto x = random_image(16, 16, rng, 1.0, 250.0);
    EXPECT_TRUE(std::isinf(psnr(x, x)));
    GrayImage y = x;
    for (double& v : y.pixels())
        v += 1.0;
    EXPECT_NEAR(psnr(x, y), 48.130803608679103, 1e-9);
    EXPECT_NEAR(psnr(GrayImage(8, 8, 0.0), GrayImage(8, 8, 255.0)), 0.0, 1e-12);
    EXPECT_THROW(psnr(GrayImage(8, 8), GrayImage(8, 9)), DimensionMismatch);
}
