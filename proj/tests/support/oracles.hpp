#pragma once

// Independent reference implementations used only by the test suites. They
// share no code path with the library beyond the image container.

#include <sfsn/core.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace sfsn::oracle {

/// Materializes every window pair, computes two-pass population moments and
/// evaluates the local kernel directly; returns the plain mean.
inline double sf_subband_naive(const GrayImage& x, const GrayImage& y, std::size_t win, std::size_t stride,
                               double c)
{
    double total = 0.0;
    std::size_t count = 0;
    std::vector<double> px, py;
    for (std::size_t top = 0; top + win <= x.height(); top += stride) {
        for (std::size_t left = 0; left + win <= x.width(); left += stride) {
            px.clear();
            py.clear();
            for (std::size_t r = 0; r < win; ++r)
                for (std::size_t col = 0; col < win; ++col) {
                    px.push_back(x(left + col, top + r));
                    py.push_back(y(left + col, top + r));
                }
            const auto n = static_cast<double>(px.size());
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < px.size(); ++i) {
                mx += px[i];
                my += py[i];
            }
            mx /= n;
            my /= n;
            double vx = 0, vy = 0, cxy = 0;
            for (std::size_t i = 0; i < px.size(); ++i) {
                vx += (px[i] - mx) * (px[i] - mx);
                vy += (py[i] - my) * (py[i] - my);
                cxy += (px[i] - mx) * (py[i] - my);
            }
            vx /= n;
            vy /= n;
            cxy /= n;
            total += (cxy + c) / (std::sqrt(vx) * std::sqrt(vy) + c);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

/// Bin counts by linear search over explicit edges [e_i, e_{i+1}); values
/// outside the range go to the end bins.
inline std::vector<std::uint64_t> bin_counts_naive(const std::vector<double>& values, std::size_t bins, double lo,
                                                   double hi)
{
    std::vector<std::uint64_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : values) {
        std::size_t idx = bins - 1;
        if (v < lo + width) {
            idx = 0;
        } else {
            for (std::size_t b = 1; b < bins; ++b) {
                const double upper = lo + width * static_cast<double>(b + 1);
                if (v < upper) {
                    idx = b;
                    break;
                }
            }
        }
        ++counts[idx];
    }
    return counts;
}

/// O(n²) average ranks: rank = 1 + #less + (#equal - 1) / 2.
inline std::vector<double> rank_naive(const std::vector<double>& v)
{
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (double w : v) {
            if (w < v[i])
                ++less;
            else if (w == v[i])
                ++equal;
        }
        r[i] = 1.0 + static_cast<double>(less) + (static_cast<double>(equal) - 1.0) / 2.0;
    }
    return r;
}

/// Two-pass Pearson correlation from the covariance definition.
inline double pearson_naive(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto n = static_cast<double>(a.size());
    long double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    long double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return static_cast<double>(cov / std::sqrt(va * vb));
}

inline double srcc_naive(const std::vector<double>& a, const std::vector<double>& b)
{
    return pearson_naive(rank_naive(a), rank_naive(b));
}

/// 1 - 6Σd²/(n(n²-1)); valid only without ties.
inline double srcc_shortcut(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto ra = rank_naive(a), rb = rank_naive(b);
    double d2 = 0;
    for (std::size_t i = 0; i < ra.size(); ++i)
        d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const auto n = static_cast<double>(a.size());
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

/// Entropy in bits straight from counts.
inline double entropy_naive(const std::vector<std::uint64_t>& counts)
{
    double total = 0;
    for (auto c : counts)
        total += static_cast<double>(c);
    double h = 0;
    for (auto c : counts)
        if (c)
            h += -(static_cast<double>(c) / total) * std::log(static_cast<double>(c) / total) / std::log(2.0);
    return h;
}

} // namespace sfsn::oracle
