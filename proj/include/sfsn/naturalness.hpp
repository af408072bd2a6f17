#pragma once

// Statistical naturalness: Shannon entropy of the pooled subband coefficient
// histogram of the test image.

#include <sfsn/core.hpp>
#include <sfsn/pyramid.hpp>

namespace sfsn {

/// Uniform-width histogram over [lo, hi] with integer counts.
class CoefficientHistogram {
public:
    CoefficientHistogram(std::size_t bins, double lo, double hi)
        : lo_(lo), hi_(hi), counts_(bins, 0)
    {
        if (bins < 2)
            throw InvalidConfig("histogram needs at least 2 bins");
        if (!(hi > lo))
            throw InvalidConfig("histogram range must satisfy lo < hi");
    }

    std::size_t bins() const noexcept { return counts_.size(); }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double bin_width() const noexcept { return (hi_ - lo_) / static_cast<double>(counts_.size()); }

    /// Bin for a value; values outside [lo, hi] land in the end bins.
    std::size_t bin_index(double v) const noexcept
    {
        if (!(v > lo_))
            return 0;
        const double pos = (v - lo_) / (hi_ - lo_) * static_cast<double>(counts_.size());
        if (pos >= static_cast<double>(counts_.size()))
            return counts_.size() - 1;
        return static_cast<std::size_t>(pos);
    }

    void add(double v) noexcept
    {
        ++counts_[bin_index(v)];
        ++total_;
    }

    void add(std::span<const double> values) noexcept
    {
        for (double v : values)
            add(v);
    }

    /// Adds the counts of another histogram with identical binning.
    void merge(const CoefficientHistogram& other)
    {
        if (other.bins() != bins() || other.lo_ != lo_ || other.hi_ != hi_)
            throw InvalidArgument("cannot merge histograms with different binning");
        for (std::size_t i = 0; i < counts_.size(); ++i)
            counts_[i] += other.counts_[i];
        total_ += other.total_;
    }

    /// Overwrites the counts; used to build synthetic distributions.
    void set_counts(std::vector<std::uint64_t> counts)
    {
        if (counts.size() != counts_.size())
            throw InvalidArgument("set_counts: wrong number of bins");
        counts_ = std::move(counts);
        total_ = 0;
        for (auto c : counts_)
            total_ += c;
    }

    std::vector<double> bin_edges() const
    {
        std::vector<double> edges(counts_.size() + 1);
        for (std::size_t i = 0; i <= counts_.size(); ++i)
            edges[i] = lo_ + (hi_ - lo_) * static_cast<double>(i) / static_cast<double>(counts_.size());
        return edges;
    }

    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::uint64_t total() const noexcept { return total_; }

    double probability(std::size_t bin) const noexcept
    {
        return total_ == 0 ? 0.0 : static_cast<double>(counts_[bin]) / static_cast<double>(total_);
    }

    friend bool operator==(const CoefficientHistogram&, const CoefficientHistogram&) = default;

private:
    double lo_;
    double hi_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Pools the coefficients of every level (band-pass levels only in Laplacian
/// mode; the residual never contributes).
inline CoefficientHistogram coefficient_histogram(const Pyramid& pyr, const MetricConfig& cfg)
{
    if (pyr.levels.empty())
        throw InvalidArgument("coefficient_histogram: empty pyramid");
    CoefficientHistogram hist(cfg.histogram_bins, cfg.histogram_lo, cfg.histogram_hi);
    for (const auto& level : pyr.levels)
        hist.add(level.pixels());
    return hist;
}

/// Shannon entropy in bits with 0·log 0 = 0.
inline double entropy(const CoefficientHistogram& hist)
{
    if (hist.total() == 0)
        throw InvalidArgument("entropy of an empty histogram");
    const auto total = static_cast<double>(hist.total());
    double h = 0.0;
    for (auto c : hist.counts()) {
        if (c == 0)
            continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    // A single occupied bin gives -1·log2(1) = -0.0.
    return h <= 0.0 ? 0.0 : h;
}

/// Naturalness of the test image alone; in bits, or in [0, 1] when normalized by log2(B).
inline double sn_overall(const Pyramid& pyr_y, const MetricConfig& cfg)
{
    const double h = entropy(coefficient_histogram(pyr_y, cfg));
    return cfg.sn_normalized ? h / std::log2(static_cast<double>(cfg.histogram_bins)) : h;
}

} // namespace sfsn
