#pragma once

// Rank statistics for validating predictions against opinion scores.

#include <sfsn/core.hpp>

#include <numeric>

namespace sfsn {

class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

/// Ascending 1-based ranks; ties share the average of the ranks they span.
inline std::vector<double> rank(std::span<const double> values)
{
    if (values.empty())
        throw InvalidArgument("rank: empty input");
    for (double v : values)
        if (!std::isfinite(v))
            throw InvalidArgument("rank: non-finite value");

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]])
            ++j;
        // positions i..j-1 hold ranks i+1..j
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

/// Pearson linear correlation. Requires n >= 3 and non-constant inputs.
inline double plcc(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw InvalidArgument("correlation: length mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    if (a.size() < 3)
        throw UndefinedCorrelation("correlation needs at least 3 samples, got " + std::to_string(a.size()));
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw InvalidArgument("correlation: non-finite value");
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw UndefinedCorrelation("correlation undefined for a constant input");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Spearman rank-order correlation as Pearson correlation of average ranks.
inline double srcc(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw InvalidArgument("correlation: length mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    if (a.size() < 3)
        throw UndefinedCorrelation("correlation needs at least 3 samples, got " + std::to_string(a.size()));
    const auto ra = rank(a);
    const auto rb = rank(b);
    return plcc(ra, rb);
}

} // namespace sfsn
