#pragma once

// End-to-end scoring: decompose, measure fidelity and naturalness, fuse.

#include <sfsn/core.hpp>
#include <sfsn/fidelity.hpp>
#include <sfsn/naturalness.hpp>
#include <sfsn/pyramid.hpp>

#include <optional>

namespace sfsn {

enum class Components { Both, SFOnly, SNOnly };

inline const char* to_string(Components c) noexcept
{
    switch (c) {
    case Components::SFOnly: return "sf-only";
    case Components::SNOnly: return "sn-only";
    default: return "both";
    }
}

struct ScoreRecord {
    std::optional<double> sf;  // absent only for reference-free SN-only scoring
    double sn = 0.0;
    double q = 0.0;
    bool clamped = false;
    Components components = Components::Both;
    std::string config_digest;

    friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

/// q = w_F·sf + w_N·sn.
inline double fuse(double sf, double sn, const MetricConfig& cfg) noexcept
{
    return cfg.w_f * sf + cfg.w_n * sn;
}

/// Scores a test image, optionally against a reference. SFOnly reports q = sf,
/// SNOnly reports q = sn and needs no reference.
inline ScoreRecord score_components(const GrayImage* reference, const GrayImage& test,
                                    const MetricConfig& cfg, Components which)
{
    validate(cfg);
    if (which != Components::SNOnly && reference == nullptr)
        throw InvalidArgument(std::string("a reference image is required for ") + to_string(which) + " scoring");
    if (reference)
        validate_pair(*reference, test);

    ScoreRecord rec;
    rec.components = which;
    rec.config_digest = config_digest(cfg);

    const Pyramid py = decompose(test, cfg);
    rec.sn = sn_overall(py, cfg);
    if (reference) {
        const Pyramid px = decompose(*reference, cfg);
        const auto fid = sf_overall_detailed(px, py, cfg);
        rec.sf = fid.sf;
        rec.clamped = fid.clamped;
    }

    switch (which) {
    case Components::Both: rec.q = fuse(*rec.sf, rec.sn, cfg); break;
    case Components::SFOnly: rec.q = *rec.sf; break;
    case Components::SNOnly: rec.q = rec.sn; break;
    }
    return rec;
}

inline ScoreRecord score_components(const GrayImage& reference, const GrayImage& test,
                                    const MetricConfig& cfg, Components which)
{
    return score_components(&reference, test, cfg, which);
}

inline ScoreRecord score_pair(const GrayImage& reference, const GrayImage& test, const MetricConfig& cfg)
{
    return score_components(&reference, test, cfg, Components::Both);
}

} // namespace sfsn
