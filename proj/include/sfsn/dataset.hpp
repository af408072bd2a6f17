#pragma once

// Batch evaluation against mean opinion scores: manifest parsing, parallel
// scoring, correlation summaries, and report files.

#include <sfsn/core.hpp>
#include <sfsn/degrade.hpp>
#include <sfsn/fidelity.hpp>
#include <sfsn/image_io.hpp>
#include <sfsn/score.hpp>
#include <sfsn/stats.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace sfsn {

namespace fs = std::filesystem;

class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class BatchError : public Error {
public:
    using Error::Error;
};

inline constexpr std::string_view kManifestHeader = "test_path,ref_path,mos,category,scale_factor,algorithm";

struct ManifestEntry {
    fs::path test_path;
    fs::path ref_path;
    double mos = 0.0;
    std::optional<std::string> category;
    std::optional<int> scale_factor;
    std::optional<std::string> algorithm;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// ---------------------------------------------------------------------------
// CSV helpers

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line, bool& ok)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    ok = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted)
        ok = false;
    return fields;
}

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes to a sibling temp file, then renames over the target.
inline void write_atomically(const fs::path& path, const std::string& content)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Manifest

/// Parses a manifest CSV. Relative paths resolve against the manifest's directory.
inline std::vector<ManifestEntry> load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest '" + path.string() + "'");
    const fs::path base = fs::absolute(path).parent_path();
    const std::string name = path.string();

    std::vector<ManifestEntry> entries;
    std::set<fs::path> seen;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;

    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return (fp.is_absolute() ? fp : base / fp).lexically_normal();
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!header_seen) {
            if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
                line.erase(0, 3);
            if (line != kManifestHeader)
                throw ParseError(name, lineno, "expected header '" + std::string(kManifestHeader) + "'");
            header_seen = true;
            continue;
        }
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;

        bool ok = true;
        auto f = detail::split_csv_line(line, ok);
        if (!ok)
            throw ParseError(name, lineno, "unterminated quoted field");
        if (f.size() != 6)
            throw ParseError(name, lineno, "expected 6 fields, found " + std::to_string(f.size()));
        if (f[0].empty() || f[1].empty())
            throw ParseError(name, lineno, "test_path and ref_path must be nonempty");

        ManifestEntry e;
        e.test_path = resolve(f[0]);
        e.ref_path = resolve(f[1]);

        const char* first = f[2].data();
        const char* last = f[2].data() + f[2].size();
        auto [ptr, ec] = std::from_chars(first, last, e.mos);
        if (ec != std::errc{} || ptr != last || !std::isfinite(e.mos))
            throw ParseError(name, lineno, "mos '" + f[2] + "' is not a finite number");

        if (!f[3].empty())
            e.category = f[3];
        if (!f[4].empty()) {
            int sf = 0;
            auto [p2, ec2] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), sf);
            if (ec2 != std::errc{} || p2 != f[4].data() + f[4].size() || sf <= 0)
                throw ParseError(name, lineno, "scale_factor '" + f[4] + "' is not a positive integer");
            e.scale_factor = sf;
        }
        if (!f[5].empty())
            e.algorithm = f[5];

        if (!seen.insert(e.test_path).second)
            throw ParseError(name, lineno, "duplicate test_path '" + e.test_path.string() + "'");
        entries.push_back(std::move(e));
    }
    if (!header_seen)
        throw ParseError(name, 1, "empty manifest (header required)");
    return entries;
}

inline std::string manifest_csv(const std::vector<ManifestEntry>& entries)
{
    std::string out(kManifestHeader);
    out += '\n';
    for (const auto& e : entries) {
        out += detail::csv_field(e.test_path.string()) + ',' + detail::csv_field(e.ref_path.string()) + ',' +
               detail::format_double(e.mos) + ',' + detail::csv_field(e.category.value_or("")) + ',' +
               (e.scale_factor ? std::to_string(*e.scale_factor) : std::string()) + ',' +
               detail::csv_field(e.algorithm.value_or("")) + '\n';
    }
    return out;
}

inline void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path)
{
    detail::write_atomically(path, manifest_csv(entries));
}

// ---------------------------------------------------------------------------
// Batch evaluation

struct BatchRecord {
    ManifestEntry entry;
    ScoreRecord score;
    double psnr = 0.0;  // baseline; +inf for identical pairs
};

struct BatchFailure {
    ManifestEntry entry;
    std::string error;
};

struct BatchReport {
    MetricConfig config;
    std::string config_digest;
    std::vector<BatchRecord> records;  // manifest order
    std::vector<BatchFailure> failures;
    // Correlations are empty when undefined (fewer than 3 records or a
    // constant column); the reason is appended to `notes`.
    std::optional<double> srcc_overall;
    std::optional<double> srcc_sf_only;
    std::optional<double> srcc_sn_only;
    std::optional<double> srcc_psnr;
    std::optional<double> plcc_overall;
    std::map<std::string, std::optional<double>> srcc_by_category;
    std::vector<std::string> notes;
};

using ImageLoader = std::function<GrayImage(const fs::path&)>;

namespace detail {

inline std::optional<double> guarded(std::vector<std::string>& notes, const std::string& label,
                                     const std::function<double()>& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        notes.push_back(label + ": " + e.what());
        return std::nullopt;
    }
}

} // namespace detail

/// Fills the correlation fields of a report from its records.
inline void summarize(BatchReport& report)
{
    std::vector<double> q, sf, sn, ps, mos;
    for (const auto& r : report.records) {
        q.push_back(r.score.q);
        sf.push_back(r.score.sf.value_or(0.0));
        sn.push_back(r.score.sn);
        ps.push_back(std::isinf(r.psnr) ? std::numeric_limits<double>::max() : r.psnr);
        mos.push_back(r.entry.mos);
    }
    auto& notes = report.notes;
    report.srcc_overall = detail::guarded(notes, "srcc_overall", [&] { return srcc(q, mos); });
    report.srcc_sf_only = detail::guarded(notes, "srcc_sf_only", [&] { return srcc(sf, mos); });
    report.srcc_sn_only = detail::guarded(notes, "srcc_sn_only", [&] { return srcc(sn, mos); });
    report.srcc_psnr = detail::guarded(notes, "srcc_psnr", [&] { return srcc(ps, mos); });
    report.plcc_overall = detail::guarded(notes, "plcc_overall", [&] { return plcc(q, mos); });

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_cat;
    for (const auto& r : report.records)
        if (r.entry.category) {
            auto& [cq, cm] = by_cat[*r.entry.category];
            cq.push_back(r.score.q);
            cm.push_back(r.entry.mos);
        }
    report.srcc_by_category.clear();
    for (const auto& [label, cols] : by_cat)
        report.srcc_by_category[label] =
            detail::guarded(notes, "srcc[" + label + "]", [&] { return srcc(cols.first, cols.second); });
}

/// Scores every entry with up to `jobs` workers. Failing entries are collected,
/// never fatal, unless nothing could be scored.
inline BatchReport evaluate_batch(const std::vector<ManifestEntry>& entries, const MetricConfig& cfg,
                                  std::size_t jobs = 1, const ImageLoader& loader = load_image)
{
    validate(cfg);
    if (entries.empty())
        throw BatchError("evaluate_batch: no entries");

    const std::size_t n = entries.size();
    std::vector<std::optional<BatchRecord>> scored(n);
    std::vector<std::string> errors(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto& e = entries[i];
            try {
                const GrayImage ref = loader(e.ref_path);
                const GrayImage test = loader(e.test_path);
                BatchRecord rec{e, score_pair(ref, test, cfg), psnr(ref, test)};
                scored[i] = std::move(rec);
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back(worker);
    }

    BatchReport report;
    report.config = cfg;
    report.config_digest = config_digest(cfg);
    for (std::size_t i = 0; i < n; ++i) {
        if (scored[i])
            report.records.push_back(std::move(*scored[i]));
        else
            report.failures.push_back({entries[i], errors[i]});
    }
    if (report.records.empty())
        throw BatchError("no manifest entry could be scored (" + std::to_string(n) + " failed; first: " +
                         report.failures.front().error + ")");
    summarize(report);
    return report;
}

// ---------------------------------------------------------------------------
// Reports

inline void to_json(nlohmann::json& j, const MetricConfig& cfg)
{
    j = nlohmann::json{{"scales", cfg.scales},
                       {"alpha", cfg.alpha},
                       {"window_size", cfg.window_size},
                       {"window_stride", cfg.window_stride},
                       {"stabilizer", cfg.stabilizer},
                       {"histogram_bins", cfg.histogram_bins},
                       {"histogram_range", {cfg.histogram_lo, cfg.histogram_hi}},
                       {"w_f", cfg.w_f},
                       {"w_n", cfg.w_n},
                       {"transform_mode", to_string(cfg.transform_mode)},
                       {"sn_normalized", cfg.sn_normalized},
                       {"digest", config_digest(cfg)}};
}

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace detail

inline nlohmann::json summary_json(const BatchReport& report)
{
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [label, v] : report.srcc_by_category)
        cats[label] = detail::opt_json(v);
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"test_path", f.entry.test_path.string()},
                            {"ref_path", f.entry.ref_path.string()},
                            {"error", f.error}});
    std::size_t clamped = 0;
    for (const auto& r : report.records)
        clamped += r.score.clamped ? 1 : 0;
    return {{"config_digest", report.config_digest},
            {"config", report.config},
            {"counts",
             {{"entries", report.records.size() + report.failures.size()},
              {"scored", report.records.size()},
              {"failed", report.failures.size()},
              {"clamped", clamped}}},
            {"srcc_overall", detail::opt_json(report.srcc_overall)},
            {"srcc_sf_only", detail::opt_json(report.srcc_sf_only)},
            {"srcc_sn_only", detail::opt_json(report.srcc_sn_only)},
            {"srcc_psnr", detail::opt_json(report.srcc_psnr)},
            {"plcc_overall", detail::opt_json(report.plcc_overall)},
            {"srcc_by_category", cats},
            {"failures", failures},
            {"notes", report.notes}};
}

inline std::string scores_csv(const BatchReport& report)
{
    std::string out = "test_path,ref_path,category,scale_factor,algorithm,sf,sn,q,mos,clamped\n";
    for (const auto& r : report.records) {
        const auto& e = r.entry;
        out += detail::csv_field(e.test_path.string()) + ',' + detail::csv_field(e.ref_path.string()) + ',' +
               detail::csv_field(e.category.value_or("")) + ',' +
               (e.scale_factor ? std::to_string(*e.scale_factor) : std::string()) + ',' +
               detail::csv_field(e.algorithm.value_or("")) + ',' +
               detail::format_double(r.score.sf.value_or(0.0)) + ',' + detail::format_double(r.score.sn) + ',' +
               detail::format_double(r.score.q) + ',' + detail::format_double(e.mos) + ',' +
               (r.score.clamped ? "1" : "0") + '\n';
    }
    return out;
}

/// (sf, sn) points with the fusion weights, enough to redraw the level sets
/// w_f·sf + w_n·sn = const.
inline std::string scatter_csv(const BatchReport& report)
{
    std::string out = "test_path,algorithm,scale_factor,sf,sn,q,w_f,w_n\n";
    const std::string wf = detail::format_double(report.config.w_f);
    const std::string wn = detail::format_double(report.config.w_n);
    for (const auto& r : report.records) {
        const auto& e = r.entry;
        out += detail::csv_field(e.test_path.string()) + ',' + detail::csv_field(e.algorithm.value_or("")) + ',' +
               (e.scale_factor ? std::to_string(*e.scale_factor) : std::string()) + ',' +
               detail::format_double(r.score.sf.value_or(0.0)) + ',' + detail::format_double(r.score.sn) + ',' +
               detail::format_double(r.score.q) + ',' + wf + ',' + wn + '\n';
    }
    return out;
}

/// Writes scores.csv, summary.json and scatter.csv into out_dir.
inline void write_report(const BatchReport& report, const fs::path& out_dir)
{
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
    detail::write_atomically(out_dir / "scores.csv", scores_csv(report));
    detail::write_atomically(out_dir / "summary.json", summary_json(report).dump(2) + "\n");
    detail::write_atomically(out_dir / "scatter.csv", scatter_csv(report));
}

// ---------------------------------------------------------------------------
// Configuration grid (transform mode × SN normalization)

struct SrccTargets {
    double sfsn = 0.0;
    double sf_only = 0.0;
    double sn_only = 0.0;
};

struct GridCell {
    TransformMode mode = TransformMode::Laplacian;
    bool sn_normalized = false;
    BatchReport report;

    std::string label() const
    {
        return std::string(to_string(mode)) + (sn_normalized ? "_normalized" : "_bits");
    }
};

/// Runs the batch under all four (transform mode, SN normalization) cells,
/// keeping every other setting from `base`.
inline std::vector<GridCell> evaluate_grid(const std::vector<ManifestEntry>& entries, const MetricConfig& base,
                                           std::size_t jobs = 1, const ImageLoader& loader = load_image)
{
    std::vector<GridCell> grid;
    for (auto mode : {TransformMode::Laplacian, TransformMode::Lowpass})
        for (bool norm : {false, true}) {
            MetricConfig cfg = base;
            cfg.transform_mode = mode;
            cfg.sn_normalized = norm;
            grid.push_back({mode, norm, evaluate_batch(entries, cfg, jobs, loader)});
        }
    return grid;
}

/// Largest absolute deviation of a report's three SRCCs from the targets
/// (+inf if any is undefined).
inline double target_deviation(const BatchReport& r, const SrccTargets& t)
{
    if (!r.srcc_overall || !r.srcc_sf_only || !r.srcc_sn_only)
        return std::numeric_limits<double>::infinity();
    return std::max({std::abs(*r.srcc_overall - t.sfsn), std::abs(*r.srcc_sf_only - t.sf_only),
                     std::abs(*r.srcc_sn_only - t.sn_only)});
}

/// Index of the winning cell: closest to the targets when given, otherwise
/// highest overall SRCC.
inline std::size_t select_cell(const std::vector<GridCell>& grid, const std::optional<SrccTargets>& targets)
{
    if (grid.empty())
        throw InvalidArgument("select_cell: empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (targets) {
            if (target_deviation(grid[i].report, *targets) < target_deviation(grid[best].report, *targets))
                best = i;
        } else {
            const double a = grid[i].report.srcc_overall.value_or(-2.0);
            const double b = grid[best].report.srcc_overall.value_or(-2.0);
            if (a > b)
                best = i;
        }
    }
    return best;
}

/// Writes one report per cell under out_dir/<label>/ and a top-level
/// summary.json naming the winning configuration.
inline nlohmann::json write_grid_report(const std::vector<GridCell>& grid, const std::optional<SrccTargets>& targets,
                                        double tolerance, const fs::path& out_dir)
{
    const std::size_t win = select_cell(grid, targets);
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : grid) {
        write_report(cell.report, out_dir / cell.label());
        nlohmann::json c = {{"cell", cell.label()},
                            {"config_digest", cell.report.config_digest},
                            {"srcc_overall", detail::opt_json(cell.report.srcc_overall)},
                            {"srcc_sf_only", detail::opt_json(cell.report.srcc_sf_only)},
                            {"srcc_sn_only", detail::opt_json(cell.report.srcc_sn_only)}};
        if (targets) {
            const double dev = target_deviation(cell.report, *targets);
            c["max_deviation"] = std::isfinite(dev) ? nlohmann::json(dev) : nlohmann::json(nullptr);
            c["within_tolerance"] = dev <= tolerance;
        }
        cells.push_back(std::move(c));
    }
    nlohmann::json summary = {{"grid", cells},
                              {"winning_cell", grid[win].label()},
                              {"winning_config", grid[win].report.config},
                              {"winning_summary", summary_json(grid[win].report)}};
    if (targets) {
        summary["targets"] = {{"sfsn", targets->sfsn}, {"sf_only", targets->sf_only}, {"sn_only", targets->sn_only}};
        summary["tolerance"] = tolerance;
        summary["accepted"] = target_deviation(grid[win].report, *targets) <= tolerance;
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    detail::write_atomically(out_dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

} // namespace sfsn
