// sfsn: command-line front end for scoring, batch evaluation and blur sweeps.
//
// Exit status: 0 success, 1 processing error, 2 usage error.

#include <sfsn/sfsn.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    std::string mode;
    std::size_t scales = 0;
    std::optional<double> wf, wn, stabilizer;
    std::size_t window = 0, stride = 0, bins = 0;
    bool sn_normalized = false;

    void attach(CLI::App* app)
    {
        app->add_option("--mode", mode, "Transform: laplacian or lowpass")
            ->check(CLI::IsMember({"laplacian", "lowpass"}));
        app->add_option("--scales", scales, "Number of pyramid scales K")->check(CLI::PositiveNumber);
        app->add_option("--wf", wf, "Fidelity weight in the fused score");
        app->add_option("--wn", wn, "Naturalness weight in the fused score");
        app->add_flag("--sn-normalized", sn_normalized, "Report naturalness divided by log2(bins)");
        app->add_option("--window", window, "Window size in pixels (odd)");
        app->add_option("--stride", stride, "Window stride in pixels");
        app->add_option("--bins", bins, "Histogram bins");
        app->add_option("--stabilizer", stabilizer, "Stabilizing constant C");
    }

    sfsn::MetricConfig build() const
    {
        sfsn::MetricConfig cfg;
        if (!mode.empty())
            cfg.transform_mode = sfsn::parse_transform_mode(mode);
        if (scales)
            cfg.set_scales(scales);
        if (wf)
            cfg.w_f = *wf;
        if (wn)
            cfg.w_n = *wn;
        if (window)
            cfg.window_size = window;
        if (stride)
            cfg.window_stride = stride;
        if (bins)
            cfg.histogram_bins = bins;
        if (stabilizer)
            cfg.stabilizer = *stabilizer;
        cfg.sn_normalized = sn_normalized;
        try {
            sfsn::validate(cfg);
        } catch (const sfsn::InvalidConfig& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }
};

std::vector<double> parse_list(const std::string& text, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            throw UsageError(std::string("empty value in ") + what);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !std::isfinite(v))
            throw UsageError(std::string("bad number '") + item + "' in " + what);
        out.push_back(v);
    }
    if (out.empty())
        throw UsageError(std::string(what) + " is empty");
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_score(const std::vector<std::string>& files, bool sf_only, bool sn_only, const ConfigFlags& flags)
{
    const auto cfg = flags.build();
    const auto which = sf_only ? sfsn::Components::SFOnly
                       : sn_only ? sfsn::Components::SNOnly
                                 : sfsn::Components::Both;
    if (files.size() == 1 && which != sfsn::Components::SNOnly)
        throw UsageError("score needs <ref> <test> (only --sn-only accepts a single image)");

    const sfsn::GrayImage test = sfsn::load_image(files.back());
    std::optional<sfsn::GrayImage> ref;
    if (which != sfsn::Components::SNOnly)
        ref = sfsn::load_image(files.front());

    const auto rec = sfsn::score_components(ref ? &*ref : nullptr, test, cfg, which);
    nlohmann::json out = {{"sf", rec.sf ? nlohmann::json(*rec.sf) : nlohmann::json(nullptr)},
                          {"sn", rec.sn},
                          {"q", rec.q},
                          {"clamped", rec.clamped}};
    std::cout << out.dump() << '\n';
    return 0;
}

int run_batch(const std::string& manifest, const std::string& out_dir, std::size_t jobs, bool grid,
              const std::string& targets_text, double tolerance, const ConfigFlags& flags)
{
    const auto cfg = flags.build();
    std::optional<sfsn::SrccTargets> targets;
    if (!targets_text.empty()) {
        const auto t = parse_list(targets_text, "--targets");
        if (t.size() != 3)
            throw UsageError("--targets takes three values: sfsn,sf_only,sn_only");
        targets = sfsn::SrccTargets{t[0], t[1], t[2]};
    }
    if (targets && !grid)
        throw UsageError("--targets requires --grid");

    const auto entries = sfsn::load_manifest(manifest);
    if (entries.empty())
        throw sfsn::BatchError("manifest has no entries");

    if (grid) {
        const auto cells = sfsn::evaluate_grid(entries, cfg, jobs);
        const auto summary = sfsn::write_grid_report(cells, targets, tolerance, out_dir);
        std::cout << summary.dump(2) << '\n';
        return 0;
    }

    const auto report = sfsn::evaluate_batch(entries, cfg, jobs);
    sfsn::write_report(report, out_dir);
    for (const auto& f : report.failures)
        std::cerr << "sfsn: failed " << f.entry.test_path.string() << ": " << f.error << '\n';
    for (const auto& note : report.notes)
        std::cerr << "sfsn: " << note << '\n';
    std::cout << sfsn::summary_json(report).dump(2) << '\n';
    return 0;
}

int run_sweep(const std::string& ref_path, const std::string& sigmas_text, const ConfigFlags& flags)
{
    const auto cfg = flags.build();
    const auto sigmas = parse_list(sigmas_text, "--sigmas");
    for (double s : sigmas)
        if (s < 0.0)
            throw UsageError("sigmas must be >= 0");

    const sfsn::GrayImage ref = sfsn::load_image(ref_path);
    std::string out = "sigma,sf,sn,q\n";
    for (double s : sigmas) {
        const sfsn::GrayImage test = s == 0.0 ? ref : sfsn::gaussian_blur(ref, s);
        const auto rec = sfsn::score_pair(ref, test, cfg);
        out += num(s) + ',' + num(*rec.sf) + ',' + num(rec.sn) + ',' + num(rec.q) + '\n';
    }
    std::cout << out;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Structural fidelity / statistical naturalness quality scoring"};
    app.require_subcommand(1);

    ConfigFlags flags;

    auto* score = app.add_subcommand("score", "Score one test image against a reference");
    std::vector<std::string> files;
    bool sf_only = false, sn_only = false;
    score->add_option("images", files, "<ref> <test>, or <test> alone with --sn-only")
        ->required()
        ->expected(1, 2)
        ->check(CLI::ExistingFile);
    auto* sf_flag = score->add_flag("--sf-only", sf_only, "Report q = sf");
    score->add_flag("--sn-only", sn_only, "Report q = sn (no reference needed)")->excludes(sf_flag);
    flags.attach(score);

    auto* batch = app.add_subcommand("batch", "Score a manifest and correlate with MOS");
    std::string manifest, out_dir, targets_text;
    std::size_t jobs = 1;
    bool grid = false;
    double tolerance = 0.05;
    batch->add_option("manifest", manifest, "Manifest CSV")->required();
    batch->add_option("--out", out_dir, "Report directory")->required();
    batch->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    batch->add_flag("--grid", grid, "Evaluate every transform mode x SN normalization cell");
    batch->add_option("--targets", targets_text, "Reference SRCCs sfsn,sf_only,sn_only for --grid");
    batch->add_option("--tolerance", tolerance, "Allowed SRCC deviation from --targets");
    flags.attach(batch);

    auto* sweep = app.add_subcommand("sweep", "Score Gaussian-blurred copies of a reference");
    std::string ref_path, sigmas_text;
    sweep->add_option("ref", ref_path, "Reference image")->required()->check(CLI::ExistingFile);
    sweep->add_option("--sigmas", sigmas_text, "Comma-separated blur sigmas (0 = unchanged)")->required();
    flags.attach(sweep);

    auto* dump = app.add_subcommand("config-dump", "Print the effective configuration as JSON");
    flags.attach(dump);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "sfsn: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*score)
            return run_score(files, sf_only, sn_only, flags);
        if (*batch)
            return run_batch(manifest, out_dir, jobs, grid, targets_text, tolerance, flags);
        if (*sweep)
            return run_sweep(ref_path, sigmas_text, flags);
        if (*dump) {
            std::cout << nlohmann::json(flags.build()).dump(2) << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "sfsn: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "sfsn: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
