#include "frfm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "frfm/cluster.hpp"
#include "frfm/errors.hpp"
#include "frfm/estimation.hpp"
#include "frfm/exec.hpp"
#include "frfm/features.hpp"
#include "frfm/io.hpp"
#include "frfm/metrics.hpp"
#include "frfm/report.hpp"
#include "frfm/synthesis.hpp"

namespace frfm {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// JSON config file support: {"extract": {"n-peaks": 5}, "verbose": true}.
// Command-line flags override config values (CLI11 default precedence).
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("config root must be a JSON object");
        std::vector<CLI::ConfigItem> out;
        walk(j, {}, out);
        return out;
    }

  private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }

    static void walk(const nlohmann::json& j, std::vector<std::string> parents,
                     std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto deeper = parents;
                deeper.push_back(key);
                walk(value, deeper, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& e : value) item.inputs.push_back(scalar(e));
            else
                item.inputs.push_back(scalar(value));
            out.push_back(std::move(item));
        }
    }
};

struct RunContext {
    bool quiet = false;
    bool verbose = false;
    bool summary = false;
    bool serial = false;
    std::string command;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;

    Exec exec() const { return serial ? Exec::serial : Exec::parallel; }

    void info(const std::string& msg) const {
        if (verbose && !quiet) std::cerr << "frfm: " << msg << "\n";
    }
    void warn(const std::string& msg) {
        warnings.push_back(msg);
        if (!quiet) std::cerr << "frfm: warning: " << msg << "\n";
    }
    void wrote(const std::string& path) {
        outputs.push_back(path);
        info("wrote " + path);
    }

    void print_summary() const {
        if (!summary) return;
        ordered_json j;
        j["command"] = command;
        j["outputs"] = outputs;
        j["warnings"] = warnings;
        std::cout << j.dump(2) << "\n";
    }
};

void check_label(const std::string& label) {
    if (label.empty()) throw argument_error("label must not be empty");
    for (char c : label) {
        const auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '.' || c == '_' || c == ' ' || c == '-'))
            throw argument_error("label '" + label + "' must use only [A-Za-z0-9._ -]");
    }
}

std::string label_from_path(const std::string& path) {
    const std::string stem = fs::path(path).stem().string();
    check_label(stem);
    return stem;
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return (fs::path(dir) / name).string();
}

void ensure_outdir(const std::string& dir) {
    if (dir.empty() || dir == ".") return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory '" + dir + "': " + ec.message());
}

// ---- shared option bundles -------------------------------------------------

struct PeakFlags {
    std::size_t n_peaks = 10;
    double prominence_db = 3.0;
    std::optional<double> min_sep_hz;
    std::optional<double> fmin;
    std::optional<double> fmax;

    void attach(CLI::App* cmd) {
        cmd->add_option("--n-peaks", n_peaks, "number of resonances to extract")
            ->capture_default_str();
        cmd->add_option("--prominence-db", prominence_db, "minimum peak prominence in dB")
            ->capture_default_str();
        cmd->add_option("--min-sep-hz", min_sep_hz,
                        "minimum spacing between peaks in Hz (default 5 grid bins)");
        cmd->add_option("--fmin", fmin, "analysis band lower edge in Hz");
        cmd->add_option("--fmax", fmax, "analysis band upper edge in Hz");
    }

    PeakConfig config() const {
        PeakConfig cfg;
        cfg.n_peaks = n_peaks;
        cfg.min_prominence_db = prominence_db;
        cfg.min_separation_hz = min_sep_hz;
        if (fmin.has_value() != fmax.has_value())
            throw argument_error("--fmin and --fmax must be given together");
        if (fmin) cfg.band = std::make_pair(*fmin, *fmax);
        return cfg;
    }
};

struct WindowFlags {
    std::string kind = "rectangular";
    double final_fraction = 0.05;

    void attach(CLI::App* cmd) {
        cmd->add_option("--window", kind, "taper applied before the transform")
            ->check(CLI::IsMember({"rectangular", "exponential"}))
            ->capture_default_str();
        cmd->add_option("--window-final", final_fraction,
                        "exponential window value at the last sample")
            ->capture_default_str();
    }

    Window window() const {
        if (kind == "exponential") return Window::exponential(final_fraction);
        return Window::rectangular();
    }
};

struct EstimatorFlag {
    std::string name = "h1";

    void attach(CLI::App* cmd) {
        cmd->add_option("--estimator", name, "FRF estimator")
            ->check(CLI::IsMember({"h1", "h2", "hv"}))
            ->capture_default_str();
    }

    FrequencySeries run(const MeasurementSet& set, const Window& w, Exec exec) const {
        if (name == "h2") return estimate_h2(set, w, exec);
        if (name == "hv") return estimate_hv(set, w, exec);
        return estimate_h1(set, w, exec);
    }
};

// ---- synth ------------------------------------------------------------------

struct SynthOpts {
    std::string model_path;
    std::string output = "frf.csv";
    double f0 = 0.0;
    double df = 1.0;
    std::optional<double> fmax;
    std::optional<std::size_t> bins;
};

ModalModel load_model_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open model spec '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
        throw parse_error(path + ": model spec needs a non-empty 'modes' array");

    ModalModel model;
    std::size_t idx = 0;
    for (const auto& jm : j["modes"]) {
        const std::string where = path + ": modes[" + std::to_string(idx++) + "]";
        if (!jm.is_object()) throw parse_error(where + ": must be an object");
        for (const char* field : {"f_hz", "xi", "phi"})
            if (!jm.contains(field) || !jm[field].is_number())
                throw parse_error(where + "." + field + ": missing numeric value");
        const double f_hz = jm["f_hz"].get<double>();
        const double xi = jm["xi"].get<double>();
        const double phi = jm["phi"].get<double>();
        if (!(f_hz > 0.0)) throw parse_error(where + ".f_hz: must be positive");
        if (!(xi > 0.0) || !(xi < 1.0))
            throw parse_error(where + ".xi: must lie in (0, 1) for an underdamped mode");
        if (phi == 0.0 || !std::isfinite(phi))
            throw parse_error(where + ".phi: must be finite and nonzero");
        model.modes.push_back(ModalParameter{2.0 * std::numbers::pi * f_hz, xi, phi});
    }
    return model;
}

int cmd_synth(const SynthOpts& o, RunContext& ctx) {
    const ModalModel model = load_model_spec(o.model_path);
    GridSpec grid;
    grid.f0 = o.f0;
    grid.df = o.df;
    if (o.bins && o.fmax) throw argument_error("give either --bins or --fmax, not both");
    if (o.bins)
        grid.n_bins = *o.bins;
    else if (o.fmax) {
        if (!(*o.fmax > o.f0)) throw argument_error("--fmax must exceed --f0");
        grid.n_bins = static_cast<std::size_t>(std::llround((*o.fmax - o.f0) / o.df)) + 1;
    } else
        throw argument_error("one of --bins or --fmax is required");

    const FrequencySeries frf = synthesize_frf(model, grid, ctx.exec());
    io::save_frf_csv(frf, o.output);
    ctx.wrote(o.output);
    return 0;
}

// ---- estimate ----------------------------------------------------------------

struct EstimateOpts {
    std::string manifest_path;
    std::string outdir = ".";
    EstimatorFlag estimator;
    WindowFlags window;
};

struct EstimatedEntry {
    std::string label;
    FrequencySeries frf;
    std::optional<FrequencySeries> coh;
    std::string error;
};

// Runs the estimator over every time-record entry; entries are independent,
// failures are captured per slot and reported in manifest order.
std::vector<EstimatedEntry> estimate_entries(const io::DatasetManifest& manifest,
                                             const EstimatorFlag& estimator, const Window& window,
                                             Exec exec) {
    std::vector<const io::ManifestEntry*> todo;
    for (const io::ManifestEntry& e : manifest.entries)
        if (e.kind != "frf_csv") todo.push_back(&e);

    std::vector<EstimatedEntry> out(todo.size());
    detail::par_for(exec, static_cast<std::int64_t>(todo.size()), [&](std::int64_t i) {
        const io::ManifestEntry& e = *todo[static_cast<std::size_t>(i)];
        EstimatedEntry& slot = out[static_cast<std::size_t>(i)];
        slot.label = e.label;
        try {
            const MeasurementSet set = io::assemble_measurement_set(manifest, e);
            slot.frf = estimator.run(set, window, Exec::serial);
            if (set.pairs.size() >= 2) slot.coh = coherence(set, window, Exec::serial);
        } catch (const std::exception& ex) {
            slot.error = ex.what();
        }
    });
    return out;
}

int cmd_estimate(const EstimateOpts& o, RunContext& ctx) {
    const io::DatasetManifest manifest = io::load_manifest(o.manifest_path);
    ensure_outdir(o.outdir);
    const Window window = o.window.window();
    std::vector<EstimatedEntry> results =
        estimate_entries(manifest, o.estimator, window, ctx.exec());
    if (results.empty())
        throw argument_error("manifest has no impulse_pair or measurement_set entries");

    bool failed = false;
    for (const EstimatedEntry& r : results) {
        if (!r.error.empty()) {
            failed = true;
            std::cerr << "frfm: error: entry '" << r.label << "': " << r.error << "\n";
            continue;
        }
        const std::string frf_path = join_path(o.outdir, "frf_" + r.label + ".csv");
        io::save_frf_csv(r.frf, frf_path);
        ctx.wrote(frf_path);
        if (r.coh) {
            const std::string coh_path = join_path(o.outdir, "coherence_" + r.label + ".csv");
            io::save_frf_csv(*r.coh, coh_path);
            ctx.wrote(coh_path);
        }
    }
    return failed ? 1 : 0;
}

// ---- dataset loading shared by extract/distance/pipeline ---------------------

std::vector<LabeledSeries> load_frf_files(const std::vector<std::string>& paths, RunContext& ctx) {
    std::vector<LabeledSeries> out;
    out.reserve(paths.size());
    for (const std::string& p : paths) {
        std::string warning;
        LabeledSeries ls;
        ls.label = label_from_path(p);
        ls.frf = io::load_frf_csv(p, &warning);
        if (!warning.empty()) ctx.warn(warning);
        for (const LabeledSeries& prev : out)
            if (prev.label == ls.label)
                throw argument_error("duplicate label '" + ls.label +
                                     "' from input files; rename or use a manifest");
        out.push_back(std::move(ls));
    }
    return out;
}

std::vector<LabeledSeries> load_manifest_frfs(const io::DatasetManifest& manifest,
                                              const EstimatorFlag& estimator, const Window& window,
                                              RunContext& ctx) {
    std::vector<EstimatedEntry> estimated =
        estimate_entries(manifest, estimator, window, ctx.exec());
    std::size_t next = 0;
    std::vector<LabeledSeries> out;
    std::vector<std::string> failures;
    for (const io::ManifestEntry& e : manifest.entries) {
        LabeledSeries ls;
        ls.label = e.label;
        if (e.kind == "frf_csv") {
            std::string warning;
            ls.frf = io::load_frf_csv(manifest.resolve(e.paths[0]), &warning);
            if (!warning.empty()) ctx.warn(warning);
        } else {
            EstimatedEntry& r = estimated[next++];
            if (!r.error.empty()) {
                failures.push_back("entry '" + r.label + "': " + r.error);
                continue;
            }
            ls.frf = std::move(r.frf);
        }
        out.push_back(std::move(ls));
    }
    if (!failures.empty()) {
        std::string msg = "estimation failed for " + std::to_string(failures.size()) + " entries";
        for (const std::string& f : failures) msg += "\n  " + f;
        throw data_error(msg);
    }
    return out;
}

// ---- extract ------------------------------------------------------------------

struct ExtractOpts {
    std::vector<std::string> frf_paths;
    std::string manifest_path;
    std::string output = "features.csv";
    PeakFlags peaks;
    EstimatorFlag estimator;
    WindowFlags window;
};

void report_imputed(const FeatureMatrices& fm, RunContext& ctx) {
    for (std::size_t r = 0; r < fm.members(); ++r) {
        std::size_t count = 0;
        for (std::size_t c = 0; c < fm.n_peaks(); ++c)
            if (fm.q_imputed[r * fm.n_peaks() + c]) ++count;
        if (count > 0)
            ctx.warn("label '" + fm.labels[r] + "': " + std::to_string(count) +
                     " of " + std::to_string(fm.n_peaks()) +
                     " Q values imputed (half-power bandwidth unresolved)");
    }
}

int cmd_extract(const ExtractOpts& o, RunContext& ctx) {
    if (o.frf_paths.empty() == o.manifest_path.empty())
        throw argument_error("give FRF CSV files or --manifest (exactly one input source)");
    std::vector<LabeledSeries> dataset;
    if (!o.manifest_path.empty()) {
        const io::DatasetManifest manifest = io::load_manifest(o.manifest_path);
        dataset = load_manifest_frfs(manifest, o.estimator, o.window.window(), ctx);
    } else {
        dataset = load_frf_files(o.frf_paths, ctx);
    }
    if (dataset.size() < 2)
        throw argument_error("feature extraction needs at least 2 dataset members");

    const FeatureMatrices fm = build_feature_matrices(dataset, o.peaks.config(), ctx.exec());
    report_imputed(fm, ctx);
    io::save_features_csv(fm, o.output);
    ctx.wrote(o.output);
    return 0;
}

// ---- distance -------------------------------------------------------------------

struct DistanceOpts {
    std::vector<std::string> frf_paths;
    std::string features_path;
    std::string metric = "feature";
    std::string output = "distance.csv";
    std::optional<double> fmin;
    std::optional<double> fmax;
};

int cmd_distance(const DistanceOpts& o, RunContext& ctx) {
    const bool feature_metric = o.metric != "mse";
    DistanceMatrix d;
    if (feature_metric) {
        if (o.features_path.empty())
            throw argument_error("metric '" + o.metric + "' needs --features");
        if (!o.frf_paths.empty())
            throw argument_error("metric '" + o.metric + "' takes no FRF files");
        const FeatureMatrices fm = io::load_features_csv(o.features_path);
        if (o.metric == "feature")
            d = combined_distance(fm, ctx.exec());
        else if (o.metric == "feature-f")
            d = subspace_distance(zscore_normalize(fm.f), fm.labels, ctx.exec());
        else if (o.metric == "feature-p")
            d = subspace_distance(zscore_normalize(fm.p), fm.labels, ctx.exec());
        else
            d = subspace_distance(zscore_normalize(fm.q), fm.labels, ctx.exec());
    } else {
        if (!o.features_path.empty())
            throw argument_error("metric 'mse' takes FRF files, not --features");
        if (o.frf_paths.size() < 2) throw argument_error("metric 'mse' needs at least 2 FRF files");
        if (o.fmin.has_value() != o.fmax.has_value())
            throw argument_error("--fmin and --fmax must be given together");
        std::optional<std::pair<double, double>> band;
        if (o.fmin) band = std::make_pair(*o.fmin, *o.fmax);
        d = mse_matrix(load_frf_files(o.frf_paths, ctx), band, ctx.exec());
    }
    io::save_distance_csv(d, o.output);
    ctx.wrote(o.output);
    return 0;
}

// ---- cluster ----------------------------------------------------------------------

struct ClusterOpts {
    std::string distance_path;
    std::string outdir = ".";
    std::string linkage = "average";
};

int cmd_cluster(const ClusterOpts& o, RunContext& ctx) {
    const DistanceMatrix d = io::load_distance_csv(o.distance_path);
    ensure_outdir(o.outdir);
    Dendrogram dend = agglomerative_cluster(d, linkage_from_string(o.linkage));
    dend.leaf_order = gw_leaf_order(dend, d);

    const std::string json_path = join_path(o.outdir, "dendrogram.json");
    io::save_dendrogram_json(dend, d.labels, json_path);
    ctx.wrote(json_path);
    const std::string newick_path = join_path(o.outdir, "dendrogram.newick");
    io::save_dendrogram_newick(dend, d.labels, newick_path);
    ctx.wrote(newick_path);
    const std::string ordered_path = join_path(o.outdir, "distance_ordered.csv");
    io::save_distance_csv(reorder(d, dend.leaf_order), ordered_path);
    ctx.wrote(ordered_path);
    return 0;
}

// ---- report -----------------------------------------------------------------------

struct ReportOpts {
    std::string figure;
    std::string output;
    std::string frf_path;
    std::string features_path;
    std::string distance_path;
    std::string dendrogram_path;
    std::string subspace = "f";
    std::size_t smoothing = 11;
    PeakFlags peaks;
};

int cmd_report(const ReportOpts& o, RunContext& ctx) {
    std::string svg;
    if (o.figure == "frf-overlay") {
        if (o.frf_path.empty()) throw argument_error("frf-overlay needs --frf");
        std::string warning;
        const FrequencySeries frf = io::load_frf_csv(o.frf_path, &warning);
        if (!warning.empty()) ctx.warn(warning);
        const ExtractionResult ex = extract_features(frf, o.peaks.config());
        GridSpec grid{frf.f0, frf.df, frf.size()};
        const FrequencySeries recon = reconstruct_from_features(ex.peaks, grid, ctx.exec());
        svg = report::svg_frf_overlay(frf, &recon, &ex.peaks);
    } else if (o.figure == "feature-heatmap") {
        if (o.features_path.empty()) throw argument_error("feature-heatmap needs --features");
        FeatureMatrices fm = io::load_features_csv(o.features_path);
        const Matrix& mat = o.subspace == "p" ? fm.p : (o.subspace == "q" ? fm.q : fm.f);
        Matrix shown = mat;
        std::vector<std::string> labels = fm.labels;
        if (!o.dendrogram_path.empty()) {
            const io::DendrogramFile df = io::load_dendrogram_json(o.dendrogram_path);
            if (df.dend.leaf_order.size() != mat.rows)
                throw argument_error("dendrogram size does not match feature rows");
            for (std::size_t i = 0; i < mat.rows; ++i) {
                labels[i] = fm.labels[df.dend.leaf_order[i]];
                for (std::size_t c = 0; c < mat.cols; ++c)
                    shown(i, c) = mat(df.dend.leaf_order[i], c);
            }
        }
        svg = report::svg_feature_heatmap(shown, labels, o.subspace);
    } else if (o.figure == "distance-heatmap") {
        if (o.distance_path.empty()) throw argument_error("distance-heatmap needs --distance");
        DistanceMatrix d = io::load_distance_csv(o.distance_path);
        if (!o.dendrogram_path.empty()) {
            const io::DendrogramFile df = io::load_dendrogram_json(o.dendrogram_path);
            d = reorder(d, df.dend.leaf_order);
        }
        svg = report::svg_distance_heatmap(d);
    } else if (o.figure == "dendrogram") {
        if (o.dendrogram_path.empty()) throw argument_error("dendrogram needs --dendrogram");
        const io::DendrogramFile df = io::load_dendrogram_json(o.dendrogram_path);
        svg = report::svg_dendrogram(df.dend, df.labels);
    } else {  // power-fraction
        if (o.frf_path.empty()) throw argument_error("power-fraction needs --frf");
        std::string warning;
        const FrequencySeries frf = io::load_frf_csv(o.frf_path, &warning);
        if (!warning.empty()) ctx.warn(warning);
        svg = report::svg_power_fraction(frf, o.smoothing);
    }

    const std::string out = o.output.empty() ? o.figure + ".svg" : o.output;
    io::atomic_write_text(out, svg);
    ctx.wrote(out);
    return 0;
}

// ---- pipeline -----------------------------------------------------------------------

struct PipelineOpts {
    std::string manifest_path;
    std::string outdir = ".";
    std::string linkage = "average";
    PeakFlags peaks;
    EstimatorFlag estimator;
    WindowFlags window;
};

int cmd_pipeline(const PipelineOpts& o, RunContext& ctx) {
    const io::DatasetManifest manifest = io::load_manifest(o.manifest_path);
    ensure_outdir(o.outdir);
    const Window window = o.window.window();

    // Stage 1: estimated or loaded FRFs, one CSV per entry in manifest order.
    const std::vector<LabeledSeries> dataset =
        load_manifest_frfs(manifest, o.estimator, window, ctx);
    if (dataset.size() < 2) throw argument_error("pipeline needs at least 2 dataset members");
    for (const LabeledSeries& ls : dataset) {
        const std::string path = join_path(o.outdir, "frf_" + ls.label + ".csv");
        io::save_frf_csv(ls.frf, path);
        ctx.wrote(path);
    }

    // Stage 2: features.
    const FeatureMatrices fm = build_feature_matrices(dataset, o.peaks.config(), ctx.exec());
    report_imputed(fm, ctx);
    const std::string features_path = join_path(o.outdir, "features.csv");
    io::save_features_csv(fm, features_path);
    ctx.wrote(features_path);

    // Stage 3: distances (combined features plus the MSE baseline).
    const DistanceMatrix d = combined_distance(fm, ctx.exec());
    const std::string distance_path = join_path(o.outdir, "distance.csv");
    io::save_distance_csv(d, distance_path);
    ctx.wrote(distance_path);
    const bool uniform_grid = std::all_of(
        dataset.begin(), dataset.end(), [&](const LabeledSeries& ls) {
            return ls.frf.f0 == dataset[0].frf.f0 && ls.frf.df == dataset[0].frf.df &&
                   ls.frf.size() == dataset[0].frf.size();
        });
    if (uniform_grid) {
        const DistanceMatrix mse = mse_matrix(dataset, std::nullopt, ctx.exec());
        const std::string mse_path = join_path(o.outdir, "distance_mse.csv");
        io::save_distance_csv(mse, mse_path);
        ctx.wrote(mse_path);
    } else {
        ctx.warn("MSE baseline skipped: dataset members use different frequency grids");
    }

    // Stage 4: clustering with GW leaf ordering.
    Dendrogram dend = agglomerative_cluster(d, linkage_from_string(o.linkage));
    dend.leaf_order = gw_leaf_order(dend, d);
    const std::string json_path = join_path(o.outdir, "dendrogram.json");
    io::save_dendrogram_json(dend, d.labels, json_path);
    ctx.wrote(json_path);
    const std::string newick_path = join_path(o.outdir, "dendrogram.newick");
    io::save_dendrogram_newick(dend, d.labels, newick_path);
    ctx.wrote(newick_path);
    const std::string ordered_path = join_path(o.outdir, "distance_ordered.csv");
    io::save_distance_csv(reorder(d, dend.leaf_order), ordered_path);
    ctx.wrote(ordered_path);

    // Stage 5: figures.
    const auto write_svg = [&](const std::string& name, const std::string& svg) {
        const std::string path = join_path(o.outdir, name);
        io::atomic_write_text(path, svg);
        ctx.wrote(path);
    };
    write_svg("distance_heatmap.svg", report::svg_distance_heatmap(reorder(d, dend.leaf_order)));
    write_svg("dendrogram.svg", report::svg_dendrogram(dend, d.labels));
    write_svg("feature_heatmap_f.svg", report::svg_feature_heatmap(fm.f, fm.labels, "f"));
    write_svg("feature_heatmap_p.svg", report::svg_feature_heatmap(fm.p, fm.labels, "p"));
    write_svg("feature_heatmap_q.svg", report::svg_feature_heatmap(fm.q, fm.labels, "q"));
    const PeakConfig cfg = o.peaks.config();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const ExtractionResult ex = extract_features(dataset[i].frf, cfg);
        GridSpec grid{dataset[i].frf.f0, dataset[i].frf.df, dataset[i].frf.size()};
        const FrequencySeries recon = reconstruct_from_features(ex.peaks, grid, ctx.exec());
        write_svg("frf_overlay_" + dataset[i].label + ".svg",
                  report::svg_frf_overlay(dataset[i].frf, &recon, &ex.peaks));
    }
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"modal feature extraction and similarity analysis for bridge admittance FRFs"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; command-line flags take precedence");

    RunContext ctx;
    app.add_flag("--quiet", ctx.quiet, "suppress warnings on stderr");
    app.add_flag("--verbose", ctx.verbose, "log per-step progress to stderr");
    app.add_flag("--summary", ctx.summary, "print a machine-readable run summary to stdout");
    app.add_flag("--serial", ctx.serial, "disable parallel execution (results are identical)");

    SynthOpts synth;
    CLI::App* c_synth = app.add_subcommand("synth", "synthesize an FRF from a modal model spec");
    c_synth->add_option("--model", synth.model_path, "model spec JSON")->required();
    c_synth->add_option("-o,--output", synth.output, "output FRF CSV")->capture_default_str();
    c_synth->add_option("--f0", synth.f0, "grid start in Hz")->capture_default_str();
    c_synth->add_option("--df", synth.df, "grid step in Hz")->capture_default_str();
    c_synth->add_option("--fmax", synth.fmax, "grid end in Hz");
    c_synth->add_option("--bins", synth.bins, "number of grid bins");

    EstimateOpts estimate;
    CLI::App* c_estimate =
        app.add_subcommand("estimate", "estimate FRFs from time records in a manifest");
    c_estimate->add_option("--manifest", estimate.manifest_path, "dataset manifest JSON")->required();
    c_estimate->add_option("-o,--outdir", estimate.outdir, "output directory")->capture_default_str();
    estimate.estimator.attach(c_estimate);
    estimate.window.attach(c_estimate);

    ExtractOpts extract;
    CLI::App* c_extract =
        app.add_subcommand("extract", "extract modal features into a features CSV");
    c_extract->add_option("files", extract.frf_paths, "FRF CSV files");
    c_extract->add_option("--manifest", extract.manifest_path, "dataset manifest JSON");
    c_extract->add_option("-o,--output", extract.output, "output features CSV")
        ->capture_default_str();
    extract.peaks.attach(c_extract);
    extract.estimator.attach(c_extract);
    extract.window.attach(c_extract);

    DistanceOpts distance;
    CLI::App* c_distance = app.add_subcommand("distance", "compute a pairwise distance matrix");
    c_distance->add_option("files", distance.frf_paths, "FRF CSV files (mse metric)");
    c_distance->add_option("--features", distance.features_path, "features CSV (feature metrics)");
    c_distance->add_option("--metric", distance.metric, "distance metric")
        ->check(CLI::IsMember({"feature", "feature-f", "feature-p", "feature-q", "mse"}))
        ->capture_default_str();
    c_distance->add_option("-o,--output", distance.output, "output distance CSV")
        ->capture_default_str();
    c_distance->add_option("--fmin", distance.fmin, "MSE band lower edge in Hz");
    c_distance->add_option("--fmax", distance.fmax, "MSE band upper edge in Hz");

    ClusterOpts cluster;
    CLI::App* c_cluster =
        app.add_subcommand("cluster", "cluster a distance matrix and order its leaves");
    c_cluster->add_option("--distance", cluster.distance_path, "distance CSV")->required();
    c_cluster->add_option("-o,--outdir", cluster.outdir, "output directory")->capture_default_str();
    c_cluster->add_option("--linkage", cluster.linkage, "linkage rule")
        ->check(CLI::IsMember({"single", "complete", "average"}))
        ->capture_default_str();

    ReportOpts report_opts;
    CLI::App* c_report = app.add_subcommand("report", "render an SVG figure from artifacts");
    c_report->add_option("--figure", report_opts.figure, "figure kind")
        ->check(CLI::IsMember(
            {"frf-overlay", "feature-heatmap", "distance-heatmap", "dendrogram", "power-fraction"}))
        ->required();
    c_report->add_option("-o,--output", report_opts.output, "output SVG (default <figure>.svg)");
    c_report->add_option("--frf", report_opts.frf_path, "FRF CSV input");
    c_report->add_option("--features", report_opts.features_path, "features CSV input");
    c_report->add_option("--distance", report_opts.distance_path, "distance CSV input");
    c_report->add_option("--dendrogram", report_opts.dendrogram_path, "dendrogram JSON input");
    c_report->add_option("--subspace", report_opts.subspace, "feature subspace to plot")
        ->check(CLI::IsMember({"f", "p", "q"}))
        ->capture_default_str();
    c_report->add_option("--smoothing", report_opts.smoothing, "power-fraction slope smoothing bins")
        ->capture_default_str();
    report_opts.peaks.attach(c_report);

    PipelineOpts pipeline;
    CLI::App* c_pipeline = app.add_subcommand(
        "pipeline", "estimate, extract, compare, cluster and render for a whole manifest");
    c_pipeline->add_option("--manifest", pipeline.manifest_path, "dataset manifest JSON")->required();
    c_pipeline->add_option("-o,--outdir", pipeline.outdir, "output directory")->capture_default_str();
    c_pipeline->add_option("--linkage", pipeline.linkage, "linkage rule")
        ->check(CLI::IsMember({"single", "complete", "average"}))
        ->capture_default_str();
    pipeline.peaks.attach(c_pipeline);
    pipeline.estimator.attach(c_pipeline);
    pipeline.window.attach(c_pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        int rc = 0;
        if (c_synth->parsed()) {
            ctx.command = "synth";
            rc = cmd_synth(synth, ctx);
        } else if (c_estimate->parsed()) {
            ctx.command = "estimate";
            rc = cmd_estimate(estimate, ctx);
        } else if (c_extract->parsed()) {
            ctx.command = "extract";
            rc = cmd_extract(extract, ctx);
        } else if (c_distance->parsed()) {
            ctx.command = "distance";
            rc = cmd_distance(distance, ctx);
        } else if (c_cluster->parsed()) {
            ctx.command = "cluster";
            rc = cmd_cluster(cluster, ctx);
        } else if (c_report->parsed()) {
            ctx.command = "report";
            rc = cmd_report(report_opts, ctx);
        } else if (c_pipeline->parsed()) {
            ctx.command = "pipeline";
            rc = cmd_pipeline(pipeline, ctx);
        }
        ctx.print_summary();
        return rc;
    } catch (const argument_error& e) {
        std::cerr << "frfm: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "frfm: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace frfm
