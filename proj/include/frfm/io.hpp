#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "frfm/cluster.hpp"
#include "frfm/estimation.hpp"
#include "frfm/features.hpp"
#include "frfm/metrics.hpp"
#include "frfm/types.hpp"

namespace frfm::io {

// 17 significant digits (shortest of fixed/scientific), enough to round-trip
// any double exactly.
std::string format_double(double v);

// Strict double parse: whole token consumed, finite result required.
double parse_double(const std::string& token, const char* context);

// Writes content to path via a temp file + rename so interrupted runs never
// leave a partial artifact.
void atomic_write_text(const std::string& path, const std::string& content);

// FRF CSV: header `freq_hz,real,imag[,valid]`, one row per bin. Loading
// validates a uniform grid (1e-6 relative step jitter); non-uniform grids are
// linearly resampled onto f0 = first, df = span/(n-1) and *warning is set.
// A resampled bin is valid only when both bracketing source bins are valid.
FrequencySeries load_frf_csv(const std::string& path, std::string* warning = nullptr);
void save_frf_csv(const FrequencySeries& series, const std::string& path);

// Distance CSV: `label,<l0>,...` header, one labeled row per member.
// Matrices without labels are written with 0-based index labels.
DistanceMatrix load_distance_csv(const std::string& path);
void save_distance_csv(const DistanceMatrix& d, const std::string& path);

// Features CSV: `label,f1..fN,p1..pN,q1..qN`, one row per member.
FeatureMatrices load_features_csv(const std::string& path);
void save_features_csv(const FeatureMatrices& fm, const std::string& path);

// Time-record CSV: header `time_s,value`; the time column must be uniform
// within 1e-6 relative jitter (no resampling for time data).
TimeRecord load_time_csv(const std::string& path);
void save_time_csv(const TimeRecord& record, const std::string& path);

// Single-channel 32-bit IEEE-float WAV.
TimeRecord load_wav(const std::string& path);
void save_wav(const TimeRecord& record, const std::string& path);

// Reads a record by extension: .wav -> WAV, anything else -> time CSV.
TimeRecord load_time_record(const std::string& path);

struct ManifestEntry {
    std::string label;
    std::string kind;  // frf_csv | impulse_pair | measurement_set
    std::vector<std::string> paths;
    std::map<std::string, std::string> metadata;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string base_dir;  // manifest directory; relative paths resolve here

    std::string resolve(const std::string& path) const;
};

// Manifest JSON: {"entries": [{"label", "kind", "paths", "metadata"}]}.
// Labels must be unique, non-empty, charset [A-Za-z0-9._ -]; referenced files
// must exist.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// Builds the measurement set for an impulse_pair (one force/response pair) or
// measurement_set (paths ordered f1,x1,f2,x2,...) entry. The response kind
// comes from metadata key "response_kind" (default velocity).
MeasurementSet assemble_measurement_set(const DatasetManifest& manifest,
                                        const ManifestEntry& entry);

struct DendrogramFile {
    Dendrogram dend;
    std::vector<std::string> labels;  // empty when unlabeled
};

// Dendrogram JSON: {"n_leaves", "labels", "merges": [[left, right, height]],
// "leaf_order"}; round-trips exactly.
DendrogramFile load_dendrogram_json(const std::string& path);
void save_dendrogram_json(const Dendrogram& dend, const std::vector<std::string>& labels,
                          const std::string& path);

// Newick with branch lengths = parent height - child height; children appear
// in leaf_order; M = 2 renders as `(A:h,B:h);`.
void save_dendrogram_newick(const Dendrogram& dend, const std::vector<std::string>& labels,
                            const std::string& path);
std::string dendrogram_to_newick(const Dendrogram& dend, const std::vector<std::string>& labels);

}  // namespace frfm::io
