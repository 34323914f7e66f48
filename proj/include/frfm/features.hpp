#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frfm/exec.hpp"
#include "frfm/synthesis.hpp"
#include "frfm/types.hpp"

namespace frfm {

// Peak search configuration. min_separation_hz defaults to 5 grid bins and
// band defaults to the whole grid when unset.
struct PeakConfig {
    std::size_t n_peaks = 10;
    std::optional<double> min_separation_hz;
    double min_prominence_db = 3.0;
    std::optional<std::pair<double, double>> band;
};

// Band preset for bridge admittance work: 30 Hz to 1.4 kHz.
PeakConfig violin_band_config();

// Indices of dB-magnitude local maxima inside the band that clear the
// prominence threshold, thinned to the separation constraint tallest-first,
// then the lowest-frequency n_peaks of them in ascending order. Throws
// insufficient_peaks when fewer qualify.
std::vector<std::size_t> find_peaks(const FrequencySeries& frf, const PeakConfig& cfg);

struct RefinedPeak {
    double f_hat = 0.0;
    double p_hat = 0.0;
    bool degenerate = false;  // flat curvature; returned unrefined
};

// Vertex of the parabola through (idx-1, idx, idx+1) in dB. Requires an
// interior index whose value is >= both neighbors.
RefinedPeak refine_peak_parabolic(const DbSeries& db, std::size_t idx);

struct QEstimate {
    double q = 0.0;
    bool resolved = false;
};

// Half-power Q: locates the crossings of p_hat - 10*log10(2) by linear dB
// interpolation on each side of peak_idx, searching only strictly inside
// (lo, hi). Unresolved sides leave resolved = false.
QEstimate estimate_q_half_power(const DbSeries& db, std::size_t peak_idx, double f_hat,
                                double p_hat, std::size_t lo, std::size_t hi);

// Convenience overload: finds the grid bin nearest f_hat and searches the
// whole series.
QEstimate estimate_q_half_power(const FrequencySeries& frf, double f_hat, double p_hat);

struct ExtractionResult {
    std::vector<ModalPeak> peaks;          // ascending in f_hz, exactly n_peaks long
    std::vector<std::uint8_t> q_imputed;   // per peak: bandwidth unresolved, Q imputed
};

// find_peaks -> parabolic refinement -> half-power Q. Each peak's bandwidth
// search is bounded by the adjacent accepted peaks (band edges at the ends);
// unresolved bandwidths impute q = f_hat / searched width and set the flag.
ExtractionResult extract_features(const FrequencySeries& frf, const PeakConfig& cfg);

struct LabeledSeries {
    std::string label;
    FrequencySeries frf;
};

struct FeatureMatrices {
    Matrix f;  // M x N, Hz
    Matrix p;  // M x N, dB
    Matrix q;  // M x N, dimensionless
    std::vector<std::string> labels;
    std::vector<std::uint8_t> q_imputed;  // M x N row-major flags

    std::size_t members() const { return f.rows; }
    std::size_t n_peaks() const { return f.cols; }
};

// Extracts one feature row per dataset member, label order preserved. Rows
// are independent, so extraction runs under `exec`; failures are collected
// and reported together naming the failing labels.
FeatureMatrices build_feature_matrices(const std::vector<LabeledSeries>& dataset,
                                       const PeakConfig& cfg, Exec exec = Exec::serial);

}  // namespace frfm
