#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "frfm/cluster.hpp"
#include "frfm/metrics.hpp"
#include "frfm/synthesis.hpp"
#include "frfm/types.hpp"

namespace frfm::report {

// All renderers return a complete standalone SVG document. Output is
// deterministic byte-for-byte: coordinates are formatted at fixed precision
// and colors come from integer arithmetic, so identical inputs give
// identical files.

// dB magnitude of `original`, optionally overlaid with a reconstruction and
// one circle marker per extracted peak.
std::string svg_frf_overlay(const FrequencySeries& original,
                            const FrequencySeries* reconstruction = nullptr,
                            const std::vector<ModalPeak>* peaks = nullptr);

// M x N heatmap of one feature matrix; `value_name` names the quantity in the
// title and column headers (e.g. "f" for frequencies).
std::string svg_feature_heatmap(const Matrix& values, const std::vector<std::string>& row_labels,
                                const std::string& value_name);

// M x M heatmap with labels along both axes.
std::string svg_distance_heatmap(const DistanceMatrix& d);

// Dendrogram with leaves placed in dend.leaf_order.
std::string svg_dendrogram(const Dendrogram& dend, const std::vector<std::string>& labels);

// Power-fraction curve with a vertical marker at the maximum-slope frequency.
std::string svg_power_fraction(const FrequencySeries& frf, std::size_t smoothing_bins = 11);

}  // namespace frfm::report
