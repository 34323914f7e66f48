#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frfm/exec.hpp"
#include "frfm/features.hpp"
#include "frfm/types.hpp"

namespace frfm {

struct DistanceMatrix {
    Matrix d;
    std::vector<std::string> labels;  // empty or one per row

    std::size_t size() const { return d.rows; }
    // Square, labels consistent, entries finite and >= 0, symmetric within
    // tol, zero diagonal within tol. Throws invalid_distance otherwise.
    void check(double tol = 1e-12) const;
};

// Column-wise (x - mean)/std with population std (divisor M). Columns that
// are exactly constant map to zeros. Needs at least 2 rows.
Matrix zscore_normalize(const Matrix& m);

// d[i,j] = Euclidean norm of the row difference. Input is expected to be
// normalized already; this is not enforced.
DistanceMatrix subspace_distance(const Matrix& normalized, std::vector<std::string> labels = {},
                                 Exec exec = Exec::serial);

// Sum of the three per-subspace distances on z-scored F, P and Q.
DistanceMatrix combined_distance(const FeatureMatrices& fm, Exec exec = Exec::serial);

// Mean over in-band bins (valid in both series) of the squared dB magnitude
// difference. Grids must match exactly; band defaults to the whole grid.
double mse_distance(const FrequencySeries& a, const FrequencySeries& b,
                    std::optional<std::pair<double, double>> band = std::nullopt);

DistanceMatrix mse_matrix(const std::vector<LabeledSeries>& dataset,
                          std::optional<std::pair<double, double>> band = std::nullopt,
                          Exec exec = Exec::serial);

// Fraction of the trapezoidal integral of |H|^2 accumulated from the grid
// start up to f; exactly 1 at the grid end. Masked bins contribute zero
// power to both integrals.
double power_fraction(const FrequencySeries& frf, double f);

// power_fraction sampled at every grid frequency.
std::vector<double> power_fraction_curve(const FrequencySeries& frf);

// Frequency where the moving-average-smoothed discrete derivative of the
// power-fraction curve peaks; ties resolve toward lower frequency, so a flat
// curve returns the lowest grid frequency.
double bridge_hill_indicator(const FrequencySeries& frf, std::size_t smoothing_bins = 11);

}  // namespace frfm
