#include "frfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace frfm {

namespace {

double series_power(const FrequencySeries& frf, std::size_t k) {
    return frf.is_valid(k) ? std::norm(frf.values[k]) : 0.0;
}

// Cumulative trapezoid of |H|^2 at each grid bin; cum[0] = 0.
std::vector<double> power_cumulative(const FrequencySeries& frf) {
    frf.check();
    if (frf.size() < 2) throw argument_error("power_fraction: series needs at least 2 bins");
    std::vector<double> cum(frf.size(), 0.0);
    double acc = 0.0;
    double prev = series_power(frf, 0);
    for (std::size_t k = 1; k < frf.size(); ++k) {
        const double cur = series_power(frf, k);
        acc += 0.5 * (prev + cur) * frf.df;
        cum[k] = acc;
        prev = cur;
    }
    return cum;
}

}  // namespace

void DistanceMatrix::check(double tol) const {
    if (d.rows != d.cols) throw invalid_distance("DistanceMatrix: matrix is not square");
    if (!labels.empty() && labels.size() != d.rows)
        throw invalid_distance("DistanceMatrix: label count does not match size");
    for (std::size_t i = 0; i < d.rows; ++i) {
        if (!(std::abs(d(i, i)) <= tol))
            throw invalid_distance("DistanceMatrix: nonzero diagonal at row " + std::to_string(i));
        for (std::size_t j = 0; j < d.cols; ++j) {
            const double v = d(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw invalid_distance("DistanceMatrix: negative or non-finite entry at (" +
                                       std::to_string(i) + ", " + std::to_string(j) + ")");
            if (!(std::abs(v - d(j, i)) <= tol))
                throw invalid_distance("DistanceMatrix: asymmetry at (" + std::to_string(i) +
                                       ", " + std::to_string(j) + ")");
        }
    }
}

Matrix zscore_normalize(const Matrix& m) {
    if (m.rows < 2)
        throw insufficient_samples("zscore_normalize: need at least 2 rows to standardize");
    Matrix out(m.rows, m.cols);
    const double inv_m = 1.0 / static_cast<double>(m.rows);
    for (std::size_t c = 0; c < m.cols; ++c) {
        double lo = m(0, c), hi = m(0, c), sum = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            const double v = m(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        // Exact constancy, not std == 0: a constant column can round to a
        // tiny nonzero variance through the mean.
        if (lo == hi) {
            for (std::size_t r = 0; r < m.rows; ++r) out(r, c) = 0.0;
            continue;
        }
        const double mean = sum * inv_m;
        double ss = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            const double dv = m(r, c) - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss * inv_m);
        if (sd == 0.0) {
            for (std::size_t r = 0; r < m.rows; ++r) out(r, c) = 0.0;
            continue;
        }
        for (std::size_t r = 0; r < m.rows; ++r) out(r, c) = (m(r, c) - mean) / sd;
    }
    return out;
}

DistanceMatrix subspace_distance(const Matrix& normalized, std::vector<std::string> labels,
                                 Exec exec) {
    if (!labels.empty() && labels.size() != normalized.rows)
        throw argument_error("subspace_distance: label count does not match row count");
    const std::size_t m = normalized.rows;
    DistanceMatrix out;
    out.d = Matrix(m, m);
    out.labels = std::move(labels);
    // Each (i, j) entry is computed independently with a fixed column order,
    // so the result is bit-identical for any schedule and symmetric exactly.
    detail::par_for(exec, static_cast<std::int64_t>(m), [&](std::int64_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            double ss = 0.0;
            for (std::size_t c = 0; c < normalized.cols; ++c) {
                const double dv = normalized(static_cast<std::size_t>(i), c) - normalized(j, c);
                ss += dv * dv;
            }
            out.d(static_cast<std::size_t>(i), j) = std::sqrt(ss);
        }
    });
    return out;
}

DistanceMatrix combined_distance(const FeatureMatrices& fm, Exec exec) {
    const DistanceMatrix df = subspace_distance(zscore_normalize(fm.f), {}, exec);
    const DistanceMatrix dp = subspace_distance(zscore_normalize(fm.p), {}, exec);
    const DistanceMatrix dq = subspace_distance(zscore_normalize(fm.q), {}, exec);
    DistanceMatrix out;
    out.labels = fm.labels;
    out.d = Matrix(df.d.rows, df.d.cols);
    for (std::size_t k = 0; k < out.d.a.size(); ++k)
        out.d.a[k] = df.d.a[k] + dp.d.a[k] + dq.d.a[k];
    return out;
}

double mse_distance(const FrequencySeries& a, const FrequencySeries& b,
                    std::optional<std::pair<double, double>> band) {
    a.check();
    b.check();
    if (a.f0 != b.f0 || a.df != b.df || a.size() != b.size())
        throw grid_error("mse_distance: series grids differ; resample first");
    double f_min = a.f0;
    double f_max = a.f_end();
    if (band) {
        f_min = band->first;
        f_max = band->second;
        if (!(f_min < f_max)) throw argument_error("mse_distance: band must satisfy f_min < f_max");
    }
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double f = a.freq(k);
        if (f < f_min || f > f_max) continue;
        if (!a.is_valid(k) || !b.is_valid(k)) continue;
        const double dv = db_magnitude(a.values[k]) - db_magnitude(b.values[k]);
        acc += dv * dv;
        ++n;
    }
    if (n == 0) throw argument_error("mse_distance: band contains no usable bins");
    return acc / static_cast<double>(n);
}

DistanceMatrix mse_matrix(const std::vector<LabeledSeries>& dataset,
                          std::optional<std::pair<double, double>> band, Exec exec) {
    if (dataset.size() < 2) throw argument_error("mse_matrix: need at least 2 dataset members");
    const std::size_t m = dataset.size();
    DistanceMatrix out;
    out.d = Matrix(m, m);
    out.labels.reserve(m);
    for (const LabeledSeries& ls : dataset) out.labels.push_back(ls.label);

    std::vector<std::string> failures(m);
    detail::par_for(exec, static_cast<std::int64_t>(m), [&](std::int64_t i) {
        try {
            for (std::size_t j = 0; j < m; ++j) {
                if (j == static_cast<std::size_t>(i)) continue;
                out.d(static_cast<std::size_t>(i), j) =
                    mse_distance(dataset[static_cast<std::size_t>(i)].frf, dataset[j].frf, band);
            }
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
        }
    });
    for (std::size_t i = 0; i < m; ++i)
        if (!failures[i].empty())
            throw data_error("mse_matrix: row " + out.labels[i] + " failed: " + failures[i]);
    return out;
}

double power_fraction(const FrequencySeries& frf, double f) {
    const std::vector<double> cum = power_cumulative(frf);
    if (!(f >= frf.f0) || !(f <= frf.f_end()))
        throw argument_error("power_fraction: frequency lies outside the grid span");
    const double total = cum.back();
    if (!(total > 0.0)) throw degenerate_signal("power_fraction: series has zero total power");
    if (f == frf.f_end()) return 1.0;

    const double pos = (f - frf.f0) / frf.df;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= frf.size() - 1) k = frf.size() - 2;
    const double fk = frf.freq(k);
    const double t = f - fk;
    if (t <= 0.0) return cum[k] / total;
    const double pk = series_power(frf, k);
    const double pk1 = series_power(frf, k + 1);
    // Linear interpolation of the integrand across the partial bin.
    const double pf = pk + (pk1 - pk) * (t / frf.df);
    const double partial = 0.5 * (pk + pf) * t;
    return (cum[k] + partial) / total;
}

std::vector<double> power_fraction_curve(const FrequencySeries& frf) {
    std::vector<double> cum = power_cumulative(frf);
    const double total = cum.back();
    if (!(total > 0.0)) throw degenerate_signal("power_fraction_curve: series has zero total power");
    for (double& v : cum) v /= total;
    cum.back() = 1.0;
    return cum;
}

double bridge_hill_indicator(const FrequencySeries& frf, std::size_t smoothing_bins) {
    if (smoothing_bins < 1) throw argument_error("bridge_hill_indicator: smoothing must be >= 1");
    const std::vector<double> cum = power_cumulative(frf);
    if (!(cum.back() > 0.0))
        throw degenerate_signal("bridge_hill_indicator: series has zero total power");

    // Per-segment trapezoid areas rather than differences of the cumulative
    // curve: identical integrand pairs give bit-identical areas, so a flat
    // spectrum ties exactly and the scan below resolves it to the grid start.
    // Normalizing by the total would not change the argmax and is skipped.
    const std::size_t nd = frf.size() - 1;
    std::vector<double> diff(nd);
    for (std::size_t k = 0; k < nd; ++k)
        diff[k] = 0.5 * (series_power(frf, k) + series_power(frf, k + 1)) * frf.df;

    // Centered moving average, truncated at the edges. The mean is computed
    // as an offset from the window's first sample so constant windows of any
    // width produce exactly the same value.
    const std::size_t left = (smoothing_bins - 1) / 2;
    const std::size_t right = smoothing_bins - 1 - left;
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nd; ++k) {
        const std::size_t a = k >= left ? k - left : 0;
        const std::size_t b = std::min(nd - 1, k + right);
        double s = 0.0;
        for (std::size_t j = a; j <= b; ++j) s += diff[j] - diff[a];
        const double v = diff[a] + s / static_cast<double>(b - a + 1);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    return frf.freq(best);
}

}  // namespace frfm
