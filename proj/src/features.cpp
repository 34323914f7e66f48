#include "frfm/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

namespace frfm {

namespace {

struct BandIndices {
    std::size_t lo = 0;
    std::size_t hi = 0;  // inclusive
};

// Maps the configured band to inclusive grid indices and trims masked bins at
// the edges. Interior masked bins stay and act as hard walls for the walks.
BandIndices band_indices(const FrequencySeries& frf, const PeakConfig& cfg) {
    frf.check();
    const std::size_t n = frf.size();
    if (n < 3) throw argument_error("find_peaks: series needs at least 3 bins");

    double f_min = frf.f0;
    double f_max = frf.f_end();
    if (cfg.band) {
        f_min = cfg.band->first;
        f_max = cfg.band->second;
        if (!(f_min < f_max)) throw argument_error("find_peaks: band must satisfy f_min < f_max");
    }

    std::size_t lo = 0;
    while (lo < n && frf.freq(lo) < f_min) ++lo;
    std::size_t hi = n;  // one past
    while (hi > 0 && frf.freq(hi - 1) > f_max) --hi;
    if (hi == 0 || lo >= hi) throw argument_error("find_peaks: band does not intersect the grid");
    std::size_t hi_incl = hi - 1;

    while (lo <= hi_incl && !frf.is_valid(lo)) ++lo;
    while (hi_incl > lo && !frf.is_valid(hi_incl)) --hi_incl;
    if (hi_incl < lo + 2) throw argument_error("find_peaks: band contains fewer than 3 usable bins");
    return BandIndices{lo, hi_incl};
}

// Height of y[k] above the higher of the two walk minima; the walks stop at
// the first strictly higher sample, a masked bin, or the band edge.
double prominence(const DbSeries& db, std::size_t k, std::size_t lo, std::size_t hi) {
    const std::vector<double>& y = db.values;
    double lmin = y[k];
    for (std::size_t j = k; j-- > lo;) {
        if (!db.is_valid(j) || y[j] > y[k]) break;
        if (y[j] < lmin) lmin = y[j];
    }
    double rmin = y[k];
    for (std::size_t j = k + 1; j <= hi; ++j) {
        if (!db.is_valid(j) || y[j] > y[k]) break;
        if (y[j] < rmin) rmin = y[j];
    }
    return y[k] - std::max(lmin, rmin);
}

}  // namespace

PeakConfig violin_band_config() {
    PeakConfig cfg;
    cfg.band = std::make_pair(30.0, 1400.0);
    return cfg;
}

std::vector<std::size_t> find_peaks(const FrequencySeries& frf, const PeakConfig& cfg) {
    if (cfg.n_peaks < 1) throw argument_error("find_peaks: n_peaks must be at least 1");
    if (cfg.min_separation_hz && !(*cfg.min_separation_hz >= 0.0))
        throw argument_error("find_peaks: min_separation_hz must be non-negative");
    const BandIndices band = band_indices(frf, cfg);
    const DbSeries db = to_db(frf);
    const std::vector<double>& y = db.values;
    const double min_sep_hz = cfg.min_separation_hz.value_or(5.0 * frf.df);

    // Local maxima: >= the left neighbor and > the right one, so a flat
    // plateau contributes its rightmost bin.
    std::vector<std::size_t> qualified;
    for (std::size_t k = band.lo + 1; k + 1 <= band.hi; ++k) {
        if (!frf.is_valid(k - 1) || !frf.is_valid(k) || !frf.is_valid(k + 1)) continue;
        if (!(y[k] >= y[k - 1] && y[k] > y[k + 1])) continue;
        if (prominence(db, k, band.lo, band.hi) >= cfg.min_prominence_db) qualified.push_back(k);
    }

    // Tallest-first greedy thinning; stable sort keeps equal-height peaks in
    // ascending frequency order.
    std::vector<std::size_t> order(qualified);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
    std::vector<std::size_t> kept;
    for (std::size_t k : order) {
        bool ok = true;
        for (std::size_t k2 : kept) {
            const double sep = (k > k2 ? static_cast<double>(k - k2) : static_cast<double>(k2 - k)) * frf.df;
            if (sep < min_sep_hz) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(k);
    }
    std::sort(kept.begin(), kept.end());
    if (kept.size() < cfg.n_peaks) throw insufficient_peaks(kept.size(), cfg.n_peaks);
    kept.resize(cfg.n_peaks);
    return kept;
}

RefinedPeak refine_peak_parabolic(const DbSeries& db, std::size_t idx) {
    if (idx == 0 || idx + 1 >= db.size())
        throw argument_error("refine_peak_parabolic: index must be interior");
    const double ym = db.values[idx - 1];
    const double y0 = db.values[idx];
    const double yp = db.values[idx + 1];
    if (!std::isfinite(ym) || !std::isfinite(y0) || !std::isfinite(yp))
        throw data_error("refine_peak_parabolic: non-finite dB values around the peak");
    if (y0 < ym || y0 < yp)
        throw argument_error("refine_peak_parabolic: index is not a local maximum");

    RefinedPeak out;
    const double den = ym - 2.0 * y0 + yp;
    if (den == 0.0) {
        out.f_hat = db.freq(idx);
        out.p_hat = y0;
        out.degenerate = true;
        return out;
    }
    double delta = 0.5 * (ym - yp) / den;
    delta = std::clamp(delta, -0.5, 0.5);
    out.f_hat = db.freq(idx) + delta * db.df;
    out.p_hat = y0 - 0.25 * (ym - yp) * delta;
    return out;
}

QEstimate estimate_q_half_power(const DbSeries& db, std::size_t peak_idx, double f_hat,
                                double p_hat, std::size_t lo, std::size_t hi) {
    if (peak_idx <= lo || peak_idx >= hi || hi >= db.size())
        throw argument_error("estimate_q_half_power: peak index must lie strictly inside (lo, hi)");
    const std::vector<double>& y = db.values;
    const double level = p_hat - 10.0 * std::log10(2.0);

    QEstimate out;
    // Left crossing: the bracketing sample below the level must lie strictly
    // inside the interval, so the bound sample itself never brackets.
    std::size_t k = peak_idx;
    while (k - 1 > lo && db.is_valid(k - 1) && y[k - 1] >= level) --k;
    if (k - 1 <= lo || !db.is_valid(k - 1) || y[k - 1] >= level) return out;
    const double f1 = db.freq(k - 1) + (level - y[k - 1]) / (y[k] - y[k - 1]) * db.df;

    k = peak_idx;
    while (k + 1 < hi && db.is_valid(k + 1) && y[k + 1] >= level) ++k;
    if (k + 1 >= hi || !db.is_valid(k + 1) || y[k + 1] >= level) return out;
    const double f2 = db.freq(k) + (level - y[k]) / (y[k + 1] - y[k]) * db.df;

    out.q = f_hat / (f2 - f1);
    out.resolved = true;
    return out;
}

QEstimate estimate_q_half_power(const FrequencySeries& frf, double f_hat, double p_hat) {
    frf.check();
    if (frf.size() < 3) throw argument_error("estimate_q_half_power: series needs at least 3 bins");
    if (!(f_hat > frf.f0) || !(f_hat < frf.f_end()))
        throw argument_error("estimate_q_half_power: f_hat must lie inside the grid");
    const double pos = (f_hat - frf.f0) / frf.df;
    std::size_t idx = static_cast<std::size_t>(std::llround(pos));
    idx = std::clamp<std::size_t>(idx, 1, frf.size() - 2);
    return estimate_q_half_power(to_db(frf), idx, f_hat, p_hat, 0, frf.size() - 1);
}

ExtractionResult extract_features(const FrequencySeries& frf, const PeakConfig& cfg) {
    const std::vector<std::size_t> idx = find_peaks(frf, cfg);
    const BandIndices band = band_indices(frf, cfg);
    const DbSeries db = to_db(frf);

    ExtractionResult out;
    out.peaks.reserve(idx.size());
    out.q_imputed.assign(idx.size(), 0);
    for (std::size_t m = 0; m < idx.size(); ++m) {
        const std::size_t lo = (m == 0) ? band.lo : idx[m - 1];
        const std::size_t hi = (m + 1 == idx.size()) ? band.hi : idx[m + 1];
        const RefinedPeak rp = refine_peak_parabolic(db, idx[m]);
        QEstimate qe = estimate_q_half_power(db, idx[m], rp.f_hat, rp.p_hat, lo, hi);
        if (!qe.resolved) {
            const double width = db.freq(hi) - db.freq(lo);
            qe.q = rp.f_hat / width;
            out.q_imputed[m] = 1;
        }
        out.peaks.push_back(ModalPeak{rp.f_hat, rp.p_hat, qe.q});
    }
    return out;
}

FeatureMatrices build_feature_matrices(const std::vector<LabeledSeries>& dataset,
                                       const PeakConfig& cfg, Exec exec) {
    const std::size_t m_rows = dataset.size();
    if (m_rows < 2) throw argument_error("build_feature_matrices: need at least 2 dataset members");
    const std::size_t n = cfg.n_peaks;

    FeatureMatrices fm;
    fm.f = Matrix(m_rows, n);
    fm.p = Matrix(m_rows, n);
    fm.q = Matrix(m_rows, n);
    fm.q_imputed.assign(m_rows * n, 0);
    fm.labels.reserve(m_rows);
    for (const LabeledSeries& ls : dataset) fm.labels.push_back(ls.label);

    std::vector<std::string> failures(m_rows);
    detail::par_for(exec, static_cast<std::int64_t>(m_rows), [&](std::int64_t i) {
        const std::size_t r = static_cast<std::size_t>(i);
        try {
            const ExtractionResult ex = extract_features(dataset[r].frf, cfg);
            for (std::size_t c = 0; c < n; ++c) {
                fm.f(r, c) = ex.peaks[c].f_hz;
                fm.p(r, c) = ex.peaks[c].level_db;
                fm.q(r, c) = ex.peaks[c].q;
                fm.q_imputed[r * n + c] = ex.q_imputed[c];
            }
        } catch (const std::exception& e) {
            failures[r] = e.what();
        }
    });

    std::string failed_labels;
    std::string first_detail;
    for (std::size_t r = 0; r < m_rows; ++r) {
        if (failures[r].empty()) continue;
        if (!failed_labels.empty()) failed_labels += ", ";
        failed_labels += fm.labels[r];
        if (first_detail.empty()) first_detail = failures[r];
    }
    if (!failed_labels.empty())
        throw data_error("build_feature_matrices: extraction failed for [" + failed_labels +
                         "]: " + first_detail);
    return fm;
}

}  // namespace frfm
