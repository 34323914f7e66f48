#pragma once

// Independent reference implementations the tests compare the library against.
// Each oracle recomputes its quantity through a different arithmetic path
// (long double, brute force, closed form, exhaustive enumeration) so that a
// bug shared with the production code cannot hide.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "frfm/cluster.hpp"
#include "frfm/metrics.hpp"
#include "frfm/synthesis.hpp"
#include "frfm/types.hpp"

namespace oracle {

// ---- modal synthesis ---------------------------------------------------------

// Sums resonator terms in long double using the explicit conjugate-division
// formula instead of std::complex operator/.
inline std::complex<long double> frf_bin(const frfm::ModalModel& model, double f_hz) {
    const long double w = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(f_hz);
    long double re = 0.0L;
    long double im = 0.0L;
    for (const frfm::ModalParameter& m : model.modes) {
        const long double wr = static_cast<long double>(m.omega_r);
        const long double xi = static_cast<long double>(m.xi_r);
        const long double phi = static_cast<long double>(m.phi_product);
        const long double a = wr * wr - w * w;
        const long double b = 2.0L * xi * wr * w;
        const long double n2 = a * a + b * b;
        re += phi * a / n2;
        im += phi * -b / n2;
    }
    return {re, im};
}

inline long double db_curve(const frfm::ModalModel& model, long double f_hz) {
    const long double w = 2.0L * std::numbers::pi_v<long double> * f_hz;
    long double re = 0.0L;
    long double im = 0.0L;
    for (const frfm::ModalParameter& m : model.modes) {
        const long double wr = static_cast<long double>(m.omega_r);
        const long double xi = static_cast<long double>(m.xi_r);
        const long double phi = static_cast<long double>(m.phi_product);
        const long double a = wr * wr - w * w;
        const long double b = 2.0L * xi * wr * w;
        const long double n2 = a * a + b * b;
        re += phi * a / n2;
        im += phi * -b / n2;
    }
    return 20.0L * std::log10(std::hypot(re, im));
}

// Peak of a single underdamped resonator: |H| is maximal at w^2 = wr^2(1-2xi^2)
// with value phi / (2 xi wr^2 sqrt(1 - xi^2)).
struct SingleModePeak {
    long double f_hz;
    long double level_db;
};

inline SingleModePeak single_mode_peak(const frfm::ModalParameter& m) {
    const long double wr = static_cast<long double>(m.omega_r);
    const long double xi = static_cast<long double>(m.xi_r);
    const long double phi = static_cast<long double>(std::abs(m.phi_product));
    const long double w_pk = wr * std::sqrt(1.0L - 2.0L * xi * xi);
    const long double mag = phi / (2.0L * xi * wr * wr * std::sqrt(1.0L - xi * xi));
    return {w_pk / (2.0L * std::numbers::pi_v<long double>), 20.0L * std::log10(mag)};
}

// Ternary search for the dB maximum of the continuous curve inside [lo, hi].
// Assumes the bracket contains a single local maximum.
inline SingleModePeak continuous_peak(const frfm::ModalModel& model, long double lo,
                                      long double hi) {
    for (int it = 0; it < 200; ++it) {
        const long double m1 = lo + (hi - lo) / 3.0L;
        const long double m2 = hi - (hi - lo) / 3.0L;
        if (db_curve(model, m1) < db_curve(model, m2))
            lo = m1;
        else
            hi = m2;
    }
    const long double f = 0.5L * (lo + hi);
    return {f, db_curve(model, f)};
}

// Bisection for db_curve(f) == level inside a bracket where the curve crosses
// the level exactly once.
inline long double db_crossing(const frfm::ModalModel& model, long double lo, long double hi,
                               long double level) {
    long double g_lo = db_curve(model, lo) - level;
    for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double g_mid = db_curve(model, mid) - level;
        if ((g_lo <= 0.0L) == (g_mid <= 0.0L)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5L * (lo + hi);
}

// ---- discrete Fourier transform ------------------------------------------------

// O(n^2) DFT in long double; returns the one-sided half spectrum. Checks the
// FFT-based spectrum() against the definition for small lengths.
inline std::vector<std::complex<long double>> naive_half_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<long double>> out(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        long double re = 0.0L;
        long double im = 0.0L;
        for (std::size_t t = 0; t < n; ++t) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> *
                                    static_cast<long double>(k) * static_cast<long double>(t) /
                                    static_cast<long double>(n);
            re += static_cast<long double>(x[t]) * std::cos(ang);
            im += static_cast<long double>(x[t]) * std::sin(ang);
        }
        out[k] = {re, im};
    }
    return out;
}

// ---- parabolic refinement ------------------------------------------------------

// Fits a*x^2 + b*x + c through (-1, ym), (0, y0), (+1, yp) by direct solve and
// returns the vertex. Independent of the production delta formula.
struct ParabolaVertex {
    long double x;
    long double y;
};

inline ParabolaVertex parabola_vertex(long double ym, long double y0, long double yp) {
    const long double a = 0.5L * (ym + yp) - y0;
    const long double b = 0.5L * (yp - ym);
    const long double x = -b / (2.0L * a);
    return {x, a * x * x + b * x + y0};
}

// ---- feature-space distances -----------------------------------------------------

// Column statistics accumulated in long double over reversed row order.
inline frfm::Matrix zscore(const frfm::Matrix& m) {
    frfm::Matrix out;
    out.rows = m.rows;
    out.cols = m.cols;
    out.a.assign(m.a.size(), 0.0);
    for (std::size_t c = 0; c < m.cols; ++c) {
        long double sum = 0.0L;
        double lo = m(0, c);
        double hi = m(0, c);
        for (std::size_t r = m.rows; r-- > 0;) {
            sum += static_cast<long double>(m(r, c));
            lo = std::min(lo, m(r, c));
            hi = std::max(hi, m(r, c));
        }
        if (lo == hi) continue;
        const long double mean = sum / static_cast<long double>(m.rows);
        long double ss = 0.0L;
        for (std::size_t r = m.rows; r-- > 0;) {
            const long double dev = static_cast<long double>(m(r, c)) - mean;
            ss += dev * dev;
        }
        const long double sd = std::sqrt(ss / static_cast<long double>(m.rows));
        if (sd == 0.0L) continue;
        for (std::size_t r = 0; r < m.rows; ++r)
            out(r, c) = static_cast<double>((static_cast<long double>(m(r, c)) - mean) / sd);
    }
    return out;
}

// Euclidean row distance with reversed column order.
inline double row_distance(const frfm::Matrix& m, std::size_t i, std::size_t j) {
    long double ss = 0.0L;
    for (std::size_t c = m.cols; c-- > 0;) {
        const long double dv = static_cast<long double>(m(i, c)) - static_cast<long double>(m(j, c));
        ss += dv * dv;
    }
    return static_cast<double>(std::sqrt(ss));
}

// ---- agglomerative clustering -------------------------------------------------------

// From-scratch O(M^3) agglomeration keeping explicit member lists and
// re-reading the original matrix at every step. Cluster ids follow the same
// convention as the library: leaves 0..M-1, merge k creates id M+k. Ties pick
// the lexicographically smallest (id_a, id_b) pair.
inline std::vector<frfm::Merge> naive_cluster(const frfm::DistanceMatrix& d,
                                              frfm::Linkage linkage) {
    const std::size_t m = d.size();
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < m; ++i) active.push_back({i, {i}});

    const auto link = [&](const Cluster& a, const Cluster& b) {
        double best = d.d(a.members[0], b.members[0]);
        long double sum = 0.0L;
        for (std::size_t x : a.members)
            for (std::size_t y : b.members) {
                const double v = d.d(x, y);
                sum += static_cast<long double>(v);
                if (linkage == frfm::Linkage::single)
                    best = std::min(best, v);
                else
                    best = std::max(best, v);
            }
        if (linkage == frfm::Linkage::average)
            return static_cast<double>(
                sum / static_cast<long double>(a.members.size() * b.members.size()));
        return best;
    };

    std::vector<frfm::Merge> merges;
    std::size_t next_id = m;
    while (active.size() > 1) {
        std::size_t bi = 0;
        std::size_t bj = 1;
        double best = link(active[0], active[1]);
        for (std::size_t i = 0; i < active.size(); ++i)
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double v = link(active[i], active[j]);
                const auto key = std::minmax(active[i].id, active[j].id);
                const auto best_key = std::minmax(active[bi].id, active[bj].id);
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        Cluster merged;
        merged.id = next_id++;
        const auto ids = std::minmax(active[bi].id, active[bj].id);
        merged.members = active[bi].members;
        merged.members.insert(merged.members.end(), active[bj].members.begin(),
                              active[bj].members.end());
        merges.push_back({ids.first, ids.second, best});
        if (bi > bj) std::swap(bi, bj);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(std::move(merged));
    }
    return merges;
}

// ---- leaf ordering ---------------------------------------------------------------------

inline double adjacent_sum(const std::vector<std::size_t>& order, const frfm::DistanceMatrix& d) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) s += d.d(order[i], order[i + 1]);
    return s;
}

namespace detail {
inline void emit_flipped(const frfm::Dendrogram& dend, std::size_t node, std::uint64_t mask,
                         std::vector<std::size_t>& out) {
    if (node < dend.n_leaves) {
        out.push_back(node);
        return;
    }
    const frfm::Merge& mg = dend.merges[node - dend.n_leaves];
    const bool flip = (mask >> (node - dend.n_leaves)) & 1u;
    emit_flipped(dend, flip ? mg.right : mg.left, mask, out);
    emit_flipped(dend, flip ? mg.left : mg.right, mask, out);
}
}  // namespace detail

// Minimum adjacent-distance sum over every ordering reachable by flipping
// children of internal nodes: all 2^(M-1) of them. Usable for small M only.
inline double best_flip_sum(const frfm::Dendrogram& dend, const frfm::DistanceMatrix& d) {
    const std::size_t n_internal = dend.merges.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_internal); ++mask) {
        std::vector<std::size_t> order;
        order.reserve(dend.n_leaves);
        detail::emit_flipped(dend, dend.n_leaves + n_internal - 1, mask, order);
        best = std::min(best, adjacent_sum(order, d));
    }
    return best;
}

// ---- power fraction -----------------------------------------------------------------------

// Cumulative trapezoid of |H|^2 up to f, accumulated in long double over
// reversed segment order, with the same masked-bin and partial-bin rules.
inline double power_fraction(const frfm::FrequencySeries& frf, double f) {
    const std::size_t n = frf.size();
    std::vector<long double> g(n, 0.0L);
    for (std::size_t k = 0; k < n; ++k)
        if (frf.is_valid(k)) {
            const long double mag = std::abs(std::complex<long double>(frf.values[k].real(),
                                                                       frf.values[k].imag()));
            g[k] = mag * mag;
        }
    const long double df = static_cast<long double>(frf.df);
    long double total = 0.0L;
    for (std::size_t k = n - 1; k >= 1; --k) total += 0.5L * (g[k - 1] + g[k]) * df;

    const long double pos =
        (static_cast<long double>(f) - static_cast<long double>(frf.f0)) / df;
    const auto whole = static_cast<std::size_t>(std::floor(static_cast<double>(pos)));
    long double part = 0.0L;
    if (whole + 1 <= n - 1 && pos > static_cast<long double>(whole)) {
        const long double t = pos - static_cast<long double>(whole);
        const long double g_at = g[whole] + (g[whole + 1] - g[whole]) * t;
        part = 0.5L * (g[whole] + g_at) * (t * df);
    }
    long double below = 0.0L;
    for (std::size_t k = std::min(whole, n - 1); k >= 1; --k)
        below += 0.5L * (g[k - 1] + g[k]) * df;
    return static_cast<double>((below + part) / total);
}

}  // namespace oracle
