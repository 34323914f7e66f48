#include "frfm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "frfm/features.hpp"
#include "frfm/metrics.hpp"

namespace frfm::report {

namespace {

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// Three-stop color ramp evaluated with integer arithmetic; t256 in [0, 256].
std::string ramp_color(int t256) {
    static constexpr int stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
    t256 = std::clamp(t256, 0, 256);
    const int seg = t256 < 128 ? 0 : 1;
    const int local = (t256 - seg * 128) * 2;  // 0..256 within the segment
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = (stops[seg][c] * (256 - local) + stops[seg + 1][c] * local + 128) / 256;
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

int ramp_index(double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    const double t = (v - lo) / (hi - lo);
    return static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 256.0));
}

struct Svg {
    std::string body;
    double width = 0.0;
    double height = 0.0;

    Svg(double w, double h) : width(w), height(h) {
        body = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(w) + "\" height=\"" +
               fmt2(h) + "\" viewBox=\"0 0 " + fmt2(w) + " " + fmt2(h) + "\">\n";
        body += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(w) + "\" height=\"" + fmt2(h) +
                "\" fill=\"#ffffff\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double width_px = 1.0, const char* dash = nullptr) {
        body += "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) +
                "\" y2=\"" + fmt2(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" +
                fmt2(width_px) + "\"";
        if (dash) body += std::string(" stroke-dasharray=\"") + dash + "\"";
        body += "/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const char* stroke = nullptr) {
        body += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(w) +
                "\" height=\"" + fmt2(h) + "\" fill=\"" + fill + "\"";
        if (stroke) body += std::string(" stroke=\"") + stroke + "\" stroke-width=\"0.50\"";
        body += "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& color) {
        body += "<circle cx=\"" + fmt2(cx) + "\" cy=\"" + fmt2(cy) + "\" r=\"" + fmt2(r) +
                "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.20\"/>\n";
    }

    void text(double x, double y, const std::string& s, double size = 10.0,
              const char* anchor = "start", const char* extra = nullptr) {
        body += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" font-family=\"monospace\"" +
                " font-size=\"" + fmt2(size) + "\" text-anchor=\"" + anchor + "\"";
        if (extra) body += std::string(" ") + extra;
        body += ">" + escape_text(s) + "</text>\n";
    }

    void polyline(const std::string& points, const std::string& color, double width_px = 1.0,
                  const char* dash = nullptr) {
        body += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
                "\" stroke-width=\"" + fmt2(width_px) + "\"";
        if (dash) body += std::string(" stroke-dasharray=\"") + dash + "\"";
        body += "/>\n";
    }

    std::string finish() { return body + "</svg>\n"; }
};

struct Frame {
    double x0, y0, x1, y1;  // plot rectangle in SVG coordinates (y0 = top)
    double fx(double t) const { return x0 + t * (x1 - x0); }          // t in [0,1]
    double fy(double t) const { return y1 - t * (y1 - y0); }          // t in [0,1], up
};

void draw_frame(Svg& svg, const Frame& fr) {
    svg.body += "<rect x=\"" + fmt2(fr.x0) + "\" y=\"" + fmt2(fr.y0) + "\" width=\"" +
                fmt2(fr.x1 - fr.x0) + "\" height=\"" + fmt2(fr.y1 - fr.y0) +
                "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.00\"/>\n";
}

struct DbRange {
    double lo = 0.0;
    double hi = 1.0;
};

DbRange db_range(const DbSeries& db) {
    DbRange r{1e300, -1e300};
    for (std::size_t k = 0; k < db.size(); ++k) {
        if (!db.is_valid(k)) continue;
        r.lo = std::min(r.lo, db.values[k]);
        r.hi = std::max(r.hi, db.values[k]);
    }
    if (!(r.lo <= r.hi)) return DbRange{0.0, 1.0};
    const double pad = std::max(1.0, 0.05 * (r.hi - r.lo));
    return DbRange{r.lo - pad, r.hi + pad};
}

std::string curve_points(const DbSeries& db, const Frame& fr, double f_lo, double f_hi,
                         const DbRange& r) {
    std::string pts;
    for (std::size_t k = 0; k < db.size(); ++k) {
        if (!db.is_valid(k)) continue;
        const double tx = (db.freq(k) - f_lo) / (f_hi - f_lo);
        const double ty = (db.values[k] - r.lo) / (r.hi - r.lo);
        if (!pts.empty()) pts += ' ';
        pts += fmt2(fr.fx(tx)) + "," + fmt2(fr.fy(ty));
    }
    return pts;
}

}  // namespace

std::string svg_frf_overlay(const FrequencySeries& original, const FrequencySeries* reconstruction,
                            const std::vector<ModalPeak>* peaks) {
    original.check();
    if (original.size() < 2) throw argument_error("svg_frf_overlay: series needs at least 2 bins");
    const DbSeries db = to_db(original);
    DbRange range = db_range(db);
    const double f_lo = original.f0;
    const double f_hi = original.f_end();

    Svg svg(800, 500);
    const Frame fr{70, 30, 780, 440};
    if (reconstruction) {
        reconstruction->check();
        const DbSeries rdb = to_db(*reconstruction);
        const DbRange rr = db_range(rdb);
        range.lo = std::min(range.lo, rr.lo);
        range.hi = std::max(range.hi, rr.hi);
        svg.polyline(curve_points(rdb, fr, f_lo, f_hi, range), "#d62728", 1.2, "5,3");
    }
    svg.polyline(curve_points(db, fr, f_lo, f_hi, range), "#1f77b4", 1.2);
    if (peaks) {
        for (const ModalPeak& p : *peaks) {
            const double tx = (p.f_hz - f_lo) / (f_hi - f_lo);
            const double ty = (p.level_db - range.lo) / (range.hi - range.lo);
            svg.circle(fr.fx(std::clamp(tx, 0.0, 1.0)), fr.fy(std::clamp(ty, 0.0, 1.0)), 4.0,
                       "#000000");
        }
    }
    draw_frame(svg, fr);
    svg.text(70, 20, "admittance magnitude", 12);
    svg.text(fr.x0, 460, fmt2(f_lo) + " Hz");
    svg.text(fr.x1, 460, fmt2(f_hi) + " Hz", 10, "end");
    svg.text(64, fr.y1, fmt2(range.lo) + " dB", 10, "end");
    svg.text(64, fr.y0 + 8, fmt2(range.hi) + " dB", 10, "end");
    if (reconstruction) {
        svg.line(600, 470, 640, 470, "#1f77b4", 1.2);
        svg.text(646, 474, "measured/original");
        svg.line(600, 486, 640, 486, "#d62728", 1.2, "5,3");
        svg.text(646, 490, "reconstruction");
    }
    return svg.finish();
}

namespace {

// Shared cell-grid renderer for both heatmap figures.
std::string heatmap(const Matrix& values, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::string& title) {
    const std::size_t rows = values.rows;
    const std::size_t cols = values.cols;
    if (rows == 0 || cols == 0) throw argument_error("heatmap: empty matrix");

    double lo = values.a[0], hi = values.a[0];
    for (double v : values.a) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    const double left = 110, top = 60;
    const double cell = std::min(40.0, std::max(14.0, 560.0 / static_cast<double>(std::max(rows, cols))));
    const double w = left + cell * static_cast<double>(cols) + 30;
    const double h = top + cell * static_cast<double>(rows) + 30;

    Svg svg(w, h);
    svg.text(left, 20, title, 12);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::string color = ramp_color(ramp_index(values(i, j), lo, hi));
            svg.rect(left + cell * static_cast<double>(j), top + cell * static_cast<double>(i),
                     cell, cell, color, "#ffffff");
        }
    }
    for (std::size_t i = 0; i < rows; ++i)
        svg.text(left - 6, top + cell * (static_cast<double>(i) + 0.5) + 3.5, row_labels[i], 10,
                 "end");
    for (std::size_t j = 0; j < cols; ++j) {
        const double cx = left + cell * (static_cast<double>(j) + 0.5);
        svg.text(cx, top - 6, col_labels[j], 10, "middle");
    }
    svg.text(left, h - 10, "scale " + fmt2(lo) + " to " + fmt2(hi), 10);
    return svg.finish();
}

std::vector<std::string> index_labels(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

}  // namespace

std::string svg_feature_heatmap(const Matrix& values, const std::vector<std::string>& row_labels,
                                const std::string& value_name) {
    if (!row_labels.empty() && row_labels.size() != values.rows)
        throw argument_error("svg_feature_heatmap: label count does not match rows");
    std::vector<std::string> cols;
    cols.reserve(values.cols);
    for (std::size_t j = 0; j < values.cols; ++j)
        cols.push_back(value_name + std::to_string(j + 1));
    return heatmap(values, row_labels.empty() ? index_labels(values.rows) : row_labels, cols,
                   "feature matrix " + value_name);
}

std::string svg_distance_heatmap(const DistanceMatrix& d) {
    d.check(1e-9);
    const std::vector<std::string> labels =
        d.labels.empty() ? index_labels(d.size()) : d.labels;
    return heatmap(d.d, labels, labels, "distance matrix");
}

std::string svg_dendrogram(const Dendrogram& dend, const std::vector<std::string>& labels) {
    const std::size_t m = dend.n_leaves;
    if (m < 2) throw argument_error("svg_dendrogram: need at least 2 leaves");
    if (dend.merges.size() + 1 != m || dend.leaf_order.size() != m)
        throw argument_error("svg_dendrogram: inconsistent dendrogram");
    if (!labels.empty() && labels.size() != m)
        throw argument_error("svg_dendrogram: label count does not match leaves");

    double h_max = 0.0;
    for (const Merge& mg : dend.merges) h_max = std::max(h_max, mg.height);
    if (h_max <= 0.0) h_max = 1.0;

    const Frame fr{60, 30, 760, 420};
    Svg svg(800, 480);
    svg.text(60, 20, "dendrogram", 12);

    // Leaf x positions follow leaf_order; internal nodes sit at the midpoint
    // of their children, heights map linearly to y.
    std::vector<double> x(2 * m - 1, 0.0), y(2 * m - 1, 0.0);
    const double step = (fr.x1 - fr.x0) / static_cast<double>(m);
    for (std::size_t pos = 0; pos < m; ++pos) {
        x[dend.leaf_order[pos]] = fr.x0 + step * (static_cast<double>(pos) + 0.5);
        y[dend.leaf_order[pos]] = fr.y1;
    }
    for (std::size_t k = 0; k < dend.merges.size(); ++k) {
        const Merge& mg = dend.merges[k];
        const std::size_t node = m + k;
        const double yh = fr.fy(mg.height / h_max);
        x[node] = 0.5 * (x[mg.left] + x[mg.right]);
        y[node] = yh;
        svg.line(x[mg.left], y[mg.left], x[mg.left], yh, "#1f77b4", 1.2);
        svg.line(x[mg.right], y[mg.right], x[mg.right], yh, "#1f77b4", 1.2);
        svg.line(x[mg.left], yh, x[mg.right], yh, "#1f77b4", 1.2);
    }
    for (std::size_t pos = 0; pos < m; ++pos) {
        const std::size_t leaf = dend.leaf_order[pos];
        const std::string name = labels.empty() ? std::to_string(leaf) : labels[leaf];
        svg.text(x[leaf], fr.y1 + 14, name, 10, "middle");
    }
    svg.text(54, fr.y1, "0", 10, "end");
    svg.text(54, fr.y0 + 8, fmt2(h_max), 10, "end");
    return svg.finish();
}

std::string svg_power_fraction(const FrequencySeries& frf, std::size_t smoothing_bins) {
    const std::vector<double> curve = power_fraction_curve(frf);
    const double hill = bridge_hill_indicator(frf, smoothing_bins);
    const double f_lo = frf.f0;
    const double f_hi = frf.f_end();

    Svg svg(800, 500);
    const Frame fr{70, 30, 780, 440};
    std::string pts;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const double tx = (frf.freq(k) - f_lo) / (f_hi - f_lo);
        if (!pts.empty()) pts += ' ';
        pts += fmt2(fr.fx(tx)) + "," + fmt2(fr.fy(curve[k]));
    }
    const double hx = fr.fx((hill - f_lo) / (f_hi - f_lo));
    svg.line(hx, fr.y0, hx, fr.y1, "#d62728", 1.0, "4,3");
    svg.polyline(pts, "#1f77b4", 1.5);
    draw_frame(svg, fr);
    svg.text(70, 20, "power fraction", 12);
    svg.text(fr.x0, 460, fmt2(f_lo) + " Hz");
    svg.text(fr.x1, 460, fmt2(f_hi) + " Hz", 10, "end");
    svg.text(64, fr.y1, "0.00", 10, "end");
    svg.text(64, fr.y0 + 8, "1.00", 10, "end");
    svg.text(hx + 4, 50, "max slope at " + fmt2(hill) + " Hz");
    return svg.finish();
}

}  // namespace frfm::report
