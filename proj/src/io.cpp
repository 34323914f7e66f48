#include "frfm/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace frfm::io {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr double kGridJitterRel = 1e-6;

std::string quote(const std::string& s) { return "'" + s + "'"; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read: cannot open " + quote(path));
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw io_error("read: failed reading " + quote(path));
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = line.find(',', start);
        if (end == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, end - start));
        start = end + 1;
    }
}

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no, const std::string& msg) {
    throw parse_error(path + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_field(const std::string& path, std::size_t line_no, const std::string& token,
                   const char* what) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        fail_line(path, line_no, std::string("malformed ") + what + " value " + quote(token));
    if (!std::isfinite(v))
        fail_line(path, line_no, std::string(what) + " value is not finite");
    return v;
}

bool label_charset_ok(const std::string& label) {
    if (label.empty()) return false;
    for (char c : label) {
        const auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '.' || c == '_' || c == ' ' || c == '-')) return false;
    }
    return true;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // field lists
    std::vector<std::size_t> row_lines;          // 1-based source line numbers
};

CsvTable read_csv(const std::string& path, const std::string& expected_first_header) {
    const std::vector<std::string> lines = split_lines(read_file(path));
    if (lines.empty()) throw parse_error(path + ":1: file is empty");
    CsvTable t;
    t.header = split_fields(lines[0]);
    if (t.header.empty() || t.header[0] != expected_first_header)
        fail_line(path, 1, "expected header starting with " + quote(expected_first_header));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        t.rows.push_back(split_fields(lines[i]));
        t.row_lines.push_back(i + 1);
    }
    return t;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const char* context) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw parse_error(std::string(context) + ": malformed number " + quote(token));
    if (!std::isfinite(v)) throw parse_error(std::string(context) + ": number is not finite");
    return v;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("write: cannot open " + quote(tmp));
        out << content;
        out.flush();
        if (!out) throw io_error("write: failed writing " + quote(tmp));
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw io_error("write: cannot rename " + quote(tmp) + " to " + quote(path) + ": " +
                       ec.message());
    }
}

FrequencySeries load_frf_csv(const std::string& path, std::string* warning) {
    const CsvTable t = read_csv(path, "freq_hz");
    const bool has_valid = t.header.size() == 4 && t.header[3] == "valid";
    if (!((t.header.size() == 3 || has_valid) && t.header[1] == "real" && t.header[2] == "imag"))
        fail_line(path, 1, "expected header freq_hz,real,imag[,valid]");
    if (t.rows.size() < 2) throw parse_error(path + ": need at least 2 data rows");

    const std::size_t n = t.rows.size();
    std::vector<double> f(n), re(n), im(n);
    std::vector<std::uint8_t> valid;
    if (has_valid) valid.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.row_lines[i];
        if (row.size() != t.header.size())
            fail_line(path, line, "expected " + std::to_string(t.header.size()) + " fields, got " +
                                      std::to_string(row.size()));
        f[i] = parse_field(path, line, row[0], "frequency");
        re[i] = parse_field(path, line, row[1], "real");
        im[i] = parse_field(path, line, row[2], "imag");
        if (has_valid) {
            if (row[3] == "0")
                valid[i] = 0;
            else if (row[3] != "1")
                fail_line(path, line, "valid flag must be 0 or 1, got " + quote(row[3]));
        }
        if (i > 0 && !(f[i] > f[i - 1]))
            fail_line(path, line, "frequencies must be strictly increasing (got " +
                                      format_double(f[i]) + " after " + format_double(f[i - 1]) + ")");
    }

    const double df = (f.back() - f.front()) / static_cast<double>(n - 1);
    bool uniform = true;
    for (std::size_t i = 0; i + 1 < n && uniform; ++i)
        if (std::abs((f[i + 1] - f[i]) - df) > kGridJitterRel * df) uniform = false;

    FrequencySeries out;
    out.f0 = f.front();
    out.df = df;
    out.values.resize(n);
    if (uniform) {
        for (std::size_t i = 0; i < n; ++i) out.values[i] = cplx{re[i], im[i]};
        out.valid = std::move(valid);
        out.check();
        return out;
    }

    // Non-uniform grid: linear interpolation onto the uniform grid spanning
    // the same range. A target bin stays valid only if every source sample it
    // depends on is valid.
    if (warning)
        *warning = "non-uniform frequency grid in " + quote(path) +
                   ": resampled to uniform df = " + format_double(df);
    if (!valid.empty()) out.valid.assign(n, 1);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = std::min(out.f0 + static_cast<double>(k) * df, f.back());
        while (seg + 2 < n && f[seg + 1] <= fk) ++seg;
        const double span = f[seg + 1] - f[seg];
        const double w = std::clamp((fk - f[seg]) / span, 0.0, 1.0);
        out.values[k] = cplx{re[seg] + (re[seg + 1] - re[seg]) * w,
                             im[seg] + (im[seg + 1] - im[seg]) * w};
        if (!valid.empty()) {
            const bool ok = (w == 0.0)   ? valid[seg] != 0
                            : (w == 1.0) ? valid[seg + 1] != 0
                                         : (valid[seg] != 0 && valid[seg + 1] != 0);
            out.valid[k] = ok ? 1 : 0;
        }
    }
    out.check();
    return out;
}

void save_frf_csv(const FrequencySeries& series, const std::string& path) {
    series.check();
    const bool with_valid = series.any_masked();
    std::string text = with_valid ? "freq_hz,real,imag,valid\n" : "freq_hz,real,imag\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        text += format_double(series.freq(k));
        text += ',';
        text += format_double(series.values[k].real());
        text += ',';
        text += format_double(series.values[k].imag());
        if (with_valid) {
            text += ',';
            text += series.is_valid(k) ? '1' : '0';
        }
        text += '\n';
    }
    atomic_write_text(path, text);
}

DistanceMatrix load_distance_csv(const std::string& path) {
    const CsvTable t = read_csv(path, "label");
    const std::size_t m = t.header.size() - 1;
    if (m < 1) throw parse_error(path + ":1: header names no columns");
    if (t.rows.size() != m)
        throw parse_error(path + ": expected " + std::to_string(m) + " rows, got " +
                          std::to_string(t.rows.size()));
    DistanceMatrix out;
    out.labels.assign(t.header.begin() + 1, t.header.end());
    out.d = Matrix(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.row_lines[i];
        if (row.size() != m + 1)
            fail_line(path, line, "expected " + std::to_string(m + 1) + " fields");
        if (row[0] != out.labels[i])
            fail_line(path, line, "row label " + quote(row[0]) + " does not match header order");
        for (std::size_t j = 0; j < m; ++j)
            out.d(i, j) = parse_field(path, line, row[j + 1], "distance");
    }
    return out;
}

void save_distance_csv(const DistanceMatrix& d, const std::string& path) {
    if (d.d.rows != d.d.cols) throw argument_error("save_distance_csv: matrix is not square");
    const std::size_t m = d.d.rows;
    std::vector<std::string> labels = d.labels;
    if (labels.empty())
        for (std::size_t i = 0; i < m; ++i) labels.push_back(std::to_string(i));
    if (labels.size() != m) throw argument_error("save_distance_csv: label count mismatch");

    std::string text = "label";
    for (const std::string& l : labels) {
        text += ',';
        text += l;
    }
    text += '\n';
    for (std::size_t i = 0; i < m; ++i) {
        text += labels[i];
        for (std::size_t j = 0; j < m; ++j) {
            text += ',';
            text += format_double(d.d(i, j));
        }
        text += '\n';
    }
    atomic_write_text(path, text);
}

FeatureMatrices load_features_csv(const std::string& path) {
    const CsvTable t = read_csv(path, "label");
    if ((t.header.size() - 1) % 3 != 0 || t.header.size() < 4)
        fail_line(path, 1, "expected label plus 3N feature columns");
    const std::size_t n = (t.header.size() - 1) / 3;
    const char* prefixes = "fpq";
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t c = 0; c < n; ++c) {
            const std::string want = std::string(1, prefixes[b]) + std::to_string(c + 1);
            if (t.header[1 + b * n + c] != want)
                fail_line(path, 1, "expected column " + quote(want) + ", got " +
                                       quote(t.header[1 + b * n + c]));
        }
    const std::size_t m = t.rows.size();
    if (m < 1) throw parse_error(path + ": no data rows");

    FeatureMatrices fm;
    fm.f = Matrix(m, n);
    fm.p = Matrix(m, n);
    fm.q = Matrix(m, n);
    fm.q_imputed.assign(m * n, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.row_lines[i];
        if (row.size() != t.header.size())
            fail_line(path, line, "expected " + std::to_string(t.header.size()) + " fields");
        fm.labels.push_back(row[0]);
        for (std::size_t c = 0; c < n; ++c) {
            fm.f(i, c) = parse_field(path, line, row[1 + c], "f");
            fm.p(i, c) = parse_field(path, line, row[1 + n + c], "p");
            fm.q(i, c) = parse_field(path, line, row[1 + 2 * n + c], "q");
        }
    }
    return fm;
}

void save_features_csv(const FeatureMatrices& fm, const std::string& path) {
    const std::size_t m = fm.f.rows;
    const std::size_t n = fm.f.cols;
    if (fm.p.rows != m || fm.q.rows != m || fm.p.cols != n || fm.q.cols != n)
        throw argument_error("save_features_csv: matrices disagree in shape");
    if (fm.labels.size() != m) throw argument_error("save_features_csv: label count mismatch");

    std::string text = "label";
    const char* prefixes = "fpq";
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t c = 0; c < n; ++c)
            text += "," + std::string(1, prefixes[b]) + std::to_string(c + 1);
    text += '\n';
    for (std::size_t i = 0; i < m; ++i) {
        text += fm.labels[i];
        for (std::size_t c = 0; c < n; ++c) text += ',' + format_double(fm.f(i, c));
        for (std::size_t c = 0; c < n; ++c) text += ',' + format_double(fm.p(i, c));
        for (std::size_t c = 0; c < n; ++c) text += ',' + format_double(fm.q(i, c));
        text += '\n';
    }
    atomic_write_text(path, text);
}

TimeRecord load_time_csv(const std::string& path) {
    const CsvTable t = read_csv(path, "time_s");
    if (t.header.size() != 2 || t.header[1] != "value")
        fail_line(path, 1, "expected header time_s,value");
    if (t.rows.size() < 2) throw parse_error(path + ": need at least 2 samples");

    const std::size_t n = t.rows.size();
    std::vector<double> time(n);
    TimeRecord rec;
    rec.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.row_lines[i];
        if (row.size() != 2) fail_line(path, line, "expected 2 fields");
        time[i] = parse_field(path, line, row[0], "time");
        rec.samples[i] = parse_field(path, line, row[1], "sample");
        if (i > 0 && !(time[i] > time[i - 1]))
            fail_line(path, line, "time values must be strictly increasing");
    }
    const double dt = (time.back() - time.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (std::abs((time[i + 1] - time[i]) - dt) > kGridJitterRel * dt)
            fail_line(path, t.row_lines[i + 1], "time column is not uniformly sampled");
    rec.fs = 1.0 / dt;
    return rec;
}

void save_time_csv(const TimeRecord& record, const std::string& path) {
    if (!(record.fs > 0.0)) throw argument_error("save_time_csv: sample rate must be positive");
    std::string text = "time_s,value\n";
    for (std::size_t k = 0; k < record.samples.size(); ++k) {
        text += format_double(static_cast<double>(k) / record.fs);
        text += ',';
        text += format_double(record.samples[k]);
        text += '\n';
    }
    atomic_write_text(path, text);
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const std::string& s, std::size_t off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(s[off])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 3])) << 24);
}

std::uint16_t get_u16(const std::string& s, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off]) |
                                      (static_cast<unsigned char>(s[off + 1]) << 8));
}

}  // namespace

TimeRecord load_wav(const std::string& path) {
    const std::string data = read_file(path);
    if (data.size() < 12 || data.compare(0, 4, "RIFF") != 0 || data.compare(8, 4, "WAVE") != 0)
        throw parse_error(path + ": not a RIFF/WAVE file");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_off = 0, data_len = 0;
    std::size_t off = 12;
    while (off + 8 <= data.size()) {
        const std::string id = data.substr(off, 4);
        const std::uint32_t len = get_u32(data, off + 4);
        const std::size_t body = off + 8;
        if (body + len > data.size()) throw parse_error(path + ": truncated chunk " + quote(id));
        if (id == "fmt ") {
            if (len < 16) throw parse_error(path + ": fmt chunk too short");
            format = get_u16(data, body);
            channels = get_u16(data, body + 2);
            rate = get_u32(data, body + 4);
            bits = get_u16(data, body + 14);
            have_fmt = true;
        } else if (id == "data") {
            data_off = body;
            data_len = len;
        }
        off = body + len + (len % 2);  // chunks are word-aligned
    }
    if (!have_fmt) throw parse_error(path + ": missing fmt chunk");
    if (format != 3 || bits != 32)
        throw parse_error(path + ": only 32-bit IEEE-float WAV is supported");
    if (channels != 1) throw parse_error(path + ": only single-channel WAV is supported");
    if (data_len == 0) throw parse_error(path + ": missing or empty data chunk");
    if (data_len % 4 != 0) throw parse_error(path + ": data chunk size is not a whole sample count");

    TimeRecord rec;
    rec.fs = static_cast<double>(rate);
    rec.samples.resize(data_len / 4);
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        std::uint32_t u = get_u32(data, data_off + 4 * i);
        float f;
        std::memcpy(&f, &u, 4);
        if (!std::isfinite(f)) throw parse_error(path + ": sample " + std::to_string(i) + " is not finite");
        rec.samples[i] = static_cast<double>(f);
    }
    return rec;
}

void save_wav(const TimeRecord& record, const std::string& path) {
    if (!(record.fs > 0.0) || record.fs != std::floor(record.fs) || record.fs > 4294967295.0)
        throw argument_error("save_wav: sample rate must be a positive integer");
    const std::uint32_t rate = static_cast<std::uint32_t>(record.fs);
    const std::uint32_t n = static_cast<std::uint32_t>(record.samples.size());
    std::string out;
    out.reserve(44 + 4 * record.samples.size());
    out += "RIFF";
    put_u32(out, 36 + 4 * n);
    out += "WAVE";
    out += "fmt ";
    put_u32(out, 16);
    put_u16(out, 3);  // IEEE float
    put_u16(out, 1);
    put_u32(out, rate);
    put_u32(out, rate * 4);
    put_u16(out, 4);
    put_u16(out, 32);
    out += "data";
    put_u32(out, 4 * n);
    for (double v : record.samples) {
        const float f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(out, u);
    }
    atomic_write_text(path, out);
}

TimeRecord load_time_record(const std::string& path) {
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".wav" ? load_wav(path) : load_time_csv(path);
}

std::string DatasetManifest::resolve(const std::string& path) const {
    const fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).string();
}

DatasetManifest load_manifest(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
        throw parse_error(path + ": manifest must be an object with an 'entries' array");

    DatasetManifest m;
    m.base_dir = fs::path(path).parent_path().string();
    std::vector<std::string> seen;
    std::size_t idx = 0;
    for (const auto& je : j["entries"]) {
        const std::string where = path + ": entry " + std::to_string(idx++);
        if (!je.is_object()) throw parse_error(where + ": must be an object");
        ManifestEntry e;
        if (!je.contains("label") || !je["label"].is_string())
            throw parse_error(where + ": missing string 'label'");
        e.label = je["label"].get<std::string>();
        if (!label_charset_ok(e.label))
            throw parse_error(where + ": label " + quote(e.label) +
                              " must be non-empty over [A-Za-z0-9._ -]");
        if (std::find(seen.begin(), seen.end(), e.label) != seen.end())
            throw parse_error(where + ": duplicate label " + quote(e.label));
        seen.push_back(e.label);

        if (!je.contains("kind") || !je["kind"].is_string())
            throw parse_error(where + ": missing string 'kind'");
        e.kind = je["kind"].get<std::string>();
        if (e.kind != "frf_csv" && e.kind != "impulse_pair" && e.kind != "measurement_set")
            throw parse_error(where + ": unknown kind " + quote(e.kind));

        if (!je.contains("paths") || !je["paths"].is_array() || je["paths"].empty())
            throw parse_error(where + ": missing non-empty 'paths' array");
        for (const auto& jp : je["paths"]) {
            if (!jp.is_string()) throw parse_error(where + ": paths must be strings");
            e.paths.push_back(jp.get<std::string>());
        }
        if (e.kind == "frf_csv" && e.paths.size() != 1)
            throw parse_error(where + ": frf_csv takes exactly 1 path");
        if (e.kind == "impulse_pair" && e.paths.size() != 2)
            throw parse_error(where + ": impulse_pair takes exactly 2 paths (force, response)");
        if (e.kind == "measurement_set" && (e.paths.size() < 2 || e.paths.size() % 2 != 0))
            throw parse_error(where + ": measurement_set takes an even number of paths >= 2");

        if (je.contains("metadata")) {
            if (!je["metadata"].is_object()) throw parse_error(where + ": metadata must be an object");
            for (const auto& [k, v] : je["metadata"].items()) {
                if (!v.is_string()) throw parse_error(where + ": metadata values must be strings");
                e.metadata[k] = v.get<std::string>();
            }
        }
        for (const std::string& p : e.paths) {
            const std::string full = m.resolve(p);
            if (!fs::exists(full)) throw data_error(where + ": file not found: " + quote(full));
        }
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty()) throw parse_error(path + ": manifest has no entries");
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    ordered_json j;
    j["entries"] = ordered_json::array();
    for (const ManifestEntry& e : manifest.entries) {
        ordered_json je;
        je["label"] = e.label;
        je["kind"] = e.kind;
        je["paths"] = e.paths;
        je["metadata"] = ordered_json::object();
        for (const auto& [k, v] : e.metadata) je["metadata"][k] = v;
        j["entries"].push_back(std::move(je));
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

MeasurementSet assemble_measurement_set(const DatasetManifest& manifest,
                                        const ManifestEntry& entry) {
    if (entry.kind != "impulse_pair" && entry.kind != "measurement_set")
        throw argument_error("assemble_measurement_set: entry " + quote(entry.label) +
                             " has kind " + quote(entry.kind));
    SignalKind response_kind = SignalKind::velocity;
    if (const auto it = entry.metadata.find("response_kind"); it != entry.metadata.end()) {
        if (it->second == "velocity")
            response_kind = SignalKind::velocity;
        else if (it->second == "acceleration")
            response_kind = SignalKind::acceleration;
        else
            throw parse_error("assemble_measurement_set: entry " + quote(entry.label) +
                              ": unknown response_kind " + quote(it->second));
    }

    MeasurementSet set;
    for (std::size_t i = 0; i + 1 < entry.paths.size(); i += 2) {
        const std::string fpath = manifest.resolve(entry.paths[i]);
        const std::string xpath = manifest.resolve(entry.paths[i + 1]);
        TimeRecord force = load_time_record(fpath);
        TimeRecord resp = load_time_record(xpath);
        force.kind = SignalKind::force;
        resp.kind = response_kind;
        if (force.fs != resp.fs)
            throw data_error("assemble_measurement_set: sample rate mismatch between " +
                             quote(fpath) + " and " + quote(xpath));
        if (force.samples.size() != resp.samples.size())
            throw data_error("assemble_measurement_set: length mismatch between " + quote(fpath) +
                             " and " + quote(xpath));
        if (!set.pairs.empty() && set.pairs.front().first.fs != force.fs)
            throw data_error("assemble_measurement_set: sample rate of " + quote(fpath) +
                             " differs from the first pair");
        if (!set.pairs.empty() && set.pairs.front().first.samples.size() != force.samples.size())
            throw data_error("assemble_measurement_set: length of " + quote(fpath) +
                             " differs from the first pair");
        set.pairs.emplace_back(std::move(force), std::move(resp));
    }
    return set;
}

DendrogramFile load_dendrogram_json(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": invalid JSON: " + e.what());
    }
    DendrogramFile out;
    try {
        out.dend.n_leaves = j.at("n_leaves").get<std::size_t>();
        if (j.contains("labels")) out.labels = j["labels"].get<std::vector<std::string>>();
        for (const auto& jm : j.at("merges")) {
            if (!jm.is_array() || jm.size() != 3)
                throw parse_error(path + ": each merge must be [left, right, height]");
            out.dend.merges.push_back(Merge{jm[0].get<std::size_t>(), jm[1].get<std::size_t>(),
                                            jm[2].get<double>()});
        }
        out.dend.leaf_order = j.at("leaf_order").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": bad dendrogram JSON: " + e.what());
    }
    const std::size_t m = out.dend.n_leaves;
    if (out.dend.merges.size() + 1 != m || out.dend.leaf_order.size() != m)
        throw parse_error(path + ": merge/leaf counts are inconsistent with n_leaves");
    if (!out.labels.empty() && out.labels.size() != m)
        throw parse_error(path + ": label count does not match n_leaves");
    return out;
}

void save_dendrogram_json(const Dendrogram& dend, const std::vector<std::string>& labels,
                          const std::string& path) {
    if (!labels.empty() && labels.size() != dend.n_leaves)
        throw argument_error("save_dendrogram_json: label count does not match leaves");
    ordered_json j;
    j["n_leaves"] = dend.n_leaves;
    j["labels"] = labels;
    j["merges"] = ordered_json::array();
    for (const Merge& m : dend.merges)
        j["merges"].push_back(ordered_json::array({m.left, m.right, m.height}));
    j["leaf_order"] = dend.leaf_order;
    atomic_write_text(path, j.dump(2) + "\n");
}

namespace {

struct NewickCtx {
    const Dendrogram& dend;
    const std::vector<std::string>& labels;
    std::vector<std::size_t> first_pos;  // earliest leaf_order position per node
};

std::string newick_name(const NewickCtx& ctx, std::size_t leaf) {
    if (ctx.labels.empty()) return std::to_string(leaf);
    return ctx.labels[leaf];
}

double node_height(const Dendrogram& d, std::size_t node) {
    return node < d.n_leaves ? 0.0 : d.merges[node - d.n_leaves].height;
}

std::string newick_node(const NewickCtx& ctx, std::size_t node) {
    if (node < ctx.dend.n_leaves) return newick_name(ctx, node);
    const Merge& m = ctx.dend.merges[node - ctx.dend.n_leaves];
    // Children render in leaf_order: the subtree seen earlier goes first.
    std::size_t a = m.left, b = m.right;
    if (ctx.first_pos[b] < ctx.first_pos[a]) std::swap(a, b);
    const double h = m.height;
    return "(" + newick_node(ctx, a) + ":" + format_double(h - node_height(ctx.dend, a)) + "," +
           newick_node(ctx, b) + ":" + format_double(h - node_height(ctx.dend, b)) + ")";
}

}  // namespace

std::string dendrogram_to_newick(const Dendrogram& dend, const std::vector<std::string>& labels) {
    const std::size_t m = dend.n_leaves;
    if (m == 0) throw argument_error("dendrogram_to_newick: empty dendrogram");
    if (!labels.empty() && labels.size() != m)
        throw argument_error("dendrogram_to_newick: label count does not match leaves");
    for (const std::string& l : labels)
        if (!label_charset_ok(l))
            throw argument_error("dendrogram_to_newick: label " + quote(l) +
                                 " is not safe for Newick output");
    if (dend.leaf_order.size() != m)
        throw argument_error("dendrogram_to_newick: leaf_order size does not match leaves");

    NewickCtx ctx{dend, labels, std::vector<std::size_t>(2 * m - 1, 0)};
    for (std::size_t pos = 0; pos < m; ++pos) ctx.first_pos[dend.leaf_order[pos]] = pos;
    for (std::size_t k = 0; k < dend.merges.size(); ++k)
        ctx.first_pos[m + k] =
            std::min(ctx.first_pos[dend.merges[k].left], ctx.first_pos[dend.merges[k].right]);
    return newick_node(ctx, 2 * m - 2) + ";\n";
}

void save_dendrogram_newick(const Dendrogram& dend, const std::vector<std::string>& labels,
                            const std::string& path) {
    atomic_write_text(path, dendrogram_to_newick(dend, labels));
}

}  // namespace frfm::io
