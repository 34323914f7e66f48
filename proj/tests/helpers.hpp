#pragma once

// Shared fixtures for the test suite: deterministic random models, impulse
// pairs whose exact FRF is known by construction, dyadic-rational distance
// matrices, and scratch directories.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "frfm/estimation.hpp"
#include "frfm/metrics.hpp"
#include "frfm/synthesis.hpp"
#include "frfm/types.hpp"

namespace helpers {

inline frfm::GridSpec make_grid(double f0, double df, std::size_t n_bins) {
    return frfm::GridSpec{f0, df, n_bins};
}

inline frfm::ModalParameter mode_from(double f_hz, double xi, double peak_db) {
    const double omega = 2.0 * std::numbers::pi * f_hz;
    const double phi = std::pow(10.0, peak_db / 20.0) * (2.0 * omega * xi * omega);
    return frfm::ModalParameter{omega, xi, phi};
}

struct ModelSpec {
    std::size_t n_modes = 10;
    double f_lo = 200.0;
    double f_hi = 3000.0;
    double xi_lo = 0.005;
    double xi_hi = 0.03;
    double peak_db_lo = 0.0;
    double peak_db_hi = 20.0;
    double spacing_factor = 10.0;  // adjacent gap must exceed factor * xi * f
};

// Rejection-samples mode frequencies until adjacent spacings clear the
// half-power overlap bound on both neighbours.
inline frfm::ModalModel random_model(std::mt19937_64& rng, const ModelSpec& spec = {}) {
    std::uniform_real_distribution<double> uf(spec.f_lo, spec.f_hi);
    std::uniform_real_distribution<double> uxi(spec.xi_lo, spec.xi_hi);
    std::uniform_real_distribution<double> up(spec.peak_db_lo, spec.peak_db_hi);

    for (int restart = 0; restart < 200; ++restart) {
        std::vector<std::pair<double, double>> placed;  // (f, xi)
        bool ok = true;
        for (std::size_t i = 0; i < spec.n_modes && ok; ++i) {
            ok = false;
            for (int attempt = 0; attempt < 500; ++attempt) {
                const double f = uf(rng);
                const double xi = uxi(rng);
                bool clear = true;
                for (const auto& [fp, xp] : placed) {
                    const double need = spec.spacing_factor * std::max(xi * f, xp * fp);
                    if (std::abs(f - fp) <= need) {
                        clear = false;
                        break;
                    }
                }
                if (clear) {
                    placed.emplace_back(f, xi);
                    ok = true;
                    break;
                }
            }
        }
        if (!ok) continue;
        std::sort(placed.begin(), placed.end());
        frfm::ModalModel model;
        for (const auto& [f, xi] : placed) model.modes.push_back(mode_from(f, xi, up(rng)));
        return model;
    }
    throw std::runtime_error("random_model: rejection sampling failed to converge");
}

// Unit-impulse force plus the velocity whose spectrum is exactly the model FRF
// sampled on the rfft grid. The spectral ratio X/F then equals that FRF up to
// transform round-off, giving estimator tests an analytic target.
struct ImpulsePair {
    frfm::TimeRecord force;
    frfm::TimeRecord velocity;
    frfm::FrequencySeries target;  // synthesized on the rfft grid
};

inline ImpulsePair impulse_pair_from_model(const frfm::ModalModel& model, double fs,
                                           std::size_t length) {
    ImpulsePair out;
    out.target = frfm::synthesize_frf(model, make_grid(0.0, fs / static_cast<double>(length),
                                                       length / 2 + 1));
    // A real time signal has purely real DC and Nyquist bins; drop the modal
    // sum's imaginary part there so the target is exactly representable.
    out.target.values.front().imag(0.0);
    if (length % 2 == 0) out.target.values.back().imag(0.0);
    out.force.fs = fs;
    out.force.kind = frfm::SignalKind::force;
    out.force.samples.assign(length, 0.0);
    out.force.samples[0] = 1.0;
    out.velocity.fs = fs;
    out.velocity.kind = frfm::SignalKind::velocity;
    out.velocity.samples = frfm::inverse_spectrum(out.target.values, length);
    return out;
}

inline void add_noise(frfm::TimeRecord& record, double snr_db, std::mt19937_64& rng) {
    long double ss = 0.0L;
    for (double v : record.samples) ss += static_cast<long double>(v) * v;
    const double rms = std::sqrt(static_cast<double>(ss / record.samples.size()));
    const double sigma = rms / std::pow(10.0, snr_db / 20.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : record.samples) v += noise(rng);
}

// Symmetric zero-diagonal matrix with entries k/64, k in [1, 256]. Dyadic
// entries make pair sums exact in binary floating point for any order.
inline frfm::DistanceMatrix dyadic_matrix(std::mt19937_64& rng, std::size_t m) {
    std::uniform_int_distribution<int> uk(1, 256);
    frfm::DistanceMatrix out;
    out.d.rows = m;
    out.d.cols = m;
    out.d.a.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = static_cast<double>(uk(rng)) / 64.0;
            out.d(i, j) = v;
            out.d(j, i) = v;
        }
    for (std::size_t i = 0; i < m; ++i) out.labels.push_back("m" + std::to_string(i));
    return out;
}

inline frfm::Matrix random_feature_matrix(std::mt19937_64& rng, std::size_t rows,
                                          std::size_t cols, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    frfm::Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.a.resize(rows * cols);
    for (double& v : m.a) v = u(rng);
    return m;
}

// Scratch directory under the system temp root, removed on destruction.
struct TmpDir {
    std::filesystem::path path;

    explicit TmpDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("frfm_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace helpers
