#include "frfm/synthesis.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace frfm {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_grid(const GridSpec& grid, const char* where) {
    if (!(grid.df > 0.0) || !std::isfinite(grid.df))
        throw grid_error(std::string(where) + ": df must be positive and finite");
    if (!(grid.f0 >= 0.0) || !std::isfinite(grid.f0))
        throw grid_error(std::string(where) + ": f0 must be non-negative and finite");
    if (grid.n_bins < 2) throw grid_error(std::string(where) + ": grid needs at least 2 bins");
}

void check_modes(const ModalModel& model, const char* where) {
    for (const ModalParameter& m : model.modes) {
        if (!(m.omega_r > 0.0) || !std::isfinite(m.omega_r))
            throw domain_error(std::string(where) + ": mode omega_r must be positive");
        if (!(m.xi_r > 0.0) || !std::isfinite(m.xi_r))
            throw domain_error(std::string(where) + ": mode xi_r must be positive");
        if (!std::isfinite(m.phi_product))
            throw domain_error(std::string(where) + ": mode phi_product must be finite");
    }
}

}  // namespace

FrequencySeries synthesize_frf(const ModalModel& model, const GridSpec& grid, Exec exec) {
    check_grid(grid, "synthesize_frf");
    check_modes(model, "synthesize_frf");

    FrequencySeries out;
    out.f0 = grid.f0;
    out.df = grid.df;
    out.values.assign(grid.n_bins, cplx{0.0, 0.0});

    const ModalParameter* modes = model.modes.data();
    const std::size_t n_modes = model.modes.size();
    cplx* values = out.values.data();

    detail::par_for(exec, static_cast<std::int64_t>(grid.n_bins), [&](std::int64_t k) {
        const double w = two_pi * (grid.f0 + static_cast<double>(k) * grid.df);
        // Named temporaries keep the arithmetic order fixed so serial and
        // parallel runs are bit-identical and |H(w_r)| matches peak_magnitude
        // exactly for a single mode.
        const double w2 = w * w;
        cplx acc{0.0, 0.0};
        for (std::size_t r = 0; r < n_modes; ++r) {
            const ModalParameter& m = modes[r];
            const double wr2 = m.omega_r * m.omega_r;
            const cplx den(wr2 - w2, 2.0 * w * m.xi_r * m.omega_r);
            acc += m.phi_product / den;
        }
        values[k] = acc;
    });
    return out;
}

double peak_magnitude(const ModalParameter& mode) {
    if (!(mode.omega_r > 0.0)) throw domain_error("peak_magnitude: omega_r must be positive");
    if (!(mode.xi_r > 0.0)) throw domain_error("peak_magnitude: xi_r must be positive");
    // Written as phi / (2 * w * xi * w) to mirror the denominator imaginary
    // part in synthesize_frf at w == omega_r.
    return std::abs(mode.phi_product) / (2.0 * mode.omega_r * mode.xi_r * mode.omega_r);
}

ModalModel model_from_features(const std::vector<ModalPeak>& peaks) {
    ModalModel model;
    model.modes.reserve(peaks.size());
    double prev_f = -1.0;
    for (const ModalPeak& p : peaks) {
        if (!(p.f_hz > 0.0) || !std::isfinite(p.f_hz))
            throw domain_error("model_from_features: peak frequency must be positive");
        if (!(p.f_hz > prev_f))
            throw argument_error("model_from_features: peak frequencies must be strictly ascending");
        prev_f = p.f_hz;
        if (!std::isfinite(p.level_db))
            throw domain_error("model_from_features: peak level must be finite");
        if (!(p.q > 0.5) || !std::isfinite(p.q))
            throw domain_error("model_from_features: q must exceed 0.5 (damping ratio below 1)");

        ModalParameter m;
        m.omega_r = two_pi * p.f_hz;
        m.xi_r = 1.0 / (2.0 * p.q);
        const double amp = std::pow(10.0, p.level_db / 20.0);
        // Inverse of peak_magnitude with the same multiplication order, so a
        // synthesized single mode reproduces the peak level exactly.
        m.phi_product = amp * (2.0 * m.omega_r * m.xi_r * m.omega_r);
        model.modes.push_back(m);
    }
    return model;
}

FrequencySeries reconstruct_from_features(const std::vector<ModalPeak>& peaks,
                                          const GridSpec& grid, Exec exec) {
    return synthesize_frf(model_from_features(peaks), grid, exec);
}

}  // namespace frfm
