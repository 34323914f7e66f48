#pragma once

#include <cstddef>
#include <vector>

#include "frfm/exec.hpp"
#include "frfm/types.hpp"

namespace frfm {

// One vibration mode in angular-frequency form. phi_product is the product of
// the two mode-shape coefficients at the drive/response points; it carries the
// sign of the residue.
struct ModalParameter {
    double omega_r = 0.0;      // natural angular frequency, rad/s
    double xi_r = 0.0;         // damping ratio
    double phi_product = 0.0;  // mode-shape product
};

struct ModalModel {
    std::vector<ModalParameter> modes;
};

// Peak description in measurement units: frequency in Hz, level in dB, and
// the half-power quality factor q = 1/(2*xi).
struct ModalPeak {
    double f_hz = 0.0;
    double level_db = 0.0;
    double q = 0.0;
};

struct GridSpec {
    double f0 = 0.0;
    double df = 1.0;
    std::size_t n_bins = 0;
};

// Sums the receptance-style modal terms phi / (wr^2 - w^2 + 2j*w*xi*wr) on the
// grid. An empty model yields all zeros. Throws grid_error for a bad grid and
// domain_error when a mode has omega_r <= 0 or xi_r <= 0.
FrequencySeries synthesize_frf(const ModalModel& model, const GridSpec& grid,
                               Exec exec = Exec::serial);

// |H| at resonance for an isolated mode: phi / (2 * xi * wr^2).
double peak_magnitude(const ModalParameter& mode);

// Inverts peaks (f, level_db, q) back to modal parameters with positive
// phi_product: xi = 1/(2q), phi = 10^(level/20) * 2 * xi * wr^2.
// Throws argument_error when frequencies are not strictly ascending and
// domain_error when a q <= 0.5 (damping ratio would reach or exceed 1).
ModalModel model_from_features(const std::vector<ModalPeak>& peaks);

FrequencySeries reconstruct_from_features(const std::vector<ModalPeak>& peaks,
                                          const GridSpec& grid, Exec exec = Exec::serial);

}  // namespace frfm
