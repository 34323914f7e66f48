#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "frfm/exec.hpp"
#include "frfm/types.hpp"

namespace frfm {

enum class SignalKind { force, velocity, acceleration };

struct TimeRecord {
    double fs = 0.0;  // sample rate, Hz
    std::vector<double> samples;
    SignalKind kind = SignalKind::force;
};

// Repeated hammer-test acquisitions: (excitation, response) pairs with a
// common sample rate and length. Excitations are force records; responses
// share one kind (velocity or acceleration).
struct MeasurementSet {
    std::vector<std::pair<TimeRecord, TimeRecord>> pairs;
};

// Taper applied to a record before the transform. `exponential` decays from 1
// at the first sample to `exp_final_fraction` at the last; explicit samples
// must match the record length.
struct Window {
    enum class Kind { rectangular, exponential, explicit_samples };
    Kind kind = Kind::rectangular;
    double exp_final_fraction = 0.05;
    std::vector<double> samples;

    static Window rectangular() { return Window{}; }
    static Window exponential(double final_fraction);
    static Window explicit_window(std::vector<double> w);

    std::vector<double> build(std::size_t length) const;
};

// One-sided unnormalized DFT of the windowed record: L/2+1 bins on f0 = 0,
// df = fs/L. Deterministic for fixed inputs.
FrequencySeries spectrum(const TimeRecord& record, const Window& window = Window{});

// Inverse of spectrum() for a length-n_samples real record, including the 1/L
// scale, so inverse_spectrum(spectrum(x).values, x.size()) == x up to
// round-off. half must hold n_samples/2 + 1 bins.
std::vector<double> inverse_spectrum(const std::vector<cplx>& half, std::size_t n_samples);

// Spectral sums over the K pairs of a measurement set, accumulated in pair
// order so results do not depend on threading. s_fx[k] = sum conj(F_k)*X_k.
struct SpectralSums {
    double fs = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_pairs = 0;
    SignalKind response_kind = SignalKind::velocity;
    std::vector<double> s_ff;
    std::vector<double> s_xx;
    std::vector<cplx> s_fx;
    std::vector<cplx> s_xf;
};

SpectralSums accumulate_spectra(const MeasurementSet& set, const Window& window = Window{},
                                Exec exec = Exec::serial);

// Single-impulse spectral ratio H = X/F, computed as the K = 1 H1 estimate.
// Bins with excitation power below 1e-12 of the peak excitation power are
// masked instead of divided.
FrequencySeries admittance_from_impulse(const TimeRecord& force, const TimeRecord& velocity,
                                        const Window& window = Window{});

// H1 = sum S_fx / sum S_ff. Acceleration responses are integrated to mobility
// by dividing by j*omega, which masks bin 0.
FrequencySeries estimate_h1(const MeasurementSet& set, const Window& window = Window{},
                            Exec exec = Exec::serial);

// H2 = sum S_xx / sum S_xf; bins where the cross-spectrum vanishes are masked.
FrequencySeries estimate_h2(const MeasurementSet& set, const Window& window = Window{},
                            Exec exec = Exec::serial);

// |Hv| = sqrt(|H1|*|H2|) with the phase of H1.
FrequencySeries estimate_hv(const MeasurementSet& set, const Window& window = Window{},
                            Exec exec = Exec::serial);

// gamma^2 = |sum S_fx|^2 / (sum S_ff * sum S_xx), clamped to [0, 1], stored in
// the real part. Needs K >= 2; K = 1 coherence is identically 1.
FrequencySeries coherence(const MeasurementSet& set, const Window& window = Window{},
                          Exec exec = Exec::serial);

}  // namespace frfm
