#include "frfm/estimation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace frfm {

namespace {

constexpr double kMaskRelPower = 1e-12;

// FFTW's planner is not thread-safe; executing distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void check_record(const TimeRecord& r, const char* where) {
    if (r.samples.empty()) throw argument_error(std::string(where) + ": record has no samples");
    if (!(r.fs > 0.0) || !std::isfinite(r.fs))
        throw argument_error(std::string(where) + ": sample rate must be positive");
    for (double v : r.samples)
        if (!std::isfinite(v)) throw data_error(std::string(where) + ": record contains non-finite samples");
}

void check_set(const MeasurementSet& set, const char* where) {
    if (set.pairs.empty()) throw argument_error(std::string(where) + ": measurement set has no pairs");
    const double fs = set.pairs.front().first.fs;
    const std::size_t n = set.pairs.front().first.samples.size();
    const SignalKind rk = set.pairs.front().second.kind;
    if (rk == SignalKind::force)
        throw argument_error(std::string(where) + ": response kind must be velocity or acceleration");
    for (const auto& [f, x] : set.pairs) {
        check_record(f, where);
        check_record(x, where);
        if (f.kind != SignalKind::force)
            throw argument_error(std::string(where) + ": excitation records must be force");
        if (x.kind != rk)
            throw argument_error(std::string(where) + ": response kind differs between pairs");
        if (f.fs != fs || x.fs != fs)
            throw argument_error(std::string(where) + ": records have mismatched sample rates");
        if (f.samples.size() != n || x.samples.size() != n)
            throw argument_error(std::string(where) + ": records have mismatched lengths");
    }
}

std::vector<cplx> rfft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t n_half = n / 2 + 1;
    std::vector<double> in(x);
    std::vector<cplx> out(n_half);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    if (!plan) throw data_error("spectrum: transform planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

// Masks bins whose excitation power falls below kMaskRelPower of the peak;
// returns the mask (empty when nothing is masked) or throws when everything
// would be masked.
std::vector<std::uint8_t> excitation_mask(const std::vector<double>& s_ff, const char* where) {
    const double peak = *std::max_element(s_ff.begin(), s_ff.end());
    if (!(peak > 0.0))
        throw degenerate_signal(std::string(where) + ": excitation spectrum is identically zero");
    const double floor = kMaskRelPower * peak;
    std::vector<std::uint8_t> mask(s_ff.size(), 1);
    bool any = false;
    for (std::size_t k = 0; k < s_ff.size(); ++k) {
        if (s_ff[k] < floor) {
            mask[k] = 0;
            any = true;
        }
    }
    if (!any) mask.clear();
    return mask;
}

// Divides out j*omega to turn an acceleration-over-force estimate into
// mobility; bin 0 (omega = 0) becomes invalid.
void acceleration_to_mobility(FrequencySeries& h) {
    if (h.valid.empty()) h.valid.assign(h.values.size(), 1);
    h.valid[0] = 0;
    h.values[0] = cplx{0.0, 0.0};
    for (std::size_t k = 1; k < h.values.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * h.freq(k);
        h.values[k] /= cplx{0.0, w};
    }
}

FrequencySeries series_like(const SpectralSums& s) {
    FrequencySeries out;
    out.f0 = 0.0;
    out.df = s.fs / static_cast<double>(s.n_samples);
    out.values.assign(s.s_ff.size(), cplx{0.0, 0.0});
    return out;
}

}  // namespace

Window Window::exponential(double final_fraction) {
    if (!(final_fraction > 0.0) || !(final_fraction <= 1.0) || !std::isfinite(final_fraction))
        throw argument_error("Window::exponential: final fraction must lie in (0, 1]");
    Window w;
    w.kind = Kind::exponential;
    w.exp_final_fraction = final_fraction;
    return w;
}

Window Window::explicit_window(std::vector<double> w) {
    Window out;
    out.kind = Kind::explicit_samples;
    out.samples = std::move(w);
    return out;
}

std::vector<double> Window::build(std::size_t length) const {
    if (length == 0) throw argument_error("Window::build: length must be positive");
    switch (kind) {
        case Kind::rectangular:
            return std::vector<double>(length, 1.0);
        case Kind::exponential: {
            if (!(exp_final_fraction > 0.0) || !(exp_final_fraction <= 1.0))
                throw argument_error("Window::build: final fraction must lie in (0, 1]");
            std::vector<double> w(length, 1.0);
            if (length > 1) {
                const double rate = std::log(exp_final_fraction) / static_cast<double>(length - 1);
                for (std::size_t n = 0; n < length; ++n)
                    w[n] = std::exp(rate * static_cast<double>(n));
            }
            return w;
        }
        case Kind::explicit_samples:
            if (samples.size() != length)
                throw argument_error("Window::build: window length does not match record length");
            return samples;
    }
    throw argument_error("Window::build: unknown window kind");
}

FrequencySeries spectrum(const TimeRecord& record, const Window& window) {
    check_record(record, "spectrum");
    const std::vector<double> w = window.build(record.samples.size());
    std::vector<double> x(record.samples);
    for (std::size_t n = 0; n < x.size(); ++n) x[n] *= w[n];

    FrequencySeries out;
    out.f0 = 0.0;
    out.df = record.fs / static_cast<double>(record.samples.size());
    out.values = rfft(x);
    return out;
}

std::vector<double> inverse_spectrum(const std::vector<cplx>& half, std::size_t n_samples) {
    if (n_samples == 0) throw argument_error("inverse_spectrum: n_samples must be positive");
    if (half.size() != n_samples / 2 + 1)
        throw argument_error("inverse_spectrum: expected n_samples/2 + 1 bins");
    std::vector<cplx> in(half);
    std::vector<double> out(n_samples);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n_samples),
                                    reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                    FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    if (!plan) throw data_error("inverse_spectrum: transform planning failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / static_cast<double>(n_samples);
    for (double& v : out) v *= scale;
    return out;
}

SpectralSums accumulate_spectra(const MeasurementSet& set, const Window& window, Exec exec) {
    check_set(set, "accumulate_spectra");
    const std::size_t n_pairs = set.pairs.size();
    const std::size_t n_samples = set.pairs.front().first.samples.size();
    const std::size_t n_half = n_samples / 2 + 1;

    // Per-pair spectra are independent; sums run in pair order afterwards so
    // serial and parallel execution agree bit for bit.
    std::vector<std::vector<cplx>> fspec(n_pairs), xspec(n_pairs);
    detail::par_for(exec, static_cast<std::int64_t>(n_pairs), [&](std::int64_t i) {
        const auto& [f, x] = set.pairs[static_cast<std::size_t>(i)];
        fspec[i] = spectrum(f, window).values;
        xspec[i] = spectrum(x, window).values;
    });

    SpectralSums s;
    s.fs = set.pairs.front().first.fs;
    s.n_samples = n_samples;
    s.n_pairs = n_pairs;
    s.response_kind = set.pairs.front().second.kind;
    s.s_ff.assign(n_half, 0.0);
    s.s_xx.assign(n_half, 0.0);
    s.s_fx.assign(n_half, cplx{0.0, 0.0});
    s.s_xf.assign(n_half, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n_pairs; ++i) {
        for (std::size_t k = 0; k < n_half; ++k) {
            const cplx F = fspec[i][k];
            const cplx X = xspec[i][k];
            s.s_ff[k] += std::norm(F);
            s.s_xx[k] += std::norm(X);
            s.s_fx[k] += std::conj(F) * X;
            s.s_xf[k] += std::conj(X) * F;
        }
    }
    return s;
}

FrequencySeries estimate_h1(const MeasurementSet& set, const Window& window, Exec exec) {
    const SpectralSums s = accumulate_spectra(set, window, exec);
    FrequencySeries h = series_like(s);
    h.valid = excitation_mask(s.s_ff, "estimate_h1");
    for (std::size_t k = 0; k < h.values.size(); ++k)
        if (h.is_valid(k)) h.values[k] = s.s_fx[k] / s.s_ff[k];
    if (s.response_kind == SignalKind::acceleration) acceleration_to_mobility(h);
    return h;
}

FrequencySeries estimate_h2(const MeasurementSet& set, const Window& window, Exec exec) {
    const SpectralSums s = accumulate_spectra(set, window, exec);
    if (!(*std::max_element(s.s_xx.begin(), s.s_xx.end()) > 0.0))
        throw degenerate_signal("estimate_h2: response spectrum is identically zero");
    FrequencySeries h = series_like(s);
    h.valid = excitation_mask(s.s_ff, "estimate_h2");
    for (std::size_t k = 0; k < h.values.size(); ++k) {
        if (!h.is_valid(k)) continue;
        if (s.s_xf[k] == cplx{0.0, 0.0}) {
            if (h.valid.empty()) h.valid.assign(h.values.size(), 1);
            h.valid[k] = 0;
            continue;
        }
        h.values[k] = cplx{s.s_xx[k], 0.0} / s.s_xf[k];
    }
    if (s.response_kind == SignalKind::acceleration) acceleration_to_mobility(h);
    return h;
}

FrequencySeries estimate_hv(const MeasurementSet& set, const Window& window, Exec exec) {
    const FrequencySeries h1 = estimate_h1(set, window, exec);
    const FrequencySeries h2 = estimate_h2(set, window, exec);
    FrequencySeries hv = h1;
    for (std::size_t k = 0; k < hv.values.size(); ++k) {
        if (!h1.is_valid(k) || !h2.is_valid(k)) {
            if (hv.valid.empty()) hv.valid.assign(hv.values.size(), 1);
            hv.valid[k] = 0;
            hv.values[k] = cplx{0.0, 0.0};
            continue;
        }
        const double m1 = std::abs(h1.values[k]);
        const double m2 = std::abs(h2.values[k]);
        if (m1 == 0.0) {
            hv.values[k] = cplx{0.0, 0.0};
            continue;
        }
        hv.values[k] = (h1.values[k] / m1) * std::sqrt(m1 * m2);
    }
    return hv;
}

FrequencySeries coherence(const MeasurementSet& set, const Window& window, Exec exec) {
    if (set.pairs.size() < 2)
        throw insufficient_averages("coherence: need at least 2 averages, coherence of 1 record is identically 1");
    const SpectralSums s = accumulate_spectra(set, window, exec);
    FrequencySeries g = series_like(s);
    g.valid = excitation_mask(s.s_ff, "coherence");
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        if (!g.is_valid(k)) continue;
        const double denom = s.s_ff[k] * s.s_xx[k];
        if (!(denom > 0.0)) {
            if (g.valid.empty()) g.valid.assign(g.values.size(), 1);
            g.valid[k] = 0;
            continue;
        }
        const double c = std::norm(s.s_fx[k]) / denom;
        g.values[k] = cplx{std::clamp(c, 0.0, 1.0), 0.0};
    }
    return g;
}

FrequencySeries admittance_from_impulse(const TimeRecord& force, const TimeRecord& velocity,
                                        const Window& window) {
    if (force.kind != SignalKind::force)
        throw argument_error("admittance_from_impulse: excitation record must be force");
    if (velocity.kind != SignalKind::velocity)
        throw argument_error("admittance_from_impulse: response record must be velocity");
    MeasurementSet set;
    set.pairs.emplace_back(force, velocity);
    return estimate_h1(set, window);
}

}  // namespace frfm
