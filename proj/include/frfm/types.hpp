#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "frfm/errors.hpp"

namespace frfm {

using cplx = std::complex<double>;

// Complex series on a uniform frequency grid: bin k sits at f0 + k*df.
// `valid` is either empty (every bin valid) or one flag per bin; invalid bins
// are skipped by feature extraction, MSE and power integrals.
struct FrequencySeries {
    double f0 = 0.0;
    double df = 1.0;
    std::vector<cplx> values;
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return values.size(); }
    double freq(std::size_t k) const { return f0 + static_cast<double>(k) * df; }
    double f_end() const { return values.empty() ? f0 : freq(values.size() - 1); }
    bool is_valid(std::size_t k) const { return valid.empty() || valid[k] != 0; }
    bool any_masked() const;

    // Throws grid_error / data_error when an invariant is broken.
    void check() const;
};

// Real dB-magnitude view of a FrequencySeries, same grid and mask.
struct DbSeries {
    double f0 = 0.0;
    double df = 1.0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return values.size(); }
    double freq(std::size_t k) const { return f0 + static_cast<double>(k) * df; }
    double f_end() const { return values.empty() ? f0 : freq(values.size() - 1); }
    bool is_valid(std::size_t k) const { return valid.empty() || valid[k] != 0; }
};

// 20*log10(|v|) with the magnitude floored at 1e-300 so zeros stay finite.
double db_magnitude(cplx v);

DbSeries to_db(const FrequencySeries& s);

// Dense row-major matrix; deliberately minimal.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

}  // namespace frfm
