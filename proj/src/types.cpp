#include "frfm/types.hpp"

#include <algorithm>
#include <cmath>

namespace frfm {

bool FrequencySeries::any_masked() const {
    return !valid.empty() && std::find(valid.begin(), valid.end(), std::uint8_t{0}) != valid.end();
}

void FrequencySeries::check() const {
    if (!(df > 0.0) || !std::isfinite(df)) throw grid_error("FrequencySeries: df must be positive and finite");
    if (!(f0 >= 0.0) || !std::isfinite(f0)) throw grid_error("FrequencySeries: f0 must be non-negative and finite");
    if (!valid.empty() && valid.size() != values.size())
        throw data_error("FrequencySeries: valid mask length does not match values");
}

double db_magnitude(cplx v) {
    const double mag = std::max(std::abs(v), 1e-300);
    return 20.0 * std::log10(mag);
}

DbSeries to_db(const FrequencySeries& s) {
    DbSeries out;
    out.f0 = s.f0;
    out.df = s.df;
    out.valid = s.valid;
    out.values.resize(s.values.size());
    for (std::size_t k = 0; k < s.values.size(); ++k) out.values[k] = db_magnitude(s.values[k]);
    return out;
}

}  // namespace frfm
