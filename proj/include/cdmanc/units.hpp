#pragma once

#include <cmath>
#include <limits>

namespace cdmanc {

// All internal math is in linear power units; these are the only dB conversions.
inline double db_to_linear(double db) {
    if (db == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double linear) {
    if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(linear);
}

// SNR_avg = 1 / sigma^2
inline double noise_variance_from_snr_db(double snr_avg_db) {
    return 1.0 / db_to_linear(snr_avg_db);
}

}  // namespace cdmanc
