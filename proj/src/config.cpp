#include "cdmanc/config.hpp"

#include <cmath>

#include "cdmanc/errors.hpp"
#include "cdmanc/units.hpp"

namespace cdmanc {

double SystemConfig::noise_variance() const { return noise_variance_from_snr_db(snr_avg_db); }

void SystemConfig::validate() const {
    if (!std::isfinite(snr_avg_db)) throw DomainError("snr_avg_db must be finite");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be >= 0");
    if (!(f_m_hz >= 0.0) || !std::isfinite(f_m_hz)) throw DomainError("f_m_hz must be >= 0");
    if (!(t_b_s > 0.0)) throw DomainError("t_b_s must be > 0");
    if (!(w_hz > 0.0)) throw DomainError("w_hz must be > 0");
    if (!(n_b_bits > 0.0)) throw DomainError("n_b_bits must be > 0");
}

}  // namespace cdmanc
