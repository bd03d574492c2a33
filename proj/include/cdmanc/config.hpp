#pragma once

#include "cdmanc/amc.hpp"

namespace cdmanc {

// Physical and link-layer parameters. Defaults reproduce the reference
// numerical setup: 20 MHz, 2 ms slots, 10 kbit data blocks.
struct SystemConfig {
    double snr_avg_db = 6.0;
    double alpha = 0.5;        // K / M
    double f_m_hz = 20.0;
    double t_b_s = 2e-3;
    double w_hz = 20e6;
    double n_b_bits = 10000.0;
    ModeTable modes = ModeTable::hiperlan2();

    double noise_variance() const;
    // Throws DomainError on any violated field invariant.
    void validate() const;
};

}  // namespace cdmanc
