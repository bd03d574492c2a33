#pragma once

// Large-system LMMSE analysis: the fixed-point equation for the effective
// noise variance of the decoupled single-user channel.

#include <cstddef>

#include "cdmanc/config.hpp"

namespace cdmanc {

struct DecoupledChannel {
    double beta = 0.0;       // effective noise variance, linear
    double gamma_bar = 0.0;  // average post-detection SINR, 1 / beta
    double residual = 0.0;   // |beta - T(beta)| / beta at exit
    std::size_t iterations = 0;
    bool bisection_used = false;
};

// Quadrature rule for integrals of smooth functions on [0, inf) that decay
// like exp(-p): trapezoidal rule in u = ln p (double-exponential decay at
// both ends). step is in u.
struct HalfLineQuadrature {
    double step = 1.0 / 16.0;
    double log_p_min = -40.0;  // relative to ln(min(beta, 1))
    double log_p_max = 6.7;    // ln(812); exp(-812) underflows
};

// Integral of p beta / (p + beta) e^{-p} dp over [0, inf). In [0, min(beta, 1)].
double interference_integral(double beta, const HalfLineQuadrature& rule = {});

struct FixedPointOptions {
    double tolerance = 1e-10;  // relative residual
    std::size_t max_iterations = 100000;
    bool bisection_fallback = true;
};

// Solves beta = sigma^2 + alpha * interference_integral(beta) by plain
// iteration from beta_0 = sigma^2; the iterates increase monotonically.
DecoupledChannel solve_fixed_point(const SystemConfig& cfg, double alpha,
                                   const FixedPointOptions& options = {});
inline DecoupledChannel solve_fixed_point(const SystemConfig& cfg) {
    return solve_fixed_point(cfg, cfg.alpha);
}

// Exponential law of the instantaneous post-detection SNR.
class PostDetectionSnrPdf {
public:
    explicit PostDetectionSnrPdf(double gamma_bar);

    double operator()(double gamma) const;
    double gamma_bar() const { return gamma_bar_; }

private:
    double gamma_bar_;
};

PostDetectionSnrPdf post_detection_snr_pdf(double gamma_bar);

}  // namespace cdmanc
