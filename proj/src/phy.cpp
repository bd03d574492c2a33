#include "cdmanc/phy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdmanc/errors.hpp"

namespace cdmanc {

double interference_integral(double beta, const HalfLineQuadrature& rule) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw DomainError("interference_integral: beta must be positive and finite");
    }
    // p beta / (p + beta) has its pole at p = -beta, which sits at Im u = pi
    // after the log substitution, so the trapezoidal rule converges geometrically.
    const double u_lo = std::log(std::min(beta, 1.0)) + rule.log_p_min;
    const double u_hi = rule.log_p_max;
    const auto n = static_cast<long>(std::ceil((u_hi - u_lo) / rule.step));
    double sum = 0.0;
    for (long j = 0; j <= n; ++j) {
        const double p = std::exp(u_lo + static_cast<double>(j) * rule.step);
        const double w = (j == 0 || j == n) ? 0.5 : 1.0;
        sum += w * p * (p * beta / (p + beta)) * std::exp(-p);
    }
    return sum * rule.step;
}

namespace {

double fixed_point_map(double beta, double sigma2, double alpha) {
    return sigma2 + alpha * interference_integral(beta);
}

}  // namespace

DecoupledChannel solve_fixed_point(const SystemConfig& cfg, double alpha,
                                   const FixedPointOptions& options) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw DomainError("solve_fixed_point: alpha must be >= 0");
    }
    const double sigma2 = cfg.noise_variance();
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw DomainError("solve_fixed_point: noise variance must be positive");
    }

    DecoupledChannel out;
    if (alpha == 0.0) {
        out.beta = sigma2;
        out.gamma_bar = 1.0 / sigma2;
        return out;
    }

    double beta = sigma2;
    double residual = 0.0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const double next = fixed_point_map(beta, sigma2, alpha);
        residual = std::abs(next - beta) / beta;
        out.iterations = it + 1;
        if (residual < options.tolerance) {
            out.beta = beta;
            out.gamma_bar = 1.0 / beta;
            out.residual = residual;
            return out;
        }
        beta = next;
    }

    if (!options.bisection_fallback) {
        throw ConvergenceError("solve_fixed_point: iteration cap reached, residual " +
                                   std::to_string(residual),
                               beta, residual);
    }

    // g(beta) = beta - T(beta) is increasing with g(sigma2) <= 0 <= g(sigma2 + alpha).
    double lo = sigma2;
    double hi = sigma2 + alpha;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double g = mid - fixed_point_map(mid, sigma2, alpha);
        if (g < 0.0) lo = mid; else hi = mid;
        residual = std::abs(g) / mid;
        if (residual < options.tolerance || hi - lo <= 1e-16 * hi) {
            beta = mid;
            break;
        }
        beta = mid;
    }
    if (!(residual < options.tolerance)) {
        throw ConvergenceError("solve_fixed_point: bisection fallback failed", beta, residual);
    }
    out.beta = beta;
    out.gamma_bar = 1.0 / beta;
    out.residual = residual;
    out.bisection_used = true;
    return out;
}

PostDetectionSnrPdf::PostDetectionSnrPdf(double gamma_bar) : gamma_bar_(gamma_bar) {
    if (!(gamma_bar > 0.0) || !std::isfinite(gamma_bar)) {
        throw DomainError("post_detection_snr_pdf: gamma_bar must be positive");
    }
}

double PostDetectionSnrPdf::operator()(double gamma) const {
    if (gamma < 0.0) return 0.0;
    return std::exp(-gamma / gamma_bar_) / gamma_bar_;
}

PostDetectionSnrPdf post_detection_snr_pdf(double gamma_bar) {
    return PostDetectionSnrPdf(gamma_bar);
}

}  // namespace cdmanc
