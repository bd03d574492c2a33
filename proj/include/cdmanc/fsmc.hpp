#pragma once

// Finite-state Markov channel: one state per AMC mode, adjacent-state
// transitions from the level crossing rate of the post-detection SNR.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "cdmanc/amc.hpp"
#include "cdmanc/config.hpp"
#include "cdmanc/phy.hpp"

namespace cdmanc {

class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    static SquareMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// A Markov-modulated constant-rate service process. Any such chain can be
// fed to the service MGF; build_fsmc produces the fading-channel instance.
struct FsmcModel {
    SquareMatrix p;                    // row-stochastic transition matrix
    std::vector<double> pi;            // state distribution at t = 1
    std::vector<double> rates_blocks;  // service per slot in each state, data blocks
    std::vector<double> rates_bps_hz;
    double gamma_bar = 0.0;
    double t_b_s = 0.0;
    double f_m_hz = 0.0;

    std::size_t states() const { return pi.size(); }
    // Throws DomainError if dimensions disagree, rows do not sum to 1 within
    // 1e-12, entries leave [0, 1], or pi is not a distribution.
    void validate() const;
    // max_j |(pi P)_j - pi_j|; diagnostic only.
    double stationarity_mismatch() const;
    double mean_rate_blocks() const;
};

// N(Gamma) = sqrt(2 pi Gamma / gamma_bar) f_m exp(-Gamma / gamma_bar), crossings per second.
double level_crossing_rate(double gamma_threshold, double gamma_bar, double f_m_hz);

// pi_l = exp(-Gamma_l / gamma_bar) - exp(-Gamma_{l+1} / gamma_bar), Gamma_0 = 0, Gamma_L = inf.
std::vector<double> stationary_distribution(const ModeTable& table, double gamma_bar);

// Blocks per slot in each state: R_l T_b W / N_b.
std::vector<double> block_rates(const SystemConfig& cfg);

// Throws SlowFadingViolation (naming the state) if any transition probability
// falls outside [0, 1]; the chain is never clamped.
FsmcModel build_fsmc(const SystemConfig& cfg, const DecoupledChannel& channel);

// Plain-text dump: header lines, then P row-major, pi, and rates, all with
// 17 significant digits.
void write_matrix_dump(std::ostream& os, const FsmcModel& model);

}  // namespace cdmanc
