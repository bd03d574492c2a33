#pragma once

// Adaptive modulation and coding: mode tables, modulation-constrained
// capacity of the decoupled single-user channel, and threshold-based mode
// selection.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cdmanc {

class Constellation {
public:
    // Throws DomainError unless the set is non-empty with mean |b|^2 = 1 (to 1e-12).
    Constellation(std::string name, std::vector<std::complex<double>> points);

    static Constellation bpsk();
    static Constellation qpsk();
    static Constellation qam16();
    static Constellation qam64();
    // Square M-QAM with Gray-free natural labelling, scaled to unit energy.
    static Constellation square_qam(std::size_t order, std::string name);
    // Scales an arbitrary point set to unit average energy.
    static Constellation normalized(std::string name, std::vector<std::complex<double>> points);
    // BPSK / QPSK / 16-QAM / 64-QAM, case-insensitive.
    static Constellation by_name(const std::string& name);

    const std::string& name() const { return name_; }
    const std::vector<std::complex<double>>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double average_energy() const;

    Constellation rotated(double phase_rad) const;

private:
    std::string name_;
    std::vector<std::complex<double>> points_;
};

struct Mode {
    std::size_t index = 0;
    Constellation constellation = Constellation::bpsk();
    double rate_bps_hz = 0.0;
    double threshold_db = 0.0;  // -inf for the outage mode

    // Switch-on threshold in linear scale; -inf dB maps to 0.
    double threshold_linear() const;
};

class ModeTable {
public:
    // Validates: indices 0..L-1 in order, R_0 = 0 < R_1 < ..., thresholds
    // strictly increasing with mode 0 at -inf. Throws DomainError otherwise.
    explicit ModeTable(std::vector<Mode> modes);

    // HIPERLAN/2-style table shipped as the default.
    static ModeTable hiperlan2();

    const std::vector<Mode>& modes() const { return modes_; }
    const Mode& operator[](std::size_t l) const { return modes_.at(l); }
    std::size_t size() const { return modes_.size(); }

    std::vector<double> rates_bps_hz() const;
    // Linear-scale lower interval edges Gamma_0 = 0, Gamma_1, ..., Gamma_{L-1}.
    std::vector<double> thresholds_linear() const;

private:
    std::vector<Mode> modes_;
};

struct CapacityOptions {
    // Noise samples per batch; each sample is averaged over every transmitted point.
    std::size_t batch_samples = 20000;
    std::size_t min_samples = 200000;
    std::size_t max_samples = 2000000;
    // Keep sampling past min_samples until std_err <= target (0 disables).
    double target_std_err = 0.0;
    std::uint64_t seed = 1;
};

struct CapacityEstimate {
    double value_bps_hz = 0.0;
    double std_err = 0.0;
    std::size_t samples = 0;
    bool capped = false;  // target_std_err not reached within max_samples
};

// Monte Carlo estimate of the modulation-constrained capacity
//   I = log2|M| - E_{b,v} log2 sum_{b'} exp(-|v + sqrt(gamma)(b - b')|^2 + |v|^2),
// v ~ CN(0, 1). This equals log2|M| - log2 e + g_M(gamma) with E|v|^2 = 1
// substituted exactly, so gamma = 0 yields 0 with zero variance.
CapacityEstimate constellation_capacity(const Constellation& c, double gamma,
                                        const CapacityOptions& options = {});

struct ThresholdReport {
    std::size_t mode = 0;
    double rate_bps_hz = 0.0;
    double table_db = 0.0;
    bool solvable = false;
    std::optional<double> solved_db;
    double deviation_db = 0.0;  // |solved - table|, inf when unsolvable
    bool within_tolerance = false;
    double std_err = 0.0;       // capacity std_err at the solved point
};

struct ThresholdSearchOptions {
    CapacityOptions capacity{};
    double lo_db = -20.0;
    double hi_db = 40.0;
    double resolution_db = 1e-3;
};

// For each mode l >= 1, bisects for the SNR where capacity(M_l, gamma) = R_l
// and compares against the tabulated switch-on threshold.
std::vector<ThresholdReport> verify_thresholds(const ModeTable& table, double tol_db,
                                               const ThresholdSearchOptions& options = {});

// Largest l with Gamma_l <= gamma (intervals closed below).
std::size_t select_mode(const ModeTable& table, double gamma);

}  // namespace cdmanc
