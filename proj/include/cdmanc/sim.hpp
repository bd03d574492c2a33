#pragma once

// Monte Carlo oracles for the analytical pipeline: finite-size LMMSE SINR,
// FSMC sample paths, and a slotted FIFO queue.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cdmanc/fsmc.hpp"
#include "cdmanc/netcal.hpp"

namespace cdmanc {

struct FiniteSystemSample {
    std::size_t m = 0;
    std::size_t k = 0;
    double sinr = 0.0;           // |h1|^2 s1^H M^{-1} s1
    double channel_power = 0.0;  // |h1|^2
    double signature_energy = 0.0;  // ||s1||^2
    std::uint64_t seed = 0;
    std::size_t resamples = 0;   // draws rejected as numerically singular
};

// One draw of the conditional LMMSE output SINR of user 1 with k users,
// spreading factor m, signatures CN(0, I/m) and channels CN(0, 1).
FiniteSystemSample sample_finite_sinr(std::size_t m, std::size_t k, double sigma2, std::uint64_t seed);

// n independent draws; draw i uses stream i of the master seed.
std::vector<FiniteSystemSample> sample_finite_sinr_batch(std::size_t m, std::size_t k, double sigma2,
                                                         std::size_t n, std::uint64_t seed);

// State path of length n_slots: X_1 ~ pi, then transitions by P.
std::vector<std::size_t> simulate_fsmc(const FsmcModel& model, std::size_t n_slots, std::uint64_t seed);

struct QueueOptions {
    double backlog_cap_blocks = 1e7;
};

struct QueueTrace {
    std::vector<double> arrivals;  // blocks arriving at the start of each slot
    std::vector<double> service;   // blocks the channel could serve in each slot
    std::vector<std::size_t> delays;  // per block: departure slot - arrival slot of its last bit
    std::size_t horizon = 0;       // slots actually simulated
    bool unstable = false;         // backlog cap hit; trace truncated
};

// Infinite-buffer FIFO queue, workload divisible across slots. In every slot
// arrivals come first, then the head of the queue receives min(backlog, R_state).
QueueTrace simulate_fifo_queue(const FsmcModel& model, const ArrivalModel& arrivals, std::size_t n_slots,
                               std::uint64_t seed, const QueueOptions& options = {});

struct ViolationEstimate {
    std::size_t blocks = 0;
    std::size_t violations = 0;
    double frequency = 0.0;
    double std_err = 0.0;  // binomial, sqrt(f (1 - f) / n)
};

// Fraction of blocks with delay > d.
ViolationEstimate violation_frequency(const QueueTrace& trace, std::size_t d);

// delay quantile q in [0, 1] (nearest rank); 0 for an empty trace.
std::size_t delay_quantile(const QueueTrace& trace, double q);

// CSV: one row per quantile, then one row per violation threshold.
void write_trace_summary_csv(std::ostream& os, const QueueTrace& trace, const std::vector<std::size_t>& thresholds);

}  // namespace cdmanc
