#pragma once

// MGF-based stochastic network calculus for a single FIFO hop fed by a
// periodic source and served by a Markov-modulated channel.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cdmanc/config.hpp"
#include "cdmanc/fsmc.hpp"

namespace cdmanc {

// delta_blocks of workload every tau_slots slots.
struct ArrivalModel {
    double tau_slots = 1.0;
    double delta_blocks = 0.0;

    static ArrivalModel periodic(double tau_slots, double delta_blocks);
    double rate_blocks_per_slot() const { return delta_blocks / tau_slots; }
};

// ln M_A(theta, t) = theta delta floor(t/tau) + ln(1 + frac(t/tau) (e^{theta delta} - 1)).
double log_arrival_mgf(const ArrivalModel& a, double theta, double t);
double arrival_mgf(const ArrivalModel& a, double theta, double t);

// Evaluates ln MhatS(theta, t) = ln pi (R(-theta) P)^{t-1} R(-theta) 1 for
// t = 0..horizon in one pass per theta, with MhatS(theta, 0) = 1. The running
// row vector is renormalised every step and its log scale accumulated, so
// theta * rate up to ~1e3 stays representable.
class ServiceMgfEvaluator {
public:
    explicit ServiceMgfEvaluator(FsmcModel model);

    ServiceMgfEvaluator(const ServiceMgfEvaluator&) = delete;
    ServiceMgfEvaluator& operator=(const ServiceMgfEvaluator&) = delete;

    const FsmcModel& model() const { return model_; }

    // Cached; safe to call concurrently.
    std::shared_ptr<const std::vector<double>> log_series(double theta, std::size_t horizon) const;
    // Uncached, for one-off theta values.
    std::vector<double> compute_log_series(double theta, std::size_t horizon) const;

    double log_service_mgf(double theta, std::size_t t) const;
    double service_mgf(double theta, std::size_t t) const;

    std::size_t cache_size() const;

private:
    FsmcModel model_;
    double min_rate_ = 0.0;
    mutable std::mutex mutex_;
    mutable std::map<double, std::shared_ptr<const std::vector<double>>> cache_;
};

// theta in [1e-4, 50], 60 log-spaced points.
std::vector<double> default_theta_grid();
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

struct DelayBoundOptions {
    std::size_t horizon_slots = 4000;
    std::vector<double> theta_grid = default_theta_grid();
    // Golden-section search in ln(theta) around the best grid bracket.
    bool refine = true;
    double refine_tolerance = 1e-7;
};

// Truncated violation sum
//   ln [ sum_{s=tau}^{horizon} M_A(theta, s - tau) MhatS(theta, s) + tail ],
// where tail continues the last term geometrically with the asymptotic
// per-slot ratio r. If r >= 1 the series diverges and log_value = +inf.
struct ViolationSum {
    double log_value = 0.0;
    double tail = 0.0;
    double ratio = 0.0;
    bool decaying = true;
};

ViolationSum violation_sum(const ArrivalModel& a, double theta, std::size_t tau,
                           const std::vector<double>& log_service, std::size_t horizon);

enum class BoundStatus { kBounded, kUnbounded, kUnstable };

std::string to_string(BoundStatus s);

struct DelayBoundResult {
    std::optional<std::size_t> d_slots;  // nullopt: no tau <= horizon works
    double theta_star = 0.0;
    double epsilon = 0.0;
    std::size_t horizon_slots = 0;
    double tail_bound = 0.0;
    BoundStatus status = BoundStatus::kUnbounded;
    bool valid = false;  // bounded and tail_bound < 0.01 epsilon

    double d_ms(double t_b_s) const;
};

DelayBoundResult delay_bound(const ArrivalModel& a, const ServiceMgfEvaluator& s, double epsilon,
                             const DelayBoundOptions& options = {});

// Whether some theta > 0 satisfies the delay condition at tau, i.e. whether
// d <= tau. Same search delay_bound uses.
bool delay_condition_holds(const ArrivalModel& a, const ServiceMgfEvaluator& s, double epsilon,
                           std::size_t tau, const DelayBoundOptions& options = {});

struct ThroughputOptions {
    double resolution_blocks = 1e-3;
    DelayBoundOptions delay{};
};

struct ThroughputResult {
    double lambda_blocks = 0.0;   // per-user delta / tau, blocks per slot
    double lambda_d_bps = 0.0;    // alpha * lambda_blocks * N_b / T_b
    double c_lim_bps = 0.0;
    double resolution_blocks = 0.0;
    DelayBoundResult bound;       // at lambda_blocks
    bool degenerate = false;      // guarantee unmet even as lambda -> 0
    bool search_capped = false;   // admissible at the top-state rate
};

// Throughput unit: lambda_d_bps = alpha * (delta / tau) * N_b / T_b, so it is
// commensurable with capacity_limit.
ThroughputResult delay_constrained_throughput(const SystemConfig& cfg, const FsmcModel& fsmc, double epsilon,
                                              std::size_t d_guarantee_slots, const ThroughputOptions& options = {});

// Same search on an existing evaluator (reuses its cache).
ThroughputResult delay_constrained_throughput(const SystemConfig& cfg, const ServiceMgfEvaluator& service,
                                              double epsilon, std::size_t d_guarantee_slots,
                                              const ThroughputOptions& options = {});

// alpha * W * sum_l R_l pi_l, bits per second.
double capacity_limit(const SystemConfig& cfg, const FsmcModel& fsmc);

}  // namespace cdmanc
