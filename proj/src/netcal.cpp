#include "cdmanc/netcal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdmanc/errors.hpp"

namespace cdmanc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_theta(double theta, const char* where) {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw DomainError(std::string(where) + ": theta must be positive and finite");
    }
}

}  // namespace

ArrivalModel ArrivalModel::periodic(double tau_slots, double delta_blocks) {
    if (!(tau_slots > 0.0) || !std::isfinite(tau_slots)) throw DomainError("periodic source: tau must be > 0");
    if (!(delta_blocks >= 0.0) || !std::isfinite(delta_blocks)) throw DomainError("periodic source: delta must be >= 0");
    return ArrivalModel{tau_slots, delta_blocks};
}

double log_arrival_mgf(const ArrivalModel& a, double theta, double t) {
    check_theta(theta, "arrival_mgf");
    if (!(t >= 0.0)) throw DomainError("arrival_mgf: t must be >= 0");
    const double x = theta * a.delta_blocks;
    const double periods = t / a.tau_slots;
    const double q = std::floor(periods);
    const double frac = periods - q;
    if (x == 0.0 || frac == 0.0) return x * q;
    // ln(1 + f (e^x - 1)) without forming e^x for large x.
    if (x > 30.0) return x * q + x + std::log(frac + (1.0 - frac) * std::exp(-x));
    return x * q + std::log1p(frac * std::expm1(x));
}

double arrival_mgf(const ArrivalModel& a, double theta, double t) {
    return std::exp(log_arrival_mgf(a, theta, t));
}

ServiceMgfEvaluator::ServiceMgfEvaluator(FsmcModel model) : model_(std::move(model)) {
    model_.validate();
    min_rate_ = *std::min_element(model_.rates_blocks.begin(), model_.rates_blocks.end());
}

std::vector<double> ServiceMgfEvaluator::compute_log_series(double theta, std::size_t horizon) const {
    check_theta(theta, "service_mgf");
    const std::size_t n = model_.states();
    std::vector<double> weight(n);
    for (std::size_t i = 0; i < n; ++i) weight[i] = std::exp(-theta * (model_.rates_blocks[i] - min_rate_));
    const double shift = -theta * min_rate_;

    std::vector<double> out(horizon + 1, 0.0);
    std::vector<double> v(n);
    std::vector<double> next(n);
    double log_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = model_.pi[i];
    for (std::size_t t = 1; t <= horizon; ++t) {
        if (t > 1) {
            for (std::size_t j = 0; j < n; ++j) next[j] = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double vi = v[i];
                if (vi == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) next[j] += vi * model_.p(i, j);
            }
            v.swap(next);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] *= weight[i];
            sum += v[i];
        }
        if (!(sum > 0.0)) {
            std::fill(out.begin() + static_cast<std::ptrdiff_t>(t), out.end(), -kInf);
            break;
        }
        log_scale += std::log(sum) + shift;
        for (std::size_t i = 0; i < n; ++i) v[i] /= sum;
        out[t] = log_scale;
    }
    return out;
}

std::shared_ptr<const std::vector<double>> ServiceMgfEvaluator::log_series(double theta,
                                                                            std::size_t horizon) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(theta);
        if (it != cache_.end() && it->second->size() > horizon) return it->second;
    }
    auto series = std::make_shared<const std::vector<double>>(compute_log_series(theta, horizon));
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = cache_[theta];
    if (!slot || slot->size() < series->size()) slot = series;
    return slot;
}

double ServiceMgfEvaluator::log_service_mgf(double theta, std::size_t t) const {
    check_theta(theta, "service_mgf");
    if (t == 0) return 0.0;
    return (*log_series(theta, t))[t];
}

double ServiceMgfEvaluator::service_mgf(double theta, std::size_t t) const {
    return std::exp(log_service_mgf(theta, t));
}

std::size_t ServiceMgfEvaluator::cache_size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw DomainError("log_spaced: need 0 < lo <= hi, n >= 1");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> default_theta_grid() { return log_spaced(1e-4, 50.0, 60); }

ViolationSum violation_sum(const ArrivalModel& a, double theta, std::size_t tau,
                           const std::vector<double>& log_service, std::size_t horizon) {
    if (horizon == 0 || log_service.size() <= horizon) throw DomainError("violation_sum: service series too short");
    ViolationSum out;
    if (tau > horizon) {
        out.log_value = kInf;
        out.decaying = false;
        return out;
    }

    // Asymptotic per-slot growth of the summand: arrival rate plus the
    // service series' last log-increment.
    const double ls_last = log_service[horizon];
    const double ls_prev = log_service[horizon - 1];
    const double log_ratio = ls_last == -kInf ? -kInf : theta * a.rate_blocks_per_slot() + (ls_last - ls_prev);
    out.ratio = std::exp(log_ratio);
    out.decaying = log_ratio < 0.0;
    if (!out.decaying) {
        out.log_value = kInf;
        out.tail = kInf;
        return out;
    }

    double max_term = -kInf;
    for (std::size_t s = tau; s <= horizon; ++s) {
        max_term = std::max(max_term, log_arrival_mgf(a, theta, static_cast<double>(s - tau)) + log_service[s]);
    }
    if (max_term == -kInf) {
        out.log_value = -kInf;
        return out;
    }
    double acc = 0.0;
    double last_term = -kInf;
    for (std::size_t s = tau; s <= horizon; ++s) {
        const double x = log_arrival_mgf(a, theta, static_cast<double>(s - tau)) + log_service[s];
        acc += std::exp(x - max_term);
        if (s == horizon) last_term = x;
    }
    const double lse = max_term + std::log(acc);
    const double log_tail = last_term + log_ratio - std::log1p(-out.ratio);
    out.tail = std::exp(log_tail);
    out.log_value = log_add_exp(lse, log_tail);
    return out;
}

std::string to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::kBounded: return "bounded";
        case BoundStatus::kUnbounded: return "unbounded";
        case BoundStatus::kUnstable: return "unstable";
    }
    return "unknown";
}

double DelayBoundResult::d_ms(double t_b_s) const {
    if (!d_slots) return kInf;
    return static_cast<double>(*d_slots) * t_b_s * 1e3;
}

namespace {

struct ThetaChoice {
    double theta = 0.0;
    ViolationSum sum{};
    bool any_decaying = false;
};

// Minimises the (log-convex in theta) violation sum at fixed tau: grid pass,
// then golden-section in ln(theta) inside the bracket of the grid minimiser.
ThetaChoice best_theta(const ArrivalModel& a, const ServiceMgfEvaluator& s, std::size_t tau,
                       const DelayBoundOptions& options) {
    const auto& grid = options.theta_grid;
    const std::size_t horizon = options.horizon_slots;
    ThetaChoice best;
    best.sum.log_value = kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto series = s.log_series(grid[i], horizon);
        const ViolationSum v = violation_sum(a, grid[i], tau, *series, horizon);
        best.any_decaying = best.any_decaying || v.decaying;
        if (i == 0 || v.log_value < best.sum.log_value) {
            best.sum = v;
            best.theta = grid[i];
            best_i = i;
        }
    }
    if (!options.refine || grid.size() < 2 || best.sum.log_value == kInf) return best;

    double lo = std::log(grid[best_i == 0 ? 0 : best_i - 1]);
    double hi = std::log(grid[std::min(best_i + 1, grid.size() - 1)]);
    auto eval = [&](double u) {
        const double theta = std::exp(u);
        const auto series = s.compute_log_series(theta, horizon);
        return violation_sum(a, theta, tau, series, horizon);
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    ViolationSum fc = eval(c);
    ViolationSum fd = eval(d);
    while (hi - lo > options.refine_tolerance) {
        if (fc.log_value <= fd.log_value) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d);
        }
    }
    const bool take_c = fc.log_value <= fd.log_value;
    const ViolationSum& cand = take_c ? fc : fd;
    if (cand.log_value < best.sum.log_value) {
        best.sum = cand;
        best.theta = std::exp(take_c ? c : d);
    }
    return best;
}

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("delay bound: epsilon must lie in (0, 1)");
}

void check_options(const DelayBoundOptions& options) {
    if (options.horizon_slots < 1) throw DomainError("delay bound: horizon must be >= 1");
    if (options.theta_grid.empty()) throw DomainError("delay bound: theta grid is empty");
    for (double t : options.theta_grid) {
        if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("delay bound: theta grid must be positive");
    }
}

}  // namespace

bool delay_condition_holds(const ArrivalModel& a, const ServiceMgfEvaluator& s, double epsilon,
                           std::size_t tau, const DelayBoundOptions& options) {
    check_epsilon(epsilon);
    check_options(options);
    const std::size_t t = std::min(tau, options.horizon_slots);
    return best_theta(a, s, t, options).sum.log_value <= std::log(epsilon);
}

DelayBoundResult delay_bound(const ArrivalModel& a, const ServiceMgfEvaluator& s, double epsilon,
                             const DelayBoundOptions& options) {
    check_epsilon(epsilon);
    check_options(options);
    const std::size_t horizon = options.horizon_slots;
    const double log_eps = std::log(epsilon);

    DelayBoundResult out;
    out.epsilon = epsilon;
    out.horizon_slots = horizon;

    // Grid pass: per theta the condition is monotone in tau, so bisect tau.
    std::optional<std::size_t> grid_d;
    bool any_decaying = false;
    for (double theta : options.theta_grid) {
        const auto series = s.log_series(theta, horizon);
        const ViolationSum at_end = violation_sum(a, theta, horizon, *series, horizon);
        any_decaying = any_decaying || at_end.decaying;
        if (!(at_end.log_value <= log_eps)) continue;
        std::size_t lo = 0;
        std::size_t hi = horizon;
        if (grid_d) hi = std::min(hi, *grid_d);
        if (violation_sum(a, theta, hi, *series, horizon).log_value > log_eps) continue;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (violation_sum(a, theta, mid, *series, horizon).log_value <= log_eps) hi = mid; else lo = mid + 1;
        }
        if (!grid_d || hi < *grid_d) grid_d = hi;
    }

    std::optional<std::size_t> d = grid_d;
    if (options.refine) {
        std::size_t hi = grid_d ? *grid_d : horizon;
        if (grid_d || best_theta(a, s, hi, options).sum.log_value <= log_eps) {
            std::size_t lo = 0;
            while (lo < hi) {
                const std::size_t mid = lo + (hi - lo) / 2;
                if (best_theta(a, s, mid, options).sum.log_value <= log_eps) hi = mid; else lo = mid + 1;
            }
            d = hi;
        }
    }

    if (!d) {
        out.status = any_decaying ? BoundStatus::kUnbounded : BoundStatus::kUnstable;
        const ThetaChoice c = best_theta(a, s, horizon, options);
        out.theta_star = c.theta;
        out.tail_bound = c.sum.tail;
        return out;
    }
    const ThetaChoice c = best_theta(a, s, *d, options);
    out.d_slots = d;
    out.theta_star = c.theta;
    out.tail_bound = c.sum.tail;
    out.status = BoundStatus::kBounded;
    out.valid = out.tail_bound < 0.01 * epsilon;
    return out;
}

double capacity_limit(const SystemConfig& cfg, const FsmcModel& fsmc) {
    double s = 0.0;
    for (std::size_t l = 0; l < fsmc.states(); ++l) s += fsmc.rates_bps_hz[l] * fsmc.pi[l];
    return cfg.alpha * cfg.w_hz * s;
}

ThroughputResult delay_constrained_throughput(const SystemConfig& cfg, const FsmcModel& fsmc, double epsilon,
                                              std::size_t d_guarantee_slots, const ThroughputOptions& options) {
    const ServiceMgfEvaluator service(fsmc);
    return delay_constrained_throughput(cfg, service, epsilon, d_guarantee_slots, options);
}

ThroughputResult delay_constrained_throughput(const SystemConfig& cfg, const ServiceMgfEvaluator& service,
                                              double epsilon, std::size_t d_guarantee_slots,
                                              const ThroughputOptions& options) {
    check_epsilon(epsilon);
    if (!(options.resolution_blocks > 0.0)) throw DomainError("throughput: resolution must be > 0");
    const FsmcModel& fsmc = service.model();

    ThroughputResult out;
    out.resolution_blocks = options.resolution_blocks;
    out.c_lim_bps = capacity_limit(cfg, fsmc);

    auto admissible = [&](double delta) {
        return delay_condition_holds(ArrivalModel{1.0, delta}, service, epsilon, d_guarantee_slots, options.delay);
    };

    double lo = 0.0;
    double hi = *std::max_element(fsmc.rates_blocks.begin(), fsmc.rates_blocks.end());
    if (!admissible(0.0)) {
        out.degenerate = true;
        out.bound = delay_bound(ArrivalModel{1.0, 0.0}, service, epsilon, options.delay);
        return out;
    }
    if (admissible(hi)) {
        out.search_capped = true;
        lo = hi;
    } else {
        while (hi - lo > options.resolution_blocks) {
            const double mid = 0.5 * (lo + hi);
            if (admissible(mid)) lo = mid; else hi = mid;
        }
    }
    out.lambda_blocks = lo;
    out.lambda_d_bps = cfg.alpha * lo * cfg.n_b_bits / cfg.t_b_s;
    out.bound = delay_bound(ArrivalModel{1.0, lo}, service, epsilon, options.delay);
    return out;
}

}  // namespace cdmanc
