#include "cdmanc/sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <ostream>

#include "cdmanc/errors.hpp"
#include "cdmanc/rng.hpp"

namespace cdmanc {

namespace {

std::complex<double> complex_normal(Rng& rng, double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = rng.normal() * s;
    const double im = rng.normal() * s;
    return {re, im};
}

}  // namespace

FiniteSystemSample sample_finite_sinr(std::size_t m, std::size_t k, double sigma2, std::uint64_t seed) {
    if (m < 1) throw DomainError("sample_finite_sinr: m must be >= 1");
    if (k < 1 || k > 10 * m) throw DomainError("sample_finite_sinr: need 1 <= k <= 10 m");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sample_finite_sinr: sigma2 must be > 0");

    FiniteSystemSample out;
    out.m = m;
    out.k = k;
    out.seed = seed;
    Rng rng(seed);
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ki = static_cast<Eigen::Index>(k - 1);
    const double sig_var = 1.0 / static_cast<double>(m);

    for (;;) {
        Eigen::VectorXcd s1(mi);
        for (Eigen::Index r = 0; r < mi; ++r) s1(r) = complex_normal(rng, sig_var);
        const double p1 = std::norm(complex_normal(rng, 1.0));

        // Interferers' signatures scaled by |h_k|, so M = B B^H + sigma^2 I.
        Eigen::MatrixXcd b(mi, ki);
        for (Eigen::Index c = 0; c < ki; ++c) {
            const double gain = std::abs(complex_normal(rng, 1.0));
            for (Eigen::Index r = 0; r < mi; ++r) b(r, c) = complex_normal(rng, sig_var) * gain;
        }
        Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(mi, mi) * sigma2;
        if (ki > 0) cov.selfadjointView<Eigen::Lower>().rankUpdate(b);
        Eigen::LLT<Eigen::MatrixXcd, Eigen::Lower> llt(cov);
        if (llt.info() != Eigen::Success) {
            ++out.resamples;
            continue;
        }
        const Eigen::VectorXcd x = llt.solve(s1);
        const double quad = s1.dot(x).real();  // s1^H M^{-1} s1
        if (!std::isfinite(quad) || quad < 0.0) {
            ++out.resamples;
            continue;
        }
        out.channel_power = p1;
        out.signature_energy = s1.squaredNorm();
        out.sinr = p1 * quad;
        return out;
    }
}

std::vector<FiniteSystemSample> sample_finite_sinr_batch(std::size_t m, std::size_t k, double sigma2,
                                                         std::size_t n, std::uint64_t seed) {
    const Rng master(seed);
    std::vector<FiniteSystemSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_finite_sinr(m, k, sigma2, master.stream(i).seed()));
    return out;
}

namespace {

std::size_t draw_index(const std::vector<double>& cumulative, double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
}

// Cumulative rows with the last entry forced to 1 against rounding.
struct ChainSampler {
    std::vector<double> initial;
    std::vector<std::vector<double>> rows;

    explicit ChainSampler(const FsmcModel& model) {
        const std::size_t n = model.states();
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) initial.push_back(acc += model.pi[i]);
        initial.back() = 1.0;
        rows.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) rows[i].push_back(acc += model.p(i, j));
            rows[i].back() = 1.0;
        }
    }

    std::size_t start(Rng& rng) const { return draw_index(initial, rng.uniform()); }
    std::size_t step(std::size_t state, Rng& rng) const { return draw_index(rows[state], rng.uniform()); }
};

}  // namespace

std::vector<std::size_t> simulate_fsmc(const FsmcModel& model, std::size_t n_slots, std::uint64_t seed) {
    model.validate();
    if (n_slots < 1) throw DomainError("simulate_fsmc: n_slots must be >= 1");
    const ChainSampler sampler(model);
    Rng rng(seed);
    std::vector<std::size_t> path(n_slots);
    path[0] = sampler.start(rng);
    for (std::size_t t = 1; t < n_slots; ++t) path[t] = sampler.step(path[t - 1], rng);
    return path;
}

QueueTrace simulate_fifo_queue(const FsmcModel& model, const ArrivalModel& arrivals, std::size_t n_slots,
                               std::uint64_t seed, const QueueOptions& options) {
    model.validate();
    if (n_slots < 1) throw DomainError("simulate_fifo_queue: n_slots must be >= 1");
    if (!(arrivals.tau_slots > 0.0) || !(arrivals.delta_blocks >= 0.0)) {
        throw DomainError("simulate_fifo_queue: invalid arrival model");
    }
    const ChainSampler sampler(model);
    Rng chain_rng = Rng(seed).stream(0);
    Rng phase_rng = Rng(seed).stream(1);
    const double phase = phase_rng.uniform() * arrivals.tau_slots;

    QueueTrace trace;
    trace.arrivals.reserve(n_slots);
    trace.service.reserve(n_slots);

    double arrived = 0.0;
    double departed = 0.0;
    double next_arrival_edge = 1.0;    // block j is complete once arrived >= j
    double next_departure_edge = 1.0;
    std::deque<std::size_t> waiting;   // arrival slot of each complete, undeparted block
    std::size_t state = sampler.start(chain_rng);
    double periods_before = std::floor(phase / arrivals.tau_slots);

    for (std::size_t n = 1; n <= n_slots; ++n) {
        if (n > 1) state = sampler.step(state, chain_rng);
        const double periods = std::floor((static_cast<double>(n) + phase) / arrivals.tau_slots);
        const double a = arrivals.delta_blocks * (periods - periods_before);
        periods_before = periods;
        arrived += a;
        const double tol_a = 1e-9 * std::max(1.0, arrived);
        while (arrivals.delta_blocks > 0.0 && arrived >= next_arrival_edge - tol_a) {
            waiting.push_back(n);
            next_arrival_edge += 1.0;
        }

        const double offered = model.rates_blocks[state];
        const double backlog = arrived - departed;
        const double served = std::min(backlog, offered);
        departed += served;
        const double tol_d = 1e-9 * std::max(1.0, departed);
        while (!waiting.empty() && departed >= next_departure_edge - tol_d) {
            trace.delays.push_back(n - waiting.front());
            waiting.pop_front();
            next_departure_edge += 1.0;
        }

        trace.arrivals.push_back(a);
        trace.service.push_back(offered);
        trace.horizon = n;
        if (backlog - served > options.backlog_cap_blocks) {
            trace.unstable = true;
            break;
        }
    }
    return trace;
}

ViolationEstimate violation_frequency(const QueueTrace& trace, std::size_t d) {
    ViolationEstimate v;
    v.blocks = trace.delays.size();
    v.violations = static_cast<std::size_t>(
        std::count_if(trace.delays.begin(), trace.delays.end(), [d](std::size_t x) { return x > d; }));
    if (v.blocks > 0) {
        const double n = static_cast<double>(v.blocks);
        v.frequency = static_cast<double>(v.violations) / n;
        v.std_err = std::sqrt(v.frequency * (1.0 - v.frequency) / n);
    }
    return v;
}

std::size_t delay_quantile(const QueueTrace& trace, double q) {
    if (trace.delays.empty()) return 0;
    std::vector<std::size_t> sorted = trace.delays;
    std::sort(sorted.begin(), sorted.end());
    const double clamped = std::clamp(q, 0.0, 1.0);
    const auto rank = static_cast<std::size_t>(std::ceil(clamped * static_cast<double>(sorted.size())));
    return sorted[rank == 0 ? 0 : rank - 1];
}

void write_trace_summary_csv(std::ostream& os, const QueueTrace& trace, const std::vector<std::size_t>& thresholds) {
    os << "kind,parameter,value,std_err\n";
    os << "horizon_slots,," << trace.horizon << ",\n";
    os << "blocks,," << trace.delays.size() << ",\n";
    os << "unstable,," << (trace.unstable ? 1 : 0) << ",\n";
    for (double q : {0.5, 0.9, 0.99, 0.999, 1.0}) {
        os << "delay_quantile," << q << "," << delay_quantile(trace, q) << ",\n";
    }
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(10);
    for (std::size_t d : thresholds) {
        const ViolationEstimate v = violation_frequency(trace, d);
        os << "violation_frequency," << d << "," << v.frequency << "," << v.std_err << "\n";
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace cdmanc
