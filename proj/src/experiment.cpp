#include "cdmanc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "cdmanc/errors.hpp"
#include "cdmanc/fsmc.hpp"
#include "cdmanc/phy.hpp"
#include "cdmanc/sim.hpp"

namespace cdmanc {

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::kDelayGuarantee: return "delay_guarantee";
        case SweepAxis::kEpsilon: return "epsilon";
        case SweepAxis::kSnrAvgDb: return "snr_avg_db";
        case SweepAxis::kAlpha: return "alpha";
        case SweepAxis::kFmHz: return "f_m_hz";
    }
    return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
    for (SweepAxis a : {SweepAxis::kDelayGuarantee, SweepAxis::kEpsilon, SweepAxis::kSnrAvgDb, SweepAxis::kAlpha,
                        SweepAxis::kFmHz}) {
        if (to_string(a) == name) return a;
    }
    throw ConfigError("sweep.axis", "unknown axis '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw ConfigError(key, "not a number: '" + t + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError(key, "not a number: '" + t + "'");
    }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(key, "not a non-negative integer: '" + t + "'");
    }
    try {
        return std::stoull(t);
    } catch (const std::logic_error&) {
        throw ConfigError(key, "integer out of range: '" + t + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(key, "not a boolean: '" + t + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

std::vector<double> range_values(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("sweep.step", "must be positive");
    if (!(stop >= start)) throw ConfigError("sweep.stop", "must be >= sweep.start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = start + static_cast<double>(i) * step;
    return out;
}

}  // namespace

void ExperimentSpec::validate() const {
    try {
        base.validate();
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.substr(0, msg.find(' ')), msg);
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon", "must lie in (0, 1)");
    if (netcal.delay.horizon_slots < 1) throw ConfigError("horizon_slots", "must be >= 1");
    if (netcal.delay.theta_grid.empty()) throw ConfigError("theta_points", "must be >= 1");
    if (!(netcal.resolution_blocks > 0.0)) throw ConfigError("resolution_blocks", "must be > 0");
    if (sweep.values.empty()) throw ConfigError("sweep.axis", "sweep has no points");
    for (double v : sweep.values) {
        switch (sweep.axis) {
            case SweepAxis::kDelayGuarantee:
                if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("sweep", "delay guarantees must be integers >= 0");
                break;
            case SweepAxis::kEpsilon:
                if (!(v > 0.0 && v < 1.0)) throw ConfigError("sweep", "epsilon values must lie in (0, 1)");
                break;
            case SweepAxis::kAlpha:
                if (!(v >= 0.0)) throw ConfigError("sweep", "alpha values must be >= 0");
                break;
            case SweepAxis::kFmHz:
                if (!(v >= 0.0)) throw ConfigError("sweep", "f_m values must be >= 0");
                break;
            case SweepAxis::kSnrAvgDb:
                if (!std::isfinite(v)) throw ConfigError("sweep", "SNR values must be finite");
                break;
        }
    }
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (validation.enabled && validation.slots < 1) throw ConfigError("validate.slots", "must be >= 1");
}

ExperimentSpec parse_experiment(std::istream& in, bool require_sweep) {
    ExperimentSpec spec;
    std::vector<Mode> modes;
    bool in_modes = false;
    std::optional<double> start;
    std::optional<double> stop;
    std::optional<double> step;
    std::optional<std::vector<double>> values;
    bool have_axis = false;
    double theta_min = 1e-4;
    double theta_max = 50.0;
    std::size_t theta_points = 60;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line != "[modes]") throw ConfigError(line, "unknown section");
            in_modes = true;
            continue;
        }
        if (in_modes) {
            std::stringstream ss(line);
            std::string idx;
            std::string name;
            std::string rate;
            std::string thr;
            if (!(ss >> idx >> name >> rate >> thr)) {
                throw ConfigError("modes", "line " + std::to_string(line_no) + ": expected 'index constellation rate threshold_db'");
            }
            try {
                modes.push_back(Mode{parse_unsigned("modes.index", idx), Constellation::by_name(name),
                                     parse_double("modes.rate", rate), parse_double("modes.threshold_db", thr)});
            } catch (const DomainError& e) {
                throw ConfigError("modes", e.what());
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "snr_avg_db") spec.base.snr_avg_db = parse_double(key, val);
        else if (key == "alpha") spec.base.alpha = parse_double(key, val);
        else if (key == "f_m_hz") spec.base.f_m_hz = parse_double(key, val);
        else if (key == "t_b_s") spec.base.t_b_s = parse_double(key, val);
        else if (key == "w_hz") spec.base.w_hz = parse_double(key, val);
        else if (key == "n_b_bits") spec.base.n_b_bits = parse_double(key, val);
        else if (key == "epsilon") spec.epsilon = parse_double(key, val);
        else if (key == "d_guarantee_slots") spec.d_guarantee_slots = parse_unsigned(key, val);
        else if (key == "horizon_slots") spec.netcal.delay.horizon_slots = parse_unsigned(key, val);
        else if (key == "theta_min") theta_min = parse_double(key, val);
        else if (key == "theta_max") theta_max = parse_double(key, val);
        else if (key == "theta_points") theta_points = parse_unsigned(key, val);
        else if (key == "refine_theta") spec.netcal.delay.refine = parse_bool(key, val);
        else if (key == "resolution_blocks") spec.netcal.resolution_blocks = parse_double(key, val);
        else if (key == "sweep.axis") {
            spec.sweep.axis = parse_sweep_axis(val);
            have_axis = true;
        } else if (key == "sweep.start") start = parse_double(key, val);
        else if (key == "sweep.stop") stop = parse_double(key, val);
        else if (key == "sweep.step") step = parse_double(key, val);
        else if (key == "sweep.values") values = parse_list(key, val);
        else if (key == "validate.enabled") spec.validation.enabled = parse_bool(key, val);
        else if (key == "validate.slots") spec.validation.slots = parse_unsigned(key, val);
        else if (key == "validate.seed") spec.validation.seed = parse_unsigned(key, val);
        else if (key == "output") spec.output_path = val;
        else if (key == "workers") spec.workers = parse_unsigned(key, val);
        else throw ConfigError(key, "unknown key");
    }

    if (!modes.empty()) {
        try {
            spec.base.modes = ModeTable(std::move(modes));
        } catch (const DomainError& e) {
            throw ConfigError("modes", e.what());
        }
    }
    if (!(theta_min > 0.0)) throw ConfigError("theta_min", "must be > 0");
    if (!(theta_max >= theta_min)) throw ConfigError("theta_max", "must be >= theta_min");
    if (theta_points < 1) throw ConfigError("theta_points", "must be >= 1");
    spec.netcal.delay.theta_grid = log_spaced(theta_min, theta_max, theta_points);

    if (values && (start || stop || step)) throw ConfigError("sweep.values", "give either a list or start/stop/step");
    if (values) {
        spec.sweep.values = *values;
    } else if (start || stop || step) {
        if (!start) throw ConfigError("sweep.start", "missing");
        if (!stop) throw ConfigError("sweep.stop", "missing");
        if (!step) throw ConfigError("sweep.step", "missing");
        spec.sweep.values = range_values(*start, *stop, *step);
    }
    if (require_sweep) {
        if (!have_axis) throw ConfigError("sweep.axis", "missing");
        if (spec.sweep.values.empty()) throw ConfigError("sweep.values", "missing sweep range");
    } else if (spec.sweep.values.empty()) {
        spec.sweep.axis = SweepAxis::kDelayGuarantee;
        spec.sweep.values = {static_cast<double>(spec.d_guarantee_slots)};
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment(const std::string& path, bool require_sweep) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_experiment(in, require_sweep);
}

OperatingPoint operating_point(const ExperimentSpec& spec, double v) {
    OperatingPoint p{spec.base, spec.epsilon, spec.d_guarantee_slots};
    switch (spec.sweep.axis) {
        case SweepAxis::kDelayGuarantee: p.d_guarantee_slots = static_cast<std::size_t>(std::llround(v)); break;
        case SweepAxis::kEpsilon: p.epsilon = v; break;
        case SweepAxis::kSnrAvgDb: p.cfg.snr_avg_db = v; break;
        case SweepAxis::kAlpha: p.cfg.alpha = v; break;
        case SweepAxis::kFmHz: p.cfg.f_m_hz = v; break;
    }
    return p;
}

bool PointResult::valid() const {
    return error.empty() && !slow_fading_violation && !throughput.degenerate && !throughput.search_capped &&
           throughput.bound.valid;
}

PointResult evaluate_point(const OperatingPoint& point, const ThroughputOptions& netcal,
                           const ValidationSpec& validation) {
    PointResult r;
    try {
        const DecoupledChannel ch = solve_fixed_point(point.cfg);
        r.beta = ch.beta;
        r.gamma_bar = ch.gamma_bar;
        const auto pi = stationary_distribution(point.cfg.modes, ch.gamma_bar);
        double mean_rate = 0.0;
        for (std::size_t l = 0; l < pi.size(); ++l) mean_rate += point.cfg.modes[l].rate_bps_hz * pi[l];
        r.throughput.c_lim_bps = point.cfg.alpha * point.cfg.w_hz * mean_rate;
        const FsmcModel model = build_fsmc(point.cfg, ch);
        const ServiceMgfEvaluator service(model);
        r.throughput = delay_constrained_throughput(point.cfg, service, point.epsilon, point.d_guarantee_slots, netcal);
        if (validation.enabled && r.throughput.bound.d_slots && r.throughput.lambda_blocks > 0.0) {
            const QueueTrace trace = simulate_fifo_queue(model, ArrivalModel{1.0, r.throughput.lambda_blocks},
                                                         validation.slots, validation.seed);
            const ViolationEstimate v = violation_frequency(trace, *r.throughput.bound.d_slots);
            r.empirical_violation = v.frequency;
            r.empirical_std_err = v.std_err;
        }
    } catch (const SlowFadingViolation& e) {
        r.slow_fading_violation = true;
        r.violating_state = e.state();
        r.error = e.what();
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

std::vector<PointResult> run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    const std::size_t n = spec.sweep.values.size();
    std::vector<PointResult> rows(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            rows[i] = evaluate_point(operating_point(spec, spec.sweep.values[i]), spec.netcal, spec.validation);
            rows[i].sweep_value = spec.sweep.values[i];
        }
    };
    const std::size_t workers = std::min(spec.workers, n);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

void write_spec_metadata(std::ostream& os, const ExperimentSpec& spec) {
    const auto& c = spec.base;
    const auto& g = spec.netcal.delay.theta_grid;
    os << std::setprecision(17);
    os << "# snr_avg_db = " << c.snr_avg_db << "\n";
    os << "# alpha = " << c.alpha << "\n";
    os << "# f_m_hz = " << c.f_m_hz << "\n";
    os << "# t_b_s = " << c.t_b_s << "\n";
    os << "# w_hz = " << c.w_hz << "\n";
    os << "# n_b_bits = " << c.n_b_bits << "\n";
    os << "# epsilon = " << spec.epsilon << "\n";
    os << "# d_guarantee_slots = " << spec.d_guarantee_slots << "\n";
    os << "# horizon_slots = " << spec.netcal.delay.horizon_slots << "\n";
    os << "# theta_min = " << g.front() << "\n";
    os << "# theta_max = " << g.back() << "\n";
    os << "# theta_points = " << g.size() << "\n";
    os << "# refine_theta = " << (spec.netcal.delay.refine ? "true" : "false") << "\n";
    os << "# resolution_blocks = " << spec.netcal.resolution_blocks << "\n";
    os << "# sweep.axis = " << to_string(spec.sweep.axis) << "\n";
    os << "# validate.enabled = " << (spec.validation.enabled ? "true" : "false") << "\n";
    os << "# validate.slots = " << spec.validation.slots << "\n";
    os << "# validate.seed = " << spec.validation.seed << "\n";
    for (const auto& m : c.modes.modes()) {
        os << "# mode " << m.index << " " << m.constellation.name() << " " << m.rate_bps_hz << " " << m.threshold_db
           << "\n";
    }
    os << "# throughput_unit = lambda_d_bps = alpha * (delta / tau) * n_b_bits / t_b_s, tau = 1 slot\n";
    os << "# capacity_unit = c_lim_bps = alpha * w_hz * sum_l R_l pi_l\n";
}

void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::vector<PointResult>& rows,
               bool with_timestamp) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    if (with_timestamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        os << "# generated = " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << "\n";
    }
    write_spec_metadata(os, spec);
    os << "sweep_value,lambda_d_bps,c_lim_bps,lambda_blocks,theta_star,d_slots,d_ms,tail_bound,valid,"
          "degenerate,search_capped,slow_fading_violation,bound_status,empirical_violation,empirical_std_err\n";
    os << std::setprecision(12);
    for (const auto& r : rows) {
        const auto& t = r.throughput;
        os << r.sweep_value << ',' << t.lambda_d_bps << ',' << t.c_lim_bps << ',' << t.lambda_blocks << ','
           << t.bound.theta_star << ',';
        if (t.bound.d_slots && !r.slow_fading_violation) os << *t.bound.d_slots << ',' << t.bound.d_ms(spec.base.t_b_s);
        else os << ',';
        os << ',' << t.bound.tail_bound << ',' << (r.valid() ? 1 : 0) << ',' << (t.degenerate ? 1 : 0) << ','
           << (t.search_capped ? 1 : 0) << ',' << (r.slow_fading_violation ? 1 : 0) << ','
           << (r.slow_fading_violation || !r.error.empty() ? std::string("error") : to_string(t.bound.status)) << ',';
        if (r.empirical_violation) os << *r.empirical_violation << ',' << *r.empirical_std_err;
        else os << ',';
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

std::vector<PointResult> run_experiment(const ExperimentSpec& spec) {
    if (spec.output_path.empty()) throw ConfigError("output", "no output path");
    const auto rows = run_sweep(spec);
    std::ofstream out(spec.output_path);
    if (!out) throw ConfigError("output", "cannot write '" + spec.output_path + "'");
    write_csv(out, spec, rows);
    return rows;
}

}  // namespace cdmanc
