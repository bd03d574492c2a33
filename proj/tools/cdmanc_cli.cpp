// cdmanc: delay-constrained throughput of an AMC DS-CDMA uplink.
//
//   cdmanc solve      [--config F] [--output CSV] [--dump-fsmc F]
//   cdmanc sweep       --config F  [--output CSV] [--workers N]
//   cdmanc validate   [--config F] [--slots N] [--finite-samples N]
//   cdmanc thresholds [--config F] [--samples N] [--tolerance DB]
//
// Common: --seed, --horizon, --strict (exit 1 on any invalid-result flag).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "cdmanc/amc.hpp"
#include "cdmanc/errors.hpp"
#include "cdmanc/experiment.hpp"
#include "cdmanc/fsmc.hpp"
#include "cdmanc/netcal.hpp"
#include "cdmanc/phy.hpp"
#include "cdmanc/sim.hpp"

using namespace cdmanc;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    bool strict = false;
};

ExperimentSpec load(const Common& c, bool require_sweep) {
    ExperimentSpec spec;
    if (!c.config.empty()) {
        spec = load_experiment(c.config, require_sweep);
    } else if (require_sweep) {
        throw ConfigError("config", "--config is required");
    }
    if (c.horizon) spec.netcal.delay.horizon_slots = *c.horizon;
    if (c.seed) spec.validation.seed = *c.seed;
    return spec;
}

void print_point(const OperatingPoint& p, const PointResult& r) {
    const auto& t = r.throughput;
    std::printf("snr_avg_db         %g\n", p.cfg.snr_avg_db);
    std::printf("alpha              %g\n", p.cfg.alpha);
    std::printf("f_m_hz             %g\n", p.cfg.f_m_hz);
    std::printf("epsilon            %g\n", p.epsilon);
    std::printf("d_guarantee_slots  %zu\n", p.d_guarantee_slots);
    std::printf("beta               %.10g\n", r.beta);
    std::printf("gamma_bar_db       %.6f\n", 10.0 * std::log10(r.gamma_bar));
    if (r.slow_fading_violation) {
        std::printf("status             slow-fading violation in state %zu\n", r.violating_state.value_or(0));
        std::printf("c_lim_bps          %.6e\n", t.c_lim_bps);
        return;
    }
    if (!r.error.empty()) {
        std::printf("status             error: %s\n", r.error.c_str());
        return;
    }
    std::printf("lambda_blocks      %.6f\n", t.lambda_blocks);
    std::printf("lambda_d_bps       %.6e\n", t.lambda_d_bps);
    std::printf("c_lim_bps          %.6e\n", t.c_lim_bps);
    if (t.bound.d_slots) std::printf("d_slots            %zu\n", *t.bound.d_slots);
    std::printf("theta_star         %.6g\n", t.bound.theta_star);
    std::printf("tail_bound         %.3e\n", t.bound.tail_bound);
    std::printf("bound_status       %s\n", to_string(t.bound.status).c_str());
    std::printf("degenerate         %d\n", t.degenerate ? 1 : 0);
    std::printf("search_capped      %d\n", t.search_capped ? 1 : 0);
    if (r.empirical_violation) {
        std::printf("empirical_violation %.4e +- %.1e\n", *r.empirical_violation, *r.empirical_std_err);
    }
    std::printf("valid              %d\n", r.valid() ? 1 : 0);
}

// Single operating point as a one-row sweep over the delay guarantee.
ExperimentSpec single_point_spec(ExperimentSpec spec) {
    spec.sweep.axis = SweepAxis::kDelayGuarantee;
    spec.sweep.values = {static_cast<double>(spec.d_guarantee_slots)};
    return spec;
}

int run_solve(const Common& c, const std::string& output, const std::string& dump) {
    const ExperimentSpec spec = single_point_spec(load(c, false));
    spec.validate();
    const OperatingPoint p = operating_point(spec, spec.sweep.values.front());
    if (!dump.empty()) {
        std::ofstream os(dump);
        if (!os) throw ConfigError("dump-fsmc", "cannot write '" + dump + "'");
        write_matrix_dump(os, build_fsmc(p.cfg, solve_fixed_point(p.cfg)));
    }
    PointResult r = evaluate_point(p, spec.netcal, spec.validation);
    r.sweep_value = spec.sweep.values.front();
    print_point(p, r);
    if (!output.empty()) {
        std::ofstream os(output);
        if (!os) throw ConfigError("output", "cannot write '" + output + "'");
        write_csv(os, spec, {r});
    }
    return c.strict && !r.valid() ? 1 : 0;
}

int run_sweep_cmd(const Common& c, const std::string& output, std::optional<std::size_t> workers) {
    ExperimentSpec spec = load(c, true);
    if (!output.empty()) spec.output_path = output;
    if (workers) spec.workers = *workers;
    if (spec.output_path.empty()) throw ConfigError("output", "no output path; set 'output' or pass --output");
    const auto rows = run_experiment(spec);
    std::size_t invalid = 0;
    for (const auto& r : rows) invalid += r.valid() ? 0 : 1;
    std::printf("%zu points written to %s, %zu flagged invalid\n", rows.size(), spec.output_path.c_str(), invalid);
    return c.strict && invalid > 0 ? 1 : 0;
}

int run_validate(const Common& c, std::optional<std::size_t> slots, std::size_t finite_samples, std::size_t spreading) {
    ExperimentSpec spec = single_point_spec(load(c, false));
    spec.validation.enabled = true;
    if (slots) spec.validation.slots = *slots;
    spec.validate();
    const OperatingPoint p = operating_point(spec, spec.sweep.values.front());
    const PointResult r = evaluate_point(p, spec.netcal, spec.validation);
    print_point(p, r);
    bool ok = r.valid();
    if (r.empirical_violation) {
        const double limit = p.epsilon + 3.0 * *r.empirical_std_err;
        const bool holds = *r.empirical_violation <= limit;
        std::printf("bound_check        %s (%.4e <= %.4e)\n", holds ? "holds" : "VIOLATED", *r.empirical_violation,
                    limit);
        ok = ok && holds;
    }
    if (finite_samples > 0 && p.cfg.alpha > 0.0) {
        const auto k = static_cast<std::size_t>(std::llround(p.cfg.alpha * static_cast<double>(spreading)));
        const auto draws = sample_finite_sinr_batch(spreading, std::max<std::size_t>(k, 1), p.cfg.noise_variance(),
                                                    finite_samples, spec.validation.seed);
        double s = 0.0;
        for (const auto& d : draws) s += d.sinr / d.channel_power;
        const double mean = s / static_cast<double>(draws.size());
        std::printf("finite_system      m %zu k %zu: mean SINR/p1 %.5f vs gamma_bar %.5f (rel %.4f)\n", spreading,
                    std::max<std::size_t>(k, 1), mean, r.gamma_bar, std::abs(mean / r.gamma_bar - 1.0));
    }
    return c.strict && !ok ? 1 : 0;
}

int run_thresholds(const Common& c, std::size_t samples, double tolerance) {
    const ExperimentSpec spec = load(c, false);
    ThresholdSearchOptions opts;
    opts.capacity.min_samples = samples;
    opts.capacity.target_std_err = 0.005;
    opts.capacity.seed = c.seed.value_or(1);
    const auto reports = verify_thresholds(spec.base.modes, tolerance, opts);
    std::printf("mode  constellation  rate   table_db  solved_db  dev_db   std_err  ok\n");
    bool ok = true;
    for (const auto& r : reports) {
        const auto& m = spec.base.modes[r.mode];
        if (r.solved_db) {
            std::printf("%4zu  %-13s  %5.2f  %8.2f  %9.3f  %6.3f  %7.4f  %s\n", r.mode, m.constellation.name().c_str(),
                        r.rate_bps_hz, r.table_db, *r.solved_db, r.deviation_db, r.std_err,
                        r.within_tolerance ? "yes" : "no");
        } else {
            std::printf("%4zu  %-13s  %5.2f  %8.2f  %9s  %6s  %7s  no\n", r.mode, m.constellation.name().c_str(),
                        r.rate_bps_hz, r.table_db, "none", "-", "-");
        }
        ok = ok && r.within_tolerance;
    }
    return c.strict && !ok ? 1 : 0;
}

void add_common(CLI::App* app, Common& c, bool config_required) {
    auto* opt = app->add_option("-c,--config", c.config, "experiment config file");
    if (config_required) opt->required();
    app->add_option("--seed", c.seed, "RNG seed override");
    app->add_option("--horizon", c.horizon, "network-calculus horizon in slots");
    app->add_flag("--strict", c.strict, "exit 1 if any result is flagged invalid");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-constrained throughput of an AMC DS-CDMA uplink with LMMSE reception"};
    app.require_subcommand(1);

    Common c;
    std::string output, dump;
    std::optional<std::size_t> workers, slots;
    std::size_t finite_samples = 0, spreading = 128, samples = 100000;
    double tolerance = 0.3;

    auto* solve = app.add_subcommand("solve", "evaluate one operating point");
    add_common(solve, c, false);
    solve->add_option("-o,--output", output, "write the point as a one-row CSV");
    solve->add_option("--dump-fsmc", dump, "write the transition matrix, pi and rates");

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep to CSV");
    add_common(sweep, c, true);
    sweep->add_option("-o,--output", output, "CSV path (overrides 'output')");
    sweep->add_option("-j,--workers", workers, "worker threads");

    auto* validate = app.add_subcommand("validate", "check one point against Monte Carlo simulation");
    add_common(validate, c, false);
    validate->add_option("--slots", slots, "FIFO simulation length in slots");
    validate->add_option("--finite-samples", finite_samples, "finite-system SINR draws (0 skips)");
    validate->add_option("--spreading", spreading, "spreading factor for the finite-system check");

    auto* thresholds = app.add_subcommand("thresholds", "solve the mode switching thresholds");
    add_common(thresholds, c, false);
    thresholds->add_option("--samples", samples, "minimum Monte Carlo samples per capacity estimate");
    thresholds->add_option("--tolerance", tolerance, "allowed deviation from the table, dB");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(c, output, dump);
        if (*sweep) return run_sweep_cmd(c, output, workers);
        if (*validate) return run_validate(c, slots, finite_samples, spreading);
        if (*thresholds) return run_thresholds(c, samples, tolerance);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error [%s]: %s\n", e.key().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
