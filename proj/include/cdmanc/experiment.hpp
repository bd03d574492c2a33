#pragma once

// Experiment specs (flat key = value files), sweep execution, CSV output.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdmanc/config.hpp"
#include "cdmanc/netcal.hpp"

namespace cdmanc {

enum class SweepAxis { kDelayGuarantee, kEpsilon, kSnrAvgDb, kAlpha, kFmHz };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepSpec {
    SweepAxis axis = SweepAxis::kDelayGuarantee;
    std::vector<double> values;
};

struct ValidationSpec {
    bool enabled = false;
    std::size_t slots = 1000000;
    std::uint64_t seed = 1;
};

struct ExperimentSpec {
    SystemConfig base{};
    double epsilon = 1e-2;
    std::size_t d_guarantee_slots = 100;
    ThroughputOptions netcal{};
    SweepSpec sweep{};
    ValidationSpec validation{};
    std::string output_path;
    std::size_t workers = 1;

    // Throws ConfigError naming the first bad key.
    void validate() const;
};

// Parses the key = value format; see configs/README.md for the key list.
// With require_sweep = false the sweep keys are optional (single-point use).
ExperimentSpec parse_experiment(std::istream& in, bool require_sweep = true);
ExperimentSpec load_experiment(const std::string& path, bool require_sweep = true);

// Applies one sweep coordinate to a copy of the base point.
struct OperatingPoint {
    SystemConfig cfg;
    double epsilon = 0.0;
    std::size_t d_guarantee_slots = 0;
};
OperatingPoint operating_point(const ExperimentSpec& spec, double sweep_value);

struct PointResult {
    double sweep_value = 0.0;
    double beta = 0.0;
    double gamma_bar = 0.0;
    ThroughputResult throughput{};
    bool slow_fading_violation = false;
    std::optional<std::size_t> violating_state;
    std::string error;
    std::optional<double> empirical_violation;
    std::optional<double> empirical_std_err;

    // Every flag clean: FSMC built, bound valid, not degenerate or capped.
    bool valid() const;
};

// Evaluates one operating point; model failures become flags, never throws
// for slow-fading or degenerate points.
PointResult evaluate_point(const OperatingPoint& point, const ThroughputOptions& netcal,
                           const ValidationSpec& validation);

std::vector<PointResult> run_sweep(const ExperimentSpec& spec);

// Header lines start with '#'; only the "# generated" line varies between runs.
void write_csv(std::ostream& os, const ExperimentSpec& spec, const std::vector<PointResult>& rows,
               bool with_timestamp = true);

// run_sweep + write_csv to spec.output_path.
std::vector<PointResult> run_experiment(const ExperimentSpec& spec);

void write_spec_metadata(std::ostream& os, const ExperimentSpec& spec);

}  // namespace cdmanc
