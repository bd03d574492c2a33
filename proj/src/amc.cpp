#include "cdmanc/amc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "cdmanc/errors.hpp"
#include "cdmanc/rng.hpp"
#include "cdmanc/units.hpp"

namespace cdmanc {

namespace {

double mean_energy(const std::vector<std::complex<double>>& points) {
    double e = 0.0;
    for (const auto& b : points) e += std::norm(b);
    return e / static_cast<double>(points.size());
}

}  // namespace

Constellation::Constellation(std::string name, std::vector<std::complex<double>> points)
    : name_(std::move(name)), points_(std::move(points)) {
    if (points_.empty()) throw DomainError("constellation '" + name_ + "' is empty");
    if (std::abs(mean_energy(points_) - 1.0) > 1e-12) {
        throw DomainError("constellation '" + name_ + "' does not have unit average energy");
    }
}

Constellation Constellation::normalized(std::string name, std::vector<std::complex<double>> points) {
    if (points.empty()) throw DomainError("constellation '" + name + "' is empty");
    const double e = mean_energy(points);
    if (!(e > 0.0)) throw DomainError("constellation '" + name + "' has zero energy");
    const double scale = 1.0 / std::sqrt(e);
    for (auto& b : points) b *= scale;
    // Rounding in the scale can leave ~1e-16 of error; fold it back once more.
    const double e2 = mean_energy(points);
    for (auto& b : points) b /= std::sqrt(e2);
    return Constellation(std::move(name), std::move(points));
}

Constellation Constellation::square_qam(std::size_t order, std::string name) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(order))));
    if (side * side != order || side < 2) throw DomainError("square_qam: order must be a square >= 4");
    std::vector<std::complex<double>> pts;
    pts.reserve(order);
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t q = 0; q < side; ++q) {
            pts.emplace_back(2.0 * static_cast<double>(i) - static_cast<double>(side - 1),
                             2.0 * static_cast<double>(q) - static_cast<double>(side - 1));
        }
    }
    return normalized(std::move(name), std::move(pts));
}

Constellation Constellation::bpsk() { return Constellation("BPSK", {{1.0, 0.0}, {-1.0, 0.0}}); }
Constellation Constellation::qpsk() { return square_qam(4, "QPSK"); }
Constellation Constellation::qam16() { return square_qam(16, "16-QAM"); }
Constellation Constellation::qam64() { return square_qam(64, "64-QAM"); }

Constellation Constellation::by_name(const std::string& name) {
    std::string key;
    for (char ch : name) {
        if (ch != '-' && ch != '_') key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    if (key == "BPSK") return bpsk();
    if (key == "QPSK" || key == "4QAM") return qpsk();
    if (key == "16QAM" || key == "QAM16") return qam16();
    if (key == "64QAM" || key == "QAM64") return qam64();
    throw DomainError("unknown constellation '" + name + "'");
}

double Constellation::average_energy() const { return mean_energy(points_); }

Constellation Constellation::rotated(double phase_rad) const {
    const std::complex<double> r = std::polar(1.0, phase_rad);
    std::vector<std::complex<double>> pts = points_;
    for (auto& b : pts) b *= r;
    return normalized(name_ + " (rotated)", std::move(pts));
}

double Mode::threshold_linear() const { return db_to_linear(threshold_db); }

ModeTable::ModeTable(std::vector<Mode> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) throw DomainError("mode table is empty");
    for (std::size_t l = 0; l < modes_.size(); ++l) {
        const Mode& m = modes_[l];
        if (m.index != l) throw DomainError("mode table: indices must be 0..L-1 in order");
        if (!(m.rate_bps_hz >= 0.0) || !std::isfinite(m.rate_bps_hz)) {
            throw DomainError("mode table: rates must be finite and >= 0");
        }
        if (l == 0) {
            if (m.rate_bps_hz != 0.0) throw DomainError("mode table: mode 0 must have rate 0");
            if (m.threshold_db != -std::numeric_limits<double>::infinity()) {
                throw DomainError("mode table: mode 0 threshold must be -inf");
            }
            continue;
        }
        const Mode& prev = modes_[l - 1];
        if (!(m.rate_bps_hz > prev.rate_bps_hz)) throw DomainError("mode table: rates must be strictly increasing");
        if (!std::isfinite(m.threshold_db) || !(m.threshold_db > prev.threshold_db)) {
            throw DomainError("mode table: thresholds must be finite and strictly increasing");
        }
    }
}

ModeTable ModeTable::hiperlan2() {
    const double ninf = -std::numeric_limits<double>::infinity();
    return ModeTable({
        {0, Constellation::bpsk(), 0.0, ninf},
        {1, Constellation::bpsk(), 0.5, -2.80},
        {2, Constellation::qpsk(), 1.0, 0.19},
        {3, Constellation::qpsk(), 1.5, 3.39},
        {4, Constellation::qam16(), 2.25, 6.20},
        {5, Constellation::qam16(), 3.0, 9.30},
        {6, Constellation::qam64(), 4.5, 14.37},
    });
}

std::vector<double> ModeTable::rates_bps_hz() const {
    std::vector<double> r;
    r.reserve(modes_.size());
    for (const auto& m : modes_) r.push_back(m.rate_bps_hz);
    return r;
}

std::vector<double> ModeTable::thresholds_linear() const {
    std::vector<double> g;
    g.reserve(modes_.size());
    for (const auto& m : modes_) g.push_back(m.threshold_linear());
    return g;
}

namespace {

// Pairwise differences b - b' for one transmitted point, sorted by modulus so
// the inner sum can stop once the remaining terms are below exp(-40) of the max.
struct NeighbourList {
    std::vector<std::complex<double>> diff;
    std::vector<double> modulus;
};

std::vector<NeighbourList> neighbour_lists(const Constellation& c, double amplitude) {
    const auto& pts = c.points();
    std::vector<NeighbourList> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<std::pair<double, std::complex<double>>> tmp;
        tmp.reserve(pts.size());
        for (const auto& bt : pts) {
            const std::complex<double> d = amplitude * (pts[i] - bt);
            tmp.emplace_back(std::abs(d), d);
        }
        std::sort(tmp.begin(), tmp.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [m, d] : tmp) {
            out[i].modulus.push_back(m);
            out[i].diff.push_back(d);
        }
    }
    return out;
}

constexpr double kPruneExponent = 40.0;

// log2 sum_{b'} exp(-(|v + d|^2 - |v|^2)) via log-sum-exp. The b' = b term is
// exp(0), so the max exponent is >= 0.
double log2_inner_sum(const NeighbourList& nl, std::complex<double> v, std::vector<double>& scratch) {
    const double vabs = std::abs(v);
    scratch.clear();
    double max_e = 0.0;
    for (std::size_t k = 0; k < nl.diff.size(); ++k) {
        const double m = nl.modulus[k];
        if (m > vabs && m * (m - 2.0 * vabs) > kPruneExponent - max_e) break;
        const std::complex<double> d = nl.diff[k];
        const double e = -(m * m + 2.0 * (v.real() * d.real() + v.imag() * d.imag()));
        scratch.push_back(e);
        max_e = std::max(max_e, e);
    }
    double s = 0.0;
    for (double e : scratch) s += std::exp(e - max_e);
    return (max_e + std::log(s)) * std::numbers::log2e;
}

}  // namespace

CapacityEstimate constellation_capacity(const Constellation& c, double gamma,
                                        const CapacityOptions& options) {
    if (!(gamma >= 0.0) || std::isnan(gamma)) {
        throw DomainError("constellation_capacity: gamma must be >= 0");
    }
    const double log2m = std::log2(static_cast<double>(c.size()));
    CapacityEstimate est;
    if (c.size() == 1) {
        est.samples = options.min_samples;
        return est;
    }
    if (std::isinf(gamma)) {
        est.value_bps_hz = log2m;
        est.samples = options.min_samples;
        return est;
    }

    const auto lists = neighbour_lists(c, std::sqrt(gamma));
    const double inv_m = 1.0 / static_cast<double>(c.size());
    const Rng master(options.seed);
    const std::size_t batch = std::max<std::size_t>(1, options.batch_samples);

    // Welford accumulation of the per-noise-sample stratified average.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    std::vector<double> scratch;
    scratch.reserve(c.size());
    for (std::uint64_t b = 0;; ++b) {
        Rng rng = master.stream(b);
        for (std::size_t s = 0; s < batch; ++s) {
            const std::complex<double> v(rng.normal() * std::numbers::sqrt2 / 2.0,
                                         rng.normal() * std::numbers::sqrt2 / 2.0);
            double x = 0.0;
            for (const auto& nl : lists) x += log2_inner_sum(nl, v, scratch);
            x *= inv_m;
            ++n;
            const double delta = x - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (x - mean);
        }
        const double se = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        est.std_err = se;
        if (n < options.min_samples) continue;
        if (options.target_std_err <= 0.0 || se <= options.target_std_err) break;
        if (n >= options.max_samples) {
            est.capped = true;
            break;
        }
    }
    est.value_bps_hz = log2m - mean;
    est.samples = n;
    return est;
}

std::vector<ThresholdReport> verify_thresholds(const ModeTable& table, double tol_db,
                                               const ThresholdSearchOptions& options) {
    std::vector<ThresholdReport> out;
    for (std::size_t l = 1; l < table.size(); ++l) {
        const Mode& m = table[l];
        ThresholdReport r;
        r.mode = l;
        r.rate_bps_hz = m.rate_bps_hz;
        r.table_db = m.threshold_db;
        r.deviation_db = std::numeric_limits<double>::infinity();

        auto cap_at = [&](double db) {
            return constellation_capacity(m.constellation, db_to_linear(db), options.capacity);
        };
        const double log2m = std::log2(static_cast<double>(m.constellation.size()));
        if (!(m.rate_bps_hz < log2m) || cap_at(options.hi_db).value_bps_hz < m.rate_bps_hz) {
            out.push_back(r);
            continue;
        }
        double lo = options.lo_db;
        double hi = options.hi_db;
        if (cap_at(lo).value_bps_hz >= m.rate_bps_hz) {
            hi = lo;
        } else {
            while (hi - lo > options.resolution_db) {
                const double mid = 0.5 * (lo + hi);
                if (cap_at(mid).value_bps_hz < m.rate_bps_hz) lo = mid; else hi = mid;
            }
        }
        const double solved = 0.5 * (lo + hi);
        r.solvable = true;
        r.solved_db = solved;
        r.deviation_db = std::abs(solved - m.threshold_db);
        r.within_tolerance = r.deviation_db <= tol_db;
        r.std_err = cap_at(solved).std_err;
        out.push_back(r);
    }
    return out;
}

std::size_t select_mode(const ModeTable& table, double gamma) {
    if (!(gamma >= 0.0)) throw DomainError("select_mode: gamma must be >= 0");
    std::size_t chosen = 0;
    for (std::size_t l = 1; l < table.size(); ++l) {
        if (gamma >= table[l].threshold_linear()) chosen = l; else break;
    }
    return chosen;
}

}  // namespace cdmanc
