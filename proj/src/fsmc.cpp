#include "cdmanc/fsmc.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "cdmanc/errors.hpp"

namespace cdmanc {

SquareMatrix SquareMatrix::identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void FsmcModel::validate() const {
    const std::size_t n = pi.size();
    if (n == 0) throw DomainError("fsmc: empty chain");
    if (p.size() != n || rates_blocks.size() != n) throw DomainError("fsmc: dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pi[i] >= 0.0)) throw DomainError("fsmc: negative state probability");
        total += pi[i];
        if (!(rates_blocks[i] >= 0.0) || !std::isfinite(rates_blocks[i])) {
            throw DomainError("fsmc: service rates must be finite and >= 0");
        }
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p(i, j);
            if (!(v >= 0.0 && v <= 1.0)) throw DomainError("fsmc: transition entry outside [0, 1]");
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-12) throw DomainError("fsmc: row " + std::to_string(i) + " does not sum to 1");
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("fsmc: pi does not sum to 1");
}

double FsmcModel::stationarity_mismatch() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * p(i, j);
        worst = std::max(worst, std::abs(s - pi[j]));
    }
    return worst;
}

double FsmcModel::mean_rate_blocks() const {
    double s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * rates_blocks[i];
    return s;
}

double level_crossing_rate(double gamma_threshold, double gamma_bar, double f_m_hz) {
    if (!(gamma_threshold >= 0.0)) throw DomainError("level_crossing_rate: threshold must be >= 0");
    if (!(gamma_bar > 0.0)) throw DomainError("level_crossing_rate: gamma_bar must be > 0");
    if (!(f_m_hz >= 0.0)) throw DomainError("level_crossing_rate: f_m must be >= 0");
    if (std::isinf(gamma_threshold)) return 0.0;
    const double x = gamma_threshold / gamma_bar;
    return std::sqrt(2.0 * std::numbers::pi * x) * f_m_hz * std::exp(-x);
}

std::vector<double> stationary_distribution(const ModeTable& table, double gamma_bar) {
    if (!(gamma_bar > 0.0)) throw DomainError("stationary_distribution: gamma_bar must be > 0");
    const auto g = table.thresholds_linear();
    const std::size_t n = g.size();
    std::vector<double> pi(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double upper = l + 1 < n ? std::exp(-g[l + 1] / gamma_bar) : 0.0;
        pi[l] = std::exp(-g[l] / gamma_bar) - upper;
    }
    return pi;
}

std::vector<double> block_rates(const SystemConfig& cfg) {
    std::vector<double> r;
    for (const auto& m : cfg.modes.modes()) r.push_back(m.rate_bps_hz * cfg.t_b_s * cfg.w_hz / cfg.n_b_bits);
    return r;
}

FsmcModel build_fsmc(const SystemConfig& cfg, const DecoupledChannel& channel) {
    cfg.validate();
    FsmcModel model;
    model.gamma_bar = channel.gamma_bar;
    model.t_b_s = cfg.t_b_s;
    model.f_m_hz = cfg.f_m_hz;
    model.pi = stationary_distribution(cfg.modes, channel.gamma_bar);
    model.rates_bps_hz = cfg.modes.rates_bps_hz();
    model.rates_blocks = block_rates(cfg);

    const auto g = cfg.modes.thresholds_linear();
    const std::size_t n = g.size();
    model.p = SquareMatrix(n);

    auto crossing_probability = [&](std::size_t l, double crossings) {
        const double mass = crossings * cfg.t_b_s;
        if (mass == 0.0) return 0.0;
        if (!(model.pi[l] > 0.0)) {
            throw SlowFadingViolation("fsmc: state " + std::to_string(l) +
                                          " has zero probability but nonzero boundary crossings",
                                      l);
        }
        return mass / model.pi[l];
    };

    for (std::size_t l = 0; l < n; ++l) {
        double off = 0.0;
        if (l + 1 < n) {
            const double up = crossing_probability(l, level_crossing_rate(g[l + 1], channel.gamma_bar, cfg.f_m_hz));
            model.p(l, l + 1) = up;
            off += up;
        }
        if (l > 0) {
            const double down = crossing_probability(l, level_crossing_rate(g[l], channel.gamma_bar, cfg.f_m_hz));
            model.p(l, l - 1) = down;
            off += down;
        }
        const double stay = 1.0 - off;
        if (!(stay >= 0.0)) {
            throw SlowFadingViolation("fsmc: state " + std::to_string(l) +
                                          " leaves with probability " + std::to_string(off) +
                                          " > 1 per slot; f_m * T_b too large",
                                      l);
        }
        model.p(l, l) = stay;
    }
    model.validate();
    return model;
}

void write_matrix_dump(std::ostream& os, const FsmcModel& model) {
    const std::size_t n = model.states();
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    os << "# fsmc states " << n << "\n";
    os << "# gamma_bar " << model.gamma_bar << " t_b_s " << model.t_b_s << " f_m_hz " << model.f_m_hz << "\n";
    os << "P\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) os << (j ? " " : "") << model.p(i, j);
        os << "\n";
    }
    os << "pi\n";
    for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << model.pi[i];
    os << "\nrates_blocks\n";
    for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << model.rates_blocks[i];
    os << "\n";
    os.flags(flags);
    os.precision(prec);
}

}  // namespace cdmanc
