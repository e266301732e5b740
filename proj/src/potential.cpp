#include "clockspec/potential.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace clockspec::potential {

SiteProfile SiteProfile::indicator() {
    SiteProfile p;
    p.kind = Kind::Indicator;
    return p;
}

SiteProfile SiteProfile::bump() {
    SiteProfile p;
    p.kind = Kind::Bump;
    return p;
}

SiteProfile SiteProfile::piecewise(std::vector<double> values) {
    if (values.empty()) throw ConfigError("site profile: piecewise table must be non-empty");
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError("site profile: piecewise table has non-finite value");
    }
    SiteProfile p;
    p.kind = Kind::Table;
    p.table = std::move(values);
    return p;
}

double SiteProfile::value(double x) const {
    if (x < 0.0 || x >= 1.0) return 0.0;
    switch (kind) {
        case Kind::Indicator:
            return 1.0;
        case Kind::Bump: {
            const double y = x * (1.0 - x);
            return 16.0 * y * y;
        }
        case Kind::Table: {
            auto idx = static_cast<std::size_t>(x * static_cast<double>(table.size()));
            if (idx >= table.size()) idx = table.size() - 1;
            return table[idx];
        }
    }
    return 0.0;
}

double SiteProfile::sup_norm() const {
    switch (kind) {
        case Kind::Indicator:
        case Kind::Bump:
            return 1.0;
        case Kind::Table: {
            double m = 0.0;
            for (double v : table) m = std::max(m, std::fabs(v));
            return m;
        }
    }
    return 0.0;
}

std::vector<std::pair<double, double>> SiteProfile::segments() const {
    switch (kind) {
        case Kind::Indicator:
            return {{1.0, 1.0}};
        case Kind::Table: {
            std::vector<std::pair<double, double>> segs;
            const double h = 1.0 / static_cast<double>(table.size());
            segs.reserve(table.size());
            for (std::size_t i = 0; i < table.size(); ++i) {
                // Merge adjacent equal values to cut transfer-map calls.
                if (!segs.empty() && segs.back().first == table[i]) {
                    segs.back().second += h;
                } else {
                    segs.emplace_back(table[i], h);
                }
            }
            return segs;
        }
        case Kind::Bump:
            throw ConfigError("site profile: smooth bump has no constant-segment decomposition");
    }
    return {};
}

PotentialModel PotentialModel::make(double alpha, SiteProfile profile,
                                    amplitudes::AmplitudeSpec amps, Mode mode) {
    if (!(alpha > 0.5)) {
        throw ConfigError("potential model: decay exponent alpha must exceed 1/2, got " +
                          std::to_string(alpha));
    }
    PotentialModel m;
    m.alpha = alpha;
    m.profile = std::move(profile);
    m.amplitudes = std::move(amps);
    m.mode = mode;
    return m;
}

double cell_coefficient(const PotentialModel& model, long j, long n, double omega_j) {
    if (j < 1) throw ConfigError("cell coefficient: the first cell [0,1) carries no potential");
    if (n < 2) throw ConfigError("cell coefficient: interval length n must be at least 2");
    if (j >= n) throw ConfigError("cell coefficient: cell index beyond the interval");
    switch (model.mode) {
        case PotentialModel::Mode::Standard:
            return omega_j * std::pow(static_cast<double>(j), -model.alpha);
        case PotentialModel::Mode::DecayingCoupling:
            return std::pow(static_cast<double>(n), -model.alpha) * omega_j;
    }
    return 0.0;
}

double RealizedPotential::value(double t) const {
    if (!(t >= 0.0 && t <= static_cast<double>(n))) {
        throw ConfigError("potential evaluation outside [0, n]");
    }
    const auto j = static_cast<long>(std::floor(t));
    if (j < 1 || j >= n) return 0.0;  // free first cell; t == n has empty support
    const double c = coeff[static_cast<std::size_t>(j)];
    if (c == 0.0) return 0.0;
    return c * profile.value(t - static_cast<double>(j));
}

RealizedPotential realize(const PotentialModel& model, long n, std::uint64_t seed,
                          std::uint64_t realization) {
    if (n < 2) throw ConfigError("potential realization: n must be at least 2");
    RealizedPotential rp;
    rp.n = n;
    rp.profile = model.profile;
    rp.coeff.assign(static_cast<std::size_t>(n), 0.0);
    amplitudes::AmplitudeStream stream(model.amplitudes, seed, realization);
    double cmax = 0.0;
    for (long j = 1; j < n; ++j) {
        const double c = cell_coefficient(model, j, n, stream.value(j));
        rp.coeff[static_cast<std::size_t>(j)] = c;
        cmax = std::max(cmax, std::fabs(c));
    }
    rp.envelope = cmax * model.profile.sup_norm();
    return rp;
}

RealizedPotential realize_from_coefficients(SiteProfile profile, std::vector<double> coeff) {
    if (coeff.size() < 2) throw ConfigError("potential realization: need at least 2 cells");
    if (coeff[0] != 0.0) throw ConfigError("potential realization: cell [0,1) must be free");
    RealizedPotential rp;
    rp.n = static_cast<long>(coeff.size());
    rp.profile = std::move(profile);
    rp.coeff = std::move(coeff);
    double cmax = 0.0;
    for (double c : rp.coeff) {
        if (!std::isfinite(c)) throw ConfigError("potential realization: non-finite coefficient");
        cmax = std::max(cmax, std::fabs(c));
    }
    rp.envelope = cmax * rp.profile.sup_norm();
    return rp;
}

double evaluate(const PotentialModel& model, double t, long n, std::uint64_t seed,
                std::uint64_t realization) {
    return realize(model, n, seed, realization).value(t);
}

}  // namespace clockspec::potential
