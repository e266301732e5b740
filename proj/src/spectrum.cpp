#include "clockspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace clockspec::spectrum {

using prufer::AccumLevel;
using prufer::PruferPhase;

namespace {

PruferPhase phase_at(const potential::RealizedPotential& pot, double kappa,
                     const prufer::IntegratorConfig& cfg) {
    return prufer::integrate(pot, kappa, cfg, AccumLevel::PhaseOnly).phase;
}

}  // namespace

std::int64_t oscillation_count(const potential::RealizedPotential& pot, double kappa,
                               const prufer::IntegratorConfig& cfg) {
    return phase_at(pot, kappa, cfg).half_turns;
}

double locate_eigenvalue(const potential::RealizedPotential& pot, std::int64_t k, double klo,
                         double khi, const prufer::IntegratorConfig& cfg, const RootConfig& rc) {
    if (!(klo > 0.0 && khi > klo)) throw ConfigError("eigenvalue bracket must satisfy 0 < klo < khi");
    PruferPhase plo = phase_at(pot, klo, cfg);
    PruferPhase phi_ = phase_at(pot, khi, cfg);
    if (!(plo.half_turns < k && k <= phi_.half_turns)) {
        throw ConfigError("eigenvalue bracket does not enclose the requested phase crossing");
    }
    const double tol = rc.rel_tol * khi;
    while (khi - klo > tol) {
        const double mid = 0.5 * (klo + khi);
        if (mid <= klo || mid >= khi) break;  // bracket at rounding resolution
        const PruferPhase pm = phase_at(pot, mid, cfg);
        if (pm.half_turns >= k) {
            khi = mid;
            phi_ = pm;
        } else {
            klo = mid;
            plo = pm;
        }
    }
    // One secant step on the phase values lifts the root to near machine
    // accuracy (theta is nearly linear across the final bracket).
    double kstar = 0.5 * (klo + khi);
    const double num = PI * static_cast<double>(k - plo.half_turns) - plo.frac;
    const double den = prufer::phase_diff(phi_, plo);
    if (den > 0.0) {
        const double cand = klo + (khi - klo) * (num / den);
        if (cand >= klo && cand <= khi) kstar = cand;
    }
    const PruferPhase ps = phase_at(pot, kstar, cfg);
    const double residual = PI * static_cast<double>(ps.half_turns - k) + ps.frac;
    if (std::fabs(residual) > rc.residual_tol) {
        throw NumericError("eigenvalue root rejected: phase residual " + std::to_string(residual));
    }
    return kstar;
}

EigenvalueWindow eigenvalue_window(const potential::RealizedPotential& pot, double kappa0,
                                   double c_max, const prufer::IntegratorConfig& cfg,
                                   const RootConfig& rc) {
    if (!(kappa0 > 0.0)) throw ConfigError("eigenvalue window: kappa0 must be positive");
    if (!(c_max > 0.0)) throw ConfigError("eigenvalue window: c_max must be positive");
    const auto n = static_cast<double>(pot.n);
    const double half = (c_max + rc.c_margin) / n;
    const double klo = kappa0 - half;
    const double khi = kappa0 + half;
    if (klo <= 0.0) {
        throw ConfigError("eigenvalue window reaches nonpositive kappa; reduce c_max or raise kappa0");
    }

    EigenvalueWindow win;
    win.kappa0 = kappa0;
    win.n = pot.n;
    win.c_max = c_max;
    const PruferPhase base = phase_at(pot, kappa0, cfg);
    win.base_count = base.half_turns;
    win.frac_phase = base.frac;

    // Scan resolution: theta moves by about n * (1 + envelope) * dkappa, so
    // pi/4 of phase motion per step cannot hop over a whole crossing.
    const double step = PI / (4.0 * n * (1.0 + pot.envelope));
    const int npts = std::max(2, static_cast<int>(std::ceil((khi - klo) / step)) + 1);
    std::vector<std::pair<double, PruferPhase>> scan;
    scan.reserve(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i) {
        const double kap = klo + (khi - klo) * static_cast<double>(i) / (npts - 1);
        scan.emplace_back(kap, phase_at(pot, kap, cfg));
    }

    struct Seg {
        double ka, kb;
        PruferPhase pa, pb;
        int depth;
    };
    std::vector<Seg> work;
    for (int i = npts - 2; i >= 0; --i) {
        work.push_back({scan[i].first, scan[i + 1].first, scan[i].second, scan[i + 1].second, 0});
    }

    while (!work.empty()) {
        const Seg seg = work.back();
        work.pop_back();
        if (prufer::phase_less(seg.pb, seg.pa)) {
            // Phase decreased across the sample: refine, or record an anomaly
            // once the subdivision budget is spent.
            if (seg.depth >= rc.max_subdivide || seg.kb - seg.ka <= rc.rel_tol * kappa0) {
                ++win.anomalies;
                continue;
            }
            const double mid = 0.5 * (seg.ka + seg.kb);
            const PruferPhase pm = phase_at(pot, mid, cfg);
            work.push_back({mid, seg.kb, pm, seg.pb, seg.depth + 1});
            work.push_back({seg.ka, mid, seg.pa, pm, seg.depth + 1});
            continue;
        }
        for (std::int64_t k = seg.pa.half_turns + 1; k <= seg.pb.half_turns; ++k) {
            const double kap = locate_eigenvalue(pot, k, seg.ka, seg.kb, cfg, rc);
            const double c = n * (kap - kappa0);
            if (std::fabs(c) <= c_max) {
                Atom a;
                a.k = k;
                a.label = k - win.base_count;
                a.kappa = kap;
                a.c = c;
                win.atoms.push_back(a);
            }
        }
    }

    std::sort(win.atoms.begin(), win.atoms.end(),
              [](const Atom& a, const Atom& b) { return a.kappa < b.kappa; });
    return win;
}

double relative_phase(const potential::RealizedPotential& pot, double kappa0, double c,
                      const prufer::IntegratorConfig& cfg) {
    if (c == 0.0) return 0.0;
    const double kap = kappa0 + c / static_cast<double>(pot.n);
    if (!(kap > 0.0)) throw ConfigError("relative phase: kappa0 + c/n must be positive");
    const PruferPhase base = phase_at(pot, kappa0, cfg);
    const PruferPhase moved = phase_at(pot, kap, cfg);
    return prufer::phase_diff(moved, base);
}

std::vector<ThetaSample> theta_grid(const potential::RealizedPotential& pot, double kappa0,
                                    const std::vector<double>& cs,
                                    const prufer::IntegratorConfig& cfg) {
    if (!(kappa0 > 0.0)) throw ConfigError("theta grid: kappa0 must be positive");
    const PruferPhase base = phase_at(pot, kappa0, cfg);
    std::vector<ThetaSample> out;
    out.reserve(cs.size());
    const auto n = static_cast<double>(pot.n);
    for (double c : cs) {
        const double kap = kappa0 + c / n;
        if (!(kap > 0.0)) throw ConfigError("theta grid: kappa0 + c/n must be positive");
        const auto res = prufer::integrate(pot, kap, cfg, AccumLevel::Full);
        ThetaSample s;
        s.c = c;
        s.Theta = prufer::phase_diff(res.phase, base);
        s.dTheta_dc = res.dtheta_dkappa / n;
        out.push_back(s);
    }
    return out;
}

TestFunction TestFunction::bump(double amplitude, double half_width, double center) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw ConfigError("test function: amplitude must be finite and nonnegative");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw ConfigError("test function: half_width must be finite and positive");
    }
    if (!std::isfinite(center)) throw ConfigError("test function: center must be finite");
    TestFunction g;
    g.amplitude = amplitude;
    g.half_width = half_width;
    g.center = center;
    return g;
}

double TestFunction::operator()(double x) const {
    const double u = (x - center) / half_width;
    const double q = 1.0 - u * u;
    if (q <= 0.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / q);
}

double lattice_sum(const TestFunction& g, double phi) {
    const auto jlo = static_cast<std::int64_t>(std::floor((g.support_lo() + phi) / PI)) - 1;
    const auto jhi = static_cast<std::int64_t>(std::ceil((g.support_hi() + phi) / PI)) + 1;
    double s = 0.0;
    for (std::int64_t j = jlo; j <= jhi; ++j) {
        s += g(PI * static_cast<double>(j) - phi);
    }
    return s;
}

double laplace_direct(const EigenvalueWindow& win, const TestFunction& g) {
    if (g.support_lo() < -win.c_max || g.support_hi() > win.c_max) {
        throw ConfigError("laplace functional: test function support exceeds the atom window");
    }
    double s = 0.0;
    for (const Atom& a : win.atoms) s += g(a.c);
    return std::exp(-s);
}

MonotoneCubic MonotoneCubic::build(std::vector<double> x, std::vector<double> y,
                                   std::vector<double> dydx) {
    if (x.size() < 2 || x.size() != y.size() || x.size() != dydx.size()) {
        throw ConfigError("monotone interpolation: need matching node/value/slope arrays, size >= 2");
    }
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (!(x[i + 1] > x[i])) throw ConfigError("monotone interpolation: nodes must increase");
        if (!(y[i + 1] > y[i])) {
            throw NumericError("monotone interpolation: data is not strictly increasing");
        }
    }
    // Fritsch-Carlson safeguard: slopes in [0, 3 * min(adjacent secants)]
    // guarantee a monotone cubic; the exact phase derivatives used here sit
    // near the secants, so the clamp is a no-op except in pathologies.
    for (std::size_t i = 0; i < x.size(); ++i) {
        double cap = 0.0;
        if (i > 0) cap = 3.0 * (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        if (i + 1 < x.size()) {
            const double s = 3.0 * (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            cap = (i > 0) ? std::min(cap, s) : s;
        }
        dydx[i] = std::clamp(dydx[i], 0.0, cap);
    }
    MonotoneCubic m;
    m.x_ = std::move(x);
    m.y_ = std::move(y);
    m.d_ = std::move(dydx);
    return m;
}

namespace {

inline double hermite(double t, double h, double y0, double y1, double d0, double d1) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return y0 * (2.0 * t3 - 3.0 * t2 + 1.0) + h * d0 * (t3 - 2.0 * t2 + t) +
           y1 * (3.0 * t2 - 2.0 * t3) + h * d1 * (t3 - t2);
}

inline double hermite_dt(double t, double h, double y0, double y1, double d0, double d1) {
    const double t2 = t * t;
    return y0 * (6.0 * t2 - 6.0 * t) + h * d0 * (3.0 * t2 - 4.0 * t + 1.0) +
           y1 * (6.0 * t - 6.0 * t2) + h * d1 * (3.0 * t2 - 2.0 * t);
}

}  // namespace

double MonotoneCubic::eval(double x) const {
    if (x < x_.front() || x > x_.back()) {
        throw ConfigError("monotone interpolation: evaluation outside the node range");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    return hermite(t, h, y_[i], y_[i + 1], d_[i], d_[i + 1]);
}

double MonotoneCubic::inverse(double y) const {
    if (y < y_.front() || y > y_.back()) {
        throw NumericError("monotone interpolation: inverse query outside the value range");
    }
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t i = (it == y_.begin()) ? 0 : static_cast<std::size_t>(it - y_.begin()) - 1;
    if (i + 1 >= y_.size()) i = y_.size() - 2;
    const double h = x_[i + 1] - x_[i];
    const double y0 = y_[i], y1 = y_[i + 1];
    double tlo = 0.0, thi = 1.0;
    double t = (y - y0) / (y1 - y0);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = hermite(t, h, y0, y1, d_[i], d_[i + 1]) - y;
        if (std::fabs(f) <= 1e-15 * (std::fabs(y) + 1.0)) break;
        if (f > 0.0) {
            thi = t;
        } else {
            tlo = t;
        }
        const double df = hermite_dt(t, h, y0, y1, d_[i], d_[i + 1]);
        double nt = (df > 0.0) ? t - f / df : -1.0;
        if (!(nt > tlo && nt < thi)) nt = 0.5 * (tlo + thi);
        if (nt == t) break;
        t = nt;
    }
    return x_[i] + t * h;
}

double laplace_from_phase(const std::vector<ThetaSample>& grid, double frac_phase,
                          const TestFunction& g) {
    if (grid.size() < 2) throw ConfigError("laplace functional: phase grid needs >= 2 samples");
    std::vector<double> xs, ys, ds;
    xs.reserve(grid.size());
    ys.reserve(grid.size());
    ds.reserve(grid.size());
    for (const auto& s : grid) {
        xs.push_back(s.c);
        ys.push_back(s.Theta);
        ds.push_back(s.dTheta_dc);
    }
    if (g.support_lo() < xs.front() || g.support_hi() > xs.back()) {
        throw ConfigError("laplace functional: phase grid does not cover the test function support");
    }
    const MonotoneCubic interp = MonotoneCubic::build(std::move(xs), std::move(ys), std::move(ds));

    const auto jlo =
        static_cast<std::int64_t>(std::ceil((interp.y_front() + frac_phase) / PI - 1e-12));
    const auto jhi =
        static_cast<std::int64_t>(std::floor((interp.y_back() + frac_phase) / PI + 1e-12));
    double s = 0.0;
    for (std::int64_t j = jlo; j <= jhi; ++j) {
        const double y = PI * static_cast<double>(j) - frac_phase;
        if (y < interp.y_front() || y > interp.y_back()) continue;
        s += g(interp.inverse(y));
    }
    return std::exp(-s);
}

}  // namespace clockspec::spectrum
