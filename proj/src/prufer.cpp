#include "clockspec/prufer.hpp"

#include <cassert>
#include <cmath>

namespace clockspec::prufer {

namespace {

// 12-point Gauss-Legendre rule on [0, 1] (exact for polynomial degree 23;
// for the oscillatory cell integrands here the rule is accurate to ~1e-12
// relative as long as the phase advance per segment stays below ~2*pi).
struct GLNode {
    double x;
    double w;
};
constexpr GLNode GL12[12] = {
    {9.21968287664037822e-03, 2.35876681932560110e-02},
    {4.79413718147626011e-02, 5.34696629976594423e-02},
    {1.15048662902847654e-01, 8.00391642716730550e-02},
    {2.06341022856691259e-01, 1.01583713361532824e-01},
    {3.16084250500909936e-01, 1.16746268269177320e-01},
    {4.37383295744265543e-01, 1.24573522906701345e-01},
    {5.62616704255734401e-01, 1.24573522906701345e-01},
    {6.83915749499090064e-01, 1.16746268269177320e-01},
    {7.93658977143308686e-01, 1.01583713361532824e-01},
    {8.84951337097152346e-01, 8.00391642716730550e-02},
    {9.52058628185237454e-01, 5.34696629976594423e-02},
    {9.90780317123359566e-01, 2.35876681932560110e-02},
};

// Below this |kappa^2 - v| the cell is treated as psi'' = 0 (linear
// fundamental solutions); the induced phase error is O(|w| L^2) ~ 1e-9,
// well under the oracle tolerances.
constexpr double LINEAR_BRANCH_EPS = 1e-9;

// Renormalize A, B to logscale = 2 log r once the gap exceeds this.
constexpr double RENORM_GAP = 50.0;

// Put frac back into [0, pi), adjusting the half-turn count.
inline void normalize_frac(std::int64_t& half_turns, double& frac) {
    while (frac < 0.0) {
        frac += PI;
        --half_turns;
    }
    while (frac >= PI) {
        frac -= PI;
        ++half_turns;
    }
    frac += 0.0;  // canonicalize -0.0
}

inline void advance_free(PruferState& st, double kappa, double len, AccumLevel level) {
    std::int64_t q = 0;
    double f = st.phase.frac + kappa * len;
    if (f >= PI) {
        q = static_cast<std::int64_t>(std::floor(f / PI));
        f -= PI * static_cast<double>(q);
    }
    normalize_frac(q, f);
    st.phase.half_turns += q;
    st.phase.frac = f;
    if (level == AccumLevel::Full) {
        st.A += std::exp(2.0 * st.log_r - st.logscale) * len;
    }
    st.t += len;
}

// log sqrt(a^2 + b^2), robust against overflow of the squares.
inline double log_hypot(double a, double b) {
    const double m = std::max(std::fabs(a), std::fabs(b));
    if (m == 0.0) throw NumericError("prufer: amplitude collapsed to zero");
    const double ra = a / m;
    const double rb = b / m;
    return std::log(m) + 0.5 * std::log(ra * ra + rb * rb);
}

}  // namespace

double PruferState::a_true() const {
    const double v = A * std::exp(logscale);
    if (!std::isfinite(v)) throw NumericError("prufer: accumulator A overflows its rescaled form");
    return v;
}

double PruferState::b_true() const {
    const double v = B * std::exp(logscale);
    if (!std::isfinite(v)) throw NumericError("prufer: accumulator B overflows its rescaled form");
    return v;
}

namespace {

// Single-panel transfer across one constant cell.  Phase and log-amplitude
// are closed-form; the J/R/A/B integrals use one 12-node Gauss-Legendre
// panel, which is only trustworthy when exact_segment's dispatcher says so.
void exact_segment_direct(PruferState& st, double v, double len, double kappa,
                          AccumLevel level) {
    const bool with_jr = level != AccumLevel::PhaseOnly;
    const bool full = level == AccumLevel::Full;
    const double w = kappa * kappa - v;
    const double delta = st.phase.frac;
    const double sd = std::sin(delta);
    const double cd = std::cos(delta);

    std::int64_t dturns = 0;
    double frac_out = 0.0;
    double dlog_r = 0.0;
    double jre = 0.0, jim = 0.0, rre = 0.0;
    double a_nodes = 0.0, b_nodes = 0.0;  // r^2-weighted sums relative to r_in^2

    if (w > LINEAR_BRANCH_EPS) {
        // Oscillatory cell: local wavenumber kw, local phase rotates rigidly.
        const double kw = std::sqrt(w);
        const double gamma = kw / kappa;
        const double delta_loc = std::atan2(gamma * sd, cd);
        const double phi_out = delta_loc + kw * len;
        dturns = static_cast<std::int64_t>(std::floor(phi_out / PI));
        assert(dturns >= 0);
        const double d2 = phi_out - PI * static_cast<double>(dturns);
        const double s2 = std::sin(d2);
        const double c2 = std::cos(d2);
        frac_out = std::atan2(s2, gamma * c2);
        if (with_jr) {
            // r_out^2/r_in^2 = rho^2 * (sin^2 d2 + gamma^2 cos^2 d2) with the
            // local amplitude rho^2 = (gamma^2 sin^2 d + cos^2 d)/gamma^2.
            const double rho2_num = gamma * gamma * sd * sd + cd * cd;
            dlog_r = 0.5 * (std::log(rho2_num) + std::log(s2 * s2 + gamma * gamma * c2 * c2)) -
                     std::log(gamma);
            double swa = 0.0, swb = 0.0;
            for (const auto& nd : GL12) {
                const double phi = delta_loc + kw * len * nd.x;
                const double t = std::sin(phi);
                const double u = gamma * std::cos(phi);
                const double den = t * t + u * u;
                jre += nd.w * (u * u - t * t) / den;
                jim += nd.w * 2.0 * u * t / den;
                if (full) {
                    swa += nd.w * den;
                    swb += nd.w * 2.0 * t * t;
                }
            }
            const double vl = v * len;
            jre *= vl;
            jim *= vl;
            rre = jre - vl;
            if (full) {
                const double rho2 = rho2_num / (gamma * gamma);
                a_nodes = len * rho2 * swa;
                b_nodes = v * len * rho2 * swb;
            }
        }
    } else {
        // psi'' = (v - kappa^2) psi with the entry data (sin d, kappa cos d),
        // solved in closed form; at most one node inside the segment.
        double psiL = 0.0, uL = 0.0;  // exit (psi, psi'/kappa), entry amplitude factored out
        int crossings = 0;
        double node_psi[12], node_u[12];
        const bool hyper = w < -LINEAR_BRANCH_EPS;
        if (hyper) {
            const double mu = std::sqrt(-w);
            const double arg = mu * len;
            if (arg > 300.0) throw NumericError("prufer: hyperbolic segment too stiff to evaluate");
            const double a = 0.5 * (sd + kappa * cd / mu);
            const double b = 0.5 * (sd - kappa * cd / mu);
            if (a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0)) {
                const double lr = std::log(-b / a);  // = 2 mu s* at the node
                if (lr > 0.0 && lr <= 2.0 * arg) crossings = 1;
            }
            const double eL = std::exp(arg);
            const double emL = 1.0 / eL;
            psiL = a * eL + b * emL;
            uL = mu * (a * eL - b * emL) / kappa;
            if (with_jr) {
                for (int i = 0; i < 12; ++i) {
                    const double es = std::exp(mu * len * GL12[i].x);
                    node_psi[i] = a * es + b / es;
                    node_u[i] = mu * (a * es - b / es) / kappa;
                }
            }
        } else {
            // |w| tiny: straight-line fundamental solutions.
            const double dpsi = kappa * cd;
            if (dpsi != 0.0) {
                const double s_star = -sd / dpsi;
                if (s_star > 0.0 && s_star <= len) crossings = 1;
            }
            psiL = sd + dpsi * len;
            uL = cd;
            if (with_jr) {
                for (int i = 0; i < 12; ++i) {
                    node_psi[i] = sd + dpsi * len * GL12[i].x;
                    node_u[i] = cd;
                }
            }
        }
        const double sgn = (crossings & 1) ? -1.0 : 1.0;
        frac_out = std::atan2(sgn * psiL, sgn * uL);
        if (frac_out < 0.0) {
            frac_out += PI;
            --crossings;
        }
        assert(crossings >= 0);
        dturns = crossings;
        if (with_jr) {
            dlog_r = log_hypot(psiL, uL);
            double swa = 0.0, swb = 0.0;
            for (int i = 0; i < 12; ++i) {
                const double m = std::max(std::fabs(node_psi[i]), std::fabs(node_u[i]));
                const double t = node_psi[i] / m;
                const double u = node_u[i] / m;
                const double den = t * t + u * u;
                jre += GL12[i].w * (u * u - t * t) / den;
                jim += GL12[i].w * 2.0 * u * t / den;
                if (full) {
                    const double m2 = m * m;
                    swa += GL12[i].w * m2 * den;
                    swb += GL12[i].w * m2 * 2.0 * t * t;
                }
            }
            const double vl = v * len;
            jre *= vl;
            jim *= vl;
            rre = jre - vl;
            if (full) {
                a_nodes = len * swa;
                b_nodes = v * len * swb;
            }
        }
    }

    std::int64_t ht = st.phase.half_turns + dturns;
    normalize_frac(ht, frac_out);
    st.phase.half_turns = ht;
    st.phase.frac = frac_out;
    if (with_jr) {
        st.J += cplx(jre, jim);
        st.R += cplx(rre, jim);
        if (full) {
            const double base = std::exp(2.0 * st.log_r - st.logscale);
            st.A += base * a_nodes;
            st.B += base * b_nodes;
        }
        st.log_r += dlog_r;
    }
    st.t += len;
}

// The integrands of J and R are ratios of trigonometric (or hyperbolic)
// solutions, so e^{2 i theta(s)} has complex poles where psi = +-i u.  In the
// oscillatory branch those poles sit at height atanh(min(gamma, 1/gamma))/kw
// above the segment and repeat along it, so one Gauss-Legendre panel is
// reliable only when the segment is shorter than that height and the phase
// sweep stays modest.  Hyperbolic and near-linear cells are rare enough to
// always go through the self-validating bisection below.
bool single_panel_certified(double v, double len, double kappa) {
    const double w = kappa * kappa - v;
    if (w <= LINEAR_BRANCH_EPS) return false;
    const double kw = std::sqrt(w);
    if (kw * len > 4.0) return false;
    const double gamma = kw / kappa;
    const double g = std::min(gamma, 1.0 / gamma);
    if (g >= 1.0) return true;  // gamma == 1: the integrand is entire
    return len <= std::atanh(g) / kw;
}

// Compare one panel against its bisection; accept when the quadrature has
// converged (keeping the finer answer), otherwise recurse into the halves.
// Phase, log-amplitude and t compose exactly across the split, so only the
// quadrature resolution changes.
void exact_segment_adaptive(PruferState& st, double v, double len, double kappa,
                            AccumLevel level, int depth) {
    PruferState probe = st;
    exact_segment_direct(probe, v, len, kappa, level);
    PruferState half = st;
    const double l0 = 0.5 * len;
    const double l1 = len - l0;
    exact_segment_direct(half, v, l0, kappa, level);
    exact_segment_direct(half, v, l1, kappa, level);

    bool converged = std::abs(probe.J - half.J) <= 1e-13 * std::fabs(v) * len + 1e-16;
    if (converged && level == AccumLevel::Full) {
        const double da_p = probe.A - st.A;
        const double da_h = half.A - st.A;
        const double db_p = probe.B - st.B;
        const double db_h = half.B - st.B;
        converged = std::fabs(da_p - da_h) <=
                        1e-13 * std::max(std::fabs(da_p), std::fabs(da_h)) + 1e-300 &&
                    std::fabs(db_p - db_h) <=
                        1e-13 * std::max(std::fabs(db_p), std::fabs(db_h)) + 1e-300;
    }
    if (converged || depth >= 24) {
        st = half;
        return;
    }
    exact_segment_adaptive(st, v, l0, kappa, level, depth + 1);
    exact_segment_adaptive(st, v, l1, kappa, level, depth + 1);
}

}  // namespace

void exact_segment(PruferState& st, double v, double len, double kappa, AccumLevel level) {
    if (!(kappa > 0.0)) throw ConfigError("prufer: kappa must be positive");
    if (!(len > 0.0)) throw ConfigError("prufer: segment length must be positive");

    if (v == 0.0) {
        advance_free(st, kappa, len, level);
        return;
    }
    if (level == AccumLevel::PhaseOnly || single_panel_certified(v, len, kappa)) {
        exact_segment_direct(st, v, len, kappa, level);
        return;
    }
    exact_segment_adaptive(st, v, len, kappa, level, 0);
}

void rk4_cell(PruferState& st, double coeff, const potential::SiteProfile& profile, double kappa,
              int substeps, AccumLevel level) {
    if (!(kappa > 0.0)) throw ConfigError("prufer: kappa must be positive");
    if (substeps < 8) throw ConfigError("prufer: RK4 needs at least 8 substeps per cell");
    if (coeff == 0.0) {
        // Constant phase velocity: the quadrature is exact, so take the
        // closed-form advance (this also keeps free cells bit-stable).
        advance_free(st, kappa, 1.0, level);
        return;
    }

    const bool with_jr = level != AccumLevel::PhaseOnly;
    const bool full = level == AccumLevel::Full;
    const double h = 1.0 / static_cast<double>(substeps);

    struct Slope {
        double th = 0.0, lr = 0.0, jre = 0.0, jim = 0.0, rre = 0.0, a = 0.0, b = 0.0;
    };
    const double logscale = st.logscale;
    auto slope = [&](double x, double th, double lr) {
        // The potential lives on [0, 1); at the right endpoint stage use the
        // left limit so constant cells see a constant integrand throughout.
        if (x >= 1.0) x = std::nextafter(1.0, 0.0);
        const double v = coeff * profile.value(x);
        Slope k;
        const double c2 = std::cos(2.0 * th);
        const double s2 = std::sin(2.0 * th);
        k.th = kappa - (v / kappa) * 0.5 * (1.0 - c2);
        k.lr = v * s2 / (2.0 * kappa);
        if (with_jr) {
            k.jre = v * c2;
            k.jim = v * s2;
            k.rre = v * (c2 - 1.0);
        }
        if (full) {
            const double r2 = std::exp(2.0 * lr - logscale);
            k.a = r2;
            k.b = v * r2 * (1.0 - c2);
        }
        return k;
    };

    double th = st.phase.frac;
    double lr = st.log_r;
    double jre = 0.0, jim = 0.0, rre = 0.0, da = 0.0, db = 0.0;
    for (int i = 0; i < substeps; ++i) {
        const double x0 = static_cast<double>(i) * h;
        const Slope k1 = slope(x0, th, lr);
        const Slope k2 = slope(x0 + 0.5 * h, th + 0.5 * h * k1.th, lr + 0.5 * h * k1.lr);
        const Slope k3 = slope(x0 + 0.5 * h, th + 0.5 * h * k2.th, lr + 0.5 * h * k2.lr);
        const Slope k4 = slope(x0 + h, th + h * k3.th, lr + h * k3.lr);
        const double w6 = h / 6.0;
        th += w6 * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th);
        lr += w6 * (k1.lr + 2.0 * k2.lr + 2.0 * k3.lr + k4.lr);
        if (with_jr) {
            jre += w6 * (k1.jre + 2.0 * k2.jre + 2.0 * k3.jre + k4.jre);
            jim += w6 * (k1.jim + 2.0 * k2.jim + 2.0 * k3.jim + k4.jim);
            rre += w6 * (k1.rre + 2.0 * k2.rre + 2.0 * k3.rre + k4.rre);
        }
        if (full) {
            da += w6 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
            db += w6 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
        }
    }

    std::int64_t q = static_cast<std::int64_t>(std::floor(th / PI));
    double frac = th - PI * static_cast<double>(q);
    normalize_frac(q, frac);
    st.phase.half_turns += q;
    st.phase.frac = frac;
    st.log_r = lr;
    if (with_jr) {
        st.J += cplx(jre, jim);
        st.R += cplx(rre, jim);
    }
    if (full) {
        st.A += da;
        st.B += db;
    }
    st.t += 1.0;
}

ExactTransferResult exact_cell_transfer(double theta_in, double log_r_in, double v, double len,
                                        double kappa) {
    PruferState st;
    auto ht = static_cast<std::int64_t>(std::floor(theta_in / PI));
    double frac = theta_in - PI * static_cast<double>(ht);
    normalize_frac(ht, frac);
    st.phase = {ht, frac};
    st.log_r = log_r_in;
    exact_segment(st, v, len, kappa, AccumLevel::WithJR);
    return {st.phase.value(), st.log_r};
}

namespace {

void maybe_renorm(PruferState& st) {
    if (!std::isfinite(st.A) || !std::isfinite(st.B) || !std::isfinite(st.log_r)) {
        throw NumericError("prufer: accumulator overflow despite rescaling");
    }
    const double gap = 2.0 * st.log_r - st.logscale;
    if (gap > RENORM_GAP) {
        const double factor = std::exp(-gap);  // exp(old logscale - new logscale)
        st.A *= factor;
        st.B *= factor;
        st.logscale = 2.0 * st.log_r;
    }
}

}  // namespace

PruferOutcome integrate(const potential::RealizedPotential& pot, double kappa,
                        const IntegratorConfig& cfg, AccumLevel level, CellTrace* trace) {
    if (!(kappa > 0.0)) throw ConfigError("prufer: kappa must be positive");
    if (pot.n < 2) throw ConfigError("prufer: interval length must be at least 2");
    if (cfg.substeps < 8) throw ConfigError("prufer: RK4 needs at least 8 substeps per cell");

    AccumLevel lvl = level;
    if (trace != nullptr && lvl == AccumLevel::PhaseOnly) lvl = AccumLevel::WithJR;

    bool use_exact = false;
    switch (cfg.method) {
        case IntegratorConfig::Method::Auto:
            use_exact = pot.profile.piecewise_constant();
            break;
        case IntegratorConfig::Method::ExactPiecewiseConstant:
            if (!pot.profile.piecewise_constant()) {
                throw ConfigError("prufer: exact transfer requires a piecewise-constant profile");
            }
            use_exact = true;
            break;
        case IntegratorConfig::Method::RK4:
            use_exact = false;
            break;
    }
    std::vector<std::pair<double, double>> segs;
    if (use_exact) segs = pot.profile.segments();

    PruferState st;
    if (trace != nullptr) {
        trace->phase.clear();
        trace->log_r.clear();
        trace->dJ.clear();
        trace->dR.clear();
        trace->phase.reserve(static_cast<std::size_t>(pot.n) + 1);
        trace->log_r.reserve(static_cast<std::size_t>(pot.n) + 1);
        trace->dJ.reserve(static_cast<std::size_t>(pot.n));
        trace->dR.reserve(static_cast<std::size_t>(pot.n));
        trace->phase.push_back(st.phase);
        trace->log_r.push_back(st.log_r);
    }

    for (long j = 0; j < pot.n; ++j) {
        const cplx j_before = st.J;
        const cplx r_before = st.R;
        const double cj = pot.coeff[static_cast<std::size_t>(j)];
        if (use_exact) {
            if (cj == 0.0) {
                exact_segment(st, 0.0, 1.0, kappa, lvl);
            } else {
                for (const auto& [fval, flen] : segs) {
                    exact_segment(st, cj * fval, flen, kappa, lvl);
                }
            }
        } else {
            rk4_cell(st, cj, pot.profile, kappa, cfg.substeps, lvl);
        }
        st.t = static_cast<double>(j + 1);
        if (lvl == AccumLevel::Full) maybe_renorm(st);
        if (trace != nullptr) {
            trace->phase.push_back(st.phase);
            trace->log_r.push_back(st.log_r);
            trace->dJ.push_back(st.J - j_before);
            trace->dR.push_back(st.R - r_before);
        }
    }

    if (!std::isfinite(st.phase.frac) || !std::isfinite(st.log_r)) {
        throw NumericError("prufer: non-finite state after integration");
    }

    PruferOutcome out;
    out.phase = st.phase;
    out.theta = st.phase.value();
    out.theta_tilde = (PI * static_cast<double>(st.phase.half_turns) -
                       kappa * static_cast<double>(pot.n)) +
                      st.phase.frac;
    out.log_r = st.log_r;
    out.J = st.J;
    out.R = st.R;
    out.A = st.A;
    out.B = st.B;
    out.logscale = st.logscale;
    if (lvl == AccumLevel::Full) {
        out.dtheta_dkappa = (st.A + st.B / (2.0 * kappa * kappa)) *
                            std::exp(st.logscale - 2.0 * st.log_r);
        if (!std::isfinite(out.dtheta_dkappa)) {
            throw NumericError("prufer: phase derivative overflowed");
        }
    }
    return out;
}

double phase_derivative(const potential::RealizedPotential& pot, double kappa,
                        const IntegratorConfig& cfg) {
    return integrate(pot, kappa, cfg, AccumLevel::Full).dtheta_dkappa;
}

}  // namespace clockspec::prufer
