#pragma once

// Prufer representation of solutions of -psi'' + V psi = kappa^2 psi:
//
//   (psi, psi'/kappa) = r (sin theta, cos theta),
//   theta' = kappa - (V/kappa) sin^2 theta,
//   (log r)' = (V / 2 kappa) sin 2 theta,
//
// with Dirichlet start theta(0) = 0, r(0) = 1.  The phase is tracked as an
// exact half-turn count plus a fractional part in [0, pi) so that
// oscillation counts and phase differences stay exact at any length.
//
// Alongside the phase the integrator can accumulate
//   J(t)      = int_0^t e^{2 i theta} V,
//   R(t)      = int_0^t (e^{2 i theta} - 1) V,
//   A(t)      = int_0^t r^2,
//   B(t)      = int_0^t r^2 V (1 - cos 2 theta),
// which give log r = Im J / (2 kappa), theta - kappa t = Re R / (2 kappa),
// and the kappa-derivative  d theta / d kappa = (A + B / (2 kappa^2)) / r^2.

#include <cstdint>
#include <vector>

#include "clockspec/common.hpp"
#include "clockspec/potential.hpp"

namespace clockspec::prufer {

struct PruferPhase {
    std::int64_t half_turns = 0;  // theta = half_turns * pi + frac
    double frac = 0.0;            // in [0, pi)

    double value() const { return PI * static_cast<double>(half_turns) + frac; }
};

// a - b, computed without forming the large raw angles.
inline double phase_diff(const PruferPhase& a, const PruferPhase& b) {
    return PI * static_cast<double>(a.half_turns - b.half_turns) + (a.frac - b.frac);
}

inline bool phase_less(const PruferPhase& a, const PruferPhase& b) {
    if (a.half_turns != b.half_turns) return a.half_turns < b.half_turns;
    return a.frac < b.frac;
}

// theta >= k*pi holds iff the integer part has reached k (frac >= 0 always).
inline bool phase_at_least_halfturn(const PruferPhase& a, std::int64_t k) {
    return a.half_turns >= k;
}

enum class AccumLevel {
    PhaseOnly,  // theta
    WithJR,     // + log r, J, R
    Full        // + A, B (kappa-derivative data)
};

struct PruferState {
    double t = 0.0;
    PruferPhase phase;
    double log_r = 0.0;
    cplx J = {0.0, 0.0};
    cplx R = {0.0, 0.0};
    // A and B are stored rescaled: true value = stored * exp(logscale).
    double A = 0.0;
    double B = 0.0;
    double logscale = 0.0;

    double a_true() const;  // A * exp(logscale); may overflow -> NumericError
    double b_true() const;
};

struct IntegratorConfig {
    enum class Method { Auto, ExactPiecewiseConstant, RK4 };
    Method method = Method::Auto;
    int substeps = 64;  // RK4 substeps per unit cell; must be >= 8
};

// Advance across a constant potential V == v on a segment of length len.
// Closed-form: trigonometric rotation for kappa^2 > v, hyperbolic branch
// for kappa^2 < v (at most one node), linear branch at the crossover.
void exact_segment(PruferState& state, double v, double len, double kappa, AccumLevel level);

// Classical RK4 on the Prufer system across one unit cell with potential
// coeff * profile(x), x in [0,1), using `substeps` equal substeps.
void rk4_cell(PruferState& state, double coeff, const potential::SiteProfile& profile,
              double kappa, int substeps, AccumLevel level);

// Convenience wrapper on plain angles (oracle/cross-check use).
struct ExactTransferResult {
    double theta;
    double log_r;
};
ExactTransferResult exact_cell_transfer(double theta_in, double log_r_in, double v, double len,
                                        double kappa);

// Optional per-cell recording during integration.
struct CellTrace {
    std::vector<PruferPhase> phase;  // at t = 0..n  (n+1 entries)
    std::vector<double> log_r;       // at t = 0..n
    std::vector<cplx> dJ;            // increment over cell [t, t+1), n entries
    std::vector<cplx> dR;
};

struct PruferOutcome {
    PruferPhase phase;    // theta_n
    double theta = 0.0;   // phase.value()
    double theta_tilde = 0.0;  // theta_n - kappa * n, formed stably
    double log_r = 0.0;
    cplx J = {0.0, 0.0};
    cplx R = {0.0, 0.0};
    double A = 0.0;       // rescaled; pair with logscale
    double B = 0.0;
    double logscale = 0.0;
    double dtheta_dkappa = 0.0;  // filled at AccumLevel::Full
};

// Integrate over [0, n] for one realized potential.
PruferOutcome integrate(const potential::RealizedPotential& pot, double kappa,
                        const IntegratorConfig& cfg, AccumLevel level,
                        CellTrace* trace = nullptr);

// d theta_n / d kappa via the accumulated A, B.
double phase_derivative(const potential::RealizedPotential& pot, double kappa,
                        const IntegratorConfig& cfg);

}  // namespace clockspec::prufer
