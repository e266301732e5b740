#pragma once

// Alloy-type decaying random potential on [0, n]:
//
//   V(t) = sum_{j=1}^{n-1} c_j f(t - j),   supp f in [0, 1],
//
// with c_j = omega(j) j^{-alpha} (standard mode) or c_j = n^{-alpha}
// omega(j) (decaying-coupling mode), alpha > 1/2, |omega(j)| <= 1.
// The cell [0, 1) carries no potential.

#include <cstdint>
#include <vector>

#include "clockspec/amplitudes.hpp"
#include "clockspec/common.hpp"

namespace clockspec::potential {

struct SiteProfile {
    enum class Kind {
        Indicator,  // f == 1 on [0, 1)
        Bump,       // f(x) = 16 x^2 (1-x)^2, C^1 with f(0) = f(1) = 0
        Table       // piecewise constant on a uniform subdivision of [0, 1)
    };

    Kind kind = Kind::Indicator;
    std::vector<double> table;

    static SiteProfile indicator();
    static SiteProfile bump();
    static SiteProfile piecewise(std::vector<double> values);

    // f(x); zero outside [0, 1).
    double value(double x) const;

    double sup_norm() const;

    // Exact transfer across a cell is available iff f is piecewise constant.
    bool piecewise_constant() const { return kind != Kind::Bump; }

    // Constant segments (value, length) covering the unit cell, for the
    // piecewise-constant kinds.
    std::vector<std::pair<double, double>> segments() const;
};

struct PotentialModel {
    enum class Mode { Standard, DecayingCoupling };

    double alpha = 0.75;
    SiteProfile profile;
    amplitudes::AmplitudeSpec amplitudes;
    Mode mode = Mode::Standard;

    static PotentialModel make(double alpha, SiteProfile profile,
                               amplitudes::AmplitudeSpec amps,
                               Mode mode = Mode::Standard);
};

// c_j for cell [j, j+1); j >= 1.
double cell_coefficient(const PotentialModel& model, long j, long n, double omega_j);

// One realization of the potential on [0, n], with all cell coefficients
// materialized so that repeated evaluations (e.g. a bisection sweep in
// kappa) reuse the same draw.
struct RealizedPotential {
    long n = 0;
    SiteProfile profile;
    std::vector<double> coeff;  // index j = 0..n-1, coeff[0] == 0
    double envelope = 0.0;      // sup_t |V(t)| bound: max_j |c_j| * ||f||_inf

    double value(double t) const;  // V(t), t in [0, n]
};

RealizedPotential realize(const PotentialModel& model, long n, std::uint64_t seed,
                          std::uint64_t realization);

// Synthetic realization from explicit coefficients (tests, oracles).
RealizedPotential realize_from_coefficients(SiteProfile profile, std::vector<double> coeff);

// Point evaluation of one realization (debug convenience).
double evaluate(const PotentialModel& model, double t, long n, std::uint64_t seed,
                std::uint64_t realization);

}  // namespace clockspec::potential
