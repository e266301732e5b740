#pragma once

// Dirichlet eigenvalues of the truncated operator on [0, n] via Sturm
// oscillation: theta_n(kappa) crosses k*pi exactly at the k-th eigenvalue
// parameter kappa_k = sqrt(E_k).  The rescaled point process has atoms
// n (kappa_k - kappa_0), and the Laplace functional of that process has an
// equivalent representation through the relative phase
// Theta(c) = theta_n(kappa_0 + c/n) - theta_n(kappa_0).

#include <cstdint>
#include <vector>

#include "clockspec/common.hpp"
#include "clockspec/potential.hpp"
#include "clockspec/prufer.hpp"

namespace clockspec::spectrum {

struct RootConfig {
    double c_margin = 1.0;        // scan margin beyond c_max, in rescaled units
    double rel_tol = 1e-12;       // bisection bracket width: rel_tol * kappa0
    double residual_tol = 1e-7;   // |theta(kappa_k) - k pi| acceptance
    int max_subdivide = 12;       // non-monotone scan refinement depth
};

std::int64_t oscillation_count(const potential::RealizedPotential& pot, double kappa,
                               const prufer::IntegratorConfig& cfg);

// Root of theta_n(kappa) = k*pi inside [klo, khi]; requires the oscillation
// count to cross k on that bracket.
double locate_eigenvalue(const potential::RealizedPotential& pot, std::int64_t k, double klo,
                         double khi, const prufer::IntegratorConfig& cfg,
                         const RootConfig& rc = {});

struct Atom {
    std::int64_t k = 0;      // oscillation index: theta_n(kappa) = k*pi
    std::int64_t label = 0;  // index relative to kappa0: label >= 1 iff kappa > kappa0
    double kappa = 0.0;
    double c = 0.0;          // rescaled coordinate n (kappa - kappa0)
};

struct EigenvalueWindow {
    double kappa0 = 0.0;
    long n = 0;
    double c_max = 0.0;
    std::int64_t base_count = 0;  // floor(theta_n(kappa0)/pi)
    double frac_phase = 0.0;      // {theta_n(kappa0)}_pi in [0, pi)
    std::vector<Atom> atoms;      // sorted by kappa, |c| <= c_max
    int anomalies = 0;            // non-monotone scan artifacts encountered
};

EigenvalueWindow eigenvalue_window(const potential::RealizedPotential& pot, double kappa0,
                                   double c_max, const prufer::IntegratorConfig& cfg,
                                   const RootConfig& rc = {});

// Theta(c) = theta_n(kappa0 + c/n) - theta_n(kappa0), exact-difference form.
double relative_phase(const potential::RealizedPotential& pot, double kappa0, double c,
                      const prufer::IntegratorConfig& cfg);

struct ThetaSample {
    double c = 0.0;
    double Theta = 0.0;
    double dTheta_dc = 0.0;  // (d theta / d kappa) / n, exact accumulator value
};

// Theta and its exact derivative on a c-grid (one integration per point).
std::vector<ThetaSample> theta_grid(const potential::RealizedPotential& pot, double kappa0,
                                    const std::vector<double>& cs,
                                    const prufer::IntegratorConfig& cfg);

// Smooth compactly supported test function
//   g(x) = amplitude * exp(1 - 1/(1 - u^2)),  u = (x - center)/half_width,
// for |u| < 1 and 0 outside.
struct TestFunction {
    double amplitude = 1.0;
    double half_width = 1.0;
    double center = 0.0;

    static TestFunction bump(double amplitude, double half_width, double center = 0.0);

    double operator()(double x) const;
    double support_lo() const { return center - half_width; }
    double support_hi() const { return center + half_width; }
};

// sum over the integer lattice: sum_j g(j*pi - phi).
double lattice_sum(const TestFunction& g, double phi);

// exp(-sum_atoms g(atom)); g must be supported inside [-c_max, c_max].
double laplace_direct(const EigenvalueWindow& win, const TestFunction& g);

// Same functional evaluated through the relative phase: atoms are the
// solutions of Theta(c) = j*pi - frac_phase, recovered by inverting a
// monotone cubic interpolant of Theta on the grid.
double laplace_from_phase(const std::vector<ThetaSample>& grid, double frac_phase,
                          const TestFunction& g);

// Monotone C^1 cubic Hermite interpolant with a Fritsch-Carlson slope
// limiter; invertible on its range.
class MonotoneCubic {
  public:
    static MonotoneCubic build(std::vector<double> x, std::vector<double> y,
                               std::vector<double> dydx);
    double eval(double x) const;
    double inverse(double y) const;
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    double y_front() const { return y_.front(); }
    double y_back() const { return y_.back(); }

  private:
    std::vector<double> x_, y_, d_;
};

}  // namespace clockspec::spectrum
