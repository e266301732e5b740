#pragma once

// Monte Carlo experiment harness: clock gaps, relative-phase convergence,
// Hoelder continuity of J, dyadic moment decay, the Laplace-functional
// comparison, correlation fits, and diagnostic dumps.  Every runner maps
// over realizations (optionally in parallel), reduces in realization order,
// and emits a Report with explicit pass/fail gates.

#include <cstdint>
#include <utility>
#include <vector>

#include "clockspec/amplitudes.hpp"
#include "clockspec/dynsys.hpp"
#include "clockspec/potential.hpp"
#include "clockspec/prufer.hpp"
#include "clockspec/report.hpp"
#include "clockspec/spectrum.hpp"

namespace clockspec::stats {

struct RunConfig {
    std::uint64_t seed = 1;
    int realizations = 100;
    prufer::IntegratorConfig integrator;
    int workers = 1;
};

// ---------------------------------------------------------------- helpers

double median(std::vector<double> v);

struct MeanErr {
    double mean = 0.0;
    double stderr_ = 0.0;
};
MeanErr mean_stderr(const std::vector<double>& v);

struct LineFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    int points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Lengths n with {kappa0 * n}_pi close to beta: per block of `stride`
// integers the defect-minimizing n, kept while defects are non-increasing
// and below pi/4.
struct SubseqEntry {
    long n = 0;
    double defect = 0.0;
};
std::vector<SubseqEntry> subsequence_S(double kappa0, double beta, int count, long stride,
                                       long limit);

// ------------------------------------------------------------- experiments

struct ClockParams {
    double kappa0 = 1.0;
    std::vector<long> n_values = {500, 1000, 2000, 5000};
    double c_max = 15.0;
    double gate_median_max = 0.1;
    double exact_floor = 1e-9;  // exactness allowance for free rows / monotone gate
    bool free_control = true;
};
report::Report run_clock(const potential::PotentialModel& model, const RunConfig& run,
                         const ClockParams& p);

struct ThetaParams {
    double kappa0 = 1.0;
    std::vector<long> n_values = {500, 5000};
    double c_max = 10.0;
    double c_step = 0.5;
    double gate_sup_median_max = 0.15;
    double exact_floor = 1e-9;
    bool free_control = true;
    bool require_decreasing = true;
};
report::Report run_theta(const potential::PotentialModel& model, const RunConfig& run,
                         const ThetaParams& p);

struct HolderParams {
    double kappa0 = 1.0;
    std::vector<double> delta_kappas = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    long m = 50;
    long N = 2000;
    double gate_slope_min = 0.4;
    double gate_slope_stderr_max = 0.1;
    bool free_control = true;
};
report::Report run_holder(const potential::PotentialModel& model, const RunConfig& run,
                          const HolderParams& p);

struct MomentParams {
    double kappa0 = 1.0;
    int k_min = 4;
    int k_max = 9;
    bool free_control = true;
};
report::Report run_moments(const potential::PotentialModel& model, const RunConfig& run,
                           const MomentParams& p);

struct LaplaceParams {
    double kappa0 = 1.0;
    std::vector<long> n_values;  // explicit lengths; used when subseq_count == 0
    double beta = 0.0;           // lattice-phase target in [0, pi)
    int subseq_count = 0;        // > 0: derive lengths from the subsequence rule
    long subseq_stride = 200;
    long subseq_limit = 100000;
    spectrum::TestFunction g = spectrum::TestFunction::bump(1.0, 6.0);
    double c_max = 8.0;
    double grid_pad = 0.05;   // phase grid covers [-(c_max+pad), c_max+pad]
    double grid_step = 0.05;
    double identity_tol = 1e-6;
    double diff_nsigma = 3.0;
    int histogram_bins = 16;
    double exact_floor = 1e-9;
    bool free_control = true;
};
report::Report run_laplace(const potential::PotentialModel& model, const RunConfig& run,
                           const LaplaceParams& p);

struct CorrParams {
    long length = 4096;
    int max_lag = 40;
    double expected_rho = 0.0;  // > 0: gate |rho_hat - expected| / expected
    double rho_rel_tol = 0.1;
};
report::Report run_corr(const amplitudes::AmplitudeSpec& spec, const RunConfig& run,
                        const CorrParams& p);

struct VariationCheck {
    dynsys::BitSystem system = dynsys::BitSystem::Dyadic;
    dynsys::Observable observable;
    std::vector<std::pair<long, long>> windows;
    int samples = 200;
};
struct CatCheck {
    int steps = 1000;
    int precision_bits = 2064;
    std::vector<dynsys::TorusRect> rectangles;
    long length = 512;
    int max_lag = 40;
    int lag_floor = 30;
    int realizations = 32;
    double noise_nsigma = 3.0;
};
struct DynsysParams {
    int max_depth = 20;
    bool have_variation = false;
    VariationCheck variation;
    bool have_cat = false;
    CatCheck cat;
};
report::Report run_dynsys(const RunConfig& run, const DynsysParams& p);

struct SpectrumParams {
    double kappa0 = 1.0;
    long n = 500;
    double c_max = 10.0;
    double c_step = 0.5;
    std::uint64_t realization = 0;
};
report::Report run_spectrum_dump(const potential::PotentialModel& model, const RunConfig& run,
                                 const SpectrumParams& p);

struct PhaseDumpParams {
    double kappa0 = 1.0;
    long n = 200;
    std::uint64_t realization = 0;
};
report::Report run_phase_dump(const potential::PotentialModel& model, const RunConfig& run,
                              const PhaseDumpParams& p);

}  // namespace clockspec::stats
