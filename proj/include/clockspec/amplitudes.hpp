#pragma once

// Amplitude sequences omega(1), omega(2), ... feeding the random decaying
// potential.  All sources are bounded by 1 and driven by counter-based
// streams keyed on (seed, realization), so any realization can be
// (re)generated independently of consumption order or batching.

#include <cstdint>
#include <vector>

#include "clockspec/common.hpp"
#include "clockspec/dynsys.hpp"

namespace clockspec::amplitudes {

struct AmplitudeSpec {
    enum class Kind {
        Zero,            // omega == 0 (free field)
        IidUniform,      // iid uniform on [-1, 1]
        IidRademacher,   // iid +/-1
        MarkovChain,     // finite-state chain, values per state
        DyadicObservable,
        BakerObservable,
        CatMapObservable,
        CosineDyadic     // omega(j) = cos(2 pi {2^j theta}), theta uniform
    };

    Kind kind = Kind::Zero;

    // MarkovChain
    std::vector<std::vector<double>> transition;  // row-stochastic
    std::vector<double> values;                   // in [-1, 1]
    std::vector<double> initial;                  // probability vector

    // Dyadic/Baker observables
    dynsys::Observable observable;

    // CatMapObservable
    std::vector<dynsys::TorusRect> rectangles;
    int precision_bits = 0;

    static AmplitudeSpec zero();
    static AmplitudeSpec iid_uniform();
    static AmplitudeSpec iid_rademacher();
    static AmplitudeSpec cosine_dyadic();
    static AmplitudeSpec markov_chain(std::vector<std::vector<double>> transition,
                                      std::vector<double> values,
                                      std::vector<double> initial);
    static AmplitudeSpec dyadic_observable(dynsys::Observable obs);
    static AmplitudeSpec baker_observable(dynsys::Observable obs);
    static AmplitudeSpec cat_map_observable(std::vector<dynsys::TorusRect> rects,
                                            int precision_bits);
};

// Stateful generator for one realization.  Sequential access is O(1) per
// value; random access restarts deterministically where necessary.
class AmplitudeStream {
  public:
    AmplitudeStream(const AmplitudeSpec& spec, std::uint64_t seed,
                    std::uint64_t realization);

    // omega(j), j >= 1.
    double value(long j);

  private:
    const AmplitudeSpec* spec_;
    std::uint64_t key_ = 0;

    // Markov chain state
    long markov_pos_ = 0;  // index of current state (0 = not started)
    int markov_state_ = 0;

    // CosineDyadic rolling 53-bit mantissa of {2^j theta}
    long cos_pos_ = 0;
    std::uint64_t cos_mant_ = 0;

    // Cat map orbit
    dynsys::FixedPointT2 cat_point_{8};
    long cat_pos_ = 0;

    void markov_restart();
    void markov_advance();
};

// omega(1..n) for one realization.
std::vector<double> sample_sequence(const AmplitudeSpec& spec, std::uint64_t seed,
                                    std::uint64_t realization, long n);

struct LagCorrelation {
    int lag = 0;
    double corr = 0.0;
    double stderr_ = 0.0;
    bool degenerate = false;  // variance of the sequence is (numerically) zero
};

// Monte Carlo autocovariance of the centered sequence: for each lag k the
// average over positions and realizations of (omega(j)-mu)(omega(j+k)-mu),
// with mu the empirical mean over all samples.  The standard error is the
// spread of per-realization estimates.
std::vector<LagCorrelation> empirical_correlation(const AmplitudeSpec& spec,
                                                  std::uint64_t seed, int realizations,
                                                  long n, int max_lag);

// Monte Carlo estimate of E[omega(1)^2 omega(2)] (mean, stderr).
struct MomentEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};
MomentEstimate third_moment_12(const AmplitudeSpec& spec, std::uint64_t seed,
                               int realizations);

struct DecayFit {
    bool measurable = false;  // false: fewer than 3 lags rise above the noise floor
    double rho = 0.0;         // fitted decay rate of |c(k)| ~ exp(-rho k)
    double rho_stderr = 0.0;
    int lags_used = 0;
};

// Least-squares fit of log|c(k)| against k over lags k >= 1 whose |c(k)|
// exceeds the noise floor of 3 standard errors.
DecayFit fit_decay_rate(const std::vector<LagCorrelation>& correlations);

}  // namespace clockspec::amplitudes
