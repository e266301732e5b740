#include "clockspec/amplitudes.hpp"

#include <cmath>
#include <cstdio>

#include "clockspec/rng.hpp"

namespace clockspec::amplitudes {

// ------------------------------------------------------------ validation

static void check_probability_vector(const std::vector<double>& p, const char* what) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw ConfigError(std::string(what) + ": negative entry");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw ConfigError(std::string(what) + ": entries must sum to 1 within 1e-12");
}

AmplitudeSpec AmplitudeSpec::zero() {
    AmplitudeSpec s;
    s.kind = Kind::Zero;
    return s;
}

AmplitudeSpec AmplitudeSpec::iid_uniform() {
    AmplitudeSpec s;
    s.kind = Kind::IidUniform;
    return s;
}

AmplitudeSpec AmplitudeSpec::iid_rademacher() {
    AmplitudeSpec s;
    s.kind = Kind::IidRademacher;
    return s;
}

AmplitudeSpec AmplitudeSpec::cosine_dyadic() {
    AmplitudeSpec s;
    s.kind = Kind::CosineDyadic;
    return s;
}

AmplitudeSpec AmplitudeSpec::markov_chain(std::vector<std::vector<double>> transition,
                                          std::vector<double> values,
                                          std::vector<double> initial) {
    const std::size_t m = transition.size();
    if (m == 0) throw ConfigError("MarkovChain: empty transition matrix");
    for (const auto& row : transition) {
        if (row.size() != m) throw ConfigError("MarkovChain: transition matrix must be square");
        check_probability_vector(row, "MarkovChain transition row");
    }
    if (values.size() != m)
        throw ConfigError("MarkovChain: need one value per state");
    for (double v : values)
        if (!(std::fabs(v) <= 1.0))
            throw ConfigError("MarkovChain: state values must lie in [-1, 1]");
    if (initial.size() != m)
        throw ConfigError("MarkovChain: initial distribution size mismatch");
    check_probability_vector(initial, "MarkovChain initial distribution");
    AmplitudeSpec s;
    s.kind = Kind::MarkovChain;
    s.transition = std::move(transition);
    s.values = std::move(values);
    s.initial = std::move(initial);
    return s;
}

AmplitudeSpec AmplitudeSpec::dyadic_observable(dynsys::Observable obs) {
    if (obs.kind == dynsys::Observable::Kind::BitTable && obs.two_sided)
        throw ConfigError("DyadicObservable: table must be one-sided");
    AmplitudeSpec s;
    s.kind = Kind::DyadicObservable;
    s.observable = std::move(obs);
    return s;
}

AmplitudeSpec AmplitudeSpec::baker_observable(dynsys::Observable obs) {
    if (obs.kind == dynsys::Observable::Kind::BitTable && !obs.two_sided)
        throw ConfigError("BakerObservable: table must be two-sided");
    AmplitudeSpec s;
    s.kind = Kind::BakerObservable;
    s.observable = std::move(obs);
    return s;
}

AmplitudeSpec AmplitudeSpec::cat_map_observable(std::vector<dynsys::TorusRect> rects,
                                                int precision_bits) {
    dynsys::validate_rects(rects);
    if (precision_bits < 64)
        throw ConfigError("CatMapObservable: precision budget below 64 bits");
    AmplitudeSpec s;
    s.kind = Kind::CatMapObservable;
    s.rectangles = std::move(rects);
    s.precision_bits = precision_bits;
    return s;
}

// ---------------------------------------------------------------- stream

namespace {
constexpr std::uint64_t TAG_AMPLITUDE = 1;
constexpr std::uint64_t MASK53 = (1ull << 53) - 1;
}  // namespace

AmplitudeStream::AmplitudeStream(const AmplitudeSpec& spec, std::uint64_t seed,
                                 std::uint64_t realization)
    : spec_(&spec), key_(rng::stream_key(seed, TAG_AMPLITUDE, realization)) {
    if (spec.kind == AmplitudeSpec::Kind::CatMapObservable)
        cat_point_ = dynsys::FixedPointT2::random(key_, spec.precision_bits);
}

void AmplitudeStream::markov_restart() {
    // Initial state via inverse CDF of the initial distribution.
    const double u = rng::uniform01(key_, 0);
    double acc = 0.0;
    markov_state_ = static_cast<int>(spec_->initial.size()) - 1;
    for (std::size_t i = 0; i < spec_->initial.size(); ++i) {
        acc += spec_->initial[i];
        if (u < acc) {
            markov_state_ = static_cast<int>(i);
            break;
        }
    }
    markov_pos_ = 1;
}

void AmplitudeStream::markov_advance() {
    const double u = rng::uniform01(key_, static_cast<std::uint64_t>(markov_pos_));
    const auto& row = spec_->transition[static_cast<std::size_t>(markov_state_)];
    double acc = 0.0;
    int next = static_cast<int>(row.size()) - 1;
    for (std::size_t i = 0; i < row.size(); ++i) {
        acc += row[i];
        if (u < acc) {
            next = static_cast<int>(i);
            break;
        }
    }
    markov_state_ = next;
    ++markov_pos_;
}

double AmplitudeStream::value(long j) {
    if (j < 1) throw ConfigError("AmplitudeStream: indices start at 1");
    switch (spec_->kind) {
        case AmplitudeSpec::Kind::Zero:
            return 0.0;
        case AmplitudeSpec::Kind::IidUniform:
            return rng::uniform_pm1(key_, static_cast<std::uint64_t>(j));
        case AmplitudeSpec::Kind::IidRademacher:
            return rng::bit(key_, static_cast<std::uint64_t>(j)) ? 1.0 : -1.0;
        case AmplitudeSpec::Kind::MarkovChain: {
            if (markov_pos_ == 0 || j < markov_pos_) markov_restart();
            while (markov_pos_ < j) markov_advance();
            return spec_->values[static_cast<std::size_t>(markov_state_)];
        }
        case AmplitudeSpec::Kind::CosineDyadic: {
            // omega(j) = cos(2 pi x_j) where x_j holds bits j..j+52 of theta.
            if (cos_pos_ == 0 || j < cos_pos_) {
                cos_mant_ = 0;
                for (long i = 0; i < 53; ++i)
                    cos_mant_ = (cos_mant_ << 1) |
                                static_cast<std::uint64_t>(rng::bit(key_, static_cast<std::uint64_t>(j + i)));
                cos_pos_ = j;
            }
            while (cos_pos_ < j) {
                ++cos_pos_;
                cos_mant_ = ((cos_mant_ << 1) & MASK53) |
                            static_cast<std::uint64_t>(
                                rng::bit(key_, static_cast<std::uint64_t>(cos_pos_ + 52)));
            }
            const double x = std::ldexp(static_cast<double>(cos_mant_), -53);
            return std::cos(2.0 * PI * x);
        }
        case AmplitudeSpec::Kind::DyadicObservable:
        case AmplitudeSpec::Kind::BakerObservable: {
            const bool two = spec_->kind == AmplitudeSpec::Kind::BakerObservable;
            dynsys::BitWord w = two ? dynsys::BitWord::random_two_sided(key_)
                                    : dynsys::BitWord::random_one_sided(key_);
            w.shift(j);  // T^j
            return spec_->observable.eval(w);
        }
        case AmplitudeSpec::Kind::CatMapObservable: {
            if (j < cat_pos_) {  // deterministic restart
                cat_point_ = dynsys::FixedPointT2::random(key_, spec_->precision_bits);
                cat_pos_ = 0;
            }
            while (cat_pos_ < j) {
                cat_point_.cat_step();
                ++cat_pos_;
            }
            return dynsys::eval_rects(spec_->rectangles, cat_point_.x(), cat_point_.y());
        }
    }
    throw NumericError("AmplitudeStream: corrupt spec kind");
}

std::vector<double> sample_sequence(const AmplitudeSpec& spec, std::uint64_t seed,
                                    std::uint64_t realization, long n) {
    if (n < 0) throw ConfigError("sample_sequence: negative length");
    AmplitudeStream stream(spec, seed, realization);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long j = 1; j <= n; ++j) out.push_back(stream.value(j));
    return out;
}

// ---------------------------------------------------------- correlations

std::vector<LagCorrelation> empirical_correlation(const AmplitudeSpec& spec,
                                                  std::uint64_t seed, int realizations,
                                                  long n, int max_lag) {
    if (realizations < 2) throw ConfigError("empirical_correlation: need >= 2 realizations");
    if (max_lag < 0 || max_lag >= n)
        throw ConfigError("empirical_correlation: max_lag must satisfy 0 <= max_lag < n");

    const int L = max_lag + 1;
    const std::size_t R = static_cast<std::size_t>(realizations);
    // Per realization and lag: raw product mean and the two marginal means,
    // folded with the global mean afterwards:
    //   c_r(k) = E[xy] - mu (E[x]+E[y]) + mu^2.
    std::vector<double> sxy(R * static_cast<std::size_t>(L), 0.0);
    std::vector<double> sx(R * static_cast<std::size_t>(L), 0.0);
    std::vector<double> sy(R * static_cast<std::size_t>(L), 0.0);
    double grand_sum = 0.0;

    for (std::size_t r = 0; r < R; ++r) {
        const auto w = sample_sequence(spec, seed, r, n);
        for (double v : w) grand_sum += v;
        for (int k = 0; k < L; ++k) {
            const long count = n - k;
            double pxy = 0.0, px = 0.0, py = 0.0;
            for (long j = 0; j < count; ++j) {
                pxy += w[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j + k)];
                px += w[static_cast<std::size_t>(j)];
                py += w[static_cast<std::size_t>(j + k)];
            }
            const std::size_t idx = r * static_cast<std::size_t>(L) + static_cast<std::size_t>(k);
            sxy[idx] = pxy / static_cast<double>(count);
            sx[idx] = px / static_cast<double>(count);
            sy[idx] = py / static_cast<double>(count);
        }
    }

    const double mu = grand_sum / (static_cast<double>(R) * static_cast<double>(n));
    std::vector<LagCorrelation> out(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) {
        double mean = 0.0;
        std::vector<double> per_r(R);
        for (std::size_t r = 0; r < R; ++r) {
            const std::size_t idx = r * static_cast<std::size_t>(L) + static_cast<std::size_t>(k);
            per_r[r] = sxy[idx] - mu * (sx[idx] + sy[idx]) + mu * mu;
            mean += per_r[r];
        }
        mean /= static_cast<double>(R);
        double var = 0.0;
        for (double v : per_r) var += (v - mean) * (v - mean);
        var /= static_cast<double>(R - 1);
        out[static_cast<std::size_t>(k)].lag = k;
        out[static_cast<std::size_t>(k)].corr = mean;
        out[static_cast<std::size_t>(k)].stderr_ = std::sqrt(var / static_cast<double>(R));
    }
    // Degenerate (constant) sequences have no meaningful correlations.
    if (out[0].corr <= 1e-12) {
        for (auto& lc : out) {
            lc.degenerate = true;
            lc.corr = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

MomentEstimate third_moment_12(const AmplitudeSpec& spec, std::uint64_t seed,
                               int realizations) {
    if (realizations < 2) throw ConfigError("third_moment_12: need >= 2 realizations");
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < realizations; ++r) {
        AmplitudeStream stream(spec, seed, static_cast<std::uint64_t>(r));
        const double w1 = stream.value(1);
        const double w2 = stream.value(2);
        const double v = w1 * w1 * w2;
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / realizations;
    const double var = (sumsq - realizations * mean * mean) / (realizations - 1);
    return {mean, std::sqrt(std::max(var, 0.0) / realizations)};
}

DecayFit fit_decay_rate(const std::vector<LagCorrelation>& correlations) {
    std::vector<double> xs, ys;
    for (const auto& lc : correlations) {
        if (lc.lag < 1 || lc.degenerate) continue;
        const double floor = 3.0 * lc.stderr_;
        if (std::fabs(lc.corr) > floor && std::fabs(lc.corr) > 0.0) {
            xs.push_back(static_cast<double>(lc.lag));
            ys.push_back(std::log(std::fabs(lc.corr)));
        }
    }
    DecayFit fit;
    fit.lags_used = static_cast<int>(xs.size());
    if (xs.size() < 3) return fit;  // not measurable

    const double nn = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= nn;
    my /= nn;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = my + slope * (xs[i] - mx);
        ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    fit.measurable = true;
    fit.rho = -slope;
    fit.rho_stderr = (xs.size() > 2)
                         ? std::sqrt(ss_res / (nn - 2.0) / sxx)
                         : 0.0;
    return fit;
}

}  // namespace clockspec::amplitudes
