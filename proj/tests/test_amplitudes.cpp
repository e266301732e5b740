#include <doctest.h>

#include <cmath>
#include <vector>

#include "clockspec/amplitudes.hpp"
#include "clockspec/common.hpp"
#include "clockspec/dynsys.hpp"

using namespace clockspec;
using amplitudes::AmplitudeSpec;
using amplitudes::AmplitudeStream;

TEST_CASE("zero amplitudes vanish and are flagged degenerate") {
    const auto spec = AmplitudeSpec::zero();
    for (double v : amplitudes::sample_sequence(spec, 3, 0, 64)) CHECK(v == 0.0);
    const auto corr = amplitudes::empirical_correlation(spec, 3, 8, 128, 4);
    for (const auto& lc : corr) CHECK(lc.degenerate);
}

TEST_CASE("iid uniform amplitudes: range, determinism, independence across keys") {
    const auto spec = AmplitudeSpec::iid_uniform();
    const auto a = amplitudes::sample_sequence(spec, 1, 0, 2000);
    const auto b = amplitudes::sample_sequence(spec, 1, 0, 2000);
    const auto c = amplitudes::sample_sequence(spec, 1, 1, 2000);
    const auto d = amplitudes::sample_sequence(spec, 2, 0, 2000);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a != d);
    double mean = 0.0;
    for (double v : a) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
        mean += v;
    }
    mean /= static_cast<double>(a.size());
    // std of the mean is sqrt(1/3/2000) ~ 0.013
    CHECK(std::fabs(mean) < 0.07);
}

TEST_CASE("rademacher amplitudes take both signs and nothing else") {
    const auto spec = AmplitudeSpec::iid_rademacher();
    int plus = 0, minus = 0;
    for (double v : amplitudes::sample_sequence(spec, 5, 0, 1000)) {
        if (v == 1.0)
            ++plus;
        else if (v == -1.0)
            ++minus;
        else
            FAIL("rademacher value outside {-1, +1}");
    }
    CHECK(plus > 300);
    CHECK(minus > 300);
}

TEST_CASE("markov chain: spec validation") {
    using M = std::vector<std::vector<double>>;
    CHECK_THROWS_AS(AmplitudeSpec::markov_chain(M{}, {}, {}), ConfigError);
    CHECK_THROWS_AS(
        AmplitudeSpec::markov_chain(M{{0.5, 0.4}, {0.2, 0.8}}, {1, -1}, {0.5, 0.5}),
        ConfigError);
    CHECK_THROWS_AS(
        AmplitudeSpec::markov_chain(M{{0.5, 0.5}, {0.2, 0.8}}, {2, -1}, {0.5, 0.5}),
        ConfigError);
    CHECK_THROWS_AS(
        AmplitudeSpec::markov_chain(M{{0.5, 0.5}, {0.2, 0.8}}, {1, -1}, {0.4, 0.5}),
        ConfigError);
}

TEST_CASE("markov chain: random access agrees with sequential generation") {
    const auto spec = AmplitudeSpec::markov_chain({{0.8, 0.2}, {0.2, 0.8}}, {1.0, -1.0},
                                                  {0.5, 0.5});
    const auto seq = amplitudes::sample_sequence(spec, 11, 4, 50);
    AmplitudeStream s(spec, 11, 4);
    CHECK(s.value(50) == seq[49]);
    CHECK(s.value(7) == seq[6]);  // rewind restarts deterministically
    CHECK(s.value(8) == seq[7]);
    CHECK_THROWS_AS(s.value(0), ConfigError);
}

TEST_CASE("symmetric two-state chain has geometric covariance (2p-1)^k") {
    const double p = 0.8;
    const auto spec = AmplitudeSpec::markov_chain({{p, 1 - p}, {1 - p, p}}, {1.0, -1.0},
                                                  {0.5, 0.5});
    const auto corr = amplitudes::empirical_correlation(spec, 9, 64, 4096, 6);
    REQUIRE(corr.size() == 7);
    for (int k = 0; k <= 5; ++k) {
        const auto& lc = corr[static_cast<std::size_t>(k)];
        CHECK(!lc.degenerate);
        const double expect = std::pow(2 * p - 1, k);
        CHECK(std::fabs(lc.corr - expect) < 5 * lc.stderr_ + 0.01);
    }
    const auto fit = amplitudes::fit_decay_rate(corr);
    CHECK(fit.measurable);
    CHECK(fit.rho == doctest::Approx(-std::log(2 * p - 1)).epsilon(0.10));
}

TEST_CASE("decay-rate fit recovers an exact exponential") {
    std::vector<amplitudes::LagCorrelation> corr;
    for (int k = 0; k <= 10; ++k)
        corr.push_back({k, std::exp(-0.5 * k), 1e-9, false});
    const auto fit = amplitudes::fit_decay_rate(corr);
    CHECK(fit.measurable);
    CHECK(fit.lags_used == 10);
    CHECK(fit.rho == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.rho_stderr < 1e-8);
}

TEST_CASE("decay-rate fit refuses to extrapolate from fewer than three lags") {
    std::vector<amplitudes::LagCorrelation> corr = {
        {0, 1.0, 1e-3, false}, {1, 0.1, 1e-3, false}, {2, 0.05, 1e-3, false},
        {3, 1e-9, 1e-3, false}, {4, 0.0, 1e-3, false}};
    const auto fit = amplitudes::fit_decay_rate(corr);
    CHECK(!fit.measurable);
    CHECK(fit.lags_used == 2);
}

TEST_CASE("cosine-dyadic amplitudes: bounded, and E[w1^2 w2] = 1/4") {
    const auto spec = AmplitudeSpec::cosine_dyadic();
    for (double v : amplitudes::sample_sequence(spec, 13, 0, 500)) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    const auto m = amplitudes::third_moment_12(spec, 13, 200000);
    CHECK(std::fabs(m.mean - 0.25) < 5 * m.stderr_ + 1e-12);
    CHECK(std::fabs(m.mean - 0.25) < 0.01);
}

TEST_CASE("dyadic-observable amplitudes follow the doubling map") {
    const auto spec = AmplitudeSpec::dyadic_observable(dynsys::Observable::fraction());
    const auto x = amplitudes::sample_sequence(spec, 17, 0, 200);
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        CHECK(x[j] >= 0.0);
        CHECK(x[j] < 1.0);
        const double doubled = 2 * x[j] - std::floor(2 * x[j]);
        CHECK(std::fabs(doubled - x[j + 1]) <= std::ldexp(1.0, -50));
    }
    CHECK_THROWS_AS(AmplitudeSpec::dyadic_observable(
                        dynsys::Observable::bit_table_two_sided(1, std::vector<double>(8, 0.0))),
                    ConfigError);
}

TEST_CASE("baker-observable amplitudes draw from the table alphabet") {
    const auto obs = dynsys::Observable::bit_table_two_sided(
        1, {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875});
    const auto spec = AmplitudeSpec::baker_observable(obs);
    for (double v : amplitudes::sample_sequence(spec, 19, 0, 200)) {
        CHECK(v >= 0.0);
        CHECK(v <= 0.875);
        CHECK(std::fabs(v * 8 - std::round(v * 8)) == 0.0);
    }
    CHECK_THROWS_AS(AmplitudeSpec::baker_observable(
                        dynsys::Observable::bit_table_one_sided(1, std::vector<double>(4, 0.0))),
                    ConfigError);
}

TEST_CASE("cat-map amplitudes: determinism and precision budget") {
    const std::vector<dynsys::TorusRect> rects = {{0.0, 0.5, 0.0, 1.0, 1.0}};
    CHECK_THROWS_AS(AmplitudeSpec::cat_map_observable(rects, 32), ConfigError);
    const auto spec = AmplitudeSpec::cat_map_observable(rects, 300);
    const auto a = amplitudes::sample_sequence(spec, 23, 0, 150);
    const auto b = amplitudes::sample_sequence(spec, 23, 0, 150);
    CHECK(a == b);
    for (double v : a) CHECK((v == 0.0 || v == 1.0));
    // 150 steps spend the whole 300-bit budget; one more step must fail loudly.
    CHECK_THROWS_AS(amplitudes::sample_sequence(spec, 23, 0, 151), NumericError);
}

TEST_CASE("correlation estimator: argument validation and noise scaling") {
    const auto spec = AmplitudeSpec::iid_uniform();
    CHECK_THROWS_AS(amplitudes::empirical_correlation(spec, 1, 1, 64, 2), ConfigError);
    CHECK_THROWS_AS(amplitudes::empirical_correlation(spec, 1, 8, 64, 64), ConfigError);
    const auto small = amplitudes::empirical_correlation(spec, 29, 64, 256, 2);
    const auto large = amplitudes::empirical_correlation(spec, 29, 256, 256, 2);
    // c(0) estimates Var = 1/3.
    CHECK(small[0].corr == doctest::Approx(1.0 / 3.0).epsilon(0.15));
    // Standard errors shrink like 1/sqrt(realizations).
    const double ratio = small[1].stderr_ / large[1].stderr_;
    CHECK(ratio > 1.4);
    CHECK(ratio < 2.9);
}
