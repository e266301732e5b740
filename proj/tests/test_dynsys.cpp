#include <doctest.h>

#include <cmath>
#include <vector>

#include "clockspec/common.hpp"
#include "clockspec/dynsys.hpp"
#include "clockspec/rng.hpp"

using namespace clockspec;
using dynsys::BitSystem;
using dynsys::BitWord;
using dynsys::FixedPointT2;
using dynsys::Observable;

namespace {

// Word with fully pinned bits over the whole range a 53-bit read can touch,
// so geometric coordinates are exact.  One-sided words only hold indices
// >= 0; two-sided words pin [-60, 59].
BitWord pinned_word(const std::vector<std::pair<long, int>>& ones, bool two_sided) {
    const long first = two_sided ? -60 : 0;
    std::vector<int> bits(120, 0);
    for (const auto& [idx, v] : ones) bits[static_cast<std::size_t>(idx - first)] = v;
    return BitWord::from_bits(bits, first, two_sided, /*tail_key=*/99);
}

}  // namespace

TEST_CASE("dyadic_fraction reads bit blocks as binary fractions") {
    const BitWord w = pinned_word({{0, 1}, {2, 1}}, false);  // 1,0,1,0,...
    CHECK(dynsys::dyadic_fraction(w, 0, 3) == 0.625);  // 0.101
    CHECK(dynsys::dyadic_fraction(w, 1, 2) == 0.25);   // 0.01
    CHECK(dynsys::dyadic_fraction(w, 3, 4) == 0.0);
}

TEST_CASE("dyadic_step is the binary shift") {
    BitWord w = pinned_word({{0, 1}, {2, 1}}, false);
    dynsys::dyadic_step(w);
    CHECK(w.bit(0) == 0);
    CHECK(w.bit(1) == 1);
    CHECK(dynsys::dyadic_fraction(w, 0, 2) == 0.25);
}

TEST_CASE("baker coordinates and one baker step") {
    // x = 0.101... = 0.625, y = 0.101... = 0.625
    BitWord w = pinned_word({{0, 1}, {2, 1}, {-1, 1}, {-3, 1}}, true);
    CHECK(dynsys::baker_x(w) == 0.625);
    CHECK(dynsys::baker_y(w) == 0.625);
    dynsys::baker_step(w);
    // x' = {2x} = 0.25, y' = (y + old w_0)/2 = 0.8125
    CHECK(dynsys::baker_x(w) == 0.25);
    CHECK(dynsys::baker_y(w) == 0.8125);
}

TEST_CASE("cylinder diameters are exact powers of two") {
    for (int depth = 1; depth <= 40; ++depth) {
        const auto d = dynsys::cylinder_diameter(BitSystem::Dyadic, depth);
        CHECK(d.x_diam == std::ldexp(1.0, -depth));
        CHECK(d.y_diam == 0.0);
        const auto b = dynsys::cylinder_diameter(BitSystem::Baker, depth);
        CHECK(b.x_diam == std::ldexp(1.0, -(depth + 1)));
        CHECK(b.y_diam == std::ldexp(1.0, -depth));
    }
    CHECK_THROWS_AS(dynsys::cylinder_diameter(BitSystem::Dyadic, 0), ConfigError);
    CHECK_THROWS_AS(dynsys::cylinder_diameter(BitSystem::Dyadic, 61), ConfigError);
}

TEST_CASE("bit-table observables index patterns most-significant-first") {
    // hw = 1, one-sided: pattern = 2*bit(0) + bit(1), f = pattern / 4.
    const auto obs = Observable::bit_table_one_sided(1, {0.0, 0.25, 0.5, 0.75});
    CHECK(obs.eval(pinned_word({}, false)) == 0.0);
    CHECK(obs.eval(pinned_word({{1, 1}}, false)) == 0.25);
    CHECK(obs.eval(pinned_word({{0, 1}}, false)) == 0.5);
    CHECK(obs.eval(pinned_word({{0, 1}, {1, 1}}, false)) == 0.75);
    CHECK_THROWS_AS(Observable::bit_table_one_sided(2, {0.0, 1.0}), ConfigError);
}

TEST_CASE("constant and fraction observables") {
    const auto c = Observable::constant_obs(0.375);
    CHECK(c.eval(pinned_word({{0, 1}}, false)) == 0.375);
    const auto f = Observable::fraction();
    CHECK(f.eval(pinned_word({{0, 1}, {2, 1}}, false)) == 0.625);
}

TEST_CASE("variation estimates match the exact variation of a bit table") {
    const auto obs = Observable::bit_table_one_sided(1, {0.0, 0.25, 0.5, 0.75});
    // Window covers every bit the table reads: variation is exactly zero.
    CHECK(dynsys::variation_estimate(obs, BitSystem::Dyadic, 0, 1, 200, 5) == 0.0);
    // Bit 1 free: |df| = 1/4; bit 0 free: |df| = 1/2 + 1/4 at most but the
    // window [1,1] frees only bit 0 (weight 1/2).
    CHECK(dynsys::variation_estimate(obs, BitSystem::Dyadic, 0, 0, 200, 5) == 0.25);
    CHECK(dynsys::variation_estimate(obs, BitSystem::Dyadic, 1, 1, 200, 5) == 0.5);
    // Window misses both bits entirely: full oscillation 3/4.
    CHECK(dynsys::variation_estimate(obs, BitSystem::Dyadic, 5, 5, 200, 5) == 0.75);
    CHECK_THROWS_AS(dynsys::variation_estimate(obs, BitSystem::Dyadic, 3, 1, 10, 5),
                    ConfigError);
    CHECK_THROWS_AS(dynsys::variation_estimate(obs, BitSystem::Dyadic, -2, 1, 10, 5),
                    ConfigError);
}

TEST_CASE("rational cat orbit has period two at (1/5, 2/5)") {
    auto p = FixedPointT2::from_rational(1, 5, 2, 5, 256);
    CHECK(p.x() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(p.y() == doctest::Approx(0.4).epsilon(1e-14));
    p.cat_step();
    CHECK(p.x() == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(p.y() == doctest::Approx(0.6).epsilon(1e-14));
    p.cat_step();
    CHECK(p.x() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(p.y() == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(p.steps_taken() == 2);
    CHECK(p.remaining_bits() == 256 - 2 * FixedPointT2::CAT_STEP_COST_BITS);
}

TEST_CASE("cat steps consume a fixed precision budget and then fail loudly") {
    FixedPointT2 p(8);
    for (int i = 0; i < 4; ++i) p.cat_step();
    CHECK(p.remaining_bits() == 0);
    CHECK_THROWS_AS(p.cat_step(), NumericError);
    CHECK(p.steps_taken() == 4);
}

TEST_CASE("random cat points are reproducible functions of the key") {
    const auto a = FixedPointT2::random(rng::stream_key(1, 21, 0), 512);
    const auto b = FixedPointT2::random(rng::stream_key(1, 21, 0), 512);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    const auto c = FixedPointT2::random(rng::stream_key(2, 21, 0), 512);
    CHECK(a.x() != c.x());
}

TEST_CASE("rectangle evaluation sums matching boxes, half-open") {
    const std::vector<dynsys::TorusRect> rects = {{0.0, 0.5, 0.0, 1.0, 1.0},
                                                  {0.25, 0.75, 0.0, 1.0, 0.5}};
    dynsys::validate_rects(rects);
    CHECK(dynsys::eval_rects(rects, 0.1, 0.5) == 1.0);
    CHECK(dynsys::eval_rects(rects, 0.3, 0.5) == 1.5);
    CHECK(dynsys::eval_rects(rects, 0.5, 0.5) == 0.5);  // x0 inclusive, x1 exclusive
    CHECK(dynsys::eval_rects(rects, 0.9, 0.5) == 0.0);
    CHECK_THROWS_AS(dynsys::validate_rects({{0.5, 0.5, 0.0, 1.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(dynsys::validate_rects({{0.0, 0.5, 0.0, 1.0, 1.5}}), ConfigError);
}
