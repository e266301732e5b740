#include <doctest.h>

#include <cmath>
#include <vector>

#include "clockspec/common.hpp"
#include "clockspec/potential.hpp"
#include "clockspec/prufer.hpp"
#include "clockspec/spectrum.hpp"

using namespace clockspec;
using potential::SiteProfile;
using prufer::IntegratorConfig;
using spectrum::TestFunction;

namespace {

potential::RealizedPotential free_potential(long n) {
    return potential::realize_from_coefficients(SiteProfile::indicator(),
                                                std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

potential::RealizedPotential random_potential(long n, std::uint64_t seed,
                                              std::uint64_t realization) {
    const auto model = potential::PotentialModel::make(
        0.75, SiteProfile::indicator(), amplitudes::AmplitudeSpec::iid_uniform());
    return potential::realize(model, n, seed, realization);
}

}  // namespace

TEST_CASE("free-field oscillation counts are floor(n kappa / pi)") {
    const auto pot = free_potential(100);
    IntegratorConfig cfg;
    CHECK(spectrum::oscillation_count(pot, 1.0, cfg) == 31);   // floor(100/pi)
    CHECK(spectrum::oscillation_count(pot, 0.5, cfg) == 15);   // floor(50/pi)
    CHECK(spectrum::oscillation_count(pot, 0.02, cfg) == 0);
}

TEST_CASE("free-field eigenvalue window: exact lattice of atoms") {
    const auto pot = free_potential(314);
    IntegratorConfig cfg;
    const auto win = spectrum::eigenvalue_window(pot, 1.0, 10.0, cfg);
    CHECK(win.n == 314);
    CHECK(win.base_count == 99);
    CHECK(win.frac_phase == doctest::Approx(314.0 - 99.0 * PI).epsilon(1e-13));
    CHECK(win.anomalies == 0);
    REQUIRE(win.atoms.size() == 7);
    for (std::size_t i = 0; i < win.atoms.size(); ++i) {
        const auto& a = win.atoms[i];
        CHECK(a.k == 97 + static_cast<std::int64_t>(i));
        CHECK(a.label == a.k - 99);
        CHECK((a.label >= 1) == (a.kappa > 1.0));
        const double expect_c = static_cast<double>(a.k) * PI - 314.0;
        CHECK(std::fabs(a.c - expect_c) <= 1e-9);
        CHECK(a.c == doctest::Approx(314.0 * (a.kappa - 1.0)).epsilon(1e-12));
        CHECK(std::fabs(a.c) <= 10.0);
        if (i > 0) CHECK(a.kappa > win.atoms[i - 1].kappa);
    }
}

TEST_CASE("eigenvalue window argument validation") {
    const auto pot = free_potential(100);
    IntegratorConfig cfg;
    CHECK_THROWS_AS(spectrum::eigenvalue_window(pot, 0.0, 5.0, cfg), ConfigError);
    CHECK_THROWS_AS(spectrum::eigenvalue_window(pot, 1.0, 0.0, cfg), ConfigError);
    // Window [kappa0 - c_max/n, ...] dips below zero.
    CHECK_THROWS_AS(spectrum::eigenvalue_window(pot, 0.5, 60.0, cfg), ConfigError);
}

TEST_CASE("locate_eigenvalue hits free-field roots and rejects empty brackets") {
    const auto pot = free_potential(100);
    IntegratorConfig cfg;
    const double root = spectrum::locate_eigenvalue(pot, 32, 0.9, 1.1, cfg);
    CHECK(root == doctest::Approx(32.0 * PI / 100.0).epsilon(1e-12));
    CHECK_THROWS_AS(spectrum::locate_eigenvalue(pot, 50, 0.9, 1.1, cfg), ConfigError);
    CHECK_THROWS_AS(spectrum::locate_eigenvalue(pot, 32, -1.0, 1.1, cfg), ConfigError);
}

TEST_CASE("random-window atoms: Sturm crossings and phase residuals") {
    const auto pot = random_potential(200, 31, 0);
    IntegratorConfig cfg;
    const auto win = spectrum::eigenvalue_window(pot, 1.0, 8.0, cfg);
    REQUIRE(win.atoms.size() >= 3);
    for (const auto& a : win.atoms) {
        // Oscillation count jumps from k-1 to k across the root.
        CHECK(spectrum::oscillation_count(pot, a.kappa * (1.0 - 1e-10), cfg) < a.k);
        CHECK(spectrum::oscillation_count(pot, a.kappa * (1.0 + 1e-10), cfg) >= a.k);
        // Residual of the phase equation at the reported root.
        const auto out = prufer::integrate(pot, a.kappa, cfg, prufer::AccumLevel::PhaseOnly);
        const double resid = prufer::phase_diff(out.phase, prufer::PruferPhase{a.k, 0.0});
        CHECK(std::fabs(resid) <= 1e-7);
    }
}

TEST_CASE("an O(1e-8) potential perturbation moves roots by O(1e-8)") {
    const long n = 100;
    IntegratorConfig cfg;
    const auto base = spectrum::eigenvalue_window(free_potential(n), 1.0, 5.0, cfg);
    std::vector<double> coeff(static_cast<std::size_t>(n), 0.0);
    coeff[50] = 1e-8;
    const auto pert = potential::realize_from_coefficients(SiteProfile::indicator(), coeff);
    const auto moved = spectrum::eigenvalue_window(pert, 1.0, 5.0, cfg);
    REQUIRE(moved.atoms.size() == base.atoms.size());
    for (std::size_t i = 0; i < base.atoms.size(); ++i) {
        CHECK(moved.atoms[i].k == base.atoms[i].k);
        CHECK(std::fabs(moved.atoms[i].kappa - base.atoms[i].kappa) <= 1e-7);
    }
}

TEST_CASE("relative phase of the free field is the identity in c") {
    const auto pot = free_potential(500);
    IntegratorConfig cfg;
    CHECK(spectrum::relative_phase(pot, 1.0, 0.0, cfg) == 0.0);
    for (double c : {-7.3, -1.0, 0.5, 9.9}) {
        CHECK(std::fabs(spectrum::relative_phase(pot, 1.0, c, cfg) - c) <=
              1e-10 * (1.0 + std::fabs(c)));
    }
    CHECK_THROWS_AS(spectrum::relative_phase(pot, 1.0, -501.0, cfg), ConfigError);
}

TEST_CASE("theta grid carries exact derivatives") {
    const auto pot = free_potential(400);
    IntegratorConfig cfg;
    const std::vector<double> cs = {-4.0, -2.0, 0.0, 1.0, 3.5};
    const auto grid = spectrum::theta_grid(pot, 1.0, cs, cfg);
    REQUIRE(grid.size() == cs.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(grid[i].c == cs[i]);
        CHECK(std::fabs(grid[i].Theta - cs[i]) <= 1e-10 * (1.0 + std::fabs(cs[i])));
        CHECK(grid[i].dTheta_dc == doctest::Approx(1.0).epsilon(1e-13));
    }

    // Derivative agrees with finite differences on a random potential.
    const auto rp = random_potential(150, 37, 2);
    const auto g2 = spectrum::theta_grid(rp, 1.0, {2.0}, cfg);
    const double h = 1e-4;
    const double fd = (spectrum::relative_phase(rp, 1.0, 2.0 + h, cfg) -
                       spectrum::relative_phase(rp, 1.0, 2.0 - h, cfg)) /
                      (2 * h);
    CHECK(g2[0].dTheta_dc == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("test function: shape and validation") {
    const auto g = TestFunction::bump(2.0, 3.0, 1.0);
    CHECK(g(1.0) == 2.0);
    CHECK(g(4.0) == 0.0);
    CHECK(g(-2.0) == 0.0);
    CHECK(g(5.0) == 0.0);
    CHECK(g(2.5) > 0.0);
    CHECK(g.support_lo() == -2.0);
    CHECK(g.support_hi() == 4.0);
    // u = -1/2: exp(1 - 1/(1 - 1/4)) = exp(-1/3).
    CHECK(g(-0.5) == doctest::Approx(2.0 * std::exp(-1.0 / 3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(TestFunction::bump(-1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(TestFunction::bump(1.0, 0.0), ConfigError);
}

TEST_CASE("lattice sums count only in-support lattice points") {
    CHECK(spectrum::lattice_sum(TestFunction::bump(1.0, 1.0), 0.0) == 1.0);
    CHECK(spectrum::lattice_sum(TestFunction::bump(1.0, 1.0), 1.0) == 0.0);
    CHECK(spectrum::lattice_sum(TestFunction::bump(1.0, 2.0), 1.0) ==
          doctest::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-14));
    // Wide bump: several lattice points contribute.
    const auto g = TestFunction::bump(1.0, 7.0);
    double manual = 0.0;
    for (long j = -3; j <= 3; ++j) manual += g(static_cast<double>(j) * PI - 0.25);
    CHECK(spectrum::lattice_sum(g, 0.25) == doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("direct laplace functional is exp(-sum g(atoms))") {
    const auto pot = random_potential(200, 41, 1);
    IntegratorConfig cfg;
    const auto win = spectrum::eigenvalue_window(pot, 1.0, 8.0, cfg);
    const auto g = TestFunction::bump(1.0, 6.0);
    double s = 0.0;
    for (const auto& a : win.atoms) s += g(a.c);
    CHECK(spectrum::laplace_direct(win, g) == doctest::Approx(std::exp(-s)).epsilon(1e-13));
    CHECK_THROWS_AS(spectrum::laplace_direct(win, TestFunction::bump(1.0, 9.0)), ConfigError);
}

TEST_CASE("phase-function route reproduces the direct laplace functional exactly on the free field") {
    const auto pot = free_potential(500);
    IntegratorConfig cfg;
    const auto win = spectrum::eigenvalue_window(pot, 1.0, 6.0, cfg);
    std::vector<double> cs;
    for (double c = -6.5; c <= 6.5 + 1e-9; c += 0.5) cs.push_back(c);
    const auto grid = spectrum::theta_grid(pot, 1.0, cs, cfg);
    const auto g = TestFunction::bump(1.0, 6.0);
    const double via_phase = spectrum::laplace_from_phase(grid, win.frac_phase, g);
    const double direct = spectrum::laplace_direct(win, g);
    CHECK(std::fabs(via_phase - direct) <= 1e-10);

    CHECK_THROWS_AS(spectrum::laplace_from_phase(grid, win.frac_phase,
                                                 TestFunction::bump(1.0, 8.0)),
                    ConfigError);
}

TEST_CASE("monotone cubic interpolation: nodes, inverse, and data validation") {
    const std::vector<double> x = {0.0, 1.0, 2.0, 4.0};
    const std::vector<double> y = {0.0, 1.0, 8.0, 20.0};
    const std::vector<double> d = {0.5, 2.0, 5.0, 7.0};
    const auto f = spectrum::MonotoneCubic::build(x, y, d);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(f.eval(x[i]) == doctest::Approx(y[i]).epsilon(1e-14));
        CHECK(f.inverse(y[i]) == doctest::Approx(x[i]).epsilon(1e-12));
    }
    for (double t = 0.0; t <= 4.0; t += 0.37) {
        const double ft = f.eval(t);
        CHECK(f.inverse(ft) == doctest::Approx(t).epsilon(1e-10));
        if (t > 0.0) CHECK(ft > f.eval(t - 0.37) - 1e-15);  // monotone
    }
    CHECK_THROWS_AS(f.eval(4.5), ConfigError);
    CHECK_THROWS_AS(f.inverse(21.0), NumericError);
    CHECK_THROWS_AS(spectrum::MonotoneCubic::build({0.0, 1.0}, {0.0}, {1.0, 1.0}),
                    ConfigError);
    CHECK_THROWS_AS(spectrum::MonotoneCubic::build({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0},
                                                   {1.0, 1.0, 1.0}),
                    NumericError);
    // Interpolating linear data with unit slopes is exact.
    const auto lin = spectrum::MonotoneCubic::build({-1.0, 0.5, 3.0}, {-1.0, 0.5, 3.0},
                                                    {1.0, 1.0, 1.0});
    CHECK(lin.eval(1.7) == doctest::Approx(1.7).epsilon(1e-15));
    CHECK(lin.inverse(-0.3) == doctest::Approx(-0.3).epsilon(1e-15));
}
