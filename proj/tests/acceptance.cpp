// End-to-end acceptance checks: ten numbered criteria covering free-field
// exactness, the transfer oracle, derivative and Laplace identities, the
// clock/relative-phase/Hoelder/moment experiments at full scale, the
// amplitude-correlation machinery, and byte-level determinism across worker
// counts.  Prints one [PASS]/[FAIL] line per criterion; exit code 0 iff all
// pass.  Thresholds are pinned here on purpose -- do not tune them to make a
// failing run pass.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clockspec/amplitudes.hpp"
#include "clockspec/cli.hpp"
#include "clockspec/common.hpp"
#include "clockspec/dynsys.hpp"
#include "clockspec/potential.hpp"
#include "clockspec/prufer.hpp"
#include "clockspec/report.hpp"
#include "clockspec/spectrum.hpp"
#include "clockspec/stats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace clockspec;
using amplitudes::AmplitudeSpec;
using potential::PotentialModel;
using potential::SiteProfile;

namespace {

int g_failures = 0;

void line(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

const report::Gate* find_gate(const report::Report& rep, const std::string& name) {
    for (const auto& g : rep.gates)
        if (g.name == name) return &g;
    return nullptr;
}

PotentialModel uniform_model() {
    return PotentialModel::make(0.75, SiteProfile::indicator(), AmplitudeSpec::iid_uniform());
}

stats::RunConfig run_cfg(std::uint64_t seed, int realizations) {
    stats::RunConfig rc;
    rc.seed = seed;
    rc.realizations = realizations;
    rc.workers = 1;
    return rc;
}

// ------------------------------------------------------------- criterion 1

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model =
        PotentialModel::make(0.75, SiteProfile::indicator(), AmplitudeSpec::zero());
    const prufer::IntegratorConfig integ;

    double max_theta_rel = 0.0;
    for (long n : {100L, 1000L, 10000L}) {
        const auto pot = potential::realize(model, n, /*seed=*/1, /*realization=*/0);
        for (double kappa : {0.5, 1.0, 2.37}) {
            const auto out = prufer::integrate(pot, kappa, integ, prufer::AccumLevel::PhaseOnly);
            max_theta_rel = std::max(
                max_theta_rel, std::fabs(out.theta - kappa * static_cast<double>(n)) /
                                   (kappa * static_cast<double>(n)));
        }
    }

    const long n = 10000;
    const double kappa0 = 1.0;
    const auto pot = potential::realize(model, n, 1, 0);
    const auto win = spectrum::eigenvalue_window(pot, kappa0, 15.0, integ);
    double max_gap_dev = 0.0, max_atom_dev = 0.0;
    long gaps = 0;
    for (std::size_t i = 0; i < win.atoms.size(); ++i) {
        const auto& a = win.atoms[i];
        max_atom_dev = std::max(
            max_atom_dev,
            std::fabs(a.c - (PI * static_cast<double>(a.k) - kappa0 * static_cast<double>(n))));
        if (i > 0 && a.k == win.atoms[i - 1].k + 1) {
            max_gap_dev = std::max(max_gap_dev, std::fabs((a.c - win.atoms[i - 1].c) - PI));
            ++gaps;
        }
    }
    const double el = seconds_since(t0);
    const bool pass = max_theta_rel <= 1e-10 && !win.atoms.empty() && gaps >= 5 &&
                      max_gap_dev <= 1e-9 && max_atom_dev <= 1e-9 && el < 1.0;
    line(1, pass,
         fmt("free field exact: theta rel err %.2e (<=1e-10), gap dev %.2e (<=1e-9), "
             "atom dev %.2e (<=1e-9), %zu atoms, %.2fs (<1s)",
             max_theta_rel, max_gap_dev, max_atom_dev, win.atoms.size(), el));
}

// ------------------------------------------------------------- criterion 2

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto profile = SiteProfile::indicator();
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uv(-1.0, 1.0), uk(0.5, 3.0), ut(0.0, PI);

    double max64_theta = 0.0, max64_logr = 0.0, max128 = 0.0, max64 = 0.0;
    double worst_v = 0.0, worst_k = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double v = uv(rng), kappa = uk(rng), th0 = ut(rng);
        prufer::PruferState ex, s64, s128;
        ex.phase.frac = s64.phase.frac = s128.phase.frac = th0;
        prufer::exact_segment(ex, v, 1.0, kappa, prufer::AccumLevel::WithJR);
        prufer::rk4_cell(s64, v, profile, kappa, 64, prufer::AccumLevel::WithJR);
        prufer::rk4_cell(s128, v, profile, kappa, 128, prufer::AccumLevel::WithJR);
        const double dth64 = std::fabs(prufer::phase_diff(s64.phase, ex.phase));
        const double dlr64 = std::fabs(s64.log_r - ex.log_r);
        const double dth128 = std::fabs(prufer::phase_diff(s128.phase, ex.phase));
        const double dlr128 = std::fabs(s128.log_r - ex.log_r);
        if (std::max(dth64, dlr64) > max64) { worst_v = v; worst_k = kappa; }
        max64_theta = std::max(max64_theta, dth64);
        max64_logr = std::max(max64_logr, dlr64);
        max64 = std::max(max64, std::max(dth64, dlr64));
        max128 = std::max(max128, std::max(dth128, dlr128));
    }
    const double ratio = max64 / std::max(max128, 1e-300);
    const double el = seconds_since(t0);
    const bool pass =
        max64_theta <= 1e-8 && max64_logr <= 1e-8 && ratio >= 8.0 && el < 5.0;
    line(2, pass,
         fmt("transfer oracle (1000 triples): RK4-64 dtheta %.2e, dlogr %.2e (<=1e-8), "
             "halving gain %.1fx (>=8), worst at v=%.3f kappa=%.3f, %.2fs (<5s)",
             max64_theta, max64_logr, ratio, worst_v, worst_k, el));
}

// ------------------------------------------------------------- criterion 3

void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = uniform_model();
    const prufer::IntegratorConfig integ;
    const double kappa = 1.0, h = 1e-5;
    double max_rel = 0.0;
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto pot = potential::realize(model, 500, /*seed=*/1, r);
        const double d = prufer::phase_derivative(pot, kappa, integ);
        const double tp =
            prufer::integrate(pot, kappa + h, integ, prufer::AccumLevel::PhaseOnly).theta;
        const double tm =
            prufer::integrate(pot, kappa - h, integ, prufer::AccumLevel::PhaseOnly).theta;
        const double fd = (tp - tm) / (2.0 * h);
        max_rel = std::max(max_rel, std::fabs(d - fd) / std::fabs(fd));
    }
    const double el = seconds_since(t0);
    const bool pass = max_rel <= 1e-4 && el < 60.0;
    line(3, pass,
         fmt("phase derivative vs central differences (50 models, n=500): rel err %.2e "
             "(<=1e-4), %.2fs (<60s)",
             max_rel, el));
}

// ------------------------------------------------------------- criterion 4

void criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();
    stats::LaplaceParams p;  // bump g, c_max 8, identity_tol 1e-6
    p.n_values = {2000};
    const auto rep = stats::run_laplace(uniform_model(), run_cfg(1, 200), p);
    const auto* gmax = find_gate(rep, "identity_max");
    const auto* gall = find_gate(rep, "identity_all_ok");
    const double el = seconds_since(t0);
    const bool pass = gmax != nullptr && gall != nullptr && gmax->pass && gall->pass &&
                      el < 600.0;
    line(4, pass,
         fmt("Laplace identity (n=2000, 200 realizations): max |direct - phase| %.2e "
             "(<=1e-6), ok fraction %.3f (=1), %.1fs (<600s)",
             gmax ? gmax->value : -1.0, gall ? gall->value : -1.0, el));
}

// ------------------------------------------------------------- criterion 5

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    const stats::ClockParams p;  // n {500,1000,2000,5000}, c_max 15, gate 0.1
    const auto rep = stats::run_clock(uniform_model(), run_cfg(1, 200), p);
    std::ostringstream med;
    for (const auto& m : rep.summary["dev_medians"]) med << " " << m.get<double>();
    const double el = seconds_since(t0);
    line(5, rep.all_pass(),
         fmt("clock gaps (200 realizations, c_max 15): medians%s decreasing, final <= 0.1; "
             "%.0fs",
             med.str().c_str(), el));
}

// ------------------------------------------------------------- criterion 6

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const stats::ThetaParams pa;  // n {500,5000}, c_max 10, gate 0.15
    const auto rep_a = stats::run_theta(uniform_model(), run_cfg(1, 200), pa);

    stats::ThetaParams pb = pa;
    pb.n_values = {512, 1000, 2197, 4913};  // k^3 for k = 8, 10, 13, 17
    const auto markov = PotentialModel::make(
        0.75, SiteProfile::indicator(),
        AmplitudeSpec::markov_chain({{0.8, 0.2}, {0.2, 0.8}}, {-1.0, 1.0}, {0.5, 0.5}));
    const auto rep_b = stats::run_theta(markov, run_cfg(1, 200), pb);

    const auto* fa = find_gate(rep_a, "sup_median_final");
    const auto* fb = find_gate(rep_b, "sup_median_final");
    const double el = seconds_since(t0);
    line(6, rep_a.all_pass() && rep_b.all_pass(),
         fmt("relative phase: iid final median %.3f, markov cube-lengths final median %.3f "
             "(<=0.15, decreasing); %.0fs",
             fa ? fa->value : -1.0, fb ? fb->value : -1.0, el));
}

// ------------------------------------------------------------- criterion 7

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const stats::HolderParams p;  // deltas 1e-3..1e-1, m=50, N=2000, gates 0.4/0.1
    const auto rep = stats::run_holder(uniform_model(), run_cfg(1, 500), p);
    const auto* slope = find_gate(rep, "holder_slope");
    const auto* serr = find_gate(rep, "holder_slope_stderr");
    const double el = seconds_since(t0);
    line(7, rep.all_pass(),
         fmt("Hoelder slope (500 realizations, N=2000, m=50): slope %.3f (>=0.4), stderr "
             "%.3f (<=0.1); %.0fs",
             slope ? slope->value : -1.0, serr ? serr->value : -1.0, el));
}

// ------------------------------------------------------------- criterion 8

void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    const stats::MomentParams p;  // k 4..9, exponent gate 0.25
    const auto rep = stats::run_moments(uniform_model(), run_cfg(1, 200), p);
    const auto* ratio = find_gate(rep, "r_supsq_ratio_max");
    const auto* expo = find_gate(rep, "r_supsq_exponent");
    const double el = seconds_since(t0);
    line(8, rep.all_pass(),
         fmt("moment decay (k=4..9, 200 realizations): block ratio max %.3f (<1), "
             "exponent %.3f (>=0.25); %.0fs",
             ratio ? ratio->value : -1.0, expo ? expo->value : -1.0, el));
}

// ------------------------------------------------------------- criterion 9

void criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool pass = true;

    // Markov decay-rate recovery for three stay probabilities.
    detail << "markov rho";
    for (double p : {0.6, 0.8, 0.9}) {
        const auto spec = AmplitudeSpec::markov_chain({{p, 1.0 - p}, {1.0 - p, p}},
                                                      {-1.0, 1.0}, {0.5, 0.5});
        const auto corr = amplitudes::empirical_correlation(spec, /*seed=*/7,
                                                            /*realizations=*/400,
                                                            /*n=*/4096, /*max_lag=*/12);
        const auto fit = amplitudes::fit_decay_rate(corr);
        const double target = -std::log(std::fabs(2.0 * p - 1.0));
        const double rel = std::fabs(fit.rho - target) / target;
        pass = pass && fit.measurable && rel <= 0.1;
        detail << fmt(" p=%.1f:%.0f%%", p, 100.0 * rel);
    }

    // Pair and triple moments of the cosine-of-dyadic sequence at 1e6 samples.
    {
        const auto spec = AmplitudeSpec::cosine_dyadic();
        const int reals = 1000000;
        double sum12 = 0.0;
        for (int r = 0; r < reals; ++r) {
            amplitudes::AmplitudeStream s(spec, /*seed=*/11, static_cast<std::uint64_t>(r));
            sum12 += s.value(1) * s.value(2);
        }
        const double pair = sum12 / reals;
        const auto triple = amplitudes::third_moment_12(spec, /*seed=*/11, reals);
        pass = pass && std::fabs(pair) < 0.01 && std::fabs(triple.mean - 0.25) <= 0.01;
        detail << fmt("; cosine-dyadic E[w1w2]=%.4f (|.|<0.01), E[w1^2w2]=%.4f (0.25+-0.01)",
                      pair, triple.mean);
    }

    // Cylinder geometry, the long exact cat orbit, and cat correlations in
    // one diagnostics run (defaults: 1000 steps under a 2064-bit budget,
    // noise-floor gate from lag 30).
    {
        stats::DynsysParams dp;
        dp.have_cat = true;
        dp.cat.rectangles = {{0.0, 0.5, 0.0, 0.5, 1.0}};
        const auto rep = stats::run_dynsys(run_cfg(7, 1), dp);
        const auto* bits = find_gate(rep, "cat_orbit_bits_left");
        pass = pass && rep.all_pass();
        detail << fmt("; cylinders exact, cat orbit bits left %.0f, rect corr below noise",
                      bits ? bits->value : -1.0);
    }

    detail << fmt("; %.0fs", seconds_since(t0));
    line(9, pass, detail.str());
}

// ------------------------------------------------------------ criterion 10

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs one experiment kind twice (workers 1 and 3) and reports whether every
// output file is byte-identical.
bool deterministic_pair(const std::string& sub, const json& cfg, const fs::path& root,
                        std::string& err) {
    const fs::path cfg_path = root / (sub + ".json");
    {
        std::ofstream out(cfg_path);
        out << cfg.dump(2);
    }
    const fs::path d1 = root / (sub + "_w1");
    const fs::path d3 = root / (sub + "_w3");
    fs::create_directories(d1);
    fs::create_directories(d3);
    const int rc1 = cli::run({sub, "--config", cfg_path.string(), "--workers", "1", "--out",
                              d1.string(), "--quiet"});
    const int rc3 = cli::run({sub, "--config", cfg_path.string(), "--workers", "3", "--out",
                              d3.string(), "--quiet"});
    if (rc1 != rc3 || rc1 > 1) {
        err = fmt("%s: exit codes %d vs %d", sub.c_str(), rc1, rc3);
        return false;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d1)) files.push_back(e.path().filename());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        err = sub + ": no output files";
        return false;
    }
    for (const auto& f : files) {
        if (!fs::exists(d3 / f)) {
            err = fmt("%s: %s missing for workers=3", sub.c_str(), f.string().c_str());
            return false;
        }
        if (slurp(d1 / f) != slurp(d3 / f)) {
            err = fmt("%s: %s differs across worker counts", sub.c_str(),
                      f.string().c_str());
            return false;
        }
    }
    return true;
}

void criterion_10() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path root =
        fs::temp_directory_path() / fmt("clockspec_acceptance_%d", static_cast<int>(getpid()));
    fs::remove_all(root);
    fs::create_directories(root);

    const json uniform = {{"amplitudes", {{"type", "iid_uniform"}}}};
    const json zero = {{"amplitudes", {{"type", "zero"}}}};
    const json markov = {{"amplitudes",
                          {{"type", "markov"},
                           {"transition", {{0.8, 0.2}, {0.2, 0.8}}},
                           {"values", {-1.0, 1.0}},
                           {"initial", {0.5, 0.5}}}}};

    std::vector<std::pair<std::string, json>> cases;
    cases.emplace_back("clock",
                       json{{"model", uniform},
                            {"experiment",
                             {{"kind", "clock"}, {"n_values", {40, 80}}, {"c_max", 4.0}}},
                            {"run", {{"realizations", 6}}}});
    cases.emplace_back("theta",
                       json{{"model", uniform},
                            {"experiment",
                             {{"kind", "theta"}, {"n_values", {40, 80}}, {"c_max", 3.0}}},
                            {"run", {{"realizations", 6}}}});
    cases.emplace_back(
        "holder",
        json{{"model", uniform},
             {"experiment",
              {{"kind", "holder"}, {"m", 10}, {"n", 100}, {"gate_slope_min", -10.0}}},
             {"run", {{"realizations", 6}}}});
    cases.emplace_back("moments",
                       json{{"model", uniform},
                            {"experiment", {{"kind", "moments"}, {"k_min", 4}, {"k_max", 6}}},
                            {"run", {{"realizations", 8}}}});
    cases.emplace_back("laplace",
                       json{{"model", zero},
                            {"experiment",
                             {{"kind", "laplace"},
                              {"n_values", {40, 80}},
                              {"c_max", 4.0},
                              {"g", {{"half_width", 3.0}}},
                              {"grid_step", 0.25}}},
                            {"run", {{"realizations", 4}}}});
    cases.emplace_back("corr",
                       json{{"model", markov},
                            {"experiment", {{"kind", "corr"}, {"length", 512}, {"max_lag", 8}}},
                            {"run", {{"realizations", 16}}}});
    cases.emplace_back(
        "dynsys-check",
        json{{"experiment",
              {{"kind", "dynsys_check"},
               {"max_depth", 12},
               {"variation",
                {{"system", "dyadic"},
                 {"observable",
                  {{"type", "bit_table"}, {"half_width", 1}, {"values", {0.0, 0.25, 0.5, 0.75}}}},
                 {"windows", {{0, 2}, {0, 4}}},
                 {"samples", 100}}},
               {"cat",
                {{"steps", 200},
                 {"precision_bits", 1200},
                 {"rectangles",
                  {{{"x0", 0.0}, {"x1", 0.5}, {"y0", 0.0}, {"y1", 1.0}, {"value", 1.0}}}},
                 {"length", 256},
                 {"max_lag", 40},
                 {"lag_floor", 30},
                 {"realizations", 16}}}}}});
    cases.emplace_back("spectrum",
                       json{{"model", uniform},
                            {"experiment", {{"kind", "spectrum"}, {"n", 60}, {"c_max", 4.0}}},
                            {"run", {{"realizations", 1}}}});
    cases.emplace_back("phase-dump",
                       json{{"model", uniform},
                            {"experiment", {{"kind", "phase_dump"}, {"n", 50}}},
                            {"run", {{"realizations", 1}}}});

    bool pass = true;
    std::string first_err;
    int checked = 0;
    for (const auto& [sub, cfg] : cases) {
        std::string err;
        if (deterministic_pair(sub, cfg, root, err)) {
            ++checked;
        } else {
            pass = false;
            if (first_err.empty()) first_err = err;
        }
    }
    fs::remove_all(root);
    const double el = seconds_since(t0);
    line(10, pass,
         pass ? fmt("determinism: %d experiment kinds byte-identical for workers 1 vs 3; "
                    "%.0fs",
                    checked, el)
              : fmt("determinism: %s", first_err.c_str()));
}

}  // namespace

int main() {
    const std::pair<int, void (*)()> checks[] = {
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
        {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
        {9, criterion_9}, {10, criterion_10},
    };
    for (const auto& [id, fn] : checks) {
        try {
            fn();
        } catch (const std::exception& e) {
            line(id, false, fmt("unexpected exception: %s", e.what()));
        }
    }
    return g_failures == 0 ? 0 : 1;
}
