#include "clockspec/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "clockspec/common.hpp"
#include "clockspec/report.hpp"

namespace clockspec::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) bad("unknown key '" + it.key() + "' in " + where);
    }
}

const json& field(const json& obj, const char* key) {
    if (!obj.contains(key)) bad(std::string("missing required key '") + key + "'");
    return obj.at(key);
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where + ": expected a number");
    return v.get<double>();
}

long as_long(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where + ": expected an integer");
    return v.get<long>();
}

int as_int(const json& v, const std::string& where) {
    const long x = as_long(v, where);
    if (x < -2147483647L || x > 2147483647L) bad(where + ": integer out of range");
    return static_cast<int>(x);
}

std::uint64_t as_u64(const json& v, const std::string& where) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        bad(where + ": expected a non-negative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
        bad(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) bad(where + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) bad(where + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> as_double_vec(const json& v, const std::string& where) {
    if (!v.is_array()) bad(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_double(e, where));
    return out;
}

std::vector<long> as_long_vec(const json& v, const std::string& where) {
    if (!v.is_array()) bad(where + ": expected an array of integers");
    std::vector<long> out;
    for (const auto& e : v) out.push_back(as_long(e, where));
    return out;
}

// ----------------------------------------------------------------- model

dynsys::Observable parse_observable(const json& o, bool two_sided, const std::string& where) {
    if (!o.is_object()) bad(where + ": expected an object");
    const std::string type = as_string(field(o, "type"), where + ".type");
    if (type == "bit_table") {
        check_keys(o, {"type", "half_width", "values"}, where);
        const int hw = as_int(field(o, "half_width"), where + ".half_width");
        auto values = as_double_vec(field(o, "values"), where + ".values");
        return two_sided ? dynsys::Observable::bit_table_two_sided(hw, std::move(values))
                         : dynsys::Observable::bit_table_one_sided(hw, std::move(values));
    }
    if (type == "fraction") {
        check_keys(o, {"type"}, where);
        return dynsys::Observable::fraction();
    }
    if (type == "constant") {
        check_keys(o, {"type", "value"}, where);
        return dynsys::Observable::constant_obs(as_double(field(o, "value"), where + ".value"));
    }
    bad(where + ".type: unknown observable type '" + type + "'");
}

std::vector<dynsys::TorusRect> parse_rects(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty()) bad(where + ": expected a non-empty array");
    std::vector<dynsys::TorusRect> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& r = arr[i];
        const std::string rw = where + "[" + std::to_string(i) + "]";
        if (!r.is_object()) bad(rw + ": expected an object");
        check_keys(r, {"x0", "x1", "y0", "y1", "value"}, rw);
        out.push_back({as_double(field(r, "x0"), rw + ".x0"),
                       as_double(field(r, "x1"), rw + ".x1"),
                       as_double(field(r, "y0"), rw + ".y0"),
                       as_double(field(r, "y1"), rw + ".y1"),
                       as_double(field(r, "value"), rw + ".value")});
    }
    return out;
}

amplitudes::AmplitudeSpec parse_amplitudes(const json& a, const std::string& where) {
    if (!a.is_object()) bad(where + ": expected an object");
    const std::string type = as_string(field(a, "type"), where + ".type");
    if (type == "zero") {
        check_keys(a, {"type"}, where);
        return amplitudes::AmplitudeSpec::zero();
    }
    if (type == "iid_uniform") {
        check_keys(a, {"type"}, where);
        return amplitudes::AmplitudeSpec::iid_uniform();
    }
    if (type == "iid_rademacher") {
        check_keys(a, {"type"}, where);
        return amplitudes::AmplitudeSpec::iid_rademacher();
    }
    if (type == "cosine_dyadic") {
        check_keys(a, {"type"}, where);
        return amplitudes::AmplitudeSpec::cosine_dyadic();
    }
    if (type == "markov") {
        check_keys(a, {"type", "transition", "values", "initial"}, where);
        const auto& tj = field(a, "transition");
        if (!tj.is_array()) bad(where + ".transition: expected an array of rows");
        std::vector<std::vector<double>> transition;
        for (const auto& row : tj)
            transition.push_back(as_double_vec(row, where + ".transition"));
        return amplitudes::AmplitudeSpec::markov_chain(
            std::move(transition), as_double_vec(field(a, "values"), where + ".values"),
            as_double_vec(field(a, "initial"), where + ".initial"));
    }
    if (type == "dyadic") {
        check_keys(a, {"type", "observable"}, where);
        return amplitudes::AmplitudeSpec::dyadic_observable(
            parse_observable(field(a, "observable"), false, where + ".observable"));
    }
    if (type == "baker") {
        check_keys(a, {"type", "observable"}, where);
        return amplitudes::AmplitudeSpec::baker_observable(
            parse_observable(field(a, "observable"), true, where + ".observable"));
    }
    if (type == "cat") {
        check_keys(a, {"type", "rectangles", "precision_bits"}, where);
        return amplitudes::AmplitudeSpec::cat_map_observable(
            parse_rects(field(a, "rectangles"), where + ".rectangles"),
            as_int(field(a, "precision_bits"), where + ".precision_bits"));
    }
    bad(where + ".type: unknown amplitude type '" + type + "'");
}

potential::SiteProfile parse_profile(const json& pr, const std::string& where) {
    if (!pr.is_object()) bad(where + ": expected an object");
    const std::string type = as_string(field(pr, "type"), where + ".type");
    if (type == "indicator") {
        check_keys(pr, {"type"}, where);
        return potential::SiteProfile::indicator();
    }
    if (type == "bump") {
        check_keys(pr, {"type"}, where);
        return potential::SiteProfile::bump();
    }
    if (type == "table") {
        check_keys(pr, {"type", "values"}, where);
        return potential::SiteProfile::piecewise(
            as_double_vec(field(pr, "values"), where + ".values"));
    }
    bad(where + ".type: unknown profile type '" + type + "'");
}

potential::PotentialModel parse_model(const json& m) {
    check_keys(m, {"alpha", "profile", "amplitudes", "mode"}, "model");
    const double alpha = m.contains("alpha") ? as_double(m["alpha"], "model.alpha") : 0.75;
    potential::SiteProfile profile = m.contains("profile")
                                         ? parse_profile(m["profile"], "model.profile")
                                         : potential::SiteProfile::indicator();
    amplitudes::AmplitudeSpec amps =
        m.contains("amplitudes") ? parse_amplitudes(m["amplitudes"], "model.amplitudes")
                                 : amplitudes::AmplitudeSpec::iid_uniform();
    auto mode = potential::PotentialModel::Mode::Standard;
    if (m.contains("mode")) {
        const std::string s = as_string(m["mode"], "model.mode");
        if (s == "standard")
            mode = potential::PotentialModel::Mode::Standard;
        else if (s == "decaying_coupling")
            mode = potential::PotentialModel::Mode::DecayingCoupling;
        else
            bad("model.mode: unknown mode '" + s + "'");
    }
    return potential::PotentialModel::make(alpha, std::move(profile), std::move(amps), mode);
}

// ------------------------------------------------------------------ echoes

json observable_echo(const dynsys::Observable& o) {
    json j = json::object();
    switch (o.kind) {
        case dynsys::Observable::Kind::BitTable:
            j["type"] = "bit_table";
            j["half_width"] = o.half_width;
            j["values"] = o.table;
            break;
        case dynsys::Observable::Kind::Fraction:
            j["type"] = "fraction";
            break;
        case dynsys::Observable::Kind::Constant:
            j["type"] = "constant";
            j["value"] = o.constant;
            break;
    }
    return j;
}

json rects_echo(const std::vector<dynsys::TorusRect>& rects) {
    json arr = json::array();
    for (const auto& r : rects)
        arr.push_back({{"x0", r.x0}, {"x1", r.x1}, {"y0", r.y0}, {"y1", r.y1},
                       {"value", r.value}});
    return arr;
}

json amplitudes_echo(const amplitudes::AmplitudeSpec& a) {
    json j = json::object();
    using Kind = amplitudes::AmplitudeSpec::Kind;
    switch (a.kind) {
        case Kind::Zero:
            j["type"] = "zero";
            break;
        case Kind::IidUniform:
            j["type"] = "iid_uniform";
            break;
        case Kind::IidRademacher:
            j["type"] = "iid_rademacher";
            break;
        case Kind::CosineDyadic:
            j["type"] = "cosine_dyadic";
            break;
        case Kind::MarkovChain:
            j["type"] = "markov";
            j["transition"] = a.transition;
            j["values"] = a.values;
            j["initial"] = a.initial;
            break;
        case Kind::DyadicObservable:
            j["type"] = "dyadic";
            j["observable"] = observable_echo(a.observable);
            break;
        case Kind::BakerObservable:
            j["type"] = "baker";
            j["observable"] = observable_echo(a.observable);
            break;
        case Kind::CatMapObservable:
            j["type"] = "cat";
            j["rectangles"] = rects_echo(a.rectangles);
            j["precision_bits"] = a.precision_bits;
            break;
    }
    return j;
}

json profile_echo(const potential::SiteProfile& p) {
    json j = json::object();
    switch (p.kind) {
        case potential::SiteProfile::Kind::Indicator:
            j["type"] = "indicator";
            break;
        case potential::SiteProfile::Kind::Bump:
            j["type"] = "bump";
            break;
        case potential::SiteProfile::Kind::Table:
            j["type"] = "table";
            j["values"] = p.table;
            break;
    }
    return j;
}

json model_echo(const potential::PotentialModel& m) {
    json j = json::object();
    j["alpha"] = m.alpha;
    j["profile"] = profile_echo(m.profile);
    j["amplitudes"] = amplitudes_echo(m.amplitudes);
    j["mode"] = m.mode == potential::PotentialModel::Mode::Standard ? "standard"
                                                                    : "decaying_coupling";
    return j;
}

// --------------------------------------------------------------------- run

void parse_run(const json& r, stats::RunConfig& run) {
    check_keys(r, {"seed", "realizations", "integrator"}, "run");
    if (r.contains("seed")) run.seed = as_u64(r["seed"], "run.seed");
    if (r.contains("realizations"))
        run.realizations = as_int(r["realizations"], "run.realizations");
    if (r.contains("integrator")) {
        const auto& ij = r["integrator"];
        if (!ij.is_object()) bad("run.integrator: expected an object");
        check_keys(ij, {"method", "substeps"}, "run.integrator");
        if (ij.contains("method")) {
            const std::string s = as_string(ij["method"], "run.integrator.method");
            if (s == "auto")
                run.integrator.method = prufer::IntegratorConfig::Method::Auto;
            else if (s == "exact")
                run.integrator.method = prufer::IntegratorConfig::Method::ExactPiecewiseConstant;
            else if (s == "rk4")
                run.integrator.method = prufer::IntegratorConfig::Method::RK4;
            else
                bad("run.integrator.method: unknown method '" + s + "'");
        }
        if (ij.contains("substeps"))
            run.integrator.substeps = as_int(ij["substeps"], "run.integrator.substeps");
    }
}

json run_echo(const stats::RunConfig& run) {
    const char* method = "auto";
    if (run.integrator.method == prufer::IntegratorConfig::Method::ExactPiecewiseConstant)
        method = "exact";
    else if (run.integrator.method == prufer::IntegratorConfig::Method::RK4)
        method = "rk4";
    return {{"seed", run.seed},
            {"realizations", run.realizations},
            {"integrator", {{"method", method}, {"substeps", run.integrator.substeps}}}};
}

// -------------------------------------------------------------- experiments

void expect_kind(const json& e, Kind kind) {
    if (e.contains("kind")) {
        const std::string s = as_string(e["kind"], "experiment.kind");
        if (s != kind_name(kind))
            bad("experiment.kind: '" + s + "' does not match the requested experiment '" +
                kind_name(kind) + "'");
    }
}

json parse_clock(const json& e, stats::ClockParams& p) {
    check_keys(e, {"kind", "kappa0", "n_values", "c_max", "gate_median_max", "free_control"},
               "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("n_values")) p.n_values = as_long_vec(e["n_values"], "experiment.n_values");
    if (e.contains("c_max")) p.c_max = as_double(e["c_max"], "experiment.c_max");
    if (e.contains("gate_median_max"))
        p.gate_median_max = as_double(e["gate_median_max"], "experiment.gate_median_max");
    if (e.contains("free_control"))
        p.free_control = as_bool(e["free_control"], "experiment.free_control");
    return {{"kind", "clock"},        {"kappa0", p.kappa0},
            {"n_values", p.n_values}, {"c_max", p.c_max},
            {"gate_median_max", p.gate_median_max}, {"free_control", p.free_control}};
}

json parse_theta(const json& e, stats::ThetaParams& p) {
    check_keys(e,
               {"kind", "kappa0", "n_values", "c_max", "c_step", "gate_sup_median_max",
                "free_control", "require_decreasing"},
               "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("n_values")) p.n_values = as_long_vec(e["n_values"], "experiment.n_values");
    if (e.contains("c_max")) p.c_max = as_double(e["c_max"], "experiment.c_max");
    if (e.contains("c_step")) p.c_step = as_double(e["c_step"], "experiment.c_step");
    if (e.contains("gate_sup_median_max"))
        p.gate_sup_median_max =
            as_double(e["gate_sup_median_max"], "experiment.gate_sup_median_max");
    if (e.contains("free_control"))
        p.free_control = as_bool(e["free_control"], "experiment.free_control");
    if (e.contains("require_decreasing"))
        p.require_decreasing = as_bool(e["require_decreasing"], "experiment.require_decreasing");
    return {{"kind", "theta"},
            {"kappa0", p.kappa0},
            {"n_values", p.n_values},
            {"c_max", p.c_max},
            {"c_step", p.c_step},
            {"gate_sup_median_max", p.gate_sup_median_max},
            {"free_control", p.free_control},
            {"require_decreasing", p.require_decreasing}};
}

json parse_holder(const json& e, stats::HolderParams& p) {
    check_keys(e,
               {"kind", "kappa0", "delta_kappas", "m", "n", "gate_slope_min",
                "gate_slope_stderr_max", "free_control"},
               "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("delta_kappas"))
        p.delta_kappas = as_double_vec(e["delta_kappas"], "experiment.delta_kappas");
    if (e.contains("m")) p.m = as_long(e["m"], "experiment.m");
    if (e.contains("n")) p.N = as_long(e["n"], "experiment.n");
    if (e.contains("gate_slope_min"))
        p.gate_slope_min = as_double(e["gate_slope_min"], "experiment.gate_slope_min");
    if (e.contains("gate_slope_stderr_max"))
        p.gate_slope_stderr_max =
            as_double(e["gate_slope_stderr_max"], "experiment.gate_slope_stderr_max");
    if (e.contains("free_control"))
        p.free_control = as_bool(e["free_control"], "experiment.free_control");
    return {{"kind", "holder"},
            {"kappa0", p.kappa0},
            {"delta_kappas", p.delta_kappas},
            {"m", p.m},
            {"n", p.N},
            {"gate_slope_min", p.gate_slope_min},
            {"gate_slope_stderr_max", p.gate_slope_stderr_max},
            {"free_control", p.free_control}};
}

json parse_moments(const json& e, stats::MomentParams& p) {
    check_keys(e, {"kind", "kappa0", "k_min", "k_max", "free_control"}, "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("k_min")) p.k_min = as_int(e["k_min"], "experiment.k_min");
    if (e.contains("k_max")) p.k_max = as_int(e["k_max"], "experiment.k_max");
    if (e.contains("free_control"))
        p.free_control = as_bool(e["free_control"], "experiment.free_control");
    return {{"kind", "moments"},
            {"kappa0", p.kappa0},
            {"k_min", p.k_min},
            {"k_max", p.k_max},
            {"free_control", p.free_control}};
}

json parse_laplace(const json& e, stats::LaplaceParams& p) {
    check_keys(e,
               {"kind", "kappa0", "n_values", "beta", "subseq_count", "subseq_stride",
                "subseq_limit", "g", "c_max", "grid_pad", "grid_step", "identity_tol",
                "diff_nsigma", "histogram_bins", "free_control"},
               "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("n_values")) p.n_values = as_long_vec(e["n_values"], "experiment.n_values");
    if (e.contains("beta")) p.beta = as_double(e["beta"], "experiment.beta");
    if (e.contains("subseq_count"))
        p.subseq_count = as_int(e["subseq_count"], "experiment.subseq_count");
    if (e.contains("subseq_stride"))
        p.subseq_stride = as_long(e["subseq_stride"], "experiment.subseq_stride");
    if (e.contains("subseq_limit"))
        p.subseq_limit = as_long(e["subseq_limit"], "experiment.subseq_limit");
    if (e.contains("g")) {
        const auto& gj = e["g"];
        if (!gj.is_object()) bad("experiment.g: expected an object");
        check_keys(gj, {"amplitude", "half_width", "center"}, "experiment.g");
        double amp = p.g.amplitude, hw = p.g.half_width, ctr = p.g.center;
        if (gj.contains("amplitude")) amp = as_double(gj["amplitude"], "experiment.g.amplitude");
        if (gj.contains("half_width"))
            hw = as_double(gj["half_width"], "experiment.g.half_width");
        if (gj.contains("center")) ctr = as_double(gj["center"], "experiment.g.center");
        p.g = spectrum::TestFunction::bump(amp, hw, ctr);
    }
    if (e.contains("c_max")) p.c_max = as_double(e["c_max"], "experiment.c_max");
    if (e.contains("grid_pad")) p.grid_pad = as_double(e["grid_pad"], "experiment.grid_pad");
    if (e.contains("grid_step")) p.grid_step = as_double(e["grid_step"], "experiment.grid_step");
    if (e.contains("identity_tol"))
        p.identity_tol = as_double(e["identity_tol"], "experiment.identity_tol");
    if (e.contains("diff_nsigma"))
        p.diff_nsigma = as_double(e["diff_nsigma"], "experiment.diff_nsigma");
    if (e.contains("histogram_bins"))
        p.histogram_bins = as_int(e["histogram_bins"], "experiment.histogram_bins");
    if (e.contains("free_control"))
        p.free_control = as_bool(e["free_control"], "experiment.free_control");
    if (p.subseq_count == 0 && p.n_values.empty()) p.n_values = {500, 1000, 2000};
    return {{"kind", "laplace"},
            {"kappa0", p.kappa0},
            {"n_values", p.n_values},
            {"beta", p.beta},
            {"subseq_count", p.subseq_count},
            {"subseq_stride", p.subseq_stride},
            {"subseq_limit", p.subseq_limit},
            {"g",
             {{"amplitude", p.g.amplitude},
              {"half_width", p.g.half_width},
              {"center", p.g.center}}},
            {"c_max", p.c_max},
            {"grid_pad", p.grid_pad},
            {"grid_step", p.grid_step},
            {"identity_tol", p.identity_tol},
            {"diff_nsigma", p.diff_nsigma},
            {"histogram_bins", p.histogram_bins},
            {"free_control", p.free_control}};
}

json parse_corr(const json& e, stats::CorrParams& p) {
    check_keys(e, {"kind", "length", "max_lag", "expected_rho", "rho_rel_tol"}, "experiment");
    if (e.contains("length")) p.length = as_long(e["length"], "experiment.length");
    if (e.contains("max_lag")) p.max_lag = as_int(e["max_lag"], "experiment.max_lag");
    if (e.contains("expected_rho"))
        p.expected_rho = as_double(e["expected_rho"], "experiment.expected_rho");
    if (e.contains("rho_rel_tol"))
        p.rho_rel_tol = as_double(e["rho_rel_tol"], "experiment.rho_rel_tol");
    return {{"kind", "corr"},
            {"length", p.length},
            {"max_lag", p.max_lag},
            {"expected_rho", p.expected_rho},
            {"rho_rel_tol", p.rho_rel_tol}};
}

json parse_dynsys(const json& e, stats::DynsysParams& p) {
    check_keys(e, {"kind", "max_depth", "variation", "cat"}, "experiment");
    if (e.contains("max_depth")) p.max_depth = as_int(e["max_depth"], "experiment.max_depth");
    json echo = {{"kind", "dynsys_check"}, {"max_depth", p.max_depth}};
    if (e.contains("variation")) {
        const auto& vj = e["variation"];
        if (!vj.is_object()) bad("experiment.variation: expected an object");
        check_keys(vj, {"system", "observable", "windows", "samples"}, "experiment.variation");
        p.have_variation = true;
        bool two_sided = false;
        if (vj.contains("system")) {
            const std::string s = as_string(vj["system"], "experiment.variation.system");
            if (s == "dyadic")
                p.variation.system = dynsys::BitSystem::Dyadic;
            else if (s == "baker")
                p.variation.system = dynsys::BitSystem::Baker;
            else
                bad("experiment.variation.system: unknown system '" + s + "'");
        }
        two_sided = p.variation.system == dynsys::BitSystem::Baker;
        p.variation.observable = parse_observable(field(vj, "observable"), two_sided,
                                                  "experiment.variation.observable");
        const auto& wj = field(vj, "windows");
        if (!wj.is_array() || wj.empty())
            bad("experiment.variation.windows: expected a non-empty array");
        json wecho = json::array();
        for (const auto& w : wj) {
            const auto pair = as_long_vec(w, "experiment.variation.windows");
            if (pair.size() != 2)
                bad("experiment.variation.windows: each window is a [lo, hi] pair");
            p.variation.windows.emplace_back(pair[0], pair[1]);
            wecho.push_back({pair[0], pair[1]});
        }
        if (vj.contains("samples"))
            p.variation.samples = as_int(vj["samples"], "experiment.variation.samples");
        echo["variation"] = {
            {"system", p.variation.system == dynsys::BitSystem::Dyadic ? "dyadic" : "baker"},
            {"observable", observable_echo(p.variation.observable)},
            {"windows", wecho},
            {"samples", p.variation.samples}};
    }
    if (e.contains("cat")) {
        const auto& cj = e["cat"];
        if (!cj.is_object()) bad("experiment.cat: expected an object");
        check_keys(cj,
                   {"steps", "precision_bits", "rectangles", "length", "max_lag", "lag_floor",
                    "realizations", "noise_nsigma"},
                   "experiment.cat");
        p.have_cat = true;
        if (cj.contains("steps")) p.cat.steps = as_int(cj["steps"], "experiment.cat.steps");
        if (cj.contains("precision_bits"))
            p.cat.precision_bits = as_int(cj["precision_bits"], "experiment.cat.precision_bits");
        p.cat.rectangles = parse_rects(field(cj, "rectangles"), "experiment.cat.rectangles");
        if (cj.contains("length")) p.cat.length = as_long(cj["length"], "experiment.cat.length");
        if (cj.contains("max_lag"))
            p.cat.max_lag = as_int(cj["max_lag"], "experiment.cat.max_lag");
        if (cj.contains("lag_floor"))
            p.cat.lag_floor = as_int(cj["lag_floor"], "experiment.cat.lag_floor");
        if (cj.contains("realizations"))
            p.cat.realizations = as_int(cj["realizations"], "experiment.cat.realizations");
        if (cj.contains("noise_nsigma"))
            p.cat.noise_nsigma = as_double(cj["noise_nsigma"], "experiment.cat.noise_nsigma");
        echo["cat"] = {{"steps", p.cat.steps},
                       {"precision_bits", p.cat.precision_bits},
                       {"rectangles", rects_echo(p.cat.rectangles)},
                       {"length", p.cat.length},
                       {"max_lag", p.cat.max_lag},
                       {"lag_floor", p.cat.lag_floor},
                       {"realizations", p.cat.realizations},
                       {"noise_nsigma", p.cat.noise_nsigma}};
    }
    return echo;
}

json parse_spectrum(const json& e, stats::SpectrumParams& p) {
    check_keys(e, {"kind", "kappa0", "n", "c_max", "c_step", "realization"}, "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("n")) p.n = as_long(e["n"], "experiment.n");
    if (e.contains("c_max")) p.c_max = as_double(e["c_max"], "experiment.c_max");
    if (e.contains("c_step")) p.c_step = as_double(e["c_step"], "experiment.c_step");
    if (e.contains("realization"))
        p.realization = as_u64(e["realization"], "experiment.realization");
    return {{"kind", "spectrum"}, {"kappa0", p.kappa0},           {"n", p.n},
            {"c_max", p.c_max},   {"c_step", p.c_step},           {"realization", p.realization}};
}

json parse_phase_dump(const json& e, stats::PhaseDumpParams& p) {
    check_keys(e, {"kind", "kappa0", "n", "realization"}, "experiment");
    if (e.contains("kappa0")) p.kappa0 = as_double(e["kappa0"], "experiment.kappa0");
    if (e.contains("n")) p.n = as_long(e["n"], "experiment.n");
    if (e.contains("realization"))
        p.realization = as_u64(e["realization"], "experiment.realization");
    return {{"kind", "phase_dump"},
            {"kappa0", p.kappa0},
            {"n", p.n},
            {"realization", p.realization}};
}

}  // namespace

const char* kind_name(Kind kind) {
    switch (kind) {
        case Kind::Clock: return "clock";
        case Kind::Theta: return "theta";
        case Kind::Holder: return "holder";
        case Kind::Moments: return "moments";
        case Kind::Laplace: return "laplace";
        case Kind::Spectrum: return "spectrum";
        case Kind::PhaseDump: return "phase_dump";
        case Kind::Corr: return "corr";
        case Kind::DynsysCheck: return "dynsys_check";
    }
    return "unknown";
}

Request parse_json(const nlohmann::json& j, Kind kind, const Overrides& ov) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    check_keys(j, {"model", "experiment", "run"}, "config");

    Request req;
    req.kind = kind;

    const bool needs_model = kind != Kind::DynsysCheck;
    if (j.contains("model")) {
        req.model = parse_model(j["model"]);
        req.has_model = true;
    } else if (needs_model) {
        req.model = potential::PotentialModel::make(0.75, potential::SiteProfile::indicator(),
                                                    amplitudes::AmplitudeSpec::iid_uniform());
        req.has_model = true;
    }

    if (j.contains("run")) parse_run(j["run"], req.run);
    if (ov.has_seed) req.run.seed = ov.seed;
    if (ov.has_workers) req.run.workers = ov.workers;

    const json e = j.contains("experiment") ? j["experiment"] : json::object();
    if (!e.is_object()) throw ConfigError("experiment: expected an object");
    expect_kind(e, kind);

    json exp_echo;
    switch (kind) {
        case Kind::Clock: exp_echo = parse_clock(e, req.clock); break;
        case Kind::Theta: exp_echo = parse_theta(e, req.theta); break;
        case Kind::Holder: exp_echo = parse_holder(e, req.holder); break;
        case Kind::Moments: exp_echo = parse_moments(e, req.moments); break;
        case Kind::Laplace: exp_echo = parse_laplace(e, req.laplace); break;
        case Kind::Spectrum: exp_echo = parse_spectrum(e, req.spectrum); break;
        case Kind::PhaseDump: exp_echo = parse_phase_dump(e, req.phase_dump); break;
        case Kind::Corr: exp_echo = parse_corr(e, req.corr); break;
        case Kind::DynsysCheck: exp_echo = parse_dynsys(e, req.dynsys); break;
    }

    req.effective = nlohmann::json::object();
    if (req.has_model) req.effective["model"] = model_echo(req.model);
    req.effective["experiment"] = exp_echo;
    req.effective["run"] = run_echo(req.run);
    req.hash = report::config_hash_hex(req.effective);
    return req;
}

Request parse_file(const std::string& path, Kind kind, const Overrides& ov) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ConfigError(std::string("config parse error: ") + err.what());
    }
    return parse_json(j, kind, ov);
}

}  // namespace clockspec::config
