#include "clockspec/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "clockspec/common.hpp"
#include "clockspec/config.hpp"
#include "clockspec/report.hpp"
#include "clockspec/stats.hpp"

namespace clockspec::cli {

namespace {

int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("CLOCKSPEC_OUT"); env != nullptr && env[0] != '\0')
        return env;
    return ".";
}

report::Report dispatch(const config::Request& req) {
    switch (req.kind) {
        case config::Kind::Clock:
            return stats::run_clock(req.model, req.run, req.clock);
        case config::Kind::Theta:
            return stats::run_theta(req.model, req.run, req.theta);
        case config::Kind::Holder:
            return stats::run_holder(req.model, req.run, req.holder);
        case config::Kind::Moments:
            return stats::run_moments(req.model, req.run, req.moments);
        case config::Kind::Laplace:
            return stats::run_laplace(req.model, req.run, req.laplace);
        case config::Kind::Spectrum:
            return stats::run_spectrum_dump(req.model, req.run, req.spectrum);
        case config::Kind::PhaseDump:
            return stats::run_phase_dump(req.model, req.run, req.phase_dump);
        case config::Kind::Corr:
            return stats::run_corr(req.model.amplitudes, req.run, req.corr);
        case config::Kind::DynsysCheck:
            return stats::run_dynsys(req.run, req.dynsys);
    }
    throw ConfigError("unknown experiment kind");
}

}  // namespace

int run(std::vector<std::string> args) {
    CLI::App app{"spectral statistics of 1d Schrodinger operators with random decaying "
                 "potentials"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    unsigned long long seed = 0;
    int workers = 0;
    bool quiet = false;

    struct SubDef {
        const char* name;
        config::Kind kind;
        const char* desc;
    };
    const SubDef defs[] = {
        {"clock", config::Kind::Clock, "eigenvalue gap statistics across lengths"},
        {"theta", config::Kind::Theta, "relative-phase deviation across lengths"},
        {"holder", config::Kind::Holder, "modulus of continuity of the phase integral"},
        {"moments", config::Kind::Moments, "dyadic block moment decay"},
        {"laplace", config::Kind::Laplace, "Laplace functional of the rescaled spectrum"},
        {"spectrum", config::Kind::Spectrum, "dump one eigenvalue window and phase curve"},
        {"phase-dump", config::Kind::PhaseDump, "dump one phase/amplitude trajectory"},
        {"corr", config::Kind::Corr, "empirical amplitude correlations and decay fit"},
        {"dynsys-check", config::Kind::DynsysCheck, "bit-shift and torus map diagnostics"},
    };

    std::map<std::string, config::Kind> kind_of;
    for (const auto& def : defs) {
        CLI::App* sub = app.add_subcommand(def.name, def.desc);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed, "override the run seed");
        sub->add_option("--workers", workers, "worker thread count (default: logical CPUs)");
        sub->add_option("--out", out_flag, "output directory (default: $CLOCKSPEC_OUT or .)");
        sub->add_flag("--quiet", quiet, "suppress gate and output-path lines");
        kind_of[def.name] = def.kind;
    }

    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.emplace_back("clockspec");
    for (auto& a : args) full.push_back(std::move(a));
    std::vector<char*> argv;
    argv.reserve(full.size());
    for (auto& s : full) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const config::Kind kind = kind_of.at(sub->get_name());

    config::Overrides ov;
    if (sub->count("--seed") > 0) {
        ov.has_seed = true;
        ov.seed = seed;
    }
    ov.has_workers = true;
    ov.workers = sub->count("--workers") > 0 ? workers : default_workers();

    try {
        const config::Request req = config::parse_file(config_path, kind, ov);

        report::Report rep = dispatch(req);
        rep.effective_config = req.effective;
        rep.config_hash = req.hash;

        const std::string out_dir = resolve_out_dir(out_flag);
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory: " + out_dir);
        const auto paths = rep.write(out_dir);

        if (!quiet) {
            for (const auto& g : rep.gates)
                std::printf("[%s] %-24s %.6g %s %.6g\n", g.pass ? "PASS" : "FAIL",
                            g.name.c_str(), g.value, g.cmp.c_str(), g.threshold);
            for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
        }
        return rep.all_pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace clockspec::cli
