#pragma once

// JSON experiment configuration: strict parsing (unknown keys are errors),
// defaults materialized into an effective-config echo whose hash names the
// output files.  Worker count and output directory never enter the echo,
// so reruns with different parallelism produce identical artifacts.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "clockspec/potential.hpp"
#include "clockspec/stats.hpp"

namespace clockspec::config {

enum class Kind {
    Clock,
    Theta,
    Holder,
    Moments,
    Laplace,
    Spectrum,
    PhaseDump,
    Corr,
    DynsysCheck
};

const char* kind_name(Kind kind);

struct Overrides {
    bool has_seed = false;
    std::uint64_t seed = 0;
    bool has_workers = false;
    int workers = 0;
};

struct Request {
    Kind kind = Kind::Clock;
    bool has_model = false;
    potential::PotentialModel model;
    stats::RunConfig run;

    stats::ClockParams clock;
    stats::ThetaParams theta;
    stats::HolderParams holder;
    stats::MomentParams moments;
    stats::LaplaceParams laplace;
    stats::CorrParams corr;
    stats::DynsysParams dynsys;
    stats::SpectrumParams spectrum;
    stats::PhaseDumpParams phase_dump;

    nlohmann::json effective;  // fully materialized; excludes workers/output paths
    std::string hash;          // config_hash_hex(effective)
};

Request parse_json(const nlohmann::json& j, Kind kind, const Overrides& ov = {});
Request parse_file(const std::string& path, Kind kind, const Overrides& ov = {});

}  // namespace clockspec::config
