#pragma once

// Experiment report: a main CSV table, optional extra tables, a JSON summary
// with pass/fail gates, and the effective configuration for provenance.
// File naming: <kind>_<confighash>.json / .csv (+ _<suffix>.csv).

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "clockspec/csv.hpp"

namespace clockspec::report {

struct Gate {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string cmp;  // "<=", "<", ">=", "decreasing", ...
    bool pass = false;
};

struct Report {
    std::string kind;
    CsvTable table;
    std::vector<std::pair<std::string, CsvTable>> extra_tables;  // suffix -> table
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Gate> gates;
    nlohmann::json effective_config = nlohmann::json::object();
    std::string config_hash;

    bool all_pass() const;
    nlohmann::json to_json() const;

    // Writes the JSON and CSV files; returns the paths written.
    std::vector<std::string> write(const std::string& out_dir) const;
};

std::uint64_t fnv1a64(std::string_view s);

// Hash of the canonical serialization of a JSON document (16 hex digits).
std::string config_hash_hex(const nlohmann::json& j);

}  // namespace clockspec::report
