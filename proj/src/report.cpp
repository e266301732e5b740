#include "clockspec/report.hpp"

#include <cstdio>
#include <fstream>

#include "clockspec/common.hpp"

namespace clockspec::report {

bool Report::all_pass() const {
    for (const Gate& g : gates) {
        if (!g.pass) return false;
    }
    return true;
}

nlohmann::json Report::to_json() const {
    nlohmann::json gj = nlohmann::json::array();
    for (const Gate& g : gates) {
        gj.push_back({{"name", g.name},
                      {"value", g.value},
                      {"threshold", g.threshold},
                      {"cmp", g.cmp},
                      {"pass", g.pass}});
    }
    return nlohmann::json{{"kind", kind},
                          {"config", effective_config},
                          {"config_hash", config_hash},
                          {"summary", summary},
                          {"gates", gj},
                          {"all_pass", all_pass()}};
}

std::vector<std::string> Report::write(const std::string& out_dir) const {
    const std::string stem = kind + "_" + (config_hash.empty() ? "report" : config_hash);
    const std::string base = out_dir.empty() ? stem : out_dir + "/" + stem;
    std::vector<std::string> written;

    {
        const std::string path = base + ".json";
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ConfigError("cannot open report file for writing: " + path);
        os << to_json().dump(2) << '\n';
        if (!os) throw ConfigError("failed writing report file: " + path);
        written.push_back(path);
    }
    {
        const std::string path = base + ".csv";
        table.write(path);
        written.push_back(path);
    }
    for (const auto& [suffix, tbl] : extra_tables) {
        const std::string path = base + "_" + suffix + ".csv";
        tbl.write(path);
        written.push_back(path);
    }
    return written;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string config_hash_hex(const nlohmann::json& j) {
    const std::uint64_t h = fnv1a64(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace clockspec::report
