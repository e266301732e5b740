#pragma once

// CSV writing helpers.  Comma separator, '.' decimal point, LF line
// endings, one header row.  Numbers are printed with %.17g so that
// reruns produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "clockspec/common.hpp"

namespace clockspec {

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<std::string>& cells) { rows.push_back(cells); }

    std::string serialize() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += columns[c];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ',';
                out += row[c];
            }
            out += '\n';
        }
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw NumericError("cannot open output file: " + path);
        const std::string s = serialize();
        f.write(s.data(), static_cast<std::streamsize>(s.size()));
        if (!f) throw NumericError("failed writing output file: " + path);
    }
};

}  // namespace clockspec
