#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hedonia/common.hpp"

namespace hedonia {

// Minimal delimited-text table. All pipeline inputs and outputs are plain
// comma-separated files with a header row; fields never contain commas.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
    int require_column(const std::string& name) const {
        const int c = column(name);
        if (c < 0) throw DataError("missing column: " + name);
        return c;
    }
};

inline std::vector<std::string> split_fields(const std::string& line,
                                             char delim = ',') {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

inline Table read_table(const std::string& path, char delim = ',') {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open table: " + path);
    Table t;
    std::string line;
    // '#' lines carry provenance (config hash) and are not data
    do {
        if (!std::getline(f, line)) throw DataError("empty table: " + path);
        if (!line.empty() && line.back() == '\r') line.pop_back();
    } while (line.empty() || line[0] == '#');
    t.header = split_fields(line, delim);
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, delim);
        if (fields.size() != t.header.size())
            throw DataError("row width mismatch in " + path + ": " + line);
        t.rows.push_back(std::move(fields));
    }
    return t;
}

inline void write_table(const std::string& path, const Table& t,
                        char delim = ',') {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open table for writing: " + path);
    for (std::size_t i = 0; i < t.header.size(); ++i)
        f << (i ? std::string(1, delim) : "") << t.header[i];
    f << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            f << (i ? std::string(1, delim) : "") << row[i];
        f << "\n";
    }
    if (!f) throw DataError("table write failed: " + path);
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("cannot parse number for " + what + ": '" + s + "'");
    }
}

// Fixed shortest round-trip formatting so identical values always
// serialize to identical bytes.
inline std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace hedonia
