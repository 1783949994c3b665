#ifndef MIGMINE_CSV_HPP
#define MIGMINE_CSV_HPP

// Minimal RFC 4180 field quoting/splitting for the CSV artifacts.

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "migmine/model.hpp"

namespace migmine::csv {

inline std::string field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) out += ',';
        out += field(fields[k]);
    }
    return out;
}

/// Splits one CSV line. Quoted fields may contain commas and doubled quotes
/// but not newlines.
inline std::vector<std::string> split(std::string_view line, std::size_t line_no = 0) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    current += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"' && current.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
            was_quoted = false;
        } else if (c == '\r' && k + 1 == line.size()) {
            break;
        } else {
            current += c;
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted CSV field");
    fields.push_back(std::move(current));
    return fields;
}

/// Fixed-point rendering used wherever a report must be byte-stable.
inline std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

}  // namespace migmine::csv

#endif  // MIGMINE_CSV_HPP
