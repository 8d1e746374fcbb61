#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bessctl/errors.hpp"
#include "bessctl/timeseries.hpp"

namespace bessctl {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

/// Repo-wide series format: header `timestamp_iso8601,value`, one row per
/// grid step, UTF-8, LF line endings.
inline void write_series_csv(const std::string& path, const TimeSeries& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidValue("write_series_csv: cannot open '" + path + "'");
    }
    f << "timestamp_iso8601,value\n";
    for (int i = 0; i < s.steps(); ++i) {
        f << format_iso8601(s.grid.time_at(i)) << ',' << format_value(s.values[i]) << '\n';
    }
}

/// Reads a series file; the grid (start and step) is inferred from the first
/// two timestamps, so at least two rows are required.
inline TimeSeries read_series_csv(const std::string& path, Unit unit) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidValue("read_series_csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw InvalidLength("read_series_csv: empty file '" + path + "'");
    }
    std::vector<std::chrono::sys_seconds> times;
    std::vector<double> values;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw InvalidValue("read_series_csv: malformed row '" + line + "' in " + path);
        }
        times.push_back(parse_iso8601(fields[0]));
        values.push_back(std::stod(fields[1]));
    }
    if (values.size() < 2) {
        throw InvalidLength("read_series_csv: need at least two rows to infer the grid: " + path);
    }
    const auto step = std::chrono::duration_cast<std::chrono::seconds>(times[1] - times[0]);
    for (size_t i = 1; i < times.size(); ++i) {
        if (times[i] - times[i - 1] != step) {
            throw GridMismatch("read_series_csv: non-uniform timestamps in " + path);
        }
    }
    TimeGrid grid(times[0], static_cast<int>(step.count()), static_cast<int>(values.size()));
    return TimeSeries(grid, std::move(values), unit);
}

} // namespace bessctl
