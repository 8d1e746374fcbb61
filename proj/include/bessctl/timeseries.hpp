#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bessctl/errors.hpp"

namespace bessctl {

inline constexpr int kSecondsPerDay = 86400;

/// Day-ahead scheduling resolution: 15-minute intervals, T = 96 per day.
inline constexpr int kScheduleStepSeconds = 900;
inline constexpr int kScheduleStepsPerDay = kSecondsPerDay / kScheduleStepSeconds;
inline constexpr double kScheduleStepHours = kScheduleStepSeconds / 3600.0;

/// Real-time control resolution: 30-second sub-steps, K = 30 per interval.
inline constexpr int kControlStepSeconds = 30;
inline constexpr int kSubstepsPerInterval = kScheduleStepSeconds / kControlStepSeconds;
inline constexpr double kControlStepHours = kControlStepSeconds / 3600.0;

enum class Unit { kW, kWh, ChfPerKwh, ChfPerKw };

inline const char* unit_name(Unit u) {
    switch (u) {
    case Unit::kW: return "kW";
    case Unit::kWh: return "kWh";
    case Unit::ChfPerKwh: return "CHF/kWh";
    case Unit::ChfPerKw: return "CHF/kW";
    }
    return "?";
}

/// Fixed-resolution time grid. Values attached to it are piecewise constant
/// over each step.
struct TimeGrid {
    std::chrono::sys_seconds start{};
    int step_seconds = kScheduleStepSeconds;
    int steps = 0;

    TimeGrid() = default;

    TimeGrid(std::chrono::sys_seconds start_, int step_seconds_, int steps_)
        : start(start_), step_seconds(step_seconds_), steps(steps_) {
        if (step_seconds <= 0 || kSecondsPerDay % step_seconds != 0) {
            throw InvalidValue("TimeGrid: step_seconds must be positive and divide 86400");
        }
        if (steps <= 0) {
            throw InvalidLength("TimeGrid: steps must be positive");
        }
    }

    double step_hours() const { return step_seconds / 3600.0; }

    std::chrono::sys_seconds time_at(int i) const {
        return start + std::chrono::seconds(static_cast<long long>(i) * step_seconds);
    }

    bool operator==(const TimeGrid&) const = default;
};

/// Grid-connection parameters of the site.
struct SiteParams {
    double transformer_kw = 0.0;       // rated power of the substation transformer
    int billing_interval_minutes = 15; // demand-charge averaging window

    void validate() const {
        if (!(transformer_kw > 0.0)) {
            throw InvalidValue("SiteParams: transformer rating must be positive");
        }
        if (billing_interval_minutes != 15) {
            throw InvalidValue("SiteParams: billing interval is fixed at 15 minutes");
        }
    }
};

/// Piecewise-constant valued signal on a TimeGrid.
struct TimeSeries {
    TimeGrid grid;
    std::vector<double> values;
    Unit unit = Unit::kW;

    TimeSeries() = default;

    TimeSeries(TimeGrid grid_, std::vector<double> values_, Unit unit_)
        : grid(grid_), values(std::move(values_)), unit(unit_) {
        if (static_cast<int>(values.size()) != grid.steps) {
            throw InvalidLength("TimeSeries: value count does not match grid steps");
        }
    }

    TimeSeries(TimeGrid grid_, double fill, Unit unit_)
        : grid(grid_), values(static_cast<size_t>(grid_.steps), fill), unit(unit_) {}

    int steps() const { return grid.steps; }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
};

/// Running sum: output[t] = sum_{j<=t} x[j]. This is multiplication by the
/// lower-triangular all-ones matrix, applied in O(n).
inline std::vector<double> cumsum_apply(std::span<const double> x) {
    if (x.empty()) {
        throw InvalidLength("cumsum_apply: empty input");
    }
    std::vector<double> out(x.size());
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        acc += x[i];
        out[i] = acc;
    }
    return out;
}

struct PosNegSplit {
    std::vector<double> plus;
    std::vector<double> minus;
};

/// Elementwise positive/negative part decomposition: x = plus - minus with
/// plus, minus >= 0 and plus[t]*minus[t] = 0.
inline PosNegSplit pos_neg_split(std::span<const double> x) {
    PosNegSplit out;
    out.plus.resize(x.size());
    out.minus.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw InvalidValue("pos_neg_split: non-finite entry at index " + std::to_string(i));
        }
        out.plus[i] = x[i] > 0.0 ? x[i] : 0.0;
        out.minus[i] = x[i] < 0.0 ? -x[i] : 0.0;
    }
    return out;
}

/// Average a fine-resolution series onto a coarser, nested grid. Each coarse
/// value is the arithmetic mean of the fine values it covers.
inline TimeSeries resample_avg(const TimeSeries& x, const TimeGrid& target) {
    if (target.step_seconds % x.grid.step_seconds != 0) {
        throw GridMismatch("resample_avg: fine step does not divide coarse step");
    }
    const int ratio = target.step_seconds / x.grid.step_seconds;
    if (x.grid.steps != target.steps * ratio || x.grid.start != target.start) {
        throw GridMismatch("resample_avg: series does not span exactly the target horizon");
    }
    TimeSeries out(target, 0.0, x.unit);
    for (int t = 0; t < target.steps; ++t) {
        double acc = 0.0;
        for (int k = 0; k < ratio; ++k) {
            acc += x.values[static_cast<size_t>(t) * ratio + k];
        }
        out.values[static_cast<size_t>(t)] = acc / ratio;
    }
    return out;
}

/// Replicate a coarse series onto a nested finer grid (piecewise-constant hold).
inline TimeSeries upsample_hold(const TimeSeries& x, int fine_step_seconds) {
    if (fine_step_seconds <= 0 || x.grid.step_seconds % fine_step_seconds != 0) {
        throw GridMismatch("upsample_hold: fine step does not divide coarse step");
    }
    const int ratio = x.grid.step_seconds / fine_step_seconds;
    TimeGrid fine(x.grid.start, fine_step_seconds, x.grid.steps * ratio);
    TimeSeries out(fine, 0.0, x.unit);
    for (int t = 0; t < x.grid.steps; ++t) {
        for (int k = 0; k < ratio; ++k) {
            out.values[static_cast<size_t>(t) * ratio + k] = x.values[static_cast<size_t>(t)];
        }
    }
    return out;
}

// --- ISO 8601 (UTC) timestamp helpers ------------------------------------

inline std::string format_iso8601(std::chrono::sys_seconds tp) {
    using namespace std::chrono;
    const auto d = floor<days>(tp);
    const year_month_day ymd(d);
    const hh_mm_ss<seconds> tod(tp - d);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(tod.hours().count()),
                  static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
    return buf;
}

inline std::chrono::sys_seconds parse_iso8601(const std::string& s) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se) < 3) {
        throw InvalidValue("parse_iso8601: cannot parse timestamp '" + s + "'");
    }
    const year_month_day ymd{year(y), month(static_cast<unsigned>(mo)),
                             day(static_cast<unsigned>(d))};
    if (!ymd.ok()) {
        throw InvalidValue("parse_iso8601: invalid calendar date '" + s + "'");
    }
    return sys_days(ymd) + hours(h) + minutes(mi) + seconds(se);
}

inline std::chrono::year_month_day parse_date(const std::string& s) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &mo, &d) != 3) {
        throw InvalidValue("parse_date: cannot parse date '" + s + "'");
    }
    const year_month_day ymd{year(y), month(static_cast<unsigned>(mo)),
                             day(static_cast<unsigned>(d))};
    if (!ymd.ok()) {
        throw InvalidValue("parse_date: invalid calendar date '" + s + "'");
    }
    return ymd;
}

inline std::string format_date(std::chrono::year_month_day ymd) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace bessctl
