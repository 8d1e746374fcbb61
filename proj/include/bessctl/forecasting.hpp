#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bessctl/errors.hpp"
#include "bessctl/markets.hpp"
#include "bessctl/timeseries.hpp"

namespace bessctl {

enum class DayType { Working, NonWorking };

inline DayType parse_day_type(const std::string& s) {
    if (s == "working") {
        return DayType::Working;
    }
    if (s == "non-working" || s == "non_working" || s == "nonworking") {
        return DayType::NonWorking;
    }
    throw InvalidValue("unknown day type '" + s + "'");
}

inline const char* day_type_name(DayType t) {
    return t == DayType::Working ? "working" : "non-working";
}

/// One archived day of building measurements plus the meteorological summary
/// used for similarity matching.
struct HistoryDay {
    std::chrono::year_month_day date{};
    DayType day_type = DayType::Working;
    double mean_irradiance = 0.0;  // W/m^2
    double mean_temperature = 0.0; // degC
    TimeSeries gross_load;         // kW, length T
    TimeSeries pv;                 // kW, length T
};

struct ForecastTarget {
    std::chrono::year_month_day date{};
    DayType day_type = DayType::Working;
    double mean_irradiance = 0.0;
    double mean_temperature = 0.0;
};

struct ForecastConfig {
    int n_similar = 5;
    double w_irradiance = 1.0;
    double w_temperature = 1.0;
    int recency_window_days = 60; // most recent matching days considered

    void validate() const {
        if (n_similar < 1) {
            throw InvalidValue("ForecastConfig: n_similar must be >= 1");
        }
        if (w_irradiance < 0.0 || w_temperature < 0.0) {
            throw InvalidValue("ForecastConfig: weights must be non-negative");
        }
    }
};

/// Picks the N most meteorologically similar days of the target day type.
/// Candidates are first narrowed to the most recent matching days, then
/// ranked by z-score-normalized weighted Euclidean distance on
/// (mean irradiance, mean temperature); ties fall to the day closest in time.
inline std::vector<HistoryDay> select_similar_days(const std::vector<HistoryDay>& history,
                                                   const ForecastTarget& target,
                                                   const ForecastConfig& cfg) {
    cfg.validate();
    std::vector<const HistoryDay*> candidates;
    for (const auto& d : history) {
        if (d.day_type == target.day_type) {
            candidates.push_back(&d);
        }
    }
    if (static_cast<int>(candidates.size()) < cfg.n_similar) {
        throw InsufficientHistory("select_similar_days: " + std::to_string(candidates.size()) +
                                  " " + day_type_name(target.day_type) + " days on record, need " +
                                  std::to_string(cfg.n_similar));
    }

    const auto day_distance = [&](const HistoryDay* d) {
        const auto a = std::chrono::sys_days(d->date);
        const auto b = std::chrono::sys_days(target.date);
        return std::abs((a - b).count());
    };

    // recency pre-filter
    std::sort(candidates.begin(), candidates.end(), [&](const HistoryDay* a, const HistoryDay* b) {
        const auto da = day_distance(a);
        const auto db = day_distance(b);
        if (da != db) {
            return da < db;
        }
        return std::chrono::sys_days(a->date) < std::chrono::sys_days(b->date);
    });
    if (cfg.recency_window_days > 0 &&
        static_cast<int>(candidates.size()) > cfg.recency_window_days) {
        candidates.resize(static_cast<size_t>(std::max(cfg.recency_window_days, cfg.n_similar)));
    }

    // z-score normalization over the candidate pool
    double mu_irr = 0.0, mu_tmp = 0.0;
    for (const auto* d : candidates) {
        mu_irr += d->mean_irradiance;
        mu_tmp += d->mean_temperature;
    }
    mu_irr /= static_cast<double>(candidates.size());
    mu_tmp /= static_cast<double>(candidates.size());
    double var_irr = 0.0, var_tmp = 0.0;
    for (const auto* d : candidates) {
        var_irr += (d->mean_irradiance - mu_irr) * (d->mean_irradiance - mu_irr);
        var_tmp += (d->mean_temperature - mu_tmp) * (d->mean_temperature - mu_tmp);
    }
    const double sd_irr = std::sqrt(var_irr / static_cast<double>(candidates.size()));
    const double sd_tmp = std::sqrt(var_tmp / static_cast<double>(candidates.size()));

    const auto meteo_distance = [&](const HistoryDay* d) {
        const double di = sd_irr > 0.0 ? (d->mean_irradiance - target.mean_irradiance) / sd_irr : 0.0;
        const double dt =
            sd_tmp > 0.0 ? (d->mean_temperature - target.mean_temperature) / sd_tmp : 0.0;
        return std::sqrt(cfg.w_irradiance * di * di + cfg.w_temperature * dt * dt);
    };

    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const HistoryDay* a, const HistoryDay* b) {
                         const double da = meteo_distance(a);
                         const double db = meteo_distance(b);
                         if (da != db) {
                             return da < db;
                         }
                         return day_distance(a) < day_distance(b);
                     });

    std::vector<HistoryDay> out;
    out.reserve(static_cast<size_t>(cfg.n_similar));
    for (int i = 0; i < cfg.n_similar; ++i) {
        out.push_back(*candidates[static_cast<size_t>(i)]);
    }
    return out;
}

/// Point prediction of the gross load: the pointwise mean of the selected
/// historical profiles.
inline TimeSeries gross_load_forecast(const std::vector<HistoryDay>& selected) {
    if (selected.empty()) {
        throw InvalidLength("gross_load_forecast: no days selected");
    }
    const TimeGrid grid = selected.front().gross_load.grid;
    TimeSeries out(grid, 0.0, Unit::kW);
    for (const auto& d : selected) {
        if (d.gross_load.grid != grid) {
            throw GridMismatch("gross_load_forecast: history days on different grids");
        }
        for (int t = 0; t < grid.steps; ++t) {
            out[t] += d.gross_load[t];
        }
    }
    for (auto& v : out.values) {
        v /= static_cast<double>(selected.size());
    }
    return out;
}

/// Net load = gross demand minus PV generation; negative values mean export.
inline TimeSeries net_load_forecast(const TimeSeries& gross, const TimeSeries& pv) {
    if (gross.grid != pv.grid) {
        throw GridMismatch("net_load_forecast: gross and PV grids differ");
    }
    TimeSeries out(gross.grid, 0.0, Unit::kW);
    for (int t = 0; t < gross.steps(); ++t) {
        out[t] = gross[t] - pv[t];
    }
    return out;
}

/// Half-sine clear-sky stand-in for a physical PV model: zero outside the
/// sun window, capacity*scale at solar noon.
inline TimeSeries clear_sky_pv(const TimeGrid& grid, double capacity_kw, double sunrise_hour,
                               double sunset_hour, double scale = 1.0) {
    if (sunset_hour <= sunrise_hour) {
        throw InvalidValue("clear_sky_pv: sunset must come after sunrise");
    }
    TimeSeries out(grid, 0.0, Unit::kW);
    for (int t = 0; t < grid.steps; ++t) {
        const double h = (t + 0.5) * grid.step_seconds / 3600.0;
        if (h <= sunrise_hour || h >= sunset_hour) {
            continue;
        }
        const double phase = (h - sunrise_hour) / (sunset_hour - sunrise_hour);
        out[t] = capacity_kw * scale * std::sin(std::numbers::pi * phase);
    }
    return out;
}

/// Persistence forecast of the net load for the rest of the current interval.
/// `samples` holds every completed 30-s net-load measurement since the start
/// of the horizon; `k_star` is the last completed sub-step of interval `t`,
/// or -1 right at the interval boundary.
inline double intraday_persistence(std::span<const double> samples, int t, int k_star,
                                   double day_ahead_fallback,
                                   int substeps = kSubstepsPerInterval) {
    if (k_star < -1 || k_star >= substeps) {
        throw InvalidState("intraday_persistence: k_star out of range");
    }
    const long expected = static_cast<long>(t) * substeps + (k_star + 1);
    if (static_cast<long>(samples.size()) != expected) {
        throw InvalidState("intraday_persistence: sample count does not match (t, k_star)");
    }
    if (k_star >= 0) {
        // average of the current interval so far
        double acc = 0.0;
        for (int j = 0; j <= k_star; ++j) {
            acc += samples[static_cast<size_t>(t) * substeps + j];
        }
        return acc / (k_star + 1);
    }
    if (t == 0) {
        return day_ahead_fallback; // no history at simulation start
    }
    // interval boundary: average of the preceding full interval
    double acc = 0.0;
    for (int j = 0; j < substeps; ++j) {
        acc += samples[static_cast<size_t>(t - 1) * substeps + j];
    }
    return acc / substeps;
}

/// aFRR price persistence: the current premium state is assumed to hold for
/// the rest of the interval.
inline ThresholdedPremium premium_persistence(const std::optional<double>& current,
                                              int residual_steps) {
    if (residual_steps < 0) {
        throw InvalidLength("premium_persistence: negative residual length");
    }
    return ThresholdedPremium(
        std::vector<std::optional<double>>(static_cast<size_t>(residual_steps), current));
}

} // namespace bessctl
