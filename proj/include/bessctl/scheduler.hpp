#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "bessctl/csv.hpp"
#include "bessctl/errors.hpp"
#include "bessctl/lp.hpp"
#include "bessctl/markets.hpp"
#include "bessctl/solver.hpp"
#include "bessctl/timeseries.hpp"

namespace bessctl {

/// Nameplate data and operating envelope of the storage system.
struct BatteryParams {
    double e_nom = 0.0; // nominal capacity, kWh
    double e_min = 0.0; // lower energy bound, kWh
    double e_max = 0.0; // upper energy bound, kWh
    double b_max = 0.0; // converter power rating, kW
    double eta = 1.0;   // charge/discharge efficiency, symmetric
    double soe0 = 0.0;  // state of energy at the start of the horizon, kWh

    void validate() const {
        if (!(e_nom > 0.0) || e_min < 0.0 || !(e_min < e_max) || e_max > e_nom + 1e-9) {
            throw InvalidModel("BatteryParams: need 0 <= e_min < e_max <= e_nom");
        }
        if (!(b_max > 0.0)) {
            throw InvalidModel("BatteryParams: b_max must be positive");
        }
        if (!(eta > 0.0) || eta > 1.0) {
            throw InvalidModel("BatteryParams: eta must lie in (0, 1]");
        }
        if (!std::isfinite(soe0) || soe0 < 0.0 || soe0 > e_nom + 1e-9) {
            throw InvalidModel("BatteryParams: soe0 outside [0, e_nom]");
        }
    }
};

/// Day-ahead decision bundle produced by the scheduler.
struct Schedule {
    TimeSeries b_local_plus;  // charging reserved for local services, kW
    TimeSeries b_local_minus; // discharging reserved for local services, kW
    std::vector<TimeSeries> b_afrr_plus;  // per-scenario down-regulation charging, kW
    std::vector<TimeSeries> b_afrr_minus; // per-scenario up-regulation discharging, kW
    std::vector<TimeSeries> soe;          // per-scenario state of energy, kWh
    double p_peak_shave = 0.0;            // committed peak level, kW
    TimeSeries dispatch_plan;             // grid profile to track, kW
    double objective_chf = 0.0;

    int steps() const { return b_local_plus.steps(); }
    int scenario_count() const { return static_cast<int>(b_afrr_plus.size()); }
};

/// Variable index bookkeeping for the day-ahead program.
struct DayAheadVars {
    std::vector<int> b_local_plus, b_local_minus;
    std::vector<int> s; // epigraph of the positive part of the grid profile
    int peak = -1;
    std::vector<std::vector<int>> b_afrr_plus, b_afrr_minus; // [scenario][t]
    std::vector<std::vector<int>> charge_flag;               // binaries c
    std::vector<std::vector<int>> soe;
};

struct DayAheadModel {
    LinearProgram lp;
    DayAheadVars vars;
    double objective_offset = 0.0; // constant export-value term of the energy cost
};

/// Assembles the two-stage stochastic MILP for the daily horizon: energy and
/// demand charges on the first-stage profile, expected regulation revenue over
/// the scenarios, battery dynamics and the peak/transformer limits.
inline DayAheadModel build_day_ahead(const TimeSeries& l_hat, const BatteryParams& battery,
                                     const SiteParams& site, const TariffBook& book,
                                     const ScenarioSet& scen) {
    battery.validate();
    site.validate();
    if (l_hat.grid != book.pi_import.grid) {
        throw GridMismatch("build_day_ahead: forecast and tariff grids differ");
    }
    const int T = l_hat.steps();
    if (scen.steps() != T) {
        throw GridMismatch("build_day_ahead: scenario horizon differs from the forecast");
    }
    for (int t = 0; t < T; ++t) {
        if (!std::isfinite(l_hat[t])) {
            throw InvalidValue("build_day_ahead: non-finite net-load forecast");
        }
    }
    if (site.transformer_kw < battery.b_max) {
        throw InvalidModel("build_day_ahead: transformer rating below battery power");
    }

    double soe0 = battery.soe0;
    if (soe0 < battery.e_min || soe0 > battery.e_max) {
        const double clamped = std::clamp(soe0, battery.e_min, battery.e_max);
        std::cerr << "[bessctl] warning: SOE(0) " << soe0 << " kWh outside ["
                  << battery.e_min << ", " << battery.e_max << "], clamped to " << clamped
                  << "\n";
        soe0 = clamped;
    }

    const double dt = l_hat.grid.step_hours();
    const int W = scen.count();
    DayAheadModel model;
    auto& lp = model.lp;
    auto& vars = model.vars;

    vars.b_local_plus.resize(T);
    vars.b_local_minus.resize(T);
    vars.s.resize(T);
    for (int t = 0; t < T; ++t) {
        vars.b_local_plus[t] = lp.add_variable("bl_p_" + std::to_string(t), 0.0, battery.b_max);
        vars.b_local_minus[t] = lp.add_variable("bl_m_" + std::to_string(t), 0.0, battery.b_max);
        vars.s[t] = lp.add_variable("s_" + std::to_string(t), 0.0, kInfinity);
    }
    vars.peak = lp.add_variable("peak_shave", 0.0, kInfinity);

    vars.b_afrr_plus.assign(W, {});
    vars.b_afrr_minus.assign(W, {});
    vars.charge_flag.assign(W, {});
    vars.soe.assign(W, {});
    for (int w = 0; w < W; ++w) {
        const auto& sc = scen.scenarios[static_cast<size_t>(w)];
        for (int t = 0; t < T; ++t) {
            const std::string suffix = "_w" + std::to_string(w) + "_" + std::to_string(t);
            const int ap = lp.add_variable("ba_p" + suffix, 0.0,
                                           sc.premium_down.blocked(t) ? 0.0 : battery.b_max);
            const int am = lp.add_variable("ba_m" + suffix, 0.0,
                                           sc.premium_up.blocked(t) ? 0.0 : battery.b_max);
            const int c = lp.add_binary("c" + suffix);
            const int e = lp.add_variable("soe" + suffix, battery.e_min, battery.e_max);
            vars.b_afrr_plus[static_cast<size_t>(w)].push_back(ap);
            vars.b_afrr_minus[static_cast<size_t>(w)].push_back(am);
            vars.charge_flag[static_cast<size_t>(w)].push_back(c);
            vars.soe[static_cast<size_t>(w)].push_back(e);
        }
    }

    // objective: energy charge via the convex reformulation
    //   (pi_imp - pi_exp)' s + pi_exp' (L + B+ - B-)
    // plus the demand charge and minus the expected regulation revenue
    model.objective_offset = 0.0;
    for (int t = 0; t < T; ++t) {
        const double gap = book.pi_import[t] - book.pi_export[t];
        lp.set_objective(vars.s[t], dt * gap);
        lp.set_objective(vars.b_local_plus[t], dt * book.pi_export[t]);
        lp.set_objective(vars.b_local_minus[t], -dt * book.pi_export[t]);
        model.objective_offset += dt * book.pi_export[t] * l_hat[t];
    }
    lp.set_objective(vars.peak, book.pi_power_per_day);
    for (int w = 0; w < W; ++w) {
        const auto& sc = scen.scenarios[static_cast<size_t>(w)];
        const double pw = scen.probabilities[static_cast<size_t>(w)];
        for (int t = 0; t < T; ++t) {
            if (!sc.premium_down.blocked(t)) {
                lp.set_objective(vars.b_afrr_plus[static_cast<size_t>(w)][static_cast<size_t>(t)],
                                 -dt * pw * sc.premium_down.premium(t));
            }
            if (!sc.premium_up.blocked(t)) {
                lp.set_objective(vars.b_afrr_minus[static_cast<size_t>(w)][static_cast<size_t>(t)],
                                 -dt * pw * sc.premium_up.premium(t));
            }
        }
    }

    // epigraph and peak-shave rows on the first-stage grid profile
    for (int t = 0; t < T; ++t) {
        lp.add_constraint({{vars.b_local_plus[t], 1.0},
                           {vars.b_local_minus[t], -1.0},
                           {vars.s[t], -1.0}},
                          Relation::LessEqual, -l_hat[t]);
        lp.add_constraint({{vars.b_local_plus[t], 1.0},
                           {vars.b_local_minus[t], -1.0},
                           {vars.peak, -1.0}},
                          Relation::LessEqual, -l_hat[t]);
    }

    for (int w = 0; w < W; ++w) {
        const auto& ap = vars.b_afrr_plus[static_cast<size_t>(w)];
        const auto& am = vars.b_afrr_minus[static_cast<size_t>(w)];
        const auto& cf = vars.charge_flag[static_cast<size_t>(w)];
        const auto& se = vars.soe[static_cast<size_t>(w)];
        for (int t = 0; t < T; ++t) {
            // mutually exclusive charge/discharge power limits
            lp.add_constraint({{vars.b_local_plus[t], 1.0},
                               {ap[static_cast<size_t>(t)], 1.0},
                               {cf[static_cast<size_t>(t)], -battery.b_max}},
                              Relation::LessEqual, 0.0);
            lp.add_constraint({{vars.b_local_minus[t], 1.0},
                               {am[static_cast<size_t>(t)], 1.0},
                               {cf[static_cast<size_t>(t)], battery.b_max}},
                              Relation::LessEqual, battery.b_max);
            // state-of-energy recursion (the cumulative sum of all past actions)
            std::vector<std::pair<int, double>> soe_row{
                {se[static_cast<size_t>(t)], 1.0},
                {vars.b_local_plus[t], -dt * battery.eta},
                {ap[static_cast<size_t>(t)], -dt * battery.eta},
                {vars.b_local_minus[t], dt / battery.eta},
                {am[static_cast<size_t>(t)], dt / battery.eta}};
            double rhs = 0.0;
            if (t == 0) {
                rhs = soe0;
            } else {
                soe_row.push_back({se[static_cast<size_t>(t - 1)], -1.0});
            }
            lp.add_constraint(std::move(soe_row), Relation::Equal, rhs);
            // transformer limit on the full exchange including regulation
            lp.add_constraint({{vars.b_local_plus[t], 1.0},
                               {vars.b_local_minus[t], -1.0},
                               {ap[static_cast<size_t>(t)], 1.0},
                               {am[static_cast<size_t>(t)], -1.0}},
                              Relation::LessEqual, site.transformer_kw - l_hat[t]);
        }
        // the day must end where it started
        lp.fix_variable(se[static_cast<size_t>(T - 1)], soe0);
    }
    return model;
}

/// Dispatch plan: forecast net load plus the scheduled local battery profile.
/// Regulation allocations are excluded (they are billed separately).
inline TimeSeries dispatch_plan(const Schedule& schedule, const TimeSeries& l_hat) {
    if (schedule.b_local_plus.grid != l_hat.grid) {
        throw GridMismatch("dispatch_plan: schedule and forecast grids differ");
    }
    TimeSeries out(l_hat.grid, 0.0, Unit::kW);
    for (int t = 0; t < l_hat.steps(); ++t) {
        out[t] = l_hat[t] + schedule.b_local_plus[t] - schedule.b_local_minus[t];
    }
    return out;
}

inline Schedule solve_day_ahead(const TimeSeries& l_hat, const BatteryParams& battery,
                                const SiteParams& site, const TariffBook& book,
                                const ScenarioSet& scen, const SolverOptions& opt = {}) {
    DayAheadModel model = build_day_ahead(l_hat, battery, site, book, scen);
    const Solution sol = solve_milp(model.lp, opt);
    if (sol.status == SolveStatus::Infeasible) {
        throw InvalidModel(
            "solve_day_ahead: infeasible program; the transformer limit or battery energy "
            "envelope cannot accommodate the forecast net load");
    }
    if (sol.status == SolveStatus::Unbounded) {
        throw InvalidModel("solve_day_ahead: unbounded program (check tariff signs)");
    }

    const int T = l_hat.steps();
    const int W = scen.count();
    Schedule out;
    out.b_local_plus = TimeSeries(l_hat.grid, 0.0, Unit::kW);
    out.b_local_minus = TimeSeries(l_hat.grid, 0.0, Unit::kW);
    for (int t = 0; t < T; ++t) {
        out.b_local_plus[t] = sol.value(model.vars.b_local_plus[static_cast<size_t>(t)]);
        out.b_local_minus[t] = sol.value(model.vars.b_local_minus[static_cast<size_t>(t)]);
    }
    for (int w = 0; w < W; ++w) {
        TimeSeries ap(l_hat.grid, 0.0, Unit::kW);
        TimeSeries am(l_hat.grid, 0.0, Unit::kW);
        TimeSeries se(l_hat.grid, 0.0, Unit::kWh);
        for (int t = 0; t < T; ++t) {
            ap[t] = sol.value(model.vars.b_afrr_plus[static_cast<size_t>(w)][static_cast<size_t>(t)]);
            am[t] =
                sol.value(model.vars.b_afrr_minus[static_cast<size_t>(w)][static_cast<size_t>(t)]);
            se[t] = sol.value(model.vars.soe[static_cast<size_t>(w)][static_cast<size_t>(t)]);
        }
        out.b_afrr_plus.push_back(std::move(ap));
        out.b_afrr_minus.push_back(std::move(am));
        out.soe.push_back(std::move(se));
    }
    out.dispatch_plan = dispatch_plan(out, l_hat);
    double peak = 0.0;
    for (int t = 0; t < T; ++t) {
        peak = std::max(peak, out.dispatch_plan[t]);
    }
    out.p_peak_shave = peak; // the epigraph binds at optimality
    out.objective_chf = sol.objective + model.objective_offset;
    return out;
}

// --- schedule serialization ------------------------------------------------

inline void write_schedule_csv(const std::string& path, const Schedule& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidValue("write_schedule_csv: cannot open '" + path + "'");
    }
    f << "timestamp_iso8601,p_hat_kw,b_local_plus_kw,b_local_minus_kw";
    for (int w = 0; w < s.scenario_count(); ++w) {
        f << ",b_afrr_plus_w" << w << "_kw,b_afrr_minus_w" << w << "_kw,soe_w" << w << "_kwh";
    }
    f << "\n";
    for (int t = 0; t < s.steps(); ++t) {
        f << format_iso8601(s.b_local_plus.grid.time_at(t)) << ',' << format_value(s.dispatch_plan[t])
          << ',' << format_value(s.b_local_plus[t]) << ',' << format_value(s.b_local_minus[t]);
        for (int w = 0; w < s.scenario_count(); ++w) {
            f << ',' << format_value(s.b_afrr_plus[static_cast<size_t>(w)][t]) << ','
              << format_value(s.b_afrr_minus[static_cast<size_t>(w)][t]) << ','
              << format_value(s.soe[static_cast<size_t>(w)][t]);
        }
        f << "\n";
    }
}

inline void write_schedule_summary(const std::string& path, const Schedule& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidValue("write_schedule_summary: cannot open '" + path + "'");
    }
    f << "{\n  \"objective_chf\": " << format_value(s.objective_chf)
      << ",\n  \"p_peak_shave_kw\": " << format_value(s.p_peak_shave) << "\n}\n";
}

inline Schedule read_schedule_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidValue("read_schedule_csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw InvalidLength("read_schedule_csv: empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_csv_line(line);
    if (header.size() < 4 || (header.size() - 4) % 3 != 0) {
        throw InvalidValue("read_schedule_csv: unexpected header layout");
    }
    const int W = static_cast<int>((header.size() - 4) / 3);
    std::vector<std::chrono::sys_seconds> times;
    std::vector<std::vector<double>> cols(header.size() - 1);
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InvalidValue("read_schedule_csv: ragged row");
        }
        times.push_back(parse_iso8601(fields[0]));
        for (size_t i = 1; i < fields.size(); ++i) {
            cols[i - 1].push_back(std::stod(fields[i]));
        }
    }
    if (times.size() < 2) {
        throw InvalidLength("read_schedule_csv: need at least two rows");
    }
    const auto step = std::chrono::duration_cast<std::chrono::seconds>(times[1] - times[0]);
    TimeGrid grid(times[0], static_cast<int>(step.count()), static_cast<int>(times.size()));

    Schedule s;
    s.dispatch_plan = TimeSeries(grid, cols[0], Unit::kW);
    s.b_local_plus = TimeSeries(grid, cols[1], Unit::kW);
    s.b_local_minus = TimeSeries(grid, cols[2], Unit::kW);
    for (int w = 0; w < W; ++w) {
        s.b_afrr_plus.emplace_back(grid, cols[static_cast<size_t>(3 + 3 * w)], Unit::kW);
        s.b_afrr_minus.emplace_back(grid, cols[static_cast<size_t>(4 + 3 * w)], Unit::kW);
        s.soe.emplace_back(grid, cols[static_cast<size_t>(5 + 3 * w)], Unit::kWh);
    }
    double peak = 0.0;
    for (int t = 0; t < grid.steps; ++t) {
        peak = std::max(peak, s.dispatch_plan[t]);
    }
    s.p_peak_shave = peak;
    return s;
}

} // namespace bessctl
