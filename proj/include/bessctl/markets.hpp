#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bessctl/errors.hpp"
#include "bessctl/timeseries.hpp"

namespace bessctl {

/// aFRR activation premiums after thresholding against the retail tariff:
/// each step is either a strictly positive premium in CHF/kWh or Blocked
/// (price at or below the import tariff; no activation allowed). Blocked is a
/// sentinel rather than a large negative coefficient so solver matrices stay
/// finite.
class ThresholdedPremium {
public:
    ThresholdedPremium() = default;

    explicit ThresholdedPremium(std::vector<std::optional<double>> values)
        : values_(std::move(values)) {
        for (const auto& v : values_) {
            if (v.has_value() && (!std::isfinite(*v) || *v <= 0.0)) {
                throw InvalidValue("ThresholdedPremium: premiums must be finite and > 0");
            }
        }
    }

    static ThresholdedPremium all_blocked(int steps) {
        return ThresholdedPremium(
            std::vector<std::optional<double>>(static_cast<size_t>(steps), std::nullopt));
    }

    int steps() const { return static_cast<int>(values_.size()); }
    bool blocked(int t) const { return !values_[static_cast<size_t>(t)].has_value(); }
    double premium(int t) const { return values_[static_cast<size_t>(t)].value(); }
    const std::vector<std::optional<double>>& values() const { return values_; }

private:
    std::vector<std::optional<double>> values_;
};

/// Retail, feed-in and balancing tariffs over the scheduling horizon.
/// Construction enforces the convexity precondition of the energy-cost
/// reformulation: the import tariff must dominate the export tariff at every
/// step.
struct TariffBook {
    TimeSeries pi_import;      // CHF/kWh
    TimeSeries pi_export;      // CHF/kWh
    double pi_power_per_day;   // CHF/kW over the daily scheduling horizon
    TimeSeries pi_afrr_up;     // CHF/kWh, raw upward-regulation prices
    TimeSeries pi_afrr_down;   // CHF/kWh, raw downward-regulation prices

    TariffBook(TimeSeries import_, TimeSeries export_, double power_per_day,
               std::optional<TimeSeries> afrr_up = std::nullopt,
               std::optional<TimeSeries> afrr_down = std::nullopt)
        : pi_import(std::move(import_)), pi_export(std::move(export_)),
          pi_power_per_day(power_per_day) {
        if (pi_import.grid != pi_export.grid) {
            throw GridMismatch("TariffBook: import/export tariff grids differ");
        }
        if (!std::isfinite(pi_power_per_day) || pi_power_per_day < 0.0) {
            throw InvalidValue("TariffBook: power tariff must be finite and >= 0");
        }
        for (int t = 0; t < pi_import.steps(); ++t) {
            if (!std::isfinite(pi_import[t]) || !std::isfinite(pi_export[t])) {
                throw InvalidValue("TariffBook: tariffs must be finite");
            }
            if (pi_import[t] - pi_export[t] < 0.0) {
                throw NonConvexTariffs("TariffBook: import tariff below export tariff at step " +
                                       std::to_string(t));
            }
        }
        pi_afrr_up = afrr_up ? std::move(*afrr_up) : TimeSeries(pi_import.grid, 0.0, Unit::ChfPerKwh);
        pi_afrr_down =
            afrr_down ? std::move(*afrr_down) : TimeSeries(pi_import.grid, 0.0, Unit::ChfPerKwh);
        if (pi_afrr_up.grid != pi_import.grid || pi_afrr_down.grid != pi_import.grid) {
            throw GridMismatch("TariffBook: aFRR price grids differ from the tariff grid");
        }
    }
};

/// One equiprobable-style scenario: thresholded premium trajectories for both
/// regulation directions.
struct Scenario {
    ThresholdedPremium premium_down; // rewards charging (down-regulation)
    ThresholdedPremium premium_up;   // rewards discharging (up-regulation)
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    std::vector<double> probabilities;

    ScenarioSet(std::vector<Scenario> scenarios_, std::vector<double> probabilities_)
        : scenarios(std::move(scenarios_)), probabilities(std::move(probabilities_)) {
        if (scenarios.empty() || scenarios.size() != probabilities.size()) {
            throw InvalidModel("ScenarioSet: need one probability per scenario");
        }
        double sum = 0.0;
        for (double p : probabilities) {
            if (!(p >= 0.0)) {
                throw InvalidValue("ScenarioSet: probabilities must be non-negative");
            }
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-12) {
            throw InvalidValue("ScenarioSet: probabilities must sum to 1");
        }
        const int steps = scenarios.front().premium_down.steps();
        for (const auto& s : scenarios) {
            if (s.premium_down.steps() != steps || s.premium_up.steps() != steps) {
                throw GridMismatch("ScenarioSet: scenarios span different horizons");
            }
        }
    }

    static ScenarioSet equiprobable(std::vector<Scenario> scenarios_) {
        const size_t n = scenarios_.size();
        return ScenarioSet(std::move(scenarios_),
                           std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0));
    }

    int count() const { return static_cast<int>(scenarios.size()); }
    int steps() const { return scenarios.front().premium_down.steps(); }
};

/// Premium construction: the activation price must strictly exceed the retail
/// import tariff, otherwise the step is Blocked.
inline ThresholdedPremium threshold_premiums(const TimeSeries& pi_afrr,
                                             const TimeSeries& pi_import) {
    if (pi_afrr.grid != pi_import.grid) {
        throw GridMismatch("threshold_premiums: price and tariff grids differ");
    }
    std::vector<std::optional<double>> values(static_cast<size_t>(pi_afrr.steps()));
    for (int t = 0; t < pi_afrr.steps(); ++t) {
        if (pi_afrr[t] > pi_import[t]) {
            values[static_cast<size_t>(t)] = pi_afrr[t] - pi_import[t];
        }
    }
    return ThresholdedPremium(std::move(values));
}

/// Daily energy charge: imports priced at the retail tariff, exports credited
/// at the feed-in tariff.
inline double energy_charge(const TimeSeries& p_plus, const TimeSeries& p_minus,
                            const TariffBook& book) {
    if (p_plus.grid != book.pi_import.grid || p_minus.grid != book.pi_import.grid) {
        throw GridMismatch("energy_charge: flow grids differ from the tariff grid");
    }
    const double dt = p_plus.grid.step_hours();
    double total = 0.0;
    for (int t = 0; t < p_plus.steps(); ++t) {
        if (p_plus[t] < 0.0 || p_minus[t] < 0.0 || !std::isfinite(p_plus[t]) ||
            !std::isfinite(p_minus[t])) {
            throw InvalidValue("energy_charge: flows must be non-negative and finite");
        }
        total += book.pi_import[t] * p_plus[t] - book.pi_export[t] * p_minus[t];
    }
    return dt * total;
}

/// Daily demand charge: the highest average consumption step sets the bill.
inline double power_charge(const TimeSeries& p_plus, double pi_power_per_day) {
    if (p_plus.steps() == 0) {
        throw InvalidLength("power_charge: empty series");
    }
    double peak = 0.0;
    for (int t = 0; t < p_plus.steps(); ++t) {
        if (p_plus[t] < 0.0 || !std::isfinite(p_plus[t])) {
            throw InvalidValue("power_charge: flows must be non-negative and finite");
        }
        peak = std::max(peak, p_plus[t]);
    }
    return peak * pi_power_per_day;
}

/// Revenue from delivered regulation power at thresholded premiums. Blocked
/// steps admit no allocation at all.
inline double regulation_revenue(const TimeSeries& b_down, const TimeSeries& b_up,
                                 const ThresholdedPremium& prem_down,
                                 const ThresholdedPremium& prem_up) {
    if (b_down.grid != b_up.grid || b_down.steps() != prem_down.steps() ||
        b_down.steps() != prem_up.steps()) {
        throw GridMismatch("regulation_revenue: inputs span different horizons");
    }
    const double dt = b_down.grid.step_hours();
    double total = 0.0;
    for (int t = 0; t < b_down.steps(); ++t) {
        if (b_down[t] < 0.0 || b_up[t] < 0.0) {
            throw InvalidValue("regulation_revenue: allocations must be non-negative");
        }
        if (prem_down.blocked(t)) {
            if (b_down[t] != 0.0) {
                throw GatingViolation("regulation_revenue: down allocation at Blocked step " +
                                      std::to_string(t));
            }
        } else {
            total += prem_down.premium(t) * b_down[t];
        }
        if (prem_up.blocked(t)) {
            if (b_up[t] != 0.0) {
                throw GatingViolation("regulation_revenue: up allocation at Blocked step " +
                                      std::to_string(t));
            }
        } else {
            total += prem_up.premium(t) * b_up[t];
        }
    }
    return dt * total;
}

struct ScenarioAllocation {
    TimeSeries b_down; // charging power reserved for down-regulation, kW
    TimeSeries b_up;   // discharging power reserved for up-regulation, kW
};

/// Probability-weighted regulation revenue over the scenario set.
inline double expected_regulation_revenue(const std::vector<ScenarioAllocation>& allocations,
                                          const ScenarioSet& set) {
    if (static_cast<int>(allocations.size()) != set.count()) {
        throw InvalidModel("expected_regulation_revenue: one allocation pair per scenario");
    }
    double total = 0.0;
    for (int w = 0; w < set.count(); ++w) {
        total += set.probabilities[static_cast<size_t>(w)] *
                 regulation_revenue(allocations[static_cast<size_t>(w)].b_down,
                                    allocations[static_cast<size_t>(w)].b_up,
                                    set.scenarios[static_cast<size_t>(w)].premium_down,
                                    set.scenarios[static_cast<size_t>(w)].premium_up);
    }
    return total;
}

} // namespace bessctl
