#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "bessctl/forecasting.hpp"

using namespace bessctl;

namespace {

TimeGrid grid96() {
    return TimeGrid(parse_iso8601("2025-06-02T00:00:00Z"), 900, 96);
}

HistoryDay make_day(const char* date, DayType type, double irr, double temp, double load_kw) {
    HistoryDay d;
    d.date = parse_date(date);
    d.day_type = type;
    d.mean_irradiance = irr;
    d.mean_temperature = temp;
    d.gross_load = TimeSeries(grid96(), load_kw, Unit::kW);
    d.pv = TimeSeries(grid96(), 0.0, Unit::kW);
    return d;
}

} // namespace

TEST_CASE("select_similar_days ranks by meteorological distance") {
    std::vector<HistoryDay> history{
        make_day("2025-05-01", DayType::Working, 100.0, 15.0, 10.0),
        make_day("2025-05-02", DayType::Working, 200.0, 15.0, 20.0),
        make_day("2025-05-03", DayType::Working, 300.0, 15.0, 30.0),
    };
    ForecastTarget target;
    target.date = parse_date("2025-05-10");
    target.day_type = DayType::Working;
    target.mean_irradiance = 210.0;
    target.mean_temperature = 15.0;
    ForecastConfig cfg;
    cfg.n_similar = 2;
    cfg.w_irradiance = 1.0;
    cfg.w_temperature = 0.0;
    const auto picked = select_similar_days(history, target, cfg);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].mean_irradiance == 200.0);
    CHECK(picked[1].mean_irradiance == 300.0);
}

TEST_CASE("select_similar_days requires matching day types") {
    std::vector<HistoryDay> history{
        make_day("2025-05-01", DayType::Working, 100.0, 15.0, 10.0),
        make_day("2025-05-02", DayType::Working, 120.0, 15.0, 10.0),
    };
    ForecastTarget target;
    target.date = parse_date("2025-05-10");
    target.day_type = DayType::NonWorking;
    ForecastConfig cfg;
    cfg.n_similar = 1;
    CHECK_THROWS_AS(select_similar_days(history, target, cfg), InsufficientHistory);

    // never returns a day of the wrong type
    history.push_back(make_day("2025-05-03", DayType::NonWorking, 90.0, 14.0, 8.0));
    const auto picked = select_similar_days(history, target, cfg);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].day_type == DayType::NonWorking);
}

TEST_CASE("select_similar_days with N equal to the candidate count") {
    std::vector<HistoryDay> history{
        make_day("2025-05-01", DayType::Working, 100.0, 15.0, 10.0),
        make_day("2025-05-02", DayType::Working, 200.0, 16.0, 20.0),
        make_day("2025-05-03", DayType::Working, 300.0, 17.0, 30.0),
    };
    ForecastTarget target;
    target.date = parse_date("2025-05-10");
    target.day_type = DayType::Working;
    target.mean_irradiance = 150.0;
    target.mean_temperature = 15.0;
    ForecastConfig cfg;
    cfg.n_similar = 3;
    const auto picked = select_similar_days(history, target, cfg);
    REQUIRE(picked.size() == 3);
    double loads[3] = {picked[0].gross_load[0], picked[1].gross_load[0], picked[2].gross_load[0]};
    std::sort(loads, loads + 3);
    CHECK(loads[0] == 10.0);
    CHECK(loads[1] == 20.0);
    CHECK(loads[2] == 30.0);
}

TEST_CASE("gross_load_forecast averages the selected days") {
    SECTION("single day passes through unchanged") {
        const auto d = make_day("2025-05-01", DayType::Working, 100.0, 15.0, 12.5);
        const auto f = gross_load_forecast({d});
        for (int t = 0; t < f.steps(); ++t) {
            CHECK(f[t] == 12.5);
        }
    }

    SECTION("two constant days average") {
        const auto f = gross_load_forecast({
            make_day("2025-05-01", DayType::Working, 0, 0, 10.0),
            make_day("2025-05-02", DayType::Working, 0, 0, 20.0),
        });
        CHECK(f[0] == Catch::Approx(15.0));
        CHECK(f[95] == Catch::Approx(15.0));
    }

    SECTION("columnwise mean of three short profiles") {
        const TimeGrid g2(parse_iso8601("2025-06-02T00:00:00Z"), 900, 2);
        auto day = [&](double a, double b) {
            HistoryDay d;
            d.gross_load = TimeSeries(g2, std::vector<double>{a, b}, Unit::kW);
            d.pv = TimeSeries(g2, 0.0, Unit::kW);
            return d;
        };
        const auto f = gross_load_forecast({day(0, 3), day(3, 0), day(3, 3)});
        CHECK(f[0] == Catch::Approx(2.0));
        CHECK(f[1] == Catch::Approx(2.0));
    }

    SECTION("grid mismatch is rejected") {
        auto a = make_day("2025-05-01", DayType::Working, 0, 0, 10.0);
        auto b = make_day("2025-05-02", DayType::Working, 0, 0, 20.0);
        b.gross_load = TimeSeries(TimeGrid(parse_iso8601("2025-06-02T00:00:00Z"), 900, 48), 20.0,
                                  Unit::kW);
        CHECK_THROWS_AS(gross_load_forecast({a, b}), GridMismatch);
    }
}

TEST_CASE("gross_load_forecast is permutation invariant and bounded") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(5.0, 95.0);
    std::vector<HistoryDay> days;
    for (int i = 0; i < 5; ++i) {
        auto d = make_day("2025-05-01", DayType::Working, 0, 0, 0.0);
        for (auto& v : d.gross_load.values) {
            v = u(rng);
        }
        days.push_back(d);
    }
    const auto f1 = gross_load_forecast(days);
    std::reverse(days.begin(), days.end());
    const auto f2 = gross_load_forecast(days);
    for (int t = 0; t < f1.steps(); ++t) {
        CHECK(f1[t] == Catch::Approx(f2[t]).margin(1e-12));
        double lo = 1e9, hi = -1e9;
        for (const auto& d : days) {
            lo = std::min(lo, d.gross_load[t]);
            hi = std::max(hi, d.gross_load[t]);
        }
        CHECK(f1[t] >= lo - 1e-12);
        CHECK(f1[t] <= hi + 1e-12);
    }
}

TEST_CASE("net_load_forecast subtracts PV") {
    const TimeGrid g = grid96();
    CHECK(net_load_forecast(TimeSeries(g, 20.0, Unit::kW), TimeSeries(g, 15.0, Unit::kW))[0] ==
          Catch::Approx(5.0));
    // PV above demand means export (negative net load)
    CHECK(net_load_forecast(TimeSeries(g, 10.0, Unit::kW), TimeSeries(g, 25.0, Unit::kW))[0] ==
          Catch::Approx(-15.0));
    const TimeSeries gross(g, 33.0, Unit::kW);
    const auto same = net_load_forecast(gross, TimeSeries(g, 0.0, Unit::kW));
    for (int t = 0; t < g.steps; ++t) {
        CHECK(same[t] == gross[t]);
    }
    CHECK_THROWS_AS(net_load_forecast(gross, TimeSeries(TimeGrid(g.start, 900, 48), 0.0, Unit::kW)),
                    GridMismatch);
}

TEST_CASE("intraday_persistence follows the position in the interval") {
    const int K = 30;

    SECTION("interval boundary uses the previous interval mean") {
        std::vector<double> samples(K, 12.0);
        CHECK(intraday_persistence(samples, 1, -1, 99.0, K) == Catch::Approx(12.0));
    }

    SECTION("mid-interval uses the samples so far") {
        std::vector<double> samples;
        for (int j = 1; j <= 10; ++j) {
            samples.push_back(j); // interval 0, k_star = 9, mean 5.5
        }
        CHECK(intraday_persistence(samples, 0, 9, 0.0, K) == Catch::Approx(5.5));
    }

    SECTION("simulation start falls back to the day-ahead value") {
        CHECK(intraday_persistence({}, 0, -1, 42.5, K) == 42.5);
    }

    SECTION("sample count must match the clock position") {
        std::vector<double> samples(5, 1.0);
        CHECK_THROWS_AS(intraday_persistence(samples, 0, 9, 0.0, K), InvalidState);
        CHECK_THROWS_AS(intraday_persistence(samples, 0, 40, 0.0, K), InvalidState);
    }

    SECTION("exact for interval-constant signals") {
        std::vector<double> samples;
        for (int t = 0; t < 3; ++t) {
            for (int k = 0; k < K; ++k) {
                samples.push_back(7.0 + t);
            }
        }
        for (int k_star = 0; k_star < K - 1; ++k_star) {
            std::vector<double> upto(samples.begin(),
                                     samples.begin() + 2 * K + k_star + 1);
            CHECK(intraday_persistence(upto, 2, k_star, 0.0, K) == Catch::Approx(9.0));
        }
    }
}

TEST_CASE("premium_persistence replicates the current state") {
    const auto active = premium_persistence(std::optional<double>(0.029), 30);
    REQUIRE(active.steps() == 30);
    for (int k = 0; k < 30; ++k) {
        REQUIRE_FALSE(active.blocked(k));
        CHECK(active.premium(k) == Catch::Approx(0.029));
    }

    const auto blocked = premium_persistence(std::nullopt, 12);
    for (int k = 0; k < 12; ++k) {
        CHECK(blocked.blocked(k));
    }

    CHECK(premium_persistence(std::optional<double>(0.5), 1).steps() == 1);
}

TEST_CASE("clear-sky proxy is zero at night and peaks at noon") {
    const auto pv = clear_sky_pv(grid96(), 135.0, 6.0, 20.0, 0.6);
    CHECK(pv[0] == 0.0);
    CHECK(pv[95] == 0.0);
    double peak = 0.0;
    int arg = 0;
    for (int t = 0; t < 96; ++t) {
        if (pv[t] > peak) {
            peak = pv[t];
            arg = t;
        }
        CHECK(pv[t] >= 0.0);
        CHECK(pv[t] <= 135.0 * 0.6 + 1e-9);
    }
    CHECK(peak == Catch::Approx(135.0 * 0.6).epsilon(0.01));
    CHECK(std::abs(arg - 52) <= 1); // 13:00 solar noon
    CHECK_THROWS_AS(clear_sky_pv(grid96(), 100.0, 18.0, 6.0), InvalidValue);
}
