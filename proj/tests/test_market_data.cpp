#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "mf/market_data.hpp"

using namespace mf;

namespace {
const std::string kData = MF_DATA_DIR;
}

TEST_CASE("curve interpolates linearly in zero yield") {
    Date anchor{2002, 7, 9};
    YieldCurve curve(anchor, {{100.0, 0.99}, {200.0, 0.97}});

    CHECK(curve.discount(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(curve.discount(100.0) == doctest::Approx(0.99).epsilon(1e-14));
    CHECK(curve.discount(200.0) == doctest::Approx(0.97).epsilon(1e-14));

    double z100 = -std::log(0.99) / 100.0;
    double z200 = -std::log(0.97) / 200.0;
    double z150 = z100 + (z200 - z100) * 0.5;
    CHECK(curve.discount(150.0) == doctest::Approx(std::exp(-z150 * 150.0)).epsilon(1e-13));

    // flat zero yield below the first node
    CHECK(curve.discount(40.0) == doctest::Approx(std::exp(-z100 * 40.0)).epsilon(1e-13));
    // no extrapolation past the last node
    CHECK_THROWS(curve.discount(200.5));
    CHECK(curve.max_day() == 200.0);
}

TEST_CASE("curve interpolates linearly in discount factor when asked") {
    YieldCurve curve(Date{2002, 7, 9}, {{100.0, 0.99}, {200.0, 0.97}}, CurveInterp::DiscountFactor);
    CHECK(curve.discount(150.0) == doctest::Approx(0.98).epsilon(1e-14));
}

TEST_CASE("atm surface bilinear interpolation and clamping") {
    AtmVolSurface surf({100.0, 200.0}, {360.0, 720.0},
                       {{0.10, 0.12}, {0.14, 0.18}});  // vols[tenor][expiry]
    CHECK(surf.vol(100.0, 360.0) == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(surf.vol(200.0, 720.0) == doctest::Approx(0.18).epsilon(1e-14));
    CHECK(surf.vol(150.0, 360.0) == doctest::Approx(0.11).epsilon(1e-14));
    CHECK(surf.vol(150.0, 540.0) == doctest::Approx(0.135).epsilon(1e-14));

    CHECK_THROWS(surf.vol(99.0, 360.0));
    CHECK_THROWS(surf.vol(150.0, 721.0));
    CHECK(surf.vol_clamped(10.0, 100.0) == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(surf.vol_clamped(500.0, 9999.0) == doctest::Approx(0.18).epsilon(1e-14));
}

TEST_CASE("ratio cube linear in offset, clamped on the grid") {
    SmileRatioCube cube({100.0}, {360.0}, {-50.0, 0.0, 50.0}, {{{1.10, 1.0, 0.95}}});
    CHECK(cube.ratio(100.0, 360.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cube.ratio(100.0, 360.0, -25.0) == doctest::Approx(1.05).epsilon(1e-14));
    CHECK(cube.ratio(100.0, 360.0, 25.0) == doctest::Approx(0.975).epsilon(1e-14));
    CHECK(cube.ratio(9999.0, 1.0, 50.0) == doctest::Approx(0.95).epsilon(1e-14));  // edge clamp
    CHECK_THROWS(cube.ratio(100.0, 360.0, -51.0));
}

TEST_CASE("loaders read the shipped data sets") {
    Date anchor2{2006, 8, 11};
    YieldCurve curve2 = load_curve_csv(kData + "/dataset2/curve.csv", anchor2);
    CHECK(curve2.anchor() == anchor2);
    CHECK(curve2.discount(4.0) == doctest::Approx(0.999658).epsilon(1e-9));

    AtmVolSurface surf1 = load_atm_csv(kData + "/dataset1/atm_surface.csv");
    CHECK(surf1.vol_clamped(32.0, 360.0) == doctest::Approx(0.457).epsilon(1e-12));

    SmileRatioCube cube2 = load_ratio_cube_csv(kData + "/dataset2/ratio_cube.csv");
    CHECK(cube2.ratio(185.0, 360.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cube2.offsets().front() == doctest::Approx(-250.0));

    TradeSpec trade1 = load_trade_json(kData + "/trades/trade1.json");
    CHECK(trade1.valuation_date == Date{2002, 7, 9});
    CHECK(trade1.start_date == Date{2002, 7, 12});
    CHECK(trade1.periods == 10);
    CHECK(trade1.frequency_months == 6);
    CHECK(trade1.strike == doctest::Approx(0.055));
    CHECK(trade1.exercise_dates == std::vector<int>{5, 6, 7, 8, 9, 10});
    CHECK(trade1.notional == doctest::Approx(10000.0));
}

TEST_CASE("schedule applies month steps and modified following") {
    TradeSpec trade = load_trade_json(kData + "/trades/trade1.json");
    TenorStructure tenor = build_schedule(trade);
    REQUIRE(tenor.days.size() == 11);
    REQUIRE(tenor.alphas.size() == 10);

    // T_1 is the first fixing = start date (2002-07-12, a Friday)
    CHECK(tenor.days[0] == 3);
    // T_2 = start + 6m = 2003-01-12 (Sunday) -> 2003-01-13
    CHECK(tenor.days[1] == Date{2003, 1, 13}.serial() - trade.valuation_date.serial());
    CHECK(tenor.days[1] == 188);
    // T_3 = 2003-07-12 (Saturday) -> 2003-07-14
    CHECK(tenor.days[2] == Date{2003, 7, 14}.serial() - trade.valuation_date.serial());
    // final payment date: 2007-07-12 is a weekday
    CHECK(tenor.days[10] == Date{2007, 7, 12}.serial() - trade.valuation_date.serial());

    for (std::size_t i = 0; i + 1 < tenor.days.size(); ++i) {
        CHECK(tenor.alphas[i] ==
              doctest::Approx((tenor.days[i + 1] - tenor.days[i]) / 360.0).epsilon(1e-15));
    }
}

TEST_CASE("deal assembly ties curve, schedule and vol surface together") {
    TradeSpec trade = load_trade_json(kData + "/trades/trade1.json");
    YieldCurve curve = load_curve_csv(kData + "/dataset1/curve.csv", trade.valuation_date);
    AtmVolSurface surf = load_atm_csv(kData + "/dataset1/atm_surface.csv");
    CoterminalDeal deal = build_deal(trade, curve, surf);

    const std::size_t N = 10;
    REQUIRE(deal.D0.size() == N + 1);
    REQUIRE(deal.P0.size() == N);
    REQUIRE(deal.S0.size() == N);

    for (std::size_t j = 0; j <= N; ++j) {
        CHECK(deal.D0[j] == doctest::Approx(curve.discount(double(deal.tenor.days[j]))).epsilon(1e-14));
        if (j > 0) CHECK(deal.D0[j] < deal.D0[j - 1]);
        CHECK(deal.t_model[j] == doctest::Approx(deal.tenor.days[j] / 360.0).epsilon(1e-15));
    }
    for (std::size_t n = 1; n <= N; ++n) {
        double pvbp = 0.0;
        for (std::size_t i = n - 1; i < N; ++i) pvbp += deal.tenor.alphas[i] * deal.D0[i + 1];
        CHECK(deal.P0[n - 1] == doctest::Approx(pvbp).epsilon(1e-14));
        CHECK(deal.S0[n - 1] ==
              doctest::Approx((deal.D0[n - 1] - deal.D0[N]) / pvbp).epsilon(1e-13));
        CHECK(deal.T_expiry[n - 1] == doctest::Approx(deal.tenor.days[n - 1] / 365.0).epsilon(1e-15));

        double tenor_coord = double(N - n + 1) * trade.frequency_months * 30.0;
        CHECK(deal.sigma_atm[n - 1] ==
              doctest::Approx(surf.vol_clamped(double(deal.tenor.days[n - 1]), tenor_coord))
                  .epsilon(1e-14));
    }
    // rates around 5-6% on this curve
    for (double s : deal.S0) {
        CHECK(s > 0.04);
        CHECK(s < 0.07);
    }
}

TEST_CASE("bootstrap reprices its deposits and par swaps") {
    Date anchor{2004, 5, 28};
    std::vector<Deposit> deps = {{2, 0.035}, {91, 0.036}, {182, 0.037}, {274, 0.0375}};
    std::vector<ParSwap> swaps = {{1, 0.039}, {2, 0.041}, {3, 0.0425}, {5, 0.044}, {7, 0.045}};
    YieldCurve curve = bootstrap_curve(anchor, deps, swaps);

    for (const auto& d : deps) {
        double df = curve.discount(double(d.days));
        CHECK(df == doctest::Approx(1.0 / (1.0 + d.rate * d.days / 360.0)).epsilon(1e-12));
    }
    for (const auto& sw : swaps) {
        double pvbp = 0.0, d_end = 1.0;
        Date prev = anchor;
        for (int i = 1; i <= sw.tenor_years; ++i) {
            Date pay = modified_following(add_months(anchor, 12 * i));
            double alpha = double(pay.serial() - prev.serial()) / 360.0;
            double df = curve.discount(double(pay.serial() - anchor.serial()));
            pvbp += alpha * df;
            d_end = df;
            prev = pay;
        }
        double par = (1.0 - d_end) / pvbp;
        CHECK(par == doctest::Approx(sw.rate).epsilon(1e-10));
    }

    // discount factors stay positive and decreasing through the strip
    double last = 1.0;
    for (int day = 1; day <= int(curve.max_day()); day += 30) {
        double df = curve.discount(double(day));
        CHECK(df > 0.0);
        CHECK(df <= last + 1e-12);
        last = df;
    }
}
