#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mf/dates.hpp"

namespace mf {

enum class CurveInterp {
    ZeroYield,       // linear in continuously-compounded zero yield vs day
    DiscountFactor,  // linear in the discount factor itself vs day
};

struct CurvePoint {
    double day;
    double df;
};

// Dated discount factors with interpolation; no extrapolation past the last node.
class YieldCurve {
public:
    YieldCurve() = default;
    YieldCurve(Date anchor, std::vector<CurvePoint> points,
               CurveInterp interp = CurveInterp::ZeroYield);

    double discount(double day) const;
    const Date& anchor() const { return anchor_; }
    const std::vector<CurvePoint>& points() const { return points_; }
    CurveInterp interp() const { return interp_; }
    double max_day() const { return points_.empty() ? 0.0 : points_.back().day; }

private:
    Date anchor_;
    std::vector<CurvePoint> points_;
    CurveInterp interp_ = CurveInterp::ZeroYield;
};

// ATM Black vols on an (expiry day, tenor day) grid, bilinear between nodes.
class AtmVolSurface {
public:
    AtmVolSurface() = default;
    AtmVolSurface(std::vector<double> expiry_days, std::vector<double> tenor_days,
                  std::vector<std::vector<double>> vols);  // vols[tenor][expiry]

    // Strict: throws std::out_of_range outside the grid hull.
    double vol(double expiry_day, double tenor_day) const;
    // Clamps the query point onto the hull first (used for model assembly where
    // the first expiry/shortest tenor can sit just outside the quoted grid).
    double vol_clamped(double expiry_day, double tenor_day) const;

    const std::vector<double>& expiries() const { return expiries_; }
    const std::vector<double>& tenors() const { return tenors_; }

private:
    double interp(double e, double t) const;
    std::vector<double> expiries_, tenors_;
    std::vector<std::vector<double>> vols_;
};

// Strike-offset vol ratios vs ATM, per (expiry, tenor) node.
class SmileRatioCube {
public:
    SmileRatioCube() = default;
    SmileRatioCube(std::vector<double> expiry_days, std::vector<double> tenor_days,
                   std::vector<double> offsets_bp,
                   std::vector<std::vector<std::vector<double>>> ratios);  // [e][t][offset]

    // Ratio at an offset (bp vs ATM), bilinear in (expiry, tenor) with edge
    // clamping, linear in offset; throws outside the quoted offset range.
    double ratio(double expiry_day, double tenor_day, double offset_bp) const;

    const std::vector<double>& offsets() const { return offsets_; }

private:
    std::vector<double> expiries_, tenors_, offsets_;
    std::vector<std::vector<std::vector<double>>> ratios_;
};

double smile_vol(const AtmVolSurface& surface, const SmileRatioCube& cube, double expiry_day,
                 double tenor_day, double offset_bp);

// --------------------------------------------------------------------- trades

struct GridParams {
    int steps = 10;   // steps per deviation
    int devs = 10;    // number of deviations (one-sided)
    int order = 3;    // maximum polynomial order
};

struct TradeSpec {
    std::string name;
    Date valuation_date;
    Date start_date;
    double notional = 10000.0;
    bool payer = true;
    int periods = 10;
    int frequency_months = 6;
    double strike = 0.05;
    std::vector<int> exercise_dates;  // 1-based reset indices
    GridParams grid;
};

// Reset/payment schedule: months-stepped from the start date, Modified
// Following on a weekend-only calendar, ACT/360 accruals.
struct TenorStructure {
    std::vector<long> days;      // day offsets of T_1..T_{N+1} from valuation
    std::vector<double> alphas;  // accruals alpha_1..alpha_N
};

TenorStructure build_schedule(const TradeSpec& trade);

// Per-expiry market state of the co-terminal family behind a trade.
struct CoterminalDeal {
    TradeSpec trade;
    TenorStructure tenor;
    std::vector<double> D0;         // discount factors at T_1..T_{N+1}
    std::vector<double> P0;         // PVBP per expiry n=1..N
    std::vector<double> S0;         // forward par swap rates
    std::vector<double> sigma_atm;  // ATM vol per expiry
    std::vector<double> T_expiry;   // vol time, expiry days / 365
    std::vector<double> t_model;    // model time of T_1..T_{N+1}, days / 360
};

CoterminalDeal build_deal(const TradeSpec& trade, const YieldCurve& curve,
                          const AtmVolSurface& surface);

// ------------------------------------------------------------------ bootstrap

struct Deposit {
    long days;
    double rate;  // simple ACT/360
};

struct ParSwap {
    int tenor_years;  // annual fixed leg
    double rate;
};

// Deposits pin the short end; each swap then pins the node at its final
// payment date so that it reprices to par (exact forward substitution when
// tenors are consecutive, root-finding across gaps).
YieldCurve bootstrap_curve(const Date& anchor, const std::vector<Deposit>& deposits,
                           const std::vector<ParSwap>& swaps,
                           CurveInterp interp = CurveInterp::ZeroYield);

// -------------------------------------------------------------------- loaders

YieldCurve load_curve_csv(const std::string& path, const Date& anchor,
                          CurveInterp interp = CurveInterp::ZeroYield);
AtmVolSurface load_atm_csv(const std::string& path);
SmileRatioCube load_ratio_cube_csv(const std::string& path);
TradeSpec load_trade_json(const std::string& path);

}  // namespace mf
