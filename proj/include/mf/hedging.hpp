#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mf/calibration.hpp"
#include "mf/market_data.hpp"

namespace mf {

// One trading day of curve inputs, ATM vols and smile parameters.  The smile
// vector holds per-expiry UVDD parameters for the hedge trade's co-terminal
// family (empty until build_synthetic_smiles fills it).
struct MarketSnapshot {
    Date date;
    long day = 0;  // offset from the scenario start
    std::vector<Deposit> deposits;
    std::vector<ParSwap> swaps;
    AtmVolSurface atm;
    std::vector<UVDDParams> smile;
};

// Monthly smile-shape node: per-expiry (omega, m, lambda) at one date.
struct SmileNode {
    long day = 0;
    std::vector<UVDDParams> shapes;
};

// Fill every snapshot's smile parameters: omega and m linearly interpolated
// in calendar time between the bracketing nodes (ends held flat), sigma1
// re-solved so the model ATM price matches the day's Black ATM quote.
void build_synthetic_smiles(const TradeSpec& trade, std::span<MarketSnapshot> days,
                            std::span<const SmileNode> nodes);

struct ScenarioSpec {
    int days = 250;
    double rate_drift = 0.0;   // per year, added to every curve input
    double rate_vol = 0.006;   // absolute annual vol of the rate factor
    double vol_vol = 0.03;     // relative annual vol of the ATM-vol factor
    double rate_corr = 0.95;   // correlation of per-tenor shocks to the factor
    double start_rate = 0.045;
    double start_vol = 0.14;
};

// Seeded correlated random walks for deposits {2,91,182,274}d and par swaps
// {1,2,3,5,7,12}y plus a one-factor ATM surface; days where the curve fails
// to bootstrap to positive discount factors are redrawn.  Monthly smile-shape
// nodes wander inside fixed bounds and are spread through the scenario by
// build_synthetic_smiles.
std::vector<MarketSnapshot> generate_synthetic_scenario(const TradeSpec& trade,
                                                        const ScenarioSpec& spec,
                                                        std::uint64_t seed);

enum class HedgeStrategy { Unhedged, Delta, DeltaVega };
enum class HedgeModel { Smile, NonSmile };
enum class Liquidation { MarkToMarket, MarkToModel };
enum class VegaRoll { Daily, Monthly };

struct BacktestOptions {
    HedgeStrategy strategy = HedgeStrategy::DeltaVega;
    HedgeModel model = HedgeModel::Smile;
    Liquidation liquidation = Liquidation::MarkToMarket;
    VegaRoll vega_roll = VegaRoll::Daily;
    double mean_reversion = 0.0;
};

// Bermudan vegas (bump sigma1 by 1 bp, or the flat vol by 10 bp in the
// non-smile case, remap, revalue) and deltas (bump one curve input quote by
// 1 bp, re-bootstrap, remap, revalue), forward differences per unit of rate.
struct SensitivityVector {
    std::vector<double> vegas;   // per expiry T_1..T_N
    std::vector<double> deltas;  // per curve input, deposits then swaps
};

struct DailyRecord {
    long day = 0;
    double bermudan = 0.0;
    double portfolio = 0.0;  // liquidation value of yesterday's positions
    double bank = 0.0;
    double npv = 0.0;  // bermudan + portfolio + bank, the ledger identity
    double pnl = 0.0;  // day-over-day change of npv
    double residual_delta = 0.0;  // worst post-rebalance combined sensitivity
    double residual_vega = 0.0;
};

struct BacktestResult {
    std::vector<DailyRecord> records;
    double pnl_stdev = 0.0;
    double npv_drift = 0.0;  // terminal minus initial hedged NPV
    double npv_min = 0.0;
    double npv_max = 0.0;
};

// The daily loop: value the book, liquidate yesterday's hedges into the bank,
// neutralize vegas with ATM co-terminal Europeans (diagonal solve), then
// neutralize the combined book's deltas with spot par swaps and deposits, and
// accrue the bank at the shortest deposit rate, ACT/360.
BacktestResult run_backtest(const TradeSpec& trade, std::span<const MarketSnapshot> scenario,
                            const BacktestOptions& options);

// Per-day record CSV: (day, bermudan, portfolio, bank, npv, pnl,
// residual_delta, residual_vega).
void write_backtest_csv(const std::string& path, const BacktestResult& result);

// One row per day: date, every deposit and swap quote, the ATM grid vols,
// and the per-expiry smile parameters when present.
void write_scenario_csv(const std::string& path, std::span<const MarketSnapshot> scenario);

}  // namespace mf
