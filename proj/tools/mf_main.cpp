#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mf/calibration.hpp"
#include "mf/hedging.hpp"
#include "mf/mapping.hpp"
#include "mf/market_data.hpp"
#include "mf/pricing.hpp"

using nlohmann::json;
using namespace mf;

namespace {

bool quiet_logs() {
    const char* v = std::getenv("MF_LOG");
    return v != nullptr && std::string(v) == "quiet";
}

void log_info(const std::string& msg) {
    if (!quiet_logs()) std::cerr << msg << "\n";
}

// Shared per-command inputs; grid flags override the trade file's grid.
struct CommonOpts {
    std::string curve_path, atm_path, cube_path, trade_path, out_dir = ".";
    int case_id = 8;
    double mr = 0.0;
    int steps = -1, devs = -1, order = -1;
    std::uint64_t seed = 42;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_cube = false, bool scalar_mr = true) {
    cmd->add_option("--curve", o.curve_path, "discount curve CSV (day,bid,ask)");
    cmd->add_option("--atm-surface", o.atm_path, "ATM vol surface CSV");
    if (needs_cube) cmd->add_option("--ratio-cube", o.cube_path, "smile ratio cube CSV");
    cmd->add_option("--trade", o.trade_path, "trade JSON");
    if (scalar_mr) cmd->add_option("--mr", o.mr, "mean reversion");
    cmd->add_option("--steps", o.steps, "grid steps per deviation");
    cmd->add_option("--devs", o.devs, "grid deviations");
    cmd->add_option("--order", o.order, "polynomial order");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out_dir, "output directory");
}

struct Market {
    TradeSpec trade;
    YieldCurve curve;
    AtmVolSurface atm;
    CoterminalDeal deal;
};

Market load_market(const CommonOpts& o) {
    if (o.trade_path.empty() || o.curve_path.empty() || o.atm_path.empty())
        throw std::invalid_argument("--trade, --curve and --atm-surface are required");
    Market m;
    m.trade = load_trade_json(o.trade_path);
    if (o.steps > 0) m.trade.grid.steps = o.steps;
    if (o.devs > 0) m.trade.grid.devs = o.devs;
    if (o.order > 0) m.trade.grid.order = o.order;
    m.curve = load_curve_csv(o.curve_path, m.trade.valuation_date);
    m.atm = load_atm_csv(o.atm_path);
    m.deal = build_deal(m.trade, m.curve, m.atm);
    return m;
}

std::filesystem::path out_file(const CommonOpts& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return std::filesystem::path(o.out_dir) / name;
}

double bp(const TradeSpec& trade, double value) { return 1e4 * value / trade.notional; }

// Data/usage problems exit 1; numerical failures exit 2 and leave a
// diagnostics file next to the outputs.
template <typename Load, typename Compute>
int guarded(const CommonOpts& o, Load&& load, Compute&& compute) {
    try {
        load();
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 1;
    }
    try {
        compute();
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        try {
            std::ofstream diag(out_file(o, "diagnostics.txt"));
            diag << e.what() << "\n";
        } catch (...) {
        }
        return 2;
    }
    return 0;
}

// ------------------------------------------------------------------- fixtures

int cmd_fixtures(const CommonOpts& o) {
    return guarded(
        o, [] {},
        [&] {
            struct Row {
                const char* label;
                ThreeStateFixture fx;
            };
            const Row rows[] = {{"flat", fixture_base()},
                                {"tree A", fixture_tree_a()},
                                {"tree B", fixture_tree_b()}};
            const double strikes[] = {0.055, 0.045, 0.065};
            json records = json::array();
            std::printf("%-8s", "tree");
            for (double k : strikes) std::printf("  K=%.2f%%", 100.0 * k);
            std::printf("\n");
            for (const auto& row : rows) {
                std::printf("%-8s", row.label);
                for (double k : strikes) {
                    double v = fixture_bermudan(row.fx, k);
                    std::printf("  %7.2f", v);
                    records.push_back({{"tree", row.label}, {"strike", k}, {"value", v}});
                }
                std::printf("\n");
            }
            std::ofstream(out_file(o, "fixtures.json")) << records.dump(2) << "\n";
        });
}

// ---------------------------------------------------------------------- price

int cmd_price(const CommonOpts& o, std::vector<int>& cases) {
    Market m;
    return guarded(
        o,
        [&] {
            m = load_market(o);
            if (m.trade.exercise_dates.empty())
                throw std::invalid_argument("trade has an empty exercise set");
        },
        [&] {
            if (cases.empty()) cases = {1, 2, 3, 4, 5, 6, 7, 8};
            std::vector<double> strikes;
            for (double k = 0.035; k < 0.06501; k += 0.0025) strikes.push_back(k);

            json records = json::array();
            std::vector<std::vector<double>> berm(cases.size());
            for (std::size_t ci = 0; ci < cases.size(); ++ci) {
                int c = cases[ci];
                MappingModel model = make_case_model(m.deal, c);
                MappedLattice lat(m.deal, model, o.mr, m.trade.grid);
                log_info("case " + std::to_string(c) + " lattice built");

                std::ofstream eu(out_file(o, "case_" + std::to_string(c) + "_europeans.csv"));
                eu << "n,expiry_day,analytic_bp,lattice_bp,diff_bp\n";
                for (int n = 1; n <= m.trade.periods; ++n) {
                    SwaptionSpec spec{m.deal.T_expiry[n - 1], m.deal.S0[n - 1], m.deal.P0[n - 1],
                                      m.trade.strike, m.trade.payer ? +1 : -1, m.trade.notional};
                    double ana = bp(m.trade, uvdd_european(spec, model.params[n - 1]));
                    double num = bp(m.trade, european_value(lat, n, m.trade.strike,
                                                           m.trade.payer ? +1 : -1));
                    char line[128];
                    std::snprintf(line, sizeof line, "%d,%ld,%.2f,%.2f,%.4f\n", n,
                                  m.deal.tenor.days[n - 1], ana, num, num - ana);
                    eu << line;
                }

                for (double k : strikes) {
                    double v = bp(m.trade, bermudan_value(lat, k, m.trade.payer ? +1 : -1,
                                                          m.trade.exercise_dates));
                    berm[ci].push_back(v);
                    records.push_back({{"trade", m.trade.name},
                                       {"case", c},
                                       {"strike", k},
                                       {"value_bp", v},
                                       {"grid_params",
                                        {{"steps", m.trade.grid.steps},
                                         {"devs", m.trade.grid.devs},
                                         {"order", m.trade.grid.order}}}});
                }
            }

            std::ofstream bt(out_file(o, "bermudan.csv"));
            bt << "strike_pct";
            for (int c : cases) bt << ",case_" << c;
            bt << "\n";
            for (std::size_t ki = 0; ki < strikes.size(); ++ki) {
                char cell[32];
                std::snprintf(cell, sizeof cell, "%.2f", 100.0 * strikes[ki]);
                bt << cell;
                for (std::size_t ci = 0; ci < cases.size(); ++ci) {
                    std::snprintf(cell, sizeof cell, ",%.2f", berm[ci][ki]);
                    bt << cell;
                }
                bt << "\n";
            }
            std::ofstream(out_file(o, "records.json")) << records.dump(2) << "\n";
            log_info("price outputs written to " + o.out_dir);
        });
}

// ------------------------------------------------------------------ calibrate

int cmd_calibrate(const CommonOpts& o) {
    Market m;
    SmileRatioCube cube;
    return guarded(
        o,
        [&] {
            m = load_market(o);
            if (o.cube_path.empty()) throw std::invalid_argument("--ratio-cube is required");
            cube = load_ratio_cube_csv(o.cube_path);
        },
        [&] {
            std::vector<double> offsets;
            for (double b = -100.0; b <= 100.0; b += 25.0) offsets.push_back(b);
            struct Variant {
                const char* name;
                FitModel model;
                FitObjective objective;
            };
            const Variant variants[] = {
                {"black_atm", FitModel::BlackAtm, FitObjective::Price},
                {"lognormal", FitModel::Lognormal, FitObjective::Price},
                {"displaced", FitModel::DisplacedDiffusion, FitObjective::Price},
                {"uvdd", FitModel::Uvdd, FitObjective::Price},
                {"uvdd_iv", FitModel::Uvdd, FitObjective::ImpliedVol},
            };

            std::ofstream err(out_file(o, "errors.csv"));
            err << "model";
            for (int n = 1; n <= m.trade.periods; ++n) err << ",T" << n;
            err << ",overall\n";
            for (const auto& v : variants) {
                StripReport strip =
                    calibrate_strip(m.deal, cube, offsets, v.model, v.objective);
                write_calibration_csv(out_file(o, std::string("calibration_") + v.name + ".csv"),
                                      m.deal, strip);
                err << v.name;
                char cell[32];
                for (const auto& e : strip.entries) {
                    std::snprintf(cell, sizeof cell, ",%.4f", 100.0 * e.fit.avg_abs_err);
                    err << cell;
                }
                std::snprintf(cell, sizeof cell, ",%.4f", 100.0 * strip.avg_abs_err);
                err << cell << "\n";
                std::printf("%-10s avg |err| = %.4f%%\n", v.name, 100.0 * strip.avg_abs_err);
            }
            log_info("calibration outputs written to " + o.out_dir);
        });
}

// --------------------------------------------------------------- future-smile

int cmd_future_smile(const CommonOpts& o, std::vector<double>& mrs, int from, int expiry) {
    Market m;
    return guarded(
        o,
        [&] {
            m = load_market(o);
            if (from < 1 || expiry <= from || expiry > m.trade.periods)
                throw std::invalid_argument("need 1 <= from < expiry <= periods");
        },
        [&] {
            if (mrs.empty()) mrs = {0.0, 0.10, 0.30};
            const double node_sds[] = {-0.6, -0.3, 0.0, 0.3, 0.6};
            json summary = json::array();
            for (double a : mrs) {
                MappingModel model = make_case_model(m.deal, o.case_id);
                MappedLattice lat(m.deal, model, a, m.trade.grid);
                const MappedDate& md = lat.date(from);
                double dx = md.x[1] - md.x[0];

                char name[64];
                std::snprintf(name, sizeof name, "future_smile_mr%g.csv", a);
                std::ofstream out(out_file(o, name));
                out << "node_sd,driver_x,forward,strike,price_bp,implied_vol\n";
                for (double alpha : node_sds) {
                    long idx = std::lround((alpha * md.sigma0 - md.x.front()) / dx);
                    idx = std::clamp(idx, 0L, long(md.x.size()) - 1);
                    FutureState st = future_state(lat, from, int(idx), expiry);
                    std::vector<double> strikes;
                    for (double x = 0.70; x < 1.3001; x += 0.05)
                        strikes.push_back(x * st.forward);
                    auto pts = future_smile(lat, from, int(idx), expiry, strikes, +1);
                    for (const auto& p : pts) {
                        char line[160];
                        std::snprintf(line, sizeof line, "%.1f,%.6f,%.6f,%.6f,%.4f,%.6f\n", alpha,
                                      st.x, st.forward, p.strike, bp(m.trade, p.price),
                                      p.ok ? p.vol : 0.0);
                        out << line;
                    }
                }
                double avg = average_future_atm_vol(lat, from, expiry);
                summary.push_back({{"mr", a}, {"average_future_atm_vol", avg}});
                std::printf("mr=%.2f  average future ATM vol (T%d seen from T%d) = %.6f\n", a,
                            expiry, from, avg);
            }
            std::ofstream(out_file(o, "future_smile_summary.json")) << summary.dump(2) << "\n";
        });
}

// ------------------------------------------------------------- smile-dynamics

int cmd_smile_dynamics(const CommonOpts& o, int expiry, double bump) {
    Market m;
    return guarded(
        o, [&] { m = load_market(o); },
        [&] {
            MappingModel model = make_case_model(m.deal, o.case_id);
            struct Variant {
                const char* tag;
                double delta;
            };
            const Variant variants[] = {{"base", 0.0}, {"up", bump}, {"down", -bump}};
            std::vector<double> moneyness;
            for (double x = 0.80; x < 1.2001; x += 0.05) moneyness.push_back(x);

            double base_forward = 0.0, base_atm_vol = 0.0;
            std::vector<double> base_vols;
            json summary;
            for (const auto& v : variants) {
                CoterminalDeal deal =
                    v.delta == 0.0 ? m.deal : bump_deal_df(m.deal, expiry, v.delta);
                // Strikes follow the shifted forward so rows align in moneyness;
                // the base ATM strike rides along for the fixed-strike reading.
                double fwd_guess = deal.S0[expiry - 1];
                std::vector<double> strikes;
                for (double x : moneyness) strikes.push_back(x * fwd_guess);
                if (v.delta != 0.0) strikes.push_back(base_forward);
                SmileCurve sc = frozen_model_smile(deal, model, o.mr, m.trade.grid, expiry,
                                                   strikes, +1);

                std::ofstream out(out_file(o, std::string("dynamics_") + v.tag + ".csv"));
                out << "strike,implied_vol,price_bp\n";
                for (const auto& p : sc.points) {
                    char line[96];
                    std::snprintf(line, sizeof line, "%.6f,%.6f,%.4f\n", p.strike,
                                  p.ok ? p.vol : 0.0, bp(m.trade, p.price));
                    out << line;
                }

                std::vector<double> vols;
                for (std::size_t i = 0; i < moneyness.size(); ++i) vols.push_back(sc.points[i].vol);
                double atm_vol = vols[std::size_t(std::lround((1.0 - 0.80) / 0.05))];

                if (v.delta == 0.0) {
                    base_forward = sc.forward;
                    base_atm_vol = atm_vol;
                    base_vols = vols;
                    summary["base"] = {{"forward", sc.forward}, {"atm_vol", atm_vol}};
                    std::printf("%-5s S%d = %.4f%%  ATM vol = %.6f\n", v.tag, expiry,
                                100.0 * sc.forward, atm_vol);
                } else {
                    double worst = 0.0;
                    for (std::size_t i = 0; i < vols.size(); ++i)
                        worst = std::max(worst, std::abs(vols[i] - base_vols[i]));
                    double fixed_strike_vol = sc.points.back().vol;  // at the base ATM strike
                    summary[v.tag] = {{"forward", sc.forward},
                                      {"atm_vol", atm_vol},
                                      {"fixed_moneyness_shift", worst},
                                      {"fixed_strike_move",
                                       std::abs(fixed_strike_vol - base_atm_vol)}};
                    std::printf("%-5s S%d = %.4f%%  ATM vol = %.6f  moneyness shift = %.2e\n",
                                v.tag, expiry, 100.0 * sc.forward, atm_vol, worst);
                }
            }
            std::ofstream(out_file(o, "dynamics.json")) << summary.dump(2) << "\n";
        });
}

// ---------------------------------------------------------------------- hedge

int cmd_hedge(const CommonOpts& o, ScenarioSpec& sspec, const std::string& model,
              const std::string& liquidation, const std::string& roll) {
    TradeSpec trade;
    return guarded(
        o,
        [&] {
            if (o.trade_path.empty()) throw std::invalid_argument("--trade is required");
            trade = load_trade_json(o.trade_path);
            if (o.steps > 0) trade.grid.steps = o.steps;
            if (o.devs > 0) trade.grid.devs = o.devs;
            if (o.order > 0) trade.grid.order = o.order;
        },
        [&] {
            BacktestOptions base;
            base.model = model == "nonsmile" ? HedgeModel::NonSmile : HedgeModel::Smile;
            base.liquidation = liquidation == "mtmdl" ? Liquidation::MarkToModel
                                                      : Liquidation::MarkToMarket;
            base.vega_roll = roll == "monthly" ? VegaRoll::Monthly : VegaRoll::Daily;
            base.mean_reversion = o.mr;

            log_info("generating scenario...");
            auto scen = generate_synthetic_scenario(trade, sspec, o.seed);
            write_scenario_csv(out_file(o, "scenario.csv"), scen);

            struct Run {
                const char* tag;
                HedgeStrategy strategy;
            };
            const Run runs[] = {{"unhedged", HedgeStrategy::Unhedged},
                                {"delta", HedgeStrategy::Delta},
                                {"delta_vega", HedgeStrategy::DeltaVega}};
            json stats;
            std::vector<BacktestResult> results;
            for (const auto& r : runs) {
                log_info(std::string("backtest: ") + r.tag);
                BacktestOptions opts = base;
                opts.strategy = r.strategy;
                results.push_back(run_backtest(trade, scen, opts));
                const auto& res = results.back();
                write_backtest_csv(out_file(o, std::string("backtest_") + r.tag + ".csv"), res);
                stats[r.tag] = {{"pnl_stdev", res.pnl_stdev},
                                {"npv_drift", res.npv_drift},
                                {"npv_min", res.npv_min},
                                {"npv_max", res.npv_max}};
                std::printf("%-10s pnl stdev = %8.4f  drift = %9.4f\n", r.tag, res.pnl_stdev,
                            res.npv_drift);
            }
            stats["stdev_ratio_unhedged_over_delta"] =
                results[0].pnl_stdev / results[1].pnl_stdev;
            stats["stdev_ratio_delta_over_delta_vega"] =
                results[1].pnl_stdev / results[2].pnl_stdev;
            std::ofstream(out_file(o, "stats.json")) << stats.dump(2) << "\n";

            std::ofstream out(out_file(o, "results.csv"));
            out << "day,date,npv_unhedged,pnl_unhedged,npv_delta,pnl_delta,npv_delta_vega,pnl_"
                   "delta_vega\n";
            for (std::size_t i = 0; i < scen.size(); ++i) {
                char line[256];
                std::snprintf(line, sizeof line, "%ld,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                              scen[i].day, to_string(scen[i].date).c_str(),
                              results[0].records[i].npv, results[0].records[i].pnl,
                              results[1].records[i].npv, results[1].records[i].pnl,
                              results[2].records[i].npv, results[2].records[i].pnl);
                out << line;
            }
            log_info("hedge outputs written to " + o.out_dir);
        });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov-functional interest-rate model toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");

    CommonOpts opts;
    std::vector<int> cases;
    std::vector<double> mrs;
    int from = 6, expiry = 9, dyn_expiry = 5;
    double bump = 0.01;
    ScenarioSpec sspec;
    std::string hedge_model = "smile", hedge_liq = "mtm", hedge_roll = "daily";

    CLI::App* fixtures = app.add_subcommand("fixtures", "three-state toy lattice tables");
    fixtures->add_option("--out", opts.out_dir, "output directory");

    CLI::App* price = app.add_subcommand("price", "European and Bermudan pricing tables");
    add_common(price, opts);
    price->add_option("--case", cases, "mapping case (1..8, repeatable; default all)")
        ->check(CLI::Range(1, 8));

    CLI::App* calibrate = app.add_subcommand("calibrate", "per-expiry smile calibration");
    add_common(calibrate, opts, true);

    CLI::App* future = app.add_subcommand("future-smile", "conditional smiles at a future date");
    add_common(future, opts, false, false);
    future->add_option("--case", opts.case_id, "mapping case")->check(CLI::Range(1, 8));
    future->add_option("--mr", mrs, "mean reversions to sweep (default 0 0.10 0.30)");
    future->add_option("--from", from, "observation date index T_f");
    future->add_option("--expiry", expiry, "smile expiry index T_n");

    CLI::App* dynamics = app.add_subcommand("smile-dynamics", "frozen-model smile under bumps");
    add_common(dynamics, opts);
    dynamics->add_option("--case", opts.case_id, "mapping case")->check(CLI::Range(1, 8));
    dynamics->add_option("--expiry", dyn_expiry, "bumped/read expiry index");
    dynamics->add_option("--bump", bump, "discount-factor bump size");

    CLI::App* hedge = app.add_subcommand("hedge", "synthetic-scenario hedging backtest");
    add_common(hedge, opts);
    hedge->add_option("--days", sspec.days, "scenario length");
    hedge->add_option("--drift", sspec.rate_drift, "rate drift per year");
    hedge->add_option("--rate-vol", sspec.rate_vol, "rate vol (absolute, annual)");
    hedge->add_option("--vol-vol", sspec.vol_vol, "ATM-vol vol (relative, annual)");
    hedge->add_option("--start-rate", sspec.start_rate, "initial rate level");
    hedge->add_option("--start-vol", sspec.start_vol, "initial ATM vol level");
    hedge->add_option("--model", hedge_model, "smile | nonsmile");
    hedge->add_option("--liquidation", hedge_liq, "mtm | mtmdl");
    hedge->add_option("--roll", hedge_roll, "vega roll: daily | monthly");

    CLI11_PARSE(app, argc, argv);

    if (fixtures->parsed()) return cmd_fixtures(opts);
    if (price->parsed()) return cmd_price(opts, cases);
    if (calibrate->parsed()) return cmd_calibrate(opts);
    if (future->parsed()) return cmd_future_smile(opts, mrs, from, expiry);
    if (dynamics->parsed()) return cmd_smile_dynamics(opts, dyn_expiry, bump);
    if (hedge->parsed()) return cmd_hedge(opts, sspec, hedge_model, hedge_liq, hedge_roll);
    return 1;
}
