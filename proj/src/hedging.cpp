#include "mf/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <utility>

#include "mf/analytic.hpp"
#include "mf/mapping.hpp"
#include "mf/pricing.hpp"

namespace mf {

namespace {

struct DayBook {
    YieldCurve curve;
    CoterminalDeal deal;
};

DayBook make_day(const TradeSpec& trade, const MarketSnapshot& snap) {
    TradeSpec t = trade;
    t.valuation_date = snap.date;
    YieldCurve curve = bootstrap_curve(snap.date, snap.deposits, snap.swaps);
    CoterminalDeal deal = build_deal(t, curve, snap.atm);
    return {std::move(curve), std::move(deal)};
}

MappingModel model_for(const CoterminalDeal& deal, const MarketSnapshot& snap, HedgeModel kind) {
    if (kind == HedgeModel::Smile) {
        if (snap.smile.size() != deal.S0.size())
            throw std::runtime_error("snapshot is missing smile parameters");
        return MappingModel{snap.smile};
    }
    MappingModel model;
    model.params.reserve(deal.sigma_atm.size());
    for (double v : deal.sigma_atm) model.params.push_back({0.0, v, v, 1.0});
    return model;
}

double bermudan_npv(const CoterminalDeal& deal, const MappingModel& model, double mr) {
    MappedLattice lat(deal, model, mr, deal.trade.grid);
    return bermudan_value(lat);
}

SwaptionSpec expiry_spec(const CoterminalDeal& deal, int n, double strike) {
    return {deal.T_expiry[n - 1], deal.S0[n - 1], deal.P0[n - 1], strike, +1,
            deal.trade.notional};
}

// ------------------------------------------------------------- hedge positions

struct EuroPosition {
    int n = 1;  // expiry index into the co-terminal family
    double strike = 0.0;
    double qty = 0.0;
};

struct SwapPosition {
    Date entry;  // spot start date; annual Modified Following payments
    int tenor_years = 1;
    double fixed_rate = 0.0;
    double first_libor = 0.0;  // fixed on the entry date
    double qty = 0.0;
};

struct DepoPosition {
    long maturity_serial = 0;
    double qty = 0.0;  // unit face value
};

struct SwapSchedule {
    std::vector<long> serials;
    std::vector<double> alphas;
};

SwapSchedule swap_schedule(const Date& entry, int years) {
    SwapSchedule s;
    long prev = entry.serial();
    for (int i = 1; i <= years; ++i) {
        long d = modified_following(add_months(entry, 12 * i)).serial();
        s.serials.push_back(d);
        s.alphas.push_back(double(d - prev) / 360.0);
        prev = d;
    }
    return s;
}

double swap_pvbp(const YieldCurve& curve, const SwapSchedule& sch) {
    long a = curve.anchor().serial();
    double pvbp = 0.0;
    for (std::size_t i = 0; i < sch.serials.size(); ++i)
        pvbp += sch.alphas[i] * curve.discount(double(sch.serials[i] - a));
    return pvbp;
}

double swap_par(const YieldCurve& curve, const Date& entry, const SwapSchedule& sch) {
    long a = curve.anchor().serial();
    double d0 = curve.discount(double(entry.serial() - a));
    double dN = curve.discount(double(sch.serials.back() - a));
    return (d0 - dN) / swap_pvbp(curve, sch);
}

// Value of a (possibly seasoned) payer swap per unit notional: annual floating
// resets, the first one fixed on the entry date.
double swap_value(const YieldCurve& curve, const SwapPosition& p) {
    auto sch = swap_schedule(p.entry, p.tenor_years);
    long a = curve.anchor().serial();
    if (sch.serials.front() <= a)
        throw std::runtime_error("hedge swap held past its first payment");
    double fixed = p.fixed_rate * swap_pvbp(curve, sch);
    double d1 = curve.discount(double(sch.serials.front() - a));
    double dN = curve.discount(double(sch.serials.back() - a));
    double floating = p.first_libor * sch.alphas.front() * d1 + d1 - dN;
    return p.qty * (floating - fixed);
}

double depo_value(const YieldCurve& curve, const DepoPosition& p) {
    return p.qty * curve.discount(double(p.maturity_serial - curve.anchor().serial()));
}

// European marks.  Model basis: what the hedger's model says (flat ATM vol in
// the non-smile case).  Market basis: the scenario's own smile prices.
double euro_model_value(const CoterminalDeal& deal, const MarketSnapshot& snap, HedgeModel kind,
                        int n, double strike) {
    SwaptionSpec spec = expiry_spec(deal, n, strike);
    if (kind == HedgeModel::Smile) return uvdd_european(spec, snap.smile[n - 1]);
    return black_european(spec, deal.sigma_atm[n - 1]);
}

double euro_mark_value(const CoterminalDeal& deal, const MarketSnapshot& snap, HedgeModel kind,
                       Liquidation basis, int n, double strike) {
    SwaptionSpec spec = expiry_spec(deal, n, strike);
    if (kind == HedgeModel::Smile || basis == Liquidation::MarkToMarket)
        return uvdd_european(spec, snap.smile[n - 1]);
    return black_european(spec, deal.sigma_atm[n - 1]);
}

double stdev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(xs.size() - 1));
}

}  // namespace

// ------------------------------------------------------------------- backtest

BacktestResult run_backtest(const TradeSpec& trade, std::span<const MarketSnapshot> scenario,
                            const BacktestOptions& options) {
    if (scenario.empty()) throw std::invalid_argument("empty scenario");
    const double kRateBump = 1e-4;
    const double kSmileVolBump = 1e-4;    // 1 bp on sigma1
    const double kFlatVolBump = 1e-3;     // 10 bp on the flat ATM vol
    const int kRollDays = 30;

    BacktestResult result;
    result.records.reserve(scenario.size());

    std::vector<EuroPosition> euros;
    std::vector<SwapPosition> swaps;
    std::vector<DepoPosition> depos;
    double bank = 0.0;
    double prev_npv = 0.0;
    double prev_short_rate = 0.0;
    long prev_day = 0;

    for (std::size_t di = 0; di < scenario.size(); ++di) {
        const MarketSnapshot& snap = scenario[di];
        DayBook base = make_day(trade, snap);
        const CoterminalDeal& deal = base.deal;
        MappingModel model = model_for(deal, snap, options.model);
        double berm = bermudan_npv(deal, model, options.mean_reversion);

        if (di > 0) bank *= 1.0 + prev_short_rate * double(snap.day - prev_day) / 360.0;

        double portfolio = 0.0;
        std::vector<double> euro_marks(euros.size());
        for (std::size_t i = 0; i < euros.size(); ++i) {
            euro_marks[i] = euros[i].qty * euro_mark_value(deal, snap, options.model,
                                                          options.liquidation, euros[i].n,
                                                          euros[i].strike);
            portfolio += euro_marks[i];
        }
        double delta_marks = 0.0;
        for (const auto& p : swaps) delta_marks += swap_value(base.curve, p);
        for (const auto& p : depos) delta_marks += depo_value(base.curve, p);
        portfolio += delta_marks;

        DailyRecord rec;
        rec.day = snap.day;
        rec.bermudan = berm;
        rec.portfolio = portfolio;
        rec.bank = bank;
        rec.npv = berm + portfolio + bank;
        rec.pnl = di == 0 ? 0.0 : rec.npv - prev_npv;
        prev_npv = rec.npv;

        // Liquidate yesterday's delta hedges at their marks.
        bank += delta_marks;
        swaps.clear();
        depos.clear();

        // Vega hedge: short ATM co-terminal Europeans against the Bermudan's
        // bucketed vegas (the European book is diagonal in the vol buckets).
        bool roll_due = options.strategy == HedgeStrategy::DeltaVega &&
                        (options.vega_roll == VegaRoll::Daily || snap.day % kRollDays == 0);
        if (roll_due) {
            for (double mark : euro_marks) bank += mark;
            euros.clear();

            int N = trade.periods;
            double vbump = options.model == HedgeModel::Smile ? kSmileVolBump : kFlatVolBump;
            double worst = 0.0;
            for (int n = 1; n <= N; ++n) {
                // sigma2 scales with sigma1 (omega fixed), the convention the
                // analytic sigma1-vega below differentiates under.
                MappingModel bumped = model;
                double ratio = bumped.params[n - 1].omega();
                bumped.params[n - 1].sigma1 += vbump;
                bumped.params[n - 1].sigma2 = ratio * bumped.params[n - 1].sigma1;
                double berm_up = bermudan_npv(deal, bumped, options.mean_reversion);
                double berm_vega = berm_up - berm;
                if (std::abs(berm_vega) < 1e-14) continue;

                double atm = deal.S0[n - 1];
                SwaptionSpec spec = expiry_spec(deal, n, atm);
                double unit_vega =
                    options.model == HedgeModel::Smile
                        ? uvdd_vega_sigma1(spec, model.params[n - 1]) * vbump
                        : black_atm_vega(spec, deal.sigma_atm[n - 1]) * vbump;
                double qty = -berm_vega / unit_vega;
                euros.push_back({n, atm, qty});
                bank -= qty * euro_model_value(deal, snap, options.model, n, atm);

                UVDDParams pb = model.params[n - 1];
                pb.sigma1 += vbump;
                pb.sigma2 = model.params[n - 1].omega() * pb.sigma1;
                double euro_up = options.model == HedgeModel::Smile
                                     ? uvdd_european(spec, pb)
                                     : black_european(spec, deal.sigma_atm[n - 1] + vbump);
                double euro_base = euro_model_value(deal, snap, options.model, n, atm);
                worst = std::max(worst, std::abs(berm_vega + qty * (euro_up - euro_base)));
            }
            rec.residual_vega = worst;
        }

        // Delta hedge the combined book with one spot instrument per curve
        // input.  Re-bootstrapping reprices every input, so each instrument
        // reacts only to its own quote and the solve is diagonal; the residual
        // check below re-verifies that across the full matrix.
        if (options.strategy != HedgeStrategy::Unhedged) {
            std::size_t nd = snap.deposits.size(), ns = snap.swaps.size();
            std::size_t ni = nd + ns;
            double book0 = berm;
            for (const auto& e : euros)
                book0 += e.qty * euro_model_value(deal, snap, options.model, e.n, e.strike);

            std::vector<SwapSchedule> schedules(ns);
            std::vector<double> par0(ns), pvbp0(ns);
            for (std::size_t j = 0; j < ns; ++j) {
                schedules[j] = swap_schedule(snap.date, snap.swaps[j].tenor_years);
                pvbp0[j] = swap_pvbp(base.curve, schedules[j]);
                par0[j] = swap_par(base.curve, snap.date, schedules[j]);
            }
            long anchor_serial = snap.date.serial();
            std::vector<double> depo_df0(nd);
            for (std::size_t j = 0; j < nd; ++j)
                depo_df0[j] = base.curve.discount(double(snap.deposits[j].days));

            std::vector<double> book_delta(ni), inst_delta(ni);
            std::vector<YieldCurve> bumped_curves(ni);
            for (std::size_t i = 0; i < ni; ++i) {
                auto deps = snap.deposits;
                auto sws = snap.swaps;
                if (i < nd)
                    deps[i].rate += kRateBump;
                else
                    sws[i - nd].rate += kRateBump;
                bumped_curves[i] = bootstrap_curve(snap.date, deps, sws);

                TradeSpec t = trade;
                t.valuation_date = snap.date;
                CoterminalDeal deal_i = build_deal(t, bumped_curves[i], snap.atm);
                double book_i = bermudan_npv(deal_i, model, options.mean_reversion);
                for (const auto& e : euros)
                    book_i += e.qty * euro_model_value(deal_i, snap, options.model, e.n, e.strike);
                book_delta[i] = book_i - book0;

                if (i < nd) {
                    inst_delta[i] = bumped_curves[i].discount(double(snap.deposits[i].days)) -
                                    depo_df0[i];
                } else {
                    std::size_t j = i - nd;
                    double par_b = swap_par(bumped_curves[i], snap.date, schedules[j]);
                    double pvbp_b = swap_pvbp(bumped_curves[i], schedules[j]);
                    inst_delta[i] = (par_b - snap.swaps[j].rate) * pvbp_b -
                                    (par0[j] - snap.swaps[j].rate) * pvbp0[j];
                }
            }

            std::vector<double> qty(ni, 0.0);
            for (std::size_t i = 0; i < ni; ++i)
                if (std::abs(inst_delta[i]) > 1e-16) qty[i] = -book_delta[i] / inst_delta[i];

            for (std::size_t j = 0; j < nd; ++j) {
                if (qty[j] == 0.0) continue;
                depos.push_back({anchor_serial + snap.deposits[j].days, qty[j]});
                bank -= qty[j] * depo_df0[j];
            }
            for (std::size_t j = 0; j < ns; ++j) {
                if (qty[nd + j] == 0.0) continue;
                double d1 = base.curve.discount(double(schedules[j].serials.front() - anchor_serial));
                double libor = (1.0 / d1 - 1.0) / schedules[j].alphas.front();
                swaps.push_back({snap.date, snap.swaps[j].tenor_years, snap.swaps[j].rate, libor,
                                 qty[nd + j]});
                bank -= (par0[j] - snap.swaps[j].rate) * pvbp0[j] * qty[nd + j];
            }

            double worst = 0.0;
            for (std::size_t i = 0; i < ni; ++i) {
                double r = book_delta[i];
                for (std::size_t j = 0; j < nd; ++j)
                    r += qty[j] * (bumped_curves[i].discount(double(snap.deposits[j].days)) -
                                   depo_df0[j]);
                for (std::size_t j = 0; j < ns; ++j) {
                    double par_b = swap_par(bumped_curves[i], snap.date, schedules[j]);
                    double pvbp_b = swap_pvbp(bumped_curves[i], schedules[j]);
                    r += qty[nd + j] * ((par_b - snap.swaps[j].rate) * pvbp_b -
                                        (par0[j] - snap.swaps[j].rate) * pvbp0[j]);
                }
                worst = std::max(worst, std::abs(r));
            }
            rec.residual_delta = worst;
        }

        result.records.push_back(rec);
        prev_short_rate = snap.deposits.front().rate;
        prev_day = snap.day;
    }

    std::vector<double> pnls;
    for (std::size_t i = 1; i < result.records.size(); ++i)
        pnls.push_back(result.records[i].pnl);
    result.pnl_stdev = stdev(pnls);
    result.npv_drift = result.records.back().npv - result.records.front().npv;
    result.npv_min = result.npv_max = result.records.front().npv;
    for (const auto& r : result.records) {
        result.npv_min = std::min(result.npv_min, r.npv);
        result.npv_max = std::max(result.npv_max, r.npv);
    }
    return result;
}

// ------------------------------------------------------------------- scenario

void build_synthetic_smiles(const TradeSpec& trade, std::span<MarketSnapshot> days,
                            std::span<const SmileNode> nodes) {
    if (nodes.empty()) throw std::invalid_argument("no smile nodes");
    for (auto& snap : days) {
        // Bracketing nodes in calendar time, ends held flat.
        std::size_t hi = 0;
        while (hi + 1 < nodes.size() && nodes[hi].day < snap.day) ++hi;
        std::size_t lo = hi > 0 ? hi - 1 : 0;
        if (nodes[hi].day < snap.day) lo = hi;
        double w = 0.0;
        if (nodes[hi].day > nodes[lo].day)
            w = double(snap.day - nodes[lo].day) / double(nodes[hi].day - nodes[lo].day);
        w = std::clamp(w, 0.0, 1.0);

        DayBook day = make_day(trade, snap);
        const CoterminalDeal& deal = day.deal;
        int N = trade.periods;
        snap.smile.resize(N);
        for (int n = 1; n <= N; ++n) {
            const UVDDParams& a = nodes[lo].shapes[n - 1];
            const UVDDParams& b = nodes[hi].shapes[n - 1];
            double omega = (1.0 - w) * a.omega() + w * b.omega();
            double m = (1.0 - w) * a.m + w * b.m;
            double lambda = (1.0 - w) * a.lambda + w * b.lambda;

            SwaptionSpec unit = expiry_spec(deal, n, deal.S0[n - 1]);
            unit.notional = 1.0;
            double target = black_european(unit, deal.sigma_atm[n - 1]);
            UVDDParams shape{m, deal.sigma_atm[n - 1], omega * deal.sigma_atm[n - 1], lambda};
            double s1 = adjust_sigma_to_atm(unit, shape, target);
            snap.smile[n - 1] = {m, s1, omega * s1, lambda};
        }
    }
}

std::vector<MarketSnapshot> generate_synthetic_scenario(const TradeSpec& trade,
                                                        const ScenarioSpec& spec,
                                                        std::uint64_t seed) {
    if (spec.days < 2) throw std::invalid_argument("scenario needs at least two days");
    const std::vector<int> depo_days = {2, 91, 182, 274};
    const std::vector<int> swap_years = {1, 2, 3, 5, 7, 12};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const double dt = 1.0 / 360.0;
    const double sdt = std::sqrt(dt);

    // Mildly upward-sloping initial quotes around the starting level.
    std::vector<double> quotes;
    for (int d : depo_days) quotes.push_back(spec.start_rate - 0.003 * std::exp(-d / 180.0));
    for (int y : swap_years) quotes.push_back(spec.start_rate + 0.0015 * (y - 1) / 11.0);
    double vol_factor = 1.0;

    std::vector<double> surf_expiries = {180, 360, 720, 1080, 1800, 2520, 3240, 4320};
    std::vector<double> surf_tenors = {360, 720, 1080, 1800, 2520, 3600};
    auto base_vol = [&](double e, double t) {
        return spec.start_vol * (1.0 + 0.10 * std::exp(-e / 1080.0)) * (1.0 - 0.05 * t / 3600.0);
    };

    long serial0 = trade.valuation_date.serial();
    std::vector<MarketSnapshot> days;
    days.reserve(std::size_t(spec.days));
    for (int d = 0; d < spec.days; ++d) {
        Date date = Date::from_serial(serial0 + d);
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            std::vector<double> next = quotes;
            double vf = vol_factor;
            if (d > 0) {
                double zr = gauss(rng), zv = gauss(rng);
                double c = spec.rate_corr, s = std::sqrt(std::max(0.0, 1.0 - c * c));
                for (double& q : next) {
                    double z = c * zr + s * gauss(rng);
                    q += spec.rate_drift * dt + spec.rate_vol * sdt * z;
                    q = std::max(q, 0.002);
                }
                vf *= std::exp(spec.vol_vol * sdt * zv - 0.5 * spec.vol_vol * spec.vol_vol * dt);
                vf = std::clamp(vf, 0.5, 2.0);
            }

            MarketSnapshot snap;
            snap.date = date;
            snap.day = d;
            for (std::size_t i = 0; i < depo_days.size(); ++i)
                snap.deposits.push_back({depo_days[i], next[i]});
            for (std::size_t i = 0; i < swap_years.size(); ++i)
                snap.swaps.push_back({swap_years[i], next[depo_days.size() + i]});
            std::vector<std::vector<double>> vols(surf_tenors.size());
            for (std::size_t ti = 0; ti < surf_tenors.size(); ++ti)
                for (double e : surf_expiries)
                    vols[ti].push_back(vf * base_vol(e, surf_tenors[ti]));
            snap.atm = AtmVolSurface(surf_expiries, surf_tenors, std::move(vols));

            try {
                YieldCurve curve = bootstrap_curve(date, snap.deposits, snap.swaps);
                bool sane = true;
                double prev_df = 1.0 + 1e-12;
                for (const auto& pt : curve.points()) {
                    if (!(pt.df > 0.0) || pt.df >= prev_df) sane = false;
                    prev_df = pt.df;
                }
                if (!sane) continue;
            } catch (const std::exception&) {
                continue;
            }

            quotes = std::move(next);
            vol_factor = vf;
            days.push_back(std::move(snap));
            ok = true;
        }
        if (!ok) throw std::runtime_error("could not draw a bootstrappable market");
    }

    // Monthly smile-shape nodes: slope and curvature wander inside fixed bounds.
    std::vector<SmileNode> nodes;
    double omega = 2.2, m = 0.05;
    auto reflect = [](double x, double lo, double hi) {
        if (x < lo) x = lo + (lo - x);
        if (x > hi) x = hi - (x - hi);
        return std::clamp(x, lo, hi);
    };
    for (long day = 0; day < spec.days; day += 30) {
        if (day > 0) {
            omega = reflect(omega + 0.15 * gauss(rng), 1.6, 2.8);
            m = reflect(m + 0.008 * gauss(rng), 0.02, 0.09);
        }
        SmileNode node;
        node.day = day;
        node.shapes.assign(std::size_t(trade.periods), UVDDParams{m, 0.0, 0.0, 0.75});
        for (auto& s : node.shapes) {
            s.sigma1 = spec.start_vol;
            s.sigma2 = omega * spec.start_vol;
        }
        nodes.push_back(std::move(node));
    }
    build_synthetic_smiles(trade, days, nodes);
    return days;
}

void write_scenario_csv(const std::string& path, std::span<const MarketSnapshot> scenario) {
    if (scenario.empty()) throw std::invalid_argument("empty scenario");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const MarketSnapshot& first = scenario.front();
    out << "date,day";
    for (const auto& d : first.deposits) out << ",depo_" << d.days << "d";
    for (const auto& s : first.swaps) out << ",swap_" << s.tenor_years << "y";
    for (double t : first.atm.tenors())
        for (double e : first.atm.expiries())
            out << ",atm_e" << long(e) << "_t" << long(t);
    for (std::size_t n = 0; n < first.smile.size(); ++n)
        out << ",sigma1_" << n + 1 << ",sigma2_" << n + 1 << ",m_" << n + 1 << ",lambda_"
            << n + 1;
    out << "\n";
    char buf[32];
    for (const auto& snap : scenario) {
        out << to_string(snap.date) << "," << snap.day;
        auto put = [&](double v) {
            std::snprintf(buf, sizeof buf, ",%.8g", v);
            out << buf;
        };
        for (const auto& d : snap.deposits) put(d.rate);
        for (const auto& s : snap.swaps) put(s.rate);
        for (std::size_t ti = 0; ti < snap.atm.tenors().size(); ++ti)
            for (double e : snap.atm.expiries()) put(snap.atm.vol(e, snap.atm.tenors()[ti]));
        for (const auto& p : snap.smile) {
            put(p.sigma1);
            put(p.sigma2);
            put(p.m);
            put(p.lambda);
        }
        out << "\n";
    }
}

void write_backtest_csv(const std::string& path, const BacktestResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "day,bermudan,portfolio,bank,npv,pnl,residual_delta,residual_vega\n";
    char line[256];
    for (const auto& r : result.records) {
        std::snprintf(line, sizeof line, "%ld,%.10g,%.10g,%.10g,%.10g,%.10g,%.3g,%.3g\n", r.day,
                      r.bermudan, r.portfolio, r.bank, r.npv, r.pnl, r.residual_delta,
                      r.residual_vega);
        out << line;
    }
}

}  // namespace mf
