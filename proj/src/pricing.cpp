#include "mf/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mf/analytic.hpp"
#include "mf/driver.hpp"
#include "mf/quadrature.hpp"

namespace mf {

namespace {

void check_date_index(const MappedLattice& lat, int n) {
    if (n < 1 || n > lat.periods()) throw std::out_of_range("date index outside 1..N");
}

std::vector<int> checked_exercise_dates(const MappedLattice& lat,
                                        std::vector<int> dates) {
    if (dates.empty()) throw std::invalid_argument("empty exercise set");
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
    if (dates.front() < 1 || dates.back() > lat.periods()) {
        throw std::invalid_argument("exercise dates outside the reset schedule");
    }
    return dates;
}

}  // namespace

double european_value(const MappedLattice& lat, int n, double strike, int payer) {
    check_date_index(lat, n);
    if (payer != 1 && payer != -1) throw std::invalid_argument("payer flag must be +-1");
    const MappedDate& d = lat.date(n);
    const CoterminalDeal& deal = lat.deal();
    std::vector<double> payoff(d.x.size()), zero(d.x.size(), 0.0);
    for (std::size_t i = 0; i < payoff.size(); ++i) {
        payoff[i] = payer * (d.S[i] - strike) * d.R[i];
    }
    MaxIntegrand kinked(d.x, zero, payoff, lat.grid_params().order);
    return deal.trade.notional * deal.D0.back() * kinked.integrate(0.0, d.sigma0);
}

std::vector<std::vector<double>> swap_value_lattice(const MappedLattice& lat,
                                                    double strike, int payer) {
    if (payer != 1 && payer != -1) throw std::invalid_argument("payer flag must be +-1");
    const int N = lat.periods();
    const CoterminalDeal& deal = lat.deal();
    const double notional = deal.trade.notional;
    std::vector<std::vector<double>> layers(static_cast<std::size_t>(N));
    for (int n = N; n >= 1; --n) {
        const MappedDate& d = lat.date(n);
        const double alpha = deal.tenor.alphas[static_cast<std::size_t>(n - 1)];
        std::vector<double> w(d.x.size(), 0.0);
        if (n < N) {
            const MappedDate& next = lat.date(n + 1);
            GridFunction gf(next.x, layers[static_cast<std::size_t>(n)],
                            lat.grid_params().order);
            const double sig = std::sqrt(lat.variance_between(n, n + 1));
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = gf.integrate_against(d.x[i], sig);
            }
        }
        // Coupon fixed here, paid next period: rebased value of the payment
        // alpha*(L-K) at the coming date is its bond-discounted amount over D.
        std::vector<double> bond = n == N
                                       ? d.D_end
                                       : lat.reconstruct_bond(n + 1, n);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] += payer * notional * alpha * (d.L[i] - strike) * bond[i] / d.D_end[i];
        }
        layers[static_cast<std::size_t>(n - 1)] = std::move(w);
    }
    return layers;
}

double swap_value_today(const MappedLattice& lat, double strike, int payer) {
    const auto layers = swap_value_lattice(lat, strike, payer);
    const MappedDate& d1 = lat.date(1);
    const double ev = integrate_grid_function(d1.x, layers.front(), 0.0, d1.sigma0,
                                              lat.grid_params().order);
    return lat.deal().D0.back() * ev;
}

ValueLattice build_value_lattice(const MappedLattice& lat, double strike, int payer,
                                 const std::vector<int>& exercise_dates) {
    if (payer != 1 && payer != -1) throw std::invalid_argument("payer flag must be +-1");
    const int N = lat.periods();
    const CoterminalDeal& deal = lat.deal();
    const std::vector<int> ex = checked_exercise_dates(lat, exercise_dates);

    ValueLattice out;
    out.exercise.resize(static_cast<std::size_t>(N));
    out.continuation.resize(static_cast<std::size_t>(N));
    out.bermudan.resize(static_cast<std::size_t>(N));

    // Exercise and continuation of the date just processed; the kink split of
    // max(e, c) happens inside the conditional expectation one date earlier.
    const std::vector<double>* e_prev = nullptr;
    const std::vector<double>* c_prev = nullptr;

    for (int n = N; n >= 1; --n) {
        const std::size_t j = static_cast<std::size_t>(n - 1);
        const MappedDate& d = lat.date(n);
        std::vector<double>& cont = out.continuation[j];
        cont.assign(d.x.size(), 0.0);
        if (n < N) {
            const MappedDate& next = lat.date(n + 1);
            const double sig = std::sqrt(lat.variance_between(n, n + 1));
            if (e_prev != nullptr) {
                MaxIntegrand kinked(next.x, *c_prev, *e_prev, lat.grid_params().order);
                for (std::size_t i = 0; i < cont.size(); ++i) {
                    cont[i] = kinked.integrate(d.x[i], sig);
                }
            } else {
                GridFunction gf(next.x, out.bermudan[j + 1], lat.grid_params().order);
                for (std::size_t i = 0; i < cont.size(); ++i) {
                    cont[i] = gf.integrate_against(d.x[i], sig);
                }
            }
        }
        if (std::binary_search(ex.begin(), ex.end(), n)) {
            std::vector<double>& e = out.exercise[j];
            e.resize(d.x.size());
            std::vector<double>& b = out.bermudan[j];
            b.resize(d.x.size());
            for (std::size_t i = 0; i < d.x.size(); ++i) {
                e[i] = payer * (d.S[i] - strike) * d.R[i];
                // ties resolve to continuation; value is identical either way
                b[i] = std::max(e[i], cont[i]);
            }
            e_prev = &e;
            c_prev = &cont;
        } else {
            out.bermudan[j] = cont;
            e_prev = nullptr;
            c_prev = nullptr;
        }
    }

    const MappedDate& d1 = lat.date(1);
    double ev;
    if (e_prev != nullptr) {
        MaxIntegrand kinked(d1.x, *c_prev, *e_prev, lat.grid_params().order);
        ev = kinked.integrate(0.0, d1.sigma0);
    } else {
        ev = integrate_grid_function(d1.x, out.bermudan.front(), 0.0, d1.sigma0,
                                     lat.grid_params().order);
    }
    out.value = deal.trade.notional * deal.D0.back() * ev;
    return out;
}

double bermudan_value(const MappedLattice& lat, double strike, int payer,
                      const std::vector<int>& exercise_dates) {
    return build_value_lattice(lat, strike, payer, exercise_dates).value;
}

double bermudan_value(const MappedLattice& lat) {
    const TradeSpec& t = lat.deal().trade;
    return bermudan_value(lat, t.strike, t.payer ? +1 : -1, t.exercise_dates);
}

// ------------------------------------------------------------- future smiles

FutureState future_state(const MappedLattice& lat, int f, int node, int n) {
    check_date_index(lat, f);
    check_date_index(lat, n);
    if (n <= f) throw std::invalid_argument("expiry must follow the future date");
    const MappedDate& df = lat.date(f);
    if (node < 0 || static_cast<std::size_t>(node) >= df.x.size()) {
        throw std::out_of_range("node outside the date-f grid");
    }
    const CoterminalDeal& deal = lat.deal();
    const int N = lat.periods();
    const std::size_t i = static_cast<std::size_t>(node);
    FutureState st;
    st.x = df.x[i];
    st.df_end = df.D_end[i];
    double pvbp = 0.0;
    for (int k = n; k <= N; ++k) {
        const std::vector<double> bond = lat.reconstruct_bond(k + 1, f);
        pvbp += deal.tenor.alphas[static_cast<std::size_t>(k - 1)] * bond[i];
    }
    st.pvbp = pvbp;
    const std::vector<double> start_bond = lat.reconstruct_bond(n, f);
    st.forward = (start_bond[i] - st.df_end) / pvbp;
    return st;
}

std::vector<SmilePoint> future_smile(const MappedLattice& lat, int f, int node, int n,
                                     std::span<const double> strikes, int payer) {
    check_date_index(lat, n);
    if (payer != 1 && payer != -1) throw std::invalid_argument("payer flag must be +-1");
    const CoterminalDeal& deal = lat.deal();
    const MappedDate& dn = lat.date(n);

    double mean = 0.0, sig = 0.0, df_here = 0.0, fwd = 0.0, pvbp = 0.0, T = 0.0;
    if (f == 0) {
        sig = dn.sigma0;
        df_here = deal.D0.back();
        fwd = deal.S0[static_cast<std::size_t>(n - 1)];
        pvbp = deal.P0[static_cast<std::size_t>(n - 1)];
        T = deal.T_expiry[static_cast<std::size_t>(n - 1)];
    } else {
        const FutureState st = future_state(lat, f, node, n);
        mean = st.x;
        sig = std::sqrt(lat.variance_between(f, n));
        df_here = st.df_end;
        fwd = st.forward;
        pvbp = st.pvbp;
        T = deal.T_expiry[static_cast<std::size_t>(n - 1)] -
            deal.T_expiry[static_cast<std::size_t>(f - 1)];
    }

    const double notional = deal.trade.notional;
    std::vector<SmilePoint> out;
    std::vector<double> payoff(dn.x.size()), zero(dn.x.size(), 0.0);
    for (double K : strikes) {
        for (std::size_t i = 0; i < payoff.size(); ++i) {
            payoff[i] = payer * (dn.S[i] - K) * dn.R[i];
        }
        MaxIntegrand kinked(dn.x, zero, payoff, lat.grid_params().order);
        SmilePoint pt;
        pt.strike = K;
        pt.price = notional * df_here * kinked.integrate(mean, sig);
        try {
            SwaptionSpec spec{T, fwd, pvbp, K, payer, notional};
            pt.vol = implied_black_vol(spec, pt.price);
            pt.ok = true;
        } catch (const std::exception&) {
            pt.vol = 0.0;
            pt.ok = false;
        }
        out.push_back(pt);
    }
    return out;
}

double future_atm_vol(const MappedLattice& lat, int f, int node, int n) {
    const FutureState st = future_state(lat, f, node, n);
    const double strikes[] = {st.forward};
    const auto smile = future_smile(lat, f, node, n, strikes, +1);
    if (!smile.front().ok) throw std::runtime_error("ATM price not invertible");
    return smile.front().vol;
}

double average_future_atm_vol(const MappedLattice& lat, int f, int n) {
    const MappedDate& df = lat.date(f);
    const long mid = static_cast<long>(df.x.size() / 2);
    const long steps = lat.grid_params().steps;
    double wsum = 0.0, vsum = 0.0;
    for (long j = -steps; j <= steps; ++j) {
        const std::size_t idx = static_cast<std::size_t>(mid + j);
        const double w = norm_pdf(df.x[idx] / df.sigma0);
        vsum += w * future_atm_vol(lat, f, static_cast<int>(idx), n);
        wsum += w;
    }
    return vsum / wsum;
}

// ------------------------------------------------------------ smile dynamics

YieldCurve parallel_bumped_curve(const YieldCurve& curve, double shift) {
    std::vector<CurvePoint> pts = curve.points();
    for (auto& p : pts) {
        p.df *= std::exp(-shift * p.day / 365.0);
    }
    return YieldCurve(curve.anchor(), std::move(pts), curve.interp());
}

CoterminalDeal bump_deal_df(const CoterminalDeal& base, int k, double delta) {
    const std::size_t N = base.P0.size();
    if (k < 1 || static_cast<std::size_t>(k) > N + 1) {
        throw std::out_of_range("bond index outside 1..N+1");
    }
    CoterminalDeal deal = base;
    deal.D0[static_cast<std::size_t>(k - 1)] += delta;
    if (deal.D0[static_cast<std::size_t>(k - 1)] <= 0.0) {
        throw std::invalid_argument("bump drives the discount factor non-positive");
    }
    for (std::size_t j = 0; j < N; ++j) {
        double pvbp = 0.0;
        for (std::size_t i = j; i < N; ++i) {
            pvbp += deal.tenor.alphas[i] * deal.D0[i + 1];
        }
        deal.P0[j] = pvbp;
        deal.S0[j] = (deal.D0[j] - deal.D0[N]) / pvbp;
    }
    return deal;
}

SmileCurve frozen_model_smile(const CoterminalDeal& deal, const MappingModel& frozen,
                              double mean_reversion, const GridParams& grid, int n,
                              std::span<const double> strikes, int payer) {
    MappedLattice lat(deal, frozen, mean_reversion, grid);
    SmileCurve out;
    out.forward = deal.S0.at(static_cast<std::size_t>(n - 1));
    out.points = future_smile(lat, 0, 0, n, strikes, payer);
    return out;
}

// ------------------------------------------------------- three-state fixture

ThreeStateFixture fixture_base() {
    return {0.055, {0.0700, 0.0550, 0.0400}, {0.0800, 0.0600, 0.0400}, 10000.0};
}

ThreeStateFixture fixture_tree_a() {
    return {0.055, {0.0705, 0.0550, 0.0395}, {0.0805, 0.0600, 0.0395}, 10000.0};
}

ThreeStateFixture fixture_tree_b() {
    return {0.055, {0.0705, 0.0560, 0.0395}, {0.0805, 0.0590, 0.0395}, 10000.0};
}

namespace {

// One backward step: value at a T_1 state from the three T_2 values, the
// continuation discounted by this state's one-period rate.
double fixture_roll(const std::array<double, 3>& next, double libor) {
    return (next[0] + next[1] + next[2]) / (3.0 * (1.0 + libor));
}

}  // namespace

double fixture_swap_value(const ThreeStateFixture& fx, double strike, int i) {
    if (i < 0 || i > 2) throw std::out_of_range("state index outside 0..2");
    std::array<double, 3> sv2{};
    for (int j = 0; j < 3; ++j) {
        sv2[static_cast<std::size_t>(j)] =
            fx.notional * (fx.L2[static_cast<std::size_t>(j)] - strike);
    }
    const double L = fx.L1[static_cast<std::size_t>(i)];
    return fx.notional * (L - strike) + fixture_roll(sv2, L);
}

double fixture_bermudan(const ThreeStateFixture& fx, double strike) {
    std::array<double, 3> bsn2{};
    for (int j = 0; j < 3; ++j) {
        bsn2[static_cast<std::size_t>(j)] = std::max(
            fx.notional * (fx.L2[static_cast<std::size_t>(j)] - strike), 0.0);
    }
    std::array<double, 3> bsn1{};
    for (int i = 0; i < 3; ++i) {
        const double cont = fixture_roll(bsn2, fx.L1[static_cast<std::size_t>(i)]);
        bsn1[static_cast<std::size_t>(i)] = std::max(fixture_swap_value(fx, strike, i), cont);
    }
    return fixture_roll(bsn1, fx.L0);
}

}  // namespace mf
