#include "mf/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mf {

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) {
            fields.push_back(f);
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

// Index of the interval [xs[i], xs[i+1]] containing x (clamped to the ends).
std::size_t bracket(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) {
        return 0;
    }
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}

}  // namespace

// ------------------------------------------------------------------ YieldCurve

YieldCurve::YieldCurve(Date anchor, std::vector<CurvePoint> points, CurveInterp interp)
    : anchor_(anchor), points_(std::move(points)), interp_(interp) {
    if (points_.empty()) {
        throw std::invalid_argument("empty curve");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].day <= 0 || points_[i].df <= 0) {
            throw std::invalid_argument("curve points need day > 0 and df > 0");
        }
        if (i > 0 && points_[i].day <= points_[i - 1].day) {
            throw std::invalid_argument("curve days must be strictly increasing");
        }
    }
}

double YieldCurve::discount(double day) const {
    if (day < 0) {
        throw std::invalid_argument("negative day");
    }
    if (day == 0) {
        return 1.0;
    }
    if (day > points_.back().day) {
        throw std::out_of_range("curve query beyond last node");
    }
    if (interp_ == CurveInterp::DiscountFactor) {
        // Implicit (0, 1) node at the anchor.
        double d0 = 0.0, f0 = 1.0;
        for (const auto& p : points_) {
            if (day <= p.day) {
                double w = (day - d0) / (p.day - d0);
                return f0 + w * (p.df - f0);
            }
            d0 = p.day;
            f0 = p.df;
        }
    }
    // Zero-yield space: z(d) = -ln(D)/d, linear in d, flat below the first node.
    auto zero = [](const CurvePoint& p) { return -std::log(p.df) / p.day; };
    if (day <= points_.front().day) {
        return std::exp(-zero(points_.front()) * day);
    }
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (day <= points_[i + 1].day) {
            double z0 = zero(points_[i]), z1 = zero(points_[i + 1]);
            double w = (day - points_[i].day) / (points_[i + 1].day - points_[i].day);
            return std::exp(-(z0 + w * (z1 - z0)) * day);
        }
    }
    return points_.back().df;
}

// --------------------------------------------------------------- AtmVolSurface

AtmVolSurface::AtmVolSurface(std::vector<double> expiry_days, std::vector<double> tenor_days,
                             std::vector<std::vector<double>> vols)
    : expiries_(std::move(expiry_days)), tenors_(std::move(tenor_days)), vols_(std::move(vols)) {
    if (expiries_.size() < 2 || tenors_.size() < 2) {
        throw std::invalid_argument("surface needs at least a 2x2 grid");
    }
    if (vols_.size() != tenors_.size()) {
        throw std::invalid_argument("vol rows must match tenor count");
    }
    for (const auto& row : vols_) {
        if (row.size() != expiries_.size()) {
            throw std::invalid_argument("vol columns must match expiry count");
        }
        for (double v : row) {
            if (v <= 0) {
                throw std::invalid_argument("vols must be positive");
            }
        }
    }
}

double AtmVolSurface::interp(double e, double t) const {
    std::size_t i = bracket(expiries_, e);
    std::size_t j = bracket(tenors_, t);
    double we = (e - expiries_[i]) / (expiries_[i + 1] - expiries_[i]);
    double wt = (t - tenors_[j]) / (tenors_[j + 1] - tenors_[j]);
    double lo = vols_[j][i] + we * (vols_[j][i + 1] - vols_[j][i]);
    double hi = vols_[j + 1][i] + we * (vols_[j + 1][i + 1] - vols_[j + 1][i]);
    return lo + wt * (hi - lo);
}

double AtmVolSurface::vol(double expiry_day, double tenor_day) const {
    if (expiry_day < expiries_.front() || expiry_day > expiries_.back() ||
        tenor_day < tenors_.front() || tenor_day > tenors_.back()) {
        throw std::out_of_range("vol query outside surface hull");
    }
    return interp(expiry_day, tenor_day);
}

double AtmVolSurface::vol_clamped(double expiry_day, double tenor_day) const {
    double e = std::clamp(expiry_day, expiries_.front(), expiries_.back());
    double t = std::clamp(tenor_day, tenors_.front(), tenors_.back());
    return interp(e, t);
}

// -------------------------------------------------------------- SmileRatioCube

SmileRatioCube::SmileRatioCube(std::vector<double> expiry_days, std::vector<double> tenor_days,
                               std::vector<double> offsets_bp,
                               std::vector<std::vector<std::vector<double>>> ratios)
    : expiries_(std::move(expiry_days)),
      tenors_(std::move(tenor_days)),
      offsets_(std::move(offsets_bp)),
      ratios_(std::move(ratios)) {
    if (!std::is_sorted(offsets_.begin(), offsets_.end())) {
        throw std::invalid_argument("offsets must be increasing");
    }
    auto at0 = std::find(offsets_.begin(), offsets_.end(), 0.0);
    if (at0 == offsets_.end()) {
        throw std::invalid_argument("offset grid must contain 0");
    }
    std::size_t k0 = static_cast<std::size_t>(at0 - offsets_.begin());
    for (const auto& per_e : ratios_) {
        for (const auto& per_t : per_e) {
            if (per_t.size() != offsets_.size()) {
                throw std::invalid_argument("ragged ratio cube");
            }
            if (std::abs(per_t[k0] - 1.0) > 1e-12) {
                throw std::invalid_argument("ATM ratio must be 1.0");
            }
        }
    }
}

double SmileRatioCube::ratio(double expiry_day, double tenor_day, double offset_bp) const {
    if (offset_bp < offsets_.front() || offset_bp > offsets_.back()) {
        throw std::out_of_range("strike offset outside quoted range");
    }
    std::size_t k = bracket(offsets_, offset_bp);
    double wo = (offset_bp - offsets_[k]) / (offsets_[k + 1] - offsets_[k]);
    double e = std::clamp(expiry_day, expiries_.front(), expiries_.back());
    double t = std::clamp(tenor_day, tenors_.front(), tenors_.back());
    std::size_t i = expiries_.size() > 1 ? bracket(expiries_, e) : 0;
    std::size_t j = tenors_.size() > 1 ? bracket(tenors_, t) : 0;
    auto off_interp = [&](std::size_t ei, std::size_t ti) {
        const auto& r = ratios_[ei][ti];
        return r[k] + wo * (r[k + 1] - r[k]);
    };
    double we = expiries_.size() > 1 ? (e - expiries_[i]) / (expiries_[i + 1] - expiries_[i]) : 0.0;
    double wt = tenors_.size() > 1 ? (t - tenors_[j]) / (tenors_[j + 1] - tenors_[j]) : 0.0;
    std::size_t i1 = std::min(i + 1, expiries_.size() - 1);
    std::size_t j1 = std::min(j + 1, tenors_.size() - 1);
    double lo = off_interp(i, j) + we * (off_interp(i1, j) - off_interp(i, j));
    double hi = off_interp(i, j1) + we * (off_interp(i1, j1) - off_interp(i, j1));
    return lo + wt * (hi - lo);
}

double smile_vol(const AtmVolSurface& surface, const SmileRatioCube& cube, double expiry_day,
                 double tenor_day, double offset_bp) {
    return surface.vol_clamped(expiry_day, tenor_day) * cube.ratio(expiry_day, tenor_day, offset_bp);
}

// --------------------------------------------------------------------- trades

TenorStructure build_schedule(const TradeSpec& trade) {
    TenorStructure ts;
    long v = trade.valuation_date.serial();
    for (int i = 0; i <= trade.periods; ++i) {
        Date rolled = modified_following(add_months(trade.start_date, i * trade.frequency_months));
        ts.days.push_back(rolled.serial() - v);
    }
    for (std::size_t i = 0; i + 1 < ts.days.size(); ++i) {
        ts.alphas.push_back(static_cast<double>(ts.days[i + 1] - ts.days[i]) / 360.0);
    }
    return ts;
}

CoterminalDeal build_deal(const TradeSpec& trade, const YieldCurve& curve,
                          const AtmVolSurface& surface) {
    CoterminalDeal deal;
    deal.trade = trade;
    deal.tenor = build_schedule(trade);
    const auto& days = deal.tenor.days;
    const auto& alphas = deal.tenor.alphas;
    std::size_t N = alphas.size();
    for (long d : days) {
        deal.D0.push_back(curve.discount(static_cast<double>(d)));
        deal.t_model.push_back(static_cast<double>(d) / 360.0);
    }
    for (std::size_t j = 0; j < N; ++j) {
        double pvbp = 0.0;
        for (std::size_t i = j; i < N; ++i) {
            pvbp += alphas[i] * deal.D0[i + 1];
        }
        deal.P0.push_back(pvbp);
        deal.S0.push_back((deal.D0[j] - deal.D0[N]) / pvbp);
        double rem_months = static_cast<double>(N - j) * trade.frequency_months;
        deal.sigma_atm.push_back(
            surface.vol_clamped(static_cast<double>(days[j]), rem_months * 30.0));
        deal.T_expiry.push_back(static_cast<double>(days[j]) / 365.0);
    }
    return deal;
}

// ------------------------------------------------------------------ bootstrap

YieldCurve bootstrap_curve(const Date& anchor, const std::vector<Deposit>& deposits,
                           const std::vector<ParSwap>& swaps, CurveInterp interp) {
    std::vector<CurvePoint> points;
    for (const auto& dep : deposits) {
        if (dep.days <= 0) {
            throw std::invalid_argument("deposit tenor must be positive");
        }
        points.push_back({static_cast<double>(dep.days),
                          1.0 / (1.0 + dep.rate * static_cast<double>(dep.days) / 360.0)});
    }
    std::sort(points.begin(), points.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.day < b.day; });

    int prev_tenor = 0;
    for (const auto& swap : swaps) {
        if (swap.tenor_years <= prev_tenor) {
            throw std::invalid_argument("swap tenors must be strictly increasing");
        }
        prev_tenor = swap.tenor_years;
        // Shared annual payment schedule from the anchor.
        std::vector<double> pay_days, accruals;
        long prev = 0;
        for (int i = 1; i <= swap.tenor_years; ++i) {
            long d = modified_following(add_months(anchor, 12 * i)).serial() - anchor.serial();
            pay_days.push_back(static_cast<double>(d));
            accruals.push_back(static_cast<double>(d - prev) / 360.0);
            prev = d;
        }
        double final_day = pay_days.back();
        if (!points.empty() && final_day <= points.back().day) {
            throw std::invalid_argument("swap maturity inside already-built curve");
        }
        // Residual of the par equation as a function of the final discount factor.
        auto residual = [&](double df_final) {
            std::vector<CurvePoint> trial = points;
            trial.push_back({final_day, df_final});
            YieldCurve c(anchor, trial, interp);
            double pvbp = 0.0;
            for (std::size_t i = 0; i < pay_days.size(); ++i) {
                pvbp += accruals[i] * c.discount(pay_days[i]);
            }
            return swap.rate * pvbp - (1.0 - df_final);
        };
        double lo = 1e-8, hi = points.empty() ? 1.0 : points.back().df;
        double flo = residual(lo), fhi = residual(hi);
        if (flo * fhi > 0) {
            throw std::runtime_error("bootstrap: no solution for swap tenor " +
                                     std::to_string(swap.tenor_years));
        }
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            double mid = 0.5 * (lo + hi);
            if (residual(mid) * flo <= 0) {
                hi = mid;
            } else {
                lo = mid;
                flo = residual(lo);
            }
        }
        points.push_back({final_day, 0.5 * (lo + hi)});
    }
    return YieldCurve(anchor, points, interp);
}

// -------------------------------------------------------------------- loaders

YieldCurve load_curve_csv(const std::string& path, const Date& anchor, CurveInterp interp) {
    auto rows = read_csv(path);
    std::vector<CurvePoint> points;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) {
            throw std::runtime_error("curve.csv wants day,bid,ask");
        }
        double bid = std::stod(rows[r][1]), ask = std::stod(rows[r][2]);
        points.push_back({std::stod(rows[r][0]), 0.5 * (bid + ask)});
    }
    return YieldCurve(anchor, points, interp);
}

AtmVolSurface load_atm_csv(const std::string& path) {
    auto rows = read_csv(path);
    if (rows.size() < 2 || rows[0].size() < 2) {
        throw std::runtime_error("atm_surface.csv wants a header of expiry days");
    }
    std::vector<double> expiries;
    for (std::size_t c = 1; c < rows[0].size(); ++c) {
        expiries.push_back(std::stod(rows[0][c]));
    }
    std::vector<double> tenors;
    std::vector<std::vector<double>> vols;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        tenors.push_back(std::stod(rows[r][0]));
        std::vector<double> row;
        for (std::size_t c = 1; c < rows[r].size(); ++c) {
            row.push_back(std::stod(rows[r][c]));
        }
        vols.push_back(std::move(row));
    }
    return AtmVolSurface(expiries, tenors, vols);
}

SmileRatioCube load_ratio_cube_csv(const std::string& path) {
    auto rows = read_csv(path);
    std::vector<double> es, ts, offs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 4) {
            throw std::runtime_error("ratio_cube.csv wants expiry_day,tenor_day,offset_bp,ratio");
        }
        es.push_back(std::stod(rows[r][0]));
        ts.push_back(std::stod(rows[r][1]));
        offs.push_back(std::stod(rows[r][2]));
    }
    auto uniq = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    auto E = uniq(es), T = uniq(ts), O = uniq(offs);
    auto idx = [](const std::vector<double>& v, double x) {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };
    std::vector<std::vector<std::vector<double>>> ratios(
        E.size(), std::vector<std::vector<double>>(
                      T.size(), std::vector<double>(O.size(),
                                                    std::numeric_limits<double>::quiet_NaN())));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ratios[idx(E, std::stod(rows[r][0]))][idx(T, std::stod(rows[r][1]))]
              [idx(O, std::stod(rows[r][2]))] = std::stod(rows[r][3]);
    }
    for (const auto& pe : ratios) {
        for (const auto& pt : pe) {
            for (double v : pt) {
                if (std::isnan(v)) {
                    throw std::runtime_error("ratio cube is not a dense grid");
                }
            }
        }
    }
    return SmileRatioCube(E, T, O, ratios);
}

TradeSpec load_trade_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    nlohmann::json j;
    in >> j;
    TradeSpec t;
    t.name = j.value("name", "trade");
    t.valuation_date = parse_date(j.at("valuation_date").get<std::string>());
    t.start_date = parse_date(j.at("start_date").get<std::string>());
    t.notional = j.value("notional", 10000.0);
    t.payer = j.value("payer", true);
    t.periods = j.at("periods").get<int>();
    t.frequency_months = j.at("frequency_months").get<int>();
    t.strike = j.value("strike", 0.05);
    if (j.contains("exercise_dates")) {
        for (const auto& e : j["exercise_dates"]) {
            t.exercise_dates.push_back(e.get<int>());
        }
    }
    if (j.contains("grid")) {
        t.grid.steps = j["grid"].value("steps", 10);
        t.grid.devs = j["grid"].value("devs", 10);
        t.grid.order = j["grid"].value("order", 3);
    }
    return t;
}

}  // namespace mf
