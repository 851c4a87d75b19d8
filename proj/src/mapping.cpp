#include "mf/mapping.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "mf/driver.hpp"
#include "mf/quadrature.hpp"

namespace mf {

namespace {

struct CaseShape {
    double m;
    double lambda;
    double omega;
};

CaseShape case_shape(int case_id) {
    switch (case_id) {
        case 1: return {0.0, 1.0, 1.0};
        case 2: return {0.025, 1.0, 1.0};
        case 3: return {0.05, 1.0, 1.0};
        case 4: return {-0.025, 1.0, 1.0};
        case 5: return {0.0, 0.75, 2.0};
        case 6: return {0.0, 0.75, 5.0};
        case 7: return {0.025, 0.75, 2.0};
        case 8: return {0.025, 0.75, 3.0};
        default: throw std::invalid_argument("unknown mapping case id");
    }
}

UVDDParams anchor_expiry(const CoterminalDeal& deal, std::size_t j, double m,
                         double lambda, double omega) {
    const double atm_vol = deal.sigma_atm[j];
    const double T = deal.T_expiry[j];
    UVDDParams p;
    p.m = m;
    p.lambda = lambda;
    if (m == 0.0 && (lambda == 1.0 || omega == 1.0)) {
        p.sigma1 = atm_vol;  // plain lognormal: the quoted vol is the answer
    } else {
        SwaptionSpec atm{T, deal.S0[j], deal.P0[j], deal.S0[j], +1, 1.0};
        const double target = black_european(atm, atm_vol);
        p.sigma1 = atm_adjusted_sigma1(deal.S0[j], deal.P0[j], T, m, lambda, omega, target);
    }
    p.sigma2 = omega * p.sigma1;
    return p;
}

}  // namespace

MappingModel make_case_model(const CoterminalDeal& deal, int case_id) {
    const CaseShape shape = case_shape(case_id);
    MappingModel model;
    for (std::size_t j = 0; j < deal.S0.size(); ++j) {
        model.params.push_back(
            anchor_expiry(deal, j, shape.m, shape.lambda, shape.omega));
    }
    return model;
}

MappingModel make_atm_anchored_model(const CoterminalDeal& deal,
                                     const std::vector<UVDDParams>& shapes) {
    if (shapes.size() != deal.S0.size()) {
        throw std::invalid_argument("one parameter shape per expiry required");
    }
    MappingModel model;
    for (std::size_t j = 0; j < shapes.size(); ++j) {
        model.params.push_back(
            anchor_expiry(deal, j, shapes[j].m, shapes[j].lambda, shapes[j].omega()));
    }
    return model;
}

MappedLattice::MappedLattice(const CoterminalDeal& deal, const MappingModel& model,
                             double mean_reversion, const GridParams& grid)
    : deal_(deal), model_(model), a_(mean_reversion), grid_(grid) {
    if (deal_.P0.empty()) throw std::invalid_argument("deal has no expiries");
    if (model_.params.size() != deal_.P0.size()) {
        throw std::invalid_argument("one parameter set per expiry required");
    }
    if (grid_.steps <= 0 || grid_.devs <= 0 || grid_.order <= 0) {
        throw std::invalid_argument("grid parameters must be positive");
    }
    build();
}

void MappedLattice::build() {
    const std::size_t N = deal_.P0.size();
    const auto& alphas = deal_.tenor.alphas;
    const double D_end0 = deal_.D0[N];  // D_{N+1}(0)
    const int M = grid_.steps * grid_.devs;

    dates_.assign(N, {});
    for (std::size_t j = 0; j < N; ++j) {
        MappedDate& d = dates_[j];
        d.sigma0 = std::sqrt(driver_variance(a_, 0.0, deal_.t_model[j]));
        const double delta = d.sigma0 / grid_.steps;
        d.x.resize(2 * M + 1);
        for (int i = -M; i <= M; ++i) d.x[static_cast<std::size_t>(i + M)] = i * delta;
    }

    for (std::size_t jj = N; jj-- > 0;) {
        MappedDate& d = dates_[jj];
        const std::size_t nodes = d.x.size();
        if (jj == N - 1) {
            d.R.assign(nodes, alphas[N - 1]);
        } else {
            const MappedDate& next = dates_[jj + 1];
            std::vector<double> g(next.x.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] = alphas[jj] / next.D_end[i] + next.R[i];
            }
            GridFunction gf(next.x, g, grid_.order);
            const double sig_c = std::sqrt(
                driver_variance(a_, deal_.t_model[jj], deal_.t_model[jj + 1]));
            d.R.resize(nodes);
            for (std::size_t i = 0; i < nodes; ++i) {
                d.R[i] = gf.integrate_against(d.x[i], sig_c);
            }
        }

        GridFunction rf(d.x, d.R, grid_.order);
        const std::vector<double> cum = rf.cumulative_at_nodes(0.0, d.sigma0);
        const std::vector<double> ccum = rf.complement_at_nodes(0.0, d.sigma0);
        d.S.resize(nodes);
        d.D_end.resize(nodes);
        d.digital.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            d.digital[i] = D_end0 * cum[i];
            // Invert from whichever tail carries the small mass; the other side
            // would round the ratio into a flat quantile and put a spurious
            // kink in the functionals that the later fits amplify.
            const double lower = D_end0 * cum[i] / deal_.P0[jj];
            const double upper = D_end0 * ccum[i] / deal_.P0[jj];
            constexpr double kFloor = 1e-300;
            if (lower <= upper) {
                double u = lower;
                if (u < kFloor) {
                    u = kFloor;
                    ++diag_.clamped_nodes;
                }
                d.S[i] = uvdd_inverse_digital(u, deal_.S0[jj], deal_.T_expiry[jj],
                                              model_.params[jj]);
            } else {
                double c = upper;
                if (c < kFloor) {
                    c = kFloor;
                    ++diag_.clamped_nodes;
                }
                d.S[i] = uvdd_inverse_complement(c, deal_.S0[jj], deal_.T_expiry[jj],
                                                 model_.params[jj]);
            }
            d.D_end[i] = 1.0 / (1.0 + d.S[i] * d.R[i]);
        }

        const double pvbp = D_end0 * rf.integrate_against(0.0, d.sigma0);
        diag_.max_pvbp_err = std::max(diag_.max_pvbp_err,
                                      std::fabs(pvbp / deal_.P0[jj] - 1.0));
    }

    // Libor functionals and the bond round-trip diagnostic need all dates.
    for (std::size_t j = 0; j < N; ++j) {
        MappedDate& d = dates_[j];
        std::vector<double> bond;
        if (j == N - 1) {
            bond = d.D_end;
        } else {
            bond = reconstruct_bond(static_cast<int>(j) + 2, static_cast<int>(j) + 1);
        }
        d.L.resize(d.x.size());
        for (std::size_t i = 0; i < d.x.size(); ++i) {
            d.L[i] = (1.0 / bond[i] - 1.0) / alphas[j];
        }

        std::vector<double> inv(d.x.size());
        for (std::size_t i = 0; i < d.x.size(); ++i) inv[i] = 1.0 / d.D_end[i];
        const double D_today =
            D_end0 * integrate_grid_function(d.x, inv, 0.0, d.sigma0, grid_.order);
        diag_.max_bond_err = std::max(diag_.max_bond_err,
                                      std::fabs(D_today / deal_.D0[j] - 1.0));
    }
}

const MappedDate& MappedLattice::date(int n) const {
    if (n < 1 || n > periods()) throw std::out_of_range("date index outside 1..N");
    return dates_[static_cast<std::size_t>(n - 1)];
}

double MappedLattice::time_of(int n) const {
    if (n == 0) return 0.0;
    if (n < 0 || n > periods() + 1) throw std::out_of_range("date index outside 0..N+1");
    return deal_.t_model[static_cast<std::size_t>(n - 1)];
}

double MappedLattice::variance_between(int n0, int n1) const {
    return driver_variance(a_, time_of(n0), time_of(n1));
}

std::vector<double> MappedLattice::reconstruct_bond(int k, int n) const {
    const int N = periods();
    if (n < 1 || n > N) throw std::out_of_range("date index outside 1..N");
    if (k < n || k > N + 1) throw std::out_of_range("bond index outside n..N+1");
    const MappedDate& d = date(n);
    if (k == n) return std::vector<double>(d.x.size(), 1.0);
    if (k == N + 1) return d.D_end;
    const MappedDate& dk = date(k);
    std::vector<double> inv(dk.x.size());
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / dk.D_end[i];
    GridFunction gf(dk.x, inv, grid_.order);
    const double sig = std::sqrt(variance_between(n, k));
    std::vector<double> out(d.x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = d.D_end[i] * gf.integrate_against(d.x[i], sig);
    }
    return out;
}

std::string MappedLattice::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["mean_reversion"] = a_;
    j["grid"] = {{"steps", grid_.steps}, {"devs", grid_.devs}, {"order", grid_.order}};
    nlohmann::json trade;
    trade["name"] = deal_.trade.name;
    trade["valuation_date"] = to_string(deal_.trade.valuation_date);
    trade["start_date"] = to_string(deal_.trade.start_date);
    trade["notional"] = deal_.trade.notional;
    trade["payer"] = deal_.trade.payer;
    trade["periods"] = deal_.trade.periods;
    trade["frequency_months"] = deal_.trade.frequency_months;
    trade["strike"] = deal_.trade.strike;
    trade["exercise_dates"] = deal_.trade.exercise_dates;
    j["trade"] = trade;
    j["tenor_days"] = deal_.tenor.days;
    j["alphas"] = deal_.tenor.alphas;
    j["D0"] = deal_.D0;
    j["P0"] = deal_.P0;
    j["S0"] = deal_.S0;
    j["sigma_atm"] = deal_.sigma_atm;
    j["T_expiry"] = deal_.T_expiry;
    j["t_model"] = deal_.t_model;
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : model_.params) {
        params.push_back({{"m", p.m},
                          {"sigma1", p.sigma1},
                          {"sigma2", p.sigma2},
                          {"lambda", p.lambda}});
    }
    j["params"] = params;
    nlohmann::json dates = nlohmann::json::array();
    for (const auto& d : dates_) {
        dates.push_back({{"sigma0", d.sigma0},
                         {"x", d.x},
                         {"R", d.R},
                         {"S", d.S},
                         {"D_end", d.D_end},
                         {"L", d.L},
                         {"digital", d.digital}});
    }
    j["dates"] = dates;
    return j.dump();
}

MappedLattice MappedLattice::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1) {
        throw std::runtime_error("unsupported lattice dump version");
    }
    MappedLattice lat;
    lat.a_ = j.at("mean_reversion").get<double>();
    lat.grid_.steps = j.at("grid").at("steps").get<int>();
    lat.grid_.devs = j.at("grid").at("devs").get<int>();
    lat.grid_.order = j.at("grid").at("order").get<int>();
    const auto& trade = j.at("trade");
    lat.deal_.trade.name = trade.at("name").get<std::string>();
    lat.deal_.trade.valuation_date = parse_date(trade.at("valuation_date").get<std::string>());
    lat.deal_.trade.start_date = parse_date(trade.at("start_date").get<std::string>());
    lat.deal_.trade.notional = trade.at("notional").get<double>();
    lat.deal_.trade.payer = trade.at("payer").get<bool>();
    lat.deal_.trade.periods = trade.at("periods").get<int>();
    lat.deal_.trade.frequency_months = trade.at("frequency_months").get<int>();
    lat.deal_.trade.strike = trade.at("strike").get<double>();
    lat.deal_.trade.exercise_dates = trade.at("exercise_dates").get<std::vector<int>>();
    lat.deal_.trade.grid = lat.grid_;
    lat.deal_.tenor.days = j.at("tenor_days").get<std::vector<long>>();
    lat.deal_.tenor.alphas = j.at("alphas").get<std::vector<double>>();
    lat.deal_.D0 = j.at("D0").get<std::vector<double>>();
    lat.deal_.P0 = j.at("P0").get<std::vector<double>>();
    lat.deal_.S0 = j.at("S0").get<std::vector<double>>();
    lat.deal_.sigma_atm = j.at("sigma_atm").get<std::vector<double>>();
    lat.deal_.T_expiry = j.at("T_expiry").get<std::vector<double>>();
    lat.deal_.t_model = j.at("t_model").get<std::vector<double>>();
    for (const auto& p : j.at("params")) {
        lat.model_.params.push_back({p.at("m").get<double>(), p.at("sigma1").get<double>(),
                                     p.at("sigma2").get<double>(),
                                     p.at("lambda").get<double>()});
    }
    for (const auto& dj : j.at("dates")) {
        MappedDate d;
        d.sigma0 = dj.at("sigma0").get<double>();
        d.x = dj.at("x").get<std::vector<double>>();
        d.R = dj.at("R").get<std::vector<double>>();
        d.S = dj.at("S").get<std::vector<double>>();
        d.D_end = dj.at("D_end").get<std::vector<double>>();
        d.L = dj.at("L").get<std::vector<double>>();
        d.digital = dj.at("digital").get<std::vector<double>>();
        lat.dates_.push_back(std::move(d));
    }
    if (lat.model_.params.size() != lat.deal_.P0.size() ||
        lat.dates_.size() != lat.deal_.P0.size()) {
        throw std::runtime_error("lattice dump is inconsistent");
    }
    return lat;
}

}  // namespace mf
