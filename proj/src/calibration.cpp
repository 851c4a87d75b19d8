#include "mf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "mf/driver.hpp"

namespace mf {

namespace {

void validate(const CalibrationProblem& p) {
    if (p.quotes.size() < 3) throw std::invalid_argument("calibration needs at least 3 quotes");
    if (!(p.base.forward > 0.0) || !(p.base.pvbp > 0.0) || !(p.base.expiry > 0.0))
        throw std::invalid_argument("calibration underlying must have positive forward/pvbp/expiry");
    if (!(p.m_cap > 0.0)) throw std::invalid_argument("m_cap must be positive");
    if (p.lambda < 0.0 || p.lambda > 1.0) throw std::invalid_argument("lambda outside [0,1]");
    std::vector<double> ks;
    for (const auto& q : p.quotes) {
        if (!(q.vol > 0.0)) throw std::invalid_argument("non-positive quote vol");
        ks.push_back(q.strike);
    }
    std::sort(ks.begin(), ks.end());
    if (std::adjacent_find(ks.begin(), ks.end()) != ks.end())
        throw std::invalid_argument("duplicate quote strikes");
}

SwaptionSpec at_strike(const SwaptionSpec& base, double strike) {
    SwaptionSpec s = base;
    s.strike = strike;
    s.notional = 1.0;
    return s;
}

// Vol of the quote closest to the forward; the flat-vol benchmark level.
double atm_quote_vol(const CalibrationProblem& p) {
    double best = p.quotes.front().vol;
    double dist = std::abs(p.quotes.front().strike - p.base.forward);
    for (const auto& q : p.quotes) {
        double d = std::abs(q.strike - p.base.forward);
        if (d < dist) {
            dist = d;
            best = q.vol;
        }
    }
    return best;
}

std::vector<double> residuals_impl(const CalibrationProblem& p, const UVDDParams& params) {
    std::vector<double> out;
    out.reserve(p.quotes.size());
    for (const auto& q : p.quotes) {
        SwaptionSpec spec = at_strike(p.base, q.strike);
        double model_price = uvdd_european(spec, params);
        if (p.objective == FitObjective::Price) {
            double market_price = black_european(spec, q.vol);
            if (!(market_price > 0.0)) throw std::invalid_argument("market price is zero");
            out.push_back(model_price / market_price - 1.0);
        } else {
            double model_vol = implied_black_vol(spec, model_price);
            out.push_back(model_vol / q.vol - 1.0);
        }
    }
    return out;
}

// ------------------------------------------------ transformed free parameters

// Free vectors: Lognormal {log s}, DisplacedDiffusion {log s, z},
// Uvdd {log s1, log s2, z}; m = m_cap / (1 + e^z) keeps m in (0, m_cap).
UVDDParams unpack(const CalibrationProblem& p, FitModel model, const std::vector<double>& y) {
    UVDDParams out;
    switch (model) {
        case FitModel::BlackAtm:
            out.sigma1 = out.sigma2 = atm_quote_vol(p);
            out.m = 0.0;
            out.lambda = 1.0;
            break;
        case FitModel::Lognormal:
            out.sigma1 = out.sigma2 = std::exp(y[0]);
            out.m = 0.0;
            out.lambda = 1.0;
            break;
        case FitModel::DisplacedDiffusion:
            out.sigma1 = out.sigma2 = std::exp(y[0]);
            out.m = p.m_cap / (1.0 + std::exp(y[1]));
            out.lambda = 1.0;
            break;
        case FitModel::Uvdd:
            out.sigma1 = std::exp(y[0]);
            out.sigma2 = std::exp(y[1]);
            out.m = p.m_cap / (1.0 + std::exp(y[2]));
            out.lambda = p.lambda;
            break;
    }
    return out;
}

double z_of_m(double m, double m_cap) { return std::log(m_cap / m - 1.0); }

std::vector<std::vector<double>> start_points(const CalibrationProblem& p, FitModel model) {
    const double v = atm_quote_vol(p);
    const double h = p.m_cap;
    auto lg = [](double x) { return std::log(x); };
    switch (model) {
        case FitModel::Lognormal:
            return {{lg(v)}, {lg(0.8 * v)}, {lg(1.2 * v)}};
        case FitModel::DisplacedDiffusion:
            return {{lg(v), z_of_m(0.5 * h, h)},
                    {lg(0.8 * v), z_of_m(0.8 * h, h)},
                    {lg(1.2 * v), z_of_m(0.2 * h, h)}};
        case FitModel::Uvdd:
            return {{lg(v), lg(v), z_of_m(0.5 * h, h)},
                    {lg(0.8 * v), lg(2.0 * v), z_of_m(0.6 * h, h)},
                    {lg(1.2 * v), lg(3.0 * v), z_of_m(0.15 * h, h)}};
        case FitModel::BlackAtm:
            break;
    }
    return {{}};
}

// ------------------------------------------------------------- damped solver

double mean_square(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return r.empty() ? 0.0 : s / static_cast<double>(r.size());
}

// Gaussian elimination with partial pivoting on the tiny normal systems.
bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> b,
                 std::vector<double>& x) {
    const std::size_t k = b.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-300) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < k; ++r) {
            double f = A[r][col] / A[col][col];
            for (std::size_t c = col; c < k; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(k, 0.0);
    for (std::size_t r = k; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < k; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return true;
}

struct SolveResult {
    std::vector<double> y;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

SolveResult levenberg_marquardt(const CalibrationProblem& p, FitModel model,
                                std::vector<double> y) {
    const std::size_t k = y.size();
    const std::size_t L = p.quotes.size();
    auto eval = [&](const std::vector<double>& yy) { return residuals_impl(p, unpack(p, model, yy)); };

    std::vector<double> r = eval(y);
    double F = mean_square(r);
    double mu = 1e-3;
    SolveResult res{y, F, 0, false};

    for (int it = 0; it < 500; ++it) {
        res.iterations = it + 1;
        // central-difference Jacobian
        std::vector<std::vector<double>> J(L, std::vector<double>(k, 0.0));
        for (std::size_t j = 0; j < k; ++j) {
            double h = 1e-6 * std::max(1.0, std::abs(y[j]));
            std::vector<double> yp = y, ym = y;
            yp[j] += h;
            ym[j] -= h;
            std::vector<double> rp = eval(yp), rm = eval(ym);
            for (std::size_t i = 0; i < L; ++i) J[i][j] = (rp[i] - rm[i]) / (2.0 * h);
        }
        std::vector<std::vector<double>> A(k, std::vector<double>(k, 0.0));
        std::vector<double> g(k, 0.0);
        for (std::size_t i = 0; i < L; ++i)
            for (std::size_t a = 0; a < k; ++a) {
                g[a] += J[i][a] * r[i];
                for (std::size_t b = a; b < k; ++b) A[a][b] += J[i][a] * J[i][b];
            }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b) A[a][b] = A[b][a];

        bool accepted = false;
        double step_norm = 0.0;
        for (int inner = 0; inner < 30 && !accepted; ++inner) {
            std::vector<std::vector<double>> Ad = A;
            for (std::size_t a = 0; a < k; ++a) Ad[a][a] += mu * std::max(A[a][a], 1e-12);
            std::vector<double> delta;
            if (!solve_dense(Ad, g, delta)) {
                mu *= 4.0;
                continue;
            }
            std::vector<double> yn = y;
            step_norm = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                yn[j] -= delta[j];
                step_norm = std::max(step_norm, std::abs(delta[j]));
            }
            std::vector<double> rn = eval(yn);
            double Fn = mean_square(rn);
            if (Fn < F) {
                y = yn;
                r = rn;
                double decrease = (F - Fn) / std::max(F, 1e-300);
                F = Fn;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                if (step_norm < 1e-10 || decrease < 1e-12) {
                    res.y = y;
                    res.objective = F;
                    res.converged = true;
                    return res;
                }
            } else {
                mu *= 4.0;
            }
        }
        if (!accepted) {  // damping exhausted: no descent direction left
            res.y = y;
            res.objective = F;
            res.converged = true;
            return res;
        }
    }
    res.y = y;
    res.objective = F;
    return res;
}

}  // namespace

std::vector<double> residuals(const CalibrationProblem& problem, const UVDDParams& params) {
    validate(problem);
    return residuals_impl(problem, params);
}

FitReport calibrate_expiry(const CalibrationProblem& problem, FitModel model) {
    validate(problem);
    FitReport report;
    if (model == FitModel::BlackAtm) {
        report.params = unpack(problem, model, {});
        report.residuals = residuals_impl(problem, report.params);
        report.objective_value = mean_square(report.residuals);
        report.converged = true;
        report.message = "flat ATM benchmark (no fit)";
    } else {
        SolveResult best;
        bool have = false;
        for (const auto& start : start_points(problem, model)) {
            SolveResult r = levenberg_marquardt(problem, model, start);
            if (!have || r.objective < best.objective) {
                best = r;
                have = true;
            }
        }
        report.params = unpack(problem, model, best.y);
        report.residuals = residuals_impl(problem, report.params);
        report.objective_value = best.objective;
        report.iterations = best.iterations;
        report.converged = best.converged;
        report.message = best.converged ? "converged" : "max iterations; best point kept";
    }
    double s = 0.0;
    for (double v : report.residuals) s += std::abs(v);
    report.avg_abs_err = s / static_cast<double>(report.residuals.size());
    return report;
}

CalibrationProblem make_problem(const CoterminalDeal& deal, int n, const SmileRatioCube& cube,
                                std::span<const double> offsets_bp, FitObjective objective,
                                double lambda, double m_cap) {
    const int N = deal.trade.periods;
    if (n < 1 || n > N) throw std::out_of_range("expiry index outside 1..N");
    const std::size_t j = static_cast<std::size_t>(n - 1);
    CalibrationProblem p;
    p.base.expiry = deal.T_expiry[j];
    p.base.forward = deal.S0[j];
    p.base.pvbp = deal.P0[j];
    p.base.payer = deal.trade.payer ? +1 : -1;
    p.objective = objective;
    p.lambda = lambda;
    p.m_cap = m_cap;
    const double expiry_day = static_cast<double>(deal.tenor.days[j]);
    const double tenor_day = (N - n + 1) * deal.trade.frequency_months * 30.0;
    for (double off : offsets_bp) {
        CalibrationQuote q;
        q.strike = deal.S0[j] + off * 1e-4;
        q.vol = deal.sigma_atm[j] * cube.ratio(expiry_day, tenor_day, off);
        p.quotes.push_back(q);
    }
    return p;
}

std::vector<CalibrationQuote> synthetic_quotes(const SwaptionSpec& base, const UVDDParams& truth,
                                               std::span<const double> offsets_bp) {
    std::vector<CalibrationQuote> out;
    for (double off : offsets_bp) {
        SwaptionSpec spec = at_strike(base, base.forward + off * 1e-4);
        double price = uvdd_european(spec, truth);
        out.push_back({spec.strike, implied_black_vol(spec, price)});
    }
    return out;
}

StripReport calibrate_strip(const CoterminalDeal& deal, const SmileRatioCube& cube,
                            std::span<const double> offsets_bp, FitModel model,
                            FitObjective objective, double lambda, double m_cap) {
    StripReport report;
    double total = 0.0;
    std::size_t count = 0;
    for (int n = 1; n <= deal.trade.periods; ++n) {
        CalibrationProblem p = make_problem(deal, n, cube, offsets_bp, objective, lambda, m_cap);
        StripEntry entry;
        entry.n = n;
        entry.fit = calibrate_expiry(p, model);
        for (double r : entry.fit.residuals) total += std::abs(r);
        count += entry.fit.residuals.size();
        report.entries.push_back(std::move(entry));
    }
    report.avg_abs_err = count ? total / static_cast<double>(count) : 0.0;
    return report;
}

void write_calibration_csv(const std::string& path, const CoterminalDeal& deal,
                           const StripReport& strip) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "expiry_day,sigma1,sigma2,omega,m,lambda,avg_abs_err\n";
    char line[256];
    for (const auto& e : strip.entries) {
        const auto& p = e.fit.params;
        std::snprintf(line, sizeof line, "%ld,%.10g,%.10g,%.10g,%.10g,%.10g,%.6e\n",
                      deal.tenor.days[static_cast<std::size_t>(e.n - 1)], p.sigma1, p.sigma2,
                      p.omega(), p.m, p.lambda, e.fit.avg_abs_err);
        out << line;
    }
}

double adjust_sigma_to_atm(const SwaptionSpec& atm, const UVDDParams& shape, double target_price) {
    return atm_adjusted_sigma1(atm.forward, atm.pvbp, atm.expiry, shape.m, shape.lambda,
                               shape.omega(), target_price);
}

// ----------------------------------------------------------- mean reversion

double log_return_correlation(std::span<const double> s1, std::span<const double> s2) {
    if (s1.size() != s2.size() || s1.size() < 2)
        throw std::invalid_argument("series must be aligned with at least 2 observations");
    const std::size_t n = s1.size() - 1;
    std::vector<double> r1(n), r2(n);
    for (std::size_t i = 0; i < n; ++i) {
        r1[i] = std::log(s1[i + 1] / s1[i]);
        r2[i] = std::log(s2[i + 1] / s2[i]);
    }
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m1 += r1[i];
        m2 += r2[i];
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    double c11 = 0.0, c22 = 0.0, c12 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c11 += (r1[i] - m1) * (r1[i] - m1);
        c22 += (r2[i] - m2) * (r2[i] - m2);
        c12 += (r1[i] - m1) * (r2[i] - m2);
    }
    if (!(c11 > 0.0) || !(c22 > 0.0))
        throw std::domain_error("constant series: correlation undefined");
    return c12 / std::sqrt(c11 * c22);
}

double estimate_mean_reversion(std::span<const RateHistory> histories) {
    if (histories.size() < 2) throw std::invalid_argument("need at least 2 rate histories");
    for (const auto& h : histories)
        if (h.rates.size() < 61 || h.rates.size() != histories.front().rates.size())
            throw std::invalid_argument("histories must be aligned with >= 61 observations");

    struct Pair {
        double Tn, Tk, target;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < histories.size(); ++i)
        for (std::size_t j = i + 1; j < histories.size(); ++j) {
            const auto& a = histories[i].T < histories[j].T ? histories[i] : histories[j];
            const auto& b = histories[i].T < histories[j].T ? histories[j] : histories[i];
            double rho = log_return_correlation(a.rates, b.rates);
            pairs.push_back({a.T, b.T, rho * std::sqrt(a.T / b.T)});
        }

    auto objective = [&](double a) {
        double s = 0.0;
        for (const auto& p : pairs) {
            double d = driver_autocorrelation(a, p.Tn, p.Tk) - p.target;
            s += d * d;
        }
        return s;
    };

    // coarse scan, then golden-section refinement of the bracketing interval
    double best_a = 0.0, best_f = objective(0.0);
    for (double a = -0.25; a <= 1.0 + 1e-12; a += 0.005) {
        double f = objective(a);
        if (f < best_f) {
            best_f = f;
            best_a = a;
        }
    }
    double lo = best_a - 0.005, hi = best_a + 0.005;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 1e-7) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = objective(x2);
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<RateHistory> simulate_rate_histories(double a, std::span<const double> resets,
                                                 int days, double daily_vol, std::uint64_t seed) {
    if (a < 0.0) throw std::invalid_argument("simulation oracle requires a >= 0");
    if (resets.size() < 2 || days < 2) throw std::invalid_argument("need >= 2 resets and days");
    for (std::size_t i = 1; i < resets.size(); ++i)
        if (!(resets[i] > resets[i - 1]))
            throw std::invalid_argument("resets must be strictly increasing");

    // Cross-correlation of the model's terminal structure: corr(n,k) = u_n/u_k
    // with u = sqrt((e^{2aT}-1)/(2aT)); realized by a shared Brownian read at
    // fictitious times u^2 and rescaled, fresh draws each day.
    const std::size_t ns = resets.size();
    std::vector<double> u(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        double T = resets[i];
        u[i] = a == 0.0 ? 1.0 : std::sqrt((std::exp(2.0 * a * T) - 1.0) / (2.0 * a * T));
    }
    std::vector<double> w(ns);  // sqrt of the u^2 increments
    for (std::size_t i = 0; i < ns; ++i) {
        double prev = i == 0 ? 0.0 : u[i - 1] * u[i - 1];
        w[i] = std::sqrt(u[i] * u[i] - prev);
    }

    std::vector<RateHistory> out(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        out[i].T = resets[i];
        out[i].rates.assign(static_cast<std::size_t>(days), 0.0);
        out[i].rates[0] = 0.04 + 0.005 * static_cast<double>(i);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int d = 1; d < days; ++d) {
        double bridge = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            bridge += w[i] * normal(rng);
            double eps = bridge / u[i];
            auto& r = out[i].rates;
            r[static_cast<std::size_t>(d)] = r[static_cast<std::size_t>(d - 1)] *
                                             std::exp(daily_vol * eps - 0.5 * daily_vol * daily_vol);
        }
    }
    return out;
}

}  // namespace mf
