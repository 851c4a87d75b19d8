#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mf/analytic.hpp"
#include "mf/market_data.hpp"

namespace mf {

enum class FitObjective {
    Price,       // relative option-price errors
    ImpliedVol,  // relative implied-vol errors
};

// Model families fitted per expiry.  BlackAtm is not optimized: it takes the
// ATM quote as a flat vol and only reports residuals, as the no-smile
// benchmark the richer fits are compared against.
enum class FitModel {
    BlackAtm,
    Lognormal,           // single sigma, m = 0
    DisplacedDiffusion,  // sigma and m
    Uvdd,                // sigma1, sigma2, m with lambda fixed
};

struct CalibrationQuote {
    double strike = 0.0;
    double vol = 0.0;  // market Black vol; prices are derived through Black
};

struct CalibrationProblem {
    SwaptionSpec base;  // forward/pvbp/expiry/payer of the underlying; strike ignored
    std::vector<CalibrationQuote> quotes;
    FitObjective objective = FitObjective::Price;
    double lambda = 0.75;  // first-component weight, held fixed
    double m_cap = 0.10;   // displacement constrained to (0, m_cap)
};

struct FitReport {
    UVDDParams params;
    std::vector<double> residuals;  // per quote, (model - market) / market
    double avg_abs_err = 0.0;       // mean |residual|
    double objective_value = 0.0;   // mean squared residual
    int iterations = 0;
    bool converged = false;
    std::string message;
};

// Per-quote relative errors of `params` against the problem's quotes in the
// problem's objective.  Throws std::invalid_argument on a malformed problem
// (fewer than 3 quotes, duplicate strikes, non-positive market values).
std::vector<double> residuals(const CalibrationProblem& problem, const UVDDParams& params);

// Free parameters are fitted unconstrained through log transforms, the
// displacement through z = log(m_cap/m - 1) which keeps m inside (0, m_cap).
// Damped least squares from three deterministic starts; the best local
// optimum wins.  Non-convergence returns best-so-far with converged=false.
FitReport calibrate_expiry(const CalibrationProblem& problem, FitModel model);

// Black quotes for the expiry-n co-terminal swaption at the given ATM strike
// offsets, vols read off the ratio cube.
CalibrationProblem make_problem(const CoterminalDeal& deal, int n, const SmileRatioCube& cube,
                                std::span<const double> offsets_bp,
                                FitObjective objective = FitObjective::Price,
                                double lambda = 0.75, double m_cap = 0.10);

// Quotes produced by a known parameter set: UVDD prices across the offsets,
// re-expressed as Black vols.  The round-trip data source for solver tests.
std::vector<CalibrationQuote> synthetic_quotes(const SwaptionSpec& base, const UVDDParams& truth,
                                               std::span<const double> offsets_bp);

struct StripEntry {
    int n = 0;  // expiry index T_n
    FitReport fit;
};

struct StripReport {
    std::vector<StripEntry> entries;
    double avg_abs_err = 0.0;  // across all expiries and strikes
};

// Independent per-expiry calibrations across the whole co-terminal family.
StripReport calibrate_strip(const CoterminalDeal& deal, const SmileRatioCube& cube,
                            std::span<const double> offsets_bp, FitModel model,
                            FitObjective objective = FitObjective::Price,
                            double lambda = 0.75, double m_cap = 0.10);

// (expiry_day, sigma1, sigma2, omega, m, lambda, avg_abs_err) per expiry.
void write_calibration_csv(const std::string& path, const CoterminalDeal& deal,
                           const StripReport& strip);

// sigma1 such that the model ATM price matches `target_price`, holding the
// shape (omega, m, lambda) fixed; used to re-anchor synthetic smiles to the
// day's ATM quote.
double adjust_sigma_to_atm(const SwaptionSpec& atm, const UVDDParams& shape, double target_price);

// ------------------------------------------------------- mean reversion

// Daily quote history of one co-terminal rate; T is its reset in years.
struct RateHistory {
    double T = 0.0;
    std::vector<double> rates;
};

// Sample correlation of the two series' daily log returns.  Throws
// std::domain_error when either series is constant.
double log_return_correlation(std::span<const double> s1, std::span<const double> s2);

// Instantaneous correlations from daily log returns, scaled by sqrt(T_n/T_k)
// into terminal-correlation targets, then a single mean-reversion level fitted
// by least squares against the driver autocorrelation closed form.
double estimate_mean_reversion(std::span<const RateHistory> histories);

// Lognormal daily histories whose cross-correlations equal the model-implied
// terminal correlation structure for mean reversion `a`; the estimator's own
// simulation oracle.  Deterministic per seed.
std::vector<RateHistory> simulate_rate_histories(double a, std::span<const double> resets,
                                                 int days, double daily_vol, std::uint64_t seed);

}  // namespace mf
