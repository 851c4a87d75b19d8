#pragma once

#include <array>
#include <span>
#include <vector>

#include "mf/mapping.hpp"

namespace mf {

// European co-terminal swaption with expiry T_n priced off the lattice by
// numeraire-rebased integration, the kink split at the exercise boundary.
double european_value(const MappedLattice& lat, int n, double strike, int payer);

// Rebased swap values SV(X_n)/D_{N+1}(X_n) per date (index n-1), built by the
// coupon recursion: each coupon fixes at its reset date, pays one period on,
// and is carried through the conditional expectations.
std::vector<std::vector<double>> swap_value_lattice(const MappedLattice& lat,
                                                    double strike, int payer);
// Today's value of the same swap (all N coupons); equals the curve identity
// notional * payer * P_1(0) * (S_1(0) - K) up to quadrature error.
double swap_value_today(const MappedLattice& lat, double strike, int payer);

// Backward-induction layers of a Bermudan valuation, all numeraire-rebased.
struct ValueLattice {
    std::vector<std::vector<double>> exercise;      // phi*(S-K)*R, empty if not exercisable
    std::vector<std::vector<double>> continuation;  // E_n[next layer]
    std::vector<std::vector<double>> bermudan;      // max(exercise, continuation)
    double value = 0.0;                             // today, currency on notional
};

ValueLattice build_value_lattice(const MappedLattice& lat, double strike, int payer,
                                 const std::vector<int>& exercise_dates);
double bermudan_value(const MappedLattice& lat, double strike, int payer,
                      const std::vector<int>& exercise_dates);
double bermudan_value(const MappedLattice& lat);  // terms from the embedded trade

// ------------------------------------------------------------- future smiles

// Underlying of the expiry-T_n co-terminal swap seen at date T_f, node i_f.
struct FutureState {
    double x = 0.0;       // driver value
    double forward = 0.0; // S_n at the node
    double pvbp = 0.0;    // P_n at the node
    double df_end = 0.0;  // D_{N+1} at the node
};
FutureState future_state(const MappedLattice& lat, int f, int node, int n);

struct SmilePoint {
    double strike = 0.0;
    double price = 0.0;  // currency on notional
    double vol = 0.0;    // implied Black vol, 0 when not invertible
    bool ok = false;
};

// Conditional smile at (T_f, node): European prices across strikes inverted
// through the Black formula with the reconstructed forward/pvbp and time
// T_n - T_f.  f = 0, node ignored, reproduces today's smile.
std::vector<SmilePoint> future_smile(const MappedLattice& lat, int f, int node, int n,
                                     std::span<const double> strikes, int payer);

// ATM future implied vol at one node (strike = conditional forward).
double future_atm_vol(const MappedLattice& lat, int f, int node, int n);

// Probability-weighted average of ATM future vols over the central band of
// date-f nodes (|x| within one deviation), the comparison quantity for the
// mean-reversion sweeps.
double average_future_atm_vol(const MappedLattice& lat, int f, int n);

// ------------------------------------------------------------ smile dynamics

// Curve/deal bumps for the frozen-parameter repricing experiments.
YieldCurve parallel_bumped_curve(const YieldCurve& curve, double shift);  // zero yield, per year
CoterminalDeal bump_deal_df(const CoterminalDeal& base, int k, double delta);  // D at T_k += delta

struct SmileCurve {
    double forward = 0.0;
    std::vector<SmilePoint> points;
};

// Today's expiry-T_n smile under a bumped market with the mapping parameters
// frozen from the base market.
SmileCurve frozen_model_smile(const CoterminalDeal& deal, const MappingModel& frozen,
                              double mean_reversion, const GridParams& grid, int n,
                              std::span<const double> strikes, int payer);

// ------------------------------------------------------- three-state fixture

// The discrete 3-state toy lattice: two reset dates, yearly accruals, uniform
// transition probability 1/3, coupons valued at their fixing dates and
// continuations discounted by 1/(1+L).
struct ThreeStateFixture {
    double L0 = 0.055;
    std::array<double, 3> L1{};  // high, mid, low state libors at T_1
    std::array<double, 3> L2{};  // at T_2
    double notional = 10000.0;
};

ThreeStateFixture fixture_base();    // the original tree
ThreeStateFixture fixture_tree_a();  // fatter tails, symmetric widening
ThreeStateFixture fixture_tree_b();  // fatter tails, mid states nudged

// Payer swap value at the T_1 state i (0=high, 1=mid, 2=low).
double fixture_swap_value(const ThreeStateFixture& fx, double strike, int i);
// Payer Bermudan exercisable at both dates.
double fixture_bermudan(const ThreeStateFixture& fx, double strike);

}  // namespace mf
