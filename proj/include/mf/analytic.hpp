#pragma once

#include <functional>
#include <vector>

namespace mf {

// Standard normal pdf/cdf and the Wichura AS241 inverse cdf.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_inv(double p);  // throws std::domain_error outside (0,1)

// Brent root bracketing on [lo,hi]; f(lo) and f(hi) must have opposite signs.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol = 1e-14, int max_iter = 200);

struct SwaptionSpec {
    double expiry = 0.0;   // year fraction to fixing
    double forward = 0.0;  // S_n(0)
    double pvbp = 0.0;     // P_n(0)
    double strike = 0.0;
    int payer = +1;        // +1 payer, -1 receiver
    double notional = 1.0;
};

struct UVDDParams {
    double m = 0.0;       // displacement
    double sigma1 = 0.0;  // annualized component vols
    double sigma2 = 0.0;
    double lambda = 1.0;  // weight of the first component
    double omega() const { return sigma1 > 0.0 ? sigma2 / sigma1 : 1.0; }
};

// General M-component displaced lognormal mixture; UVDDParams is the M=2 case.
struct DisplacedMixture {
    double m = 0.0;
    std::vector<double> weights;  // sum to 1
    std::vector<double> sigmas;
    static DisplacedMixture from(const UVDDParams& p);
};

double black_european(const SwaptionSpec& s, double vol);
double black_digital(const SwaptionSpec& s, double vol);
double dd_european(const SwaptionSpec& s, double m, double vol);
double dd_digital(const SwaptionSpec& s, double m, double vol);
double mixture_european(const SwaptionSpec& s, const DisplacedMixture& mix);
double mixture_digital(const SwaptionSpec& s, const DisplacedMixture& mix);
double uvdd_european(const SwaptionSpec& s, const UVDDParams& p);
double uvdd_digital(const SwaptionSpec& s, const UVDDParams& p);

// Black vol matching `price`; bracketed bisection + Newton polish on [1e-6, 5].
double implied_black_vol(const SwaptionSpec& s, double price);

// ATM vegas (throw if K != S): dV/dsigma and dV/dsigma1 at fixed omega.
double black_atm_vega(const SwaptionSpec& s, double vol);
double uvdd_vega_sigma1(const SwaptionSpec& s, const UVDDParams& p);

// Terminal density of the rate at expiry T (zero below -m) and its cdf; the
// upper-tail probability is computed on its own side to keep tiny values exact.
double uvdd_terminal_density(const UVDDParams& p, double s0, double T, double y);
double uvdd_prob_below(const UVDDParams& p, double s0, double T, double level);
double uvdd_prob_above(const UVDDParams& p, double s0, double T, double level);

// Strike whose receiver digital ratio Q(S <= K) equals u; inverse terminal
// cdf.  The complement form inverts Q(S > K) = c and stays accurate when the
// upper tail mass is many orders below machine epsilon of 1.
double uvdd_inverse_digital(double u, double s0, double T, const UVDDParams& p);
double uvdd_inverse_complement(double c, double s0, double T, const UVDDParams& p);

// sigma1 such that the UVDD ATM price matches `target_price`, holding omega,
// m and lambda fixed.  Used to put all mapping variants on the same ATM vol.
double atm_adjusted_sigma1(double s0, double pvbp, double T, double m,
                           double lambda, double omega, double target_price);

}  // namespace mf
