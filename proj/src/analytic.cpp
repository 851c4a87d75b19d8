#include "mf/analytic.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mf {

namespace {

// Displaced Black core on total stdev v = sigma*sqrt(T); unit notional.
double displaced_black(double fwd, double strike, double m, double v, double pvbp,
                       int w) {
    const double F = fwd + m;
    const double K = strike + m;
    if (F <= 0.0 || K <= 0.0)
        throw std::invalid_argument("displaced forward/strike must be positive");
    if (v <= 0.0) throw std::invalid_argument("vol must be positive");
    const double dp = (std::log(F / K) + 0.5 * v * v) / v;
    return w * pvbp * (F * norm_cdf(w * dp) - K * norm_cdf(w * (dp - v)));
}

// Receiver digital ratio Q(S <= K) for one displaced lognormal component.
double displaced_digital_ratio(double fwd, double strike, double m, double v) {
    const double F = fwd + m;
    const double K = strike + m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    if (v <= 0.0) throw std::invalid_argument("vol must be positive");
    if (K <= 0.0) return 0.0;
    return norm_cdf((std::log(K / F) + 0.5 * v * v) / v);
}

// Complement of the above, computed on its own side so deep upper tails keep
// relative precision instead of cancelling against 1.
double displaced_digital_ratio_upper(double fwd, double strike, double m, double v) {
    const double F = fwd + m;
    const double K = strike + m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    if (v <= 0.0) throw std::invalid_argument("vol must be positive");
    if (K <= 0.0) return 1.0;
    return norm_cdf(-(std::log(K / F) + 0.5 * v * v) / v);
}

void check_spec(const SwaptionSpec& s) {
    if (s.expiry <= 0.0) throw std::invalid_argument("expiry must be positive");
    if (s.forward <= 0.0) throw std::invalid_argument("forward must be positive");
    if (s.pvbp <= 0.0) throw std::invalid_argument("pvbp must be positive");
    if (s.strike <= 0.0) throw std::invalid_argument("strike must be positive");
    if (s.payer != 1 && s.payer != -1) throw std::invalid_argument("payer flag must be +-1");
    if (s.notional <= 0.0) throw std::invalid_argument("notional must be positive");
}

void check_mix(const DisplacedMixture& mix) {
    if (mix.weights.size() != mix.sigmas.size() || mix.weights.empty())
        throw std::invalid_argument("mixture weights/sigmas mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        if (mix.weights[i] < 0.0) throw std::invalid_argument("negative mixture weight");
        if (mix.sigmas[i] <= 0.0) throw std::invalid_argument("non-positive mixture vol");
        sum += mix.weights[i];
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");
}

}  // namespace

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Wichura's algorithm AS241 (PPND16), accurate to ~1e-16 over (0,1).
double norm_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_inv: p outside (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 5.99832206555887937690e-1) * r +
                1.0));
    }
    return q < 0.0 ? -val : val;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol, int max_iter) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("find_root: endpoints do not bracket a root");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * DBL_EPSILON * std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::fabs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

DisplacedMixture DisplacedMixture::from(const UVDDParams& p) {
    if (p.lambda < 0.0 || p.lambda > 1.0)
        throw std::invalid_argument("lambda must lie in [0,1]");
    DisplacedMixture mix;
    mix.m = p.m;
    if (p.lambda == 1.0) {
        mix.weights = {1.0};
        mix.sigmas = {p.sigma1};
    } else if (p.lambda == 0.0) {
        mix.weights = {1.0};
        mix.sigmas = {p.sigma2};
    } else {
        mix.weights = {p.lambda, 1.0 - p.lambda};
        mix.sigmas = {p.sigma1, p.sigma2};
    }
    return mix;
}

double black_european(const SwaptionSpec& s, double vol) {
    check_spec(s);
    if (vol <= 0.0) throw std::invalid_argument("vol must be positive");
    return s.notional * displaced_black(s.forward, s.strike, 0.0,
                                        vol * std::sqrt(s.expiry), s.pvbp, s.payer);
}

double black_digital(const SwaptionSpec& s, double vol) {
    return dd_digital(s, 0.0, vol);
}

double dd_european(const SwaptionSpec& s, double m, double vol) {
    check_spec(s);
    if (vol <= 0.0) throw std::invalid_argument("vol must be positive");
    return s.notional * displaced_black(s.forward, s.strike, m,
                                        vol * std::sqrt(s.expiry), s.pvbp, s.payer);
}

double dd_digital(const SwaptionSpec& s, double m, double vol) {
    check_spec(s);
    if (vol <= 0.0) throw std::invalid_argument("vol must be positive");
    const double receiver =
        displaced_digital_ratio(s.forward, s.strike, m, vol * std::sqrt(s.expiry));
    const double ratio = s.payer > 0 ? 1.0 - receiver : receiver;
    return s.notional * s.pvbp * ratio;
}

double mixture_european(const SwaptionSpec& s, const DisplacedMixture& mix) {
    check_spec(s);
    check_mix(mix);
    const double rt = std::sqrt(s.expiry);
    double value = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        value += mix.weights[i] * displaced_black(s.forward, s.strike, mix.m,
                                                  mix.sigmas[i] * rt, s.pvbp, s.payer);
    return s.notional * value;
}

double mixture_digital(const SwaptionSpec& s, const DisplacedMixture& mix) {
    check_spec(s);
    check_mix(mix);
    const double rt = std::sqrt(s.expiry);
    double receiver = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        receiver += mix.weights[i] *
                    displaced_digital_ratio(s.forward, s.strike, mix.m, mix.sigmas[i] * rt);
    const double ratio = s.payer > 0 ? 1.0 - receiver : receiver;
    return s.notional * s.pvbp * ratio;
}

double uvdd_european(const SwaptionSpec& s, const UVDDParams& p) {
    return mixture_european(s, DisplacedMixture::from(p));
}

double uvdd_digital(const SwaptionSpec& s, const UVDDParams& p) {
    return mixture_digital(s, DisplacedMixture::from(p));
}

double implied_black_vol(const SwaptionSpec& s, double price) {
    check_spec(s);
    const double scale = s.pvbp * s.notional;
    const double intrinsic =
        std::max<double>(s.payer * (s.forward - s.strike), 0.0) * scale;
    const double cap = (s.payer > 0 ? s.forward : s.strike) * scale;
    const double tol = 1e-10 * scale;
    if (price < intrinsic - tol || price > cap + tol)
        throw std::invalid_argument("price outside no-arbitrage bounds");
    const double lo = 1e-6, hi = 5.0;
    if (price <= black_european(s, lo)) return lo;  // lower-bound hit
    if (price >= black_european(s, hi))
        throw std::invalid_argument("price above vol search range");
    double vol = find_root([&](double v) { return black_european(s, v) - price; },
                           lo, hi, 1e-12, 200);
    // Newton polish with the (general-strike) Black vega.
    const double rt = std::sqrt(s.expiry);
    for (int i = 0; i < 3; ++i) {
        const double diff = black_european(s, vol) - price;
        if (std::fabs(diff) < tol) break;
        const double v = vol * rt;
        const double dp = (std::log(s.forward / s.strike) + 0.5 * v * v) / v;
        const double vega = scale * s.forward * norm_pdf(dp) * rt;
        if (vega <= 0.0) break;
        vol = std::clamp(vol - diff / vega, lo, hi);
    }
    return vol;
}

double black_atm_vega(const SwaptionSpec& s, double vol) {
    check_spec(s);
    if (s.strike != s.forward)
        throw std::invalid_argument("ATM vega requires strike == forward");
    if (vol <= 0.0) throw std::invalid_argument("vol must be positive");
    const double rt = std::sqrt(s.expiry);
    return s.notional * s.pvbp * s.forward * norm_pdf(0.5 * vol * rt) * rt;
}

double uvdd_vega_sigma1(const SwaptionSpec& s, const UVDDParams& p) {
    check_spec(s);
    if (s.strike != s.forward)
        throw std::invalid_argument("ATM vega requires strike == forward");
    if (p.sigma1 <= 0.0 || p.sigma2 <= 0.0)
        throw std::invalid_argument("vols must be positive");
    const double rt = std::sqrt(s.expiry);
    const double d1 = 0.5 * p.sigma1 * rt;
    const double d2 = 0.5 * p.sigma2 * rt;
    const double mixed =
        p.lambda * norm_pdf(d1) + (1.0 - p.lambda) * norm_pdf(d2) * p.omega();
    return s.notional * s.pvbp * (s.forward + p.m) * mixed * rt;
}

double uvdd_terminal_density(const UVDDParams& p, double s0, double T, double y) {
    if (T <= 0.0) throw std::invalid_argument("expiry must be positive");
    if (y <= -p.m) return 0.0;
    const DisplacedMixture mix = DisplacedMixture::from(p);
    const double F = s0 + p.m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    const double rt = std::sqrt(T);
    double dens = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        const double v = mix.sigmas[i] * rt;
        const double z = (std::log((y + p.m) / F) + 0.5 * v * v) / v;
        dens += mix.weights[i] * norm_pdf(z) / ((y + p.m) * v);
    }
    return dens;
}

double uvdd_prob_below(const UVDDParams& p, double s0, double T, double level) {
    if (T <= 0.0) throw std::invalid_argument("expiry must be positive");
    if (level <= -p.m) return 0.0;
    const DisplacedMixture mix = DisplacedMixture::from(p);
    const double F = s0 + p.m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    const double rt = std::sqrt(T);
    double prob = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        prob += mix.weights[i] *
                displaced_digital_ratio(s0, level, p.m, mix.sigmas[i] * rt);
    return prob;
}

double uvdd_prob_above(const UVDDParams& p, double s0, double T, double level) {
    const DisplacedMixture mix = DisplacedMixture::from(p);
    const double F = s0 + p.m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    const double rt = std::sqrt(T);
    double prob = 0.0;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        prob += mix.weights[i] *
                displaced_digital_ratio_upper(s0, level, p.m, mix.sigmas[i] * rt);
    return prob;
}

double uvdd_inverse_digital(double u, double s0, double T, const UVDDParams& p) {
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("digital ratio must lie in (0,1)");
    if (T <= 0.0) throw std::invalid_argument("expiry must be positive");
    const double F = s0 + p.m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    const double rt = std::sqrt(T);
    if (p.lambda == 1.0) {
        const double v = p.sigma1 * rt;
        return -p.m + F * std::exp(-0.5 * v * v + v * norm_inv(u));
    }
    auto f = [&](double strike) { return uvdd_prob_below(p, s0, T, strike) - u; };
    double hi = s0;
    int guard = 0;
    while (f(hi) < 0.0) {
        hi = (hi + p.m) * 4.0 - p.m;
        if (++guard > 60) throw std::runtime_error("inverse digital: no upper bracket");
    }
    const double lo = -p.m + F * 1e-30;
    return find_root(f, lo, hi, 1e-16, 200);
}

double uvdd_inverse_complement(double c, double s0, double T, const UVDDParams& p) {
    if (!(c > 0.0 && c < 1.0))
        throw std::invalid_argument("digital complement must lie in (0,1)");
    if (T <= 0.0) throw std::invalid_argument("expiry must be positive");
    const double F = s0 + p.m;
    if (F <= 0.0) throw std::invalid_argument("displaced forward must be positive");
    const double rt = std::sqrt(T);
    if (p.lambda == 1.0) {
        const double v = p.sigma1 * rt;
        return -p.m + F * std::exp(-0.5 * v * v - v * norm_inv(c));
    }
    auto f = [&](double strike) { return uvdd_prob_above(p, s0, T, strike) - c; };
    double hi = s0;
    int guard = 0;
    while (f(hi) > 0.0) {  // decreasing in the strike
        hi = (hi + p.m) * 4.0 - p.m;
        if (++guard > 60) throw std::runtime_error("inverse complement: no upper bracket");
    }
    const double lo = -p.m + F * 1e-30;
    return find_root(f, lo, hi, 1e-16, 200);
}

double atm_adjusted_sigma1(double s0, double pvbp, double T, double m,
                           double lambda, double omega, double target_price) {
    if (target_price <= 0.0) throw std::invalid_argument("target price must be positive");
    SwaptionSpec atm{T, s0, pvbp, s0, +1, 1.0};
    auto f = [&](double sig1) {
        return uvdd_european(atm, {m, sig1, omega * sig1, lambda}) - target_price;
    };
    return find_root(f, 1e-10, 5.0, 1e-16, 200);
}

}  // namespace mf
