#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "mf/analytic.hpp"

using namespace mf;

namespace {

SwaptionSpec make_spec(double s0 = 0.05, double k = 0.05, double T = 3.0, int payer = 1) {
    SwaptionSpec s;
    s.forward = s0;
    s.strike = k;
    s.expiry = T;
    s.pvbp = 4.2;
    s.notional = 10000.0;
    s.payer = payer;
    return s;
}

}  // namespace

TEST_CASE("normal distribution helpers") {
    CHECK(norm_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-15));
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(norm_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
    for (double x = -5.5; x <= 5.5; x += 0.25) {
        CHECK(norm_inv(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
    }
    CHECK(norm_inv(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("root finder") {
    double r = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0));
}

TEST_CASE("Black pricer against a hand value") {
    SwaptionSpec s = make_spec(0.05, 0.05, 1.0);
    s.pvbp = 1.0;
    s.notional = 1.0;
    // ATM: S * (2*Phi(sigma*sqrt(T)/2) - 1)
    double expect = 0.05 * (2.0 * norm_cdf(0.1) - 1.0);
    CHECK(black_european(s, 0.2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("put-call parity holds for every pricer") {
    UVDDParams uv{0.025, 0.13, 0.39, 0.75};
    for (double k : {0.02, 0.035, 0.05, 0.065, 0.09}) {
        SwaptionSpec pay = make_spec(0.05, k, 3.0, +1);
        SwaptionSpec rec = make_spec(0.05, k, 3.0, -1);
        double intrinsic = pay.notional * pay.pvbp * (pay.forward - k);
        CHECK(black_european(pay, 0.2) - black_european(rec, 0.2) ==
              doctest::Approx(intrinsic).epsilon(1e-10));
        CHECK(dd_european(pay, 0.025, 0.15) - dd_european(rec, 0.025, 0.15) ==
              doctest::Approx(intrinsic).epsilon(1e-10));
        CHECK(uvdd_european(pay, uv) - uvdd_european(rec, uv) ==
              doctest::Approx(intrinsic).epsilon(1e-10));
    }
}

TEST_CASE("displaced diffusion reduces to Black on shifted arguments") {
    double m = 0.02;
    SwaptionSpec s = make_spec(0.05, 0.045, 2.5);
    SwaptionSpec shifted = s;
    shifted.forward += m;
    shifted.strike += m;
    CHECK(dd_european(s, m, 0.17) == doctest::Approx(black_european(shifted, 0.17)).epsilon(1e-14));
    CHECK(dd_european(s, 0.0, 0.17) == doctest::Approx(black_european(s, 0.17)).epsilon(1e-14));
}

TEST_CASE("uncertain-volatility mixture reduces cleanly") {
    SwaptionSpec s = make_spec(0.05, 0.052, 4.0);
    // lambda = 1: only the first branch is ever drawn
    CHECK(uvdd_european(s, {0.01, 0.14, 0.5, 1.0}) ==
          doctest::Approx(dd_european(s, 0.01, 0.14)).epsilon(1e-14));
    // equal branch vols: mixture collapses regardless of lambda
    CHECK(uvdd_european(s, {0.01, 0.14, 0.14, 0.3}) ==
          doctest::Approx(dd_european(s, 0.01, 0.14)).epsilon(1e-14));
    // mixture price is the lambda-blend of single-vol prices
    UVDDParams uv{0.015, 0.11, 0.31, 0.6};
    double blend = 0.6 * dd_european(s, 0.015, 0.11) + 0.4 * dd_european(s, 0.015, 0.31);
    CHECK(uvdd_european(s, uv) == doctest::Approx(blend).epsilon(1e-13));
}

TEST_CASE("digitals are the strike derivative of the europeans") {
    UVDDParams uv{0.025, 0.13, 0.39, 0.75};
    double h = 1e-6;
    for (double k : {0.035, 0.05, 0.068}) {
        SwaptionSpec s = make_spec(0.05, k, 3.0, +1);
        SwaptionSpec up = s, dn = s;
        up.strike += h;
        dn.strike -= h;

        double fd_black = -(black_european(up, 0.2) - black_european(dn, 0.2)) / (2 * h);
        CHECK(black_digital(s, 0.2) == doctest::Approx(fd_black).epsilon(1e-6));

        double fd_uv = -(uvdd_european(up, uv) - uvdd_european(dn, uv)) / (2 * h);
        CHECK(uvdd_digital(s, uv) == doctest::Approx(fd_uv).epsilon(1e-6));
    }
    // deep strikes pin the digital at its bounds
    SwaptionSpec itm = make_spec(0.05, 1e-8, 3.0, +1);
    CHECK(black_digital(itm, 0.2) ==
          doctest::Approx(itm.notional * itm.pvbp).epsilon(1e-9));
}

TEST_CASE("implied Black vol round-trips") {
    for (double sigma : {0.05, 0.13, 0.35, 0.80}) {
        for (double k : {0.03, 0.05, 0.075}) {
            SwaptionSpec s = make_spec(0.05, k, 3.0);
            double price = black_european(s, sigma);
            CHECK(implied_black_vol(s, price) == doctest::Approx(sigma).epsilon(1e-6));
        }
    }
}

TEST_CASE("vegas match finite differences") {
    SwaptionSpec s = make_spec(0.05, 0.05, 3.0);
    double h = 1e-6;

    SUBCASE("ATM Black vega") {
        double fd = (black_european(s, 0.2 + h) - black_european(s, 0.2 - h)) / (2 * h);
        CHECK(black_atm_vega(s, 0.2) == doctest::Approx(fd).epsilon(1e-8));
    }
    SUBCASE("mixture vega moves both branch vols, ratio held") {
        UVDDParams uv{0.02, 0.12, 0.36, 0.75};
        double omega = uv.sigma2 / uv.sigma1;
        UVDDParams up = uv, dn = uv;
        up.sigma1 += h;
        up.sigma2 = omega * up.sigma1;
        dn.sigma1 -= h;
        dn.sigma2 = omega * dn.sigma1;
        double fd = (uvdd_european(s, up) - uvdd_european(s, dn)) / (2 * h);
        CHECK(uvdd_vega_sigma1(s, uv) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("terminal density integrates to one and splits consistently") {
    UVDDParams uv{0.025, 0.13, 0.39, 0.75};
    double s0 = 0.05, T = 3.0;

    double lo = -uv.m + 1e-12, hi = 1.5;
    int n = 200000;
    double dx = (hi - lo) / n, mass = 0.0;
    for (int i = 0; i <= n; ++i) {
        double w = (i == 0 || i == n) ? 0.5 : 1.0;
        mass += w * uvdd_terminal_density(uv, s0, T, lo + i * dx);
    }
    mass *= dx;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    for (double level : {-0.01, 0.0, 0.03, 0.05, 0.09, 0.4}) {
        double below = uvdd_prob_below(uv, s0, T, level);
        double above = uvdd_prob_above(uv, s0, T, level);
        CHECK(below + above == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(below >= 0.0);
        CHECK(above >= 0.0);
    }
    CHECK(uvdd_prob_below(uv, s0, T, -uv.m + 1e-14) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("digital inversion round-trips, including the far tail") {
    UVDDParams uv{0.025, 0.13, 0.39, 0.75};
    double s0 = 0.05, T = 3.0;
    for (double k : {0.005, 0.02, 0.05, 0.09, 0.20}) {
        double u = uvdd_prob_below(uv, s0, T, k);
        CHECK(uvdd_inverse_digital(u, s0, T, uv) == doctest::Approx(k).epsilon(1e-9));
    }
    // complement-side inversion keeps precision where 1-u underflows
    for (double c : {1e-12, 1e-60, 1e-250}) {
        double k = uvdd_inverse_complement(c, s0, T, uv);
        CHECK(k > s0);
        CHECK(uvdd_prob_above(uv, s0, T, k) / c == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("sigma1 adjustment hits an ATM price target") {
    double s0 = 0.05, pvbp = 4.2, T = 3.0, sigma_atm = 0.15;
    SwaptionSpec atm = make_spec(s0, s0, T);
    atm.pvbp = pvbp;
    atm.notional = 1.0;
    double target = black_european(atm, sigma_atm);

    SUBCASE("Black shape recovers the ATM vol itself") {
        double s1 = atm_adjusted_sigma1(s0, pvbp, T, 0.0, 1.0, 1.0, target);
        CHECK(s1 == doctest::Approx(sigma_atm).epsilon(1e-10));
    }
    SUBCASE("smile shape reprices the target exactly") {
        double m = 0.025, lambda = 0.75, omega = 3.0;
        double s1 = atm_adjusted_sigma1(s0, pvbp, T, m, lambda, omega, target);
        UVDDParams uv{m, s1, omega * s1, lambda};
        CHECK(uvdd_european(atm, uv) == doctest::Approx(target).epsilon(1e-12));
        CHECK(s1 < sigma_atm);  // the displaced mixture needs less sigma1 at the money
    }
}
