#include "mf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mf {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace

std::vector<double> neville_coeffs(std::span<const double> xs, std::span<const double> fs) {
    std::size_t n = xs.size();
    if (n == 0 || fs.size() != n) {
        throw std::invalid_argument("neville_coeffs: bad input sizes");
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (xs[i] == xs[j]) {
                throw std::invalid_argument("neville_coeffs: duplicate abscissae");
            }
        }
    }
    // c[i] holds the coefficients of P_(i)...(i+m) at level m.
    std::vector<std::vector<double>> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = {fs[i]};
    }
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            const std::vector<double>& a = c[i];      // P_(i)...(i+m-1)
            const std::vector<double>& b = c[i + 1];  // P_(i+1)...(i+m)
            double denom = xs[i] - xs[i + m];
            std::vector<double> next(m + 1);
            next[m] = (a[m - 1] - b[m - 1]) / denom;
            for (std::size_t k = 1; k < m; ++k) {
                next[k] = (xs[i] * b[k] - xs[i + m] * a[k] + a[k - 1] - b[k - 1]) / denom;
            }
            next[0] = (xs[i] * b[0] - xs[i + m] * a[0]) / denom;
            c[i] = std::move(next);
        }
    }
    return c[0];
}

void gaussian_partial_moments(double h, double mu, double sigma, int kmax, double* out) {
    if (sigma <= 0) {
        throw std::invalid_argument("gaussian_partial_moments: sigma must be positive");
    }
    double u = (h - mu) / sigma;
    out[0] = norm_cdf(u);
    if (kmax == 0) {
        return;
    }
    double pdf = std::exp(-0.5 * u * u) / (sigma * kSqrt2Pi);  // N(h; mu, sigma)
    double s2 = sigma * sigma;
    double hk = 1.0;  // h^(k-1)
    for (int k = 1; k <= kmax; ++k) {
        double gm2 = k >= 2 ? out[k - 2] : 0.0;
        out[k] = mu * out[k - 1] + (k - 1) * s2 * gm2 - s2 * hk * pdf;
        hk *= h;
    }
}

void gaussian_upper_partial_moments(double h, double mu, double sigma, int kmax, double* out) {
    if (sigma <= 0) {
        throw std::invalid_argument("gaussian_upper_partial_moments: sigma must be positive");
    }
    double u = (h - mu) / sigma;
    out[0] = norm_cdf(-u);
    if (kmax == 0) {
        return;
    }
    double pdf = std::exp(-0.5 * u * u) / (sigma * kSqrt2Pi);
    double s2 = sigma * sigma;
    double hk = 1.0;  // boundary term flips sign relative to the lower moments
    for (int k = 1; k <= kmax; ++k) {
        double um2 = k >= 2 ? out[k - 2] : 0.0;
        out[k] = mu * out[k - 1] + (k - 1) * s2 * um2 + s2 * hk * pdf;
        hk *= h;
    }
}

double gaussian_partial_moment(int k, double h, double mu, double sigma) {
    if (k == -1) {
        return 0.0;
    }
    if (k < -1) {
        throw std::invalid_argument("gaussian_partial_moment: k < -1");
    }
    std::vector<double> row(k + 1);
    gaussian_partial_moments(h, mu, sigma, k, row.data());
    return row[k];
}

GridFunction::GridFunction(std::span<const double> xs, std::span<const double> fs, int order)
    : xs_(xs.begin(), xs.end()), fs_(fs.begin(), fs.end()) {
    std::size_t n = xs_.size();
    if (n < 2 || fs_.size() != n) {
        throw std::invalid_argument("GridFunction: bad input sizes");
    }
    if (order < 0 || static_cast<std::size_t>(order) + 1 > n) {
        throw std::invalid_argument("GridFunction: order needs at least order+1 grid points");
    }
    std::size_t M = static_cast<std::size_t>(order);
    coeffs_.reserve(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        // Stencil x_{j-M/2} .. x_{j-M/2+M}, shifted inward at the boundaries.
        std::size_t lo = j > M / 2 ? j - M / 2 : 0;
        if (lo + M > n - 1) {
            lo = n - 1 - M;
        }
        coeffs_.push_back(neville_coeffs(std::span(xs_).subspan(lo, M + 1),
                                         std::span(fs_).subspan(lo, M + 1)));
    }
}

double GridFunction::piece_value(std::size_t j, double x) const {
    const auto& c = coeffs_[j];
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        v = v * x + c[k];
    }
    return v;
}

double GridFunction::integrate_against(double mu, double sigma) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return integrate_against(mu, sigma, -inf, inf);
}

double GridFunction::integrate_against(double mu, double sigma, double lo, double hi) const {
    if (hi <= lo) {
        return 0.0;
    }
    double total = 0.0;
    // Constant tails outside the grid.
    if (lo < xs_.front()) {
        double top = std::min(xs_.front(), hi);
        double mass = norm_cdf((top - mu) / sigma) -
                      (std::isinf(lo) ? 0.0 : norm_cdf((lo - mu) / sigma));
        total += fs_.front() * mass;
    }
    if (hi > xs_.back()) {
        double bot = std::max(xs_.back(), lo);
        double mass = (std::isinf(hi) ? 1.0 : norm_cdf((hi - mu) / sigma)) -
                      norm_cdf((bot - mu) / sigma);
        total += fs_.back() * mass;
    }
    std::size_t kmax = coeffs_.front().size() - 1;
    std::vector<double> ga(kmax + 1), gb(kmax + 1);
    for (std::size_t j = 0; j + 1 < xs_.size(); ++j) {
        double a = std::max(xs_[j], lo);
        double b = std::min(xs_[j + 1], hi);
        if (b <= a) {
            continue;
        }
        gaussian_partial_moments(a, mu, sigma, static_cast<int>(kmax), ga.data());
        gaussian_partial_moments(b, mu, sigma, static_cast<int>(kmax), gb.data());
        const auto& c = coeffs_[j];
        for (std::size_t k = 0; k < c.size(); ++k) {
            total += c[k] * (gb[k] - ga[k]);
        }
    }
    return total;
}

std::vector<double> GridFunction::cumulative_at_nodes(double mu, double sigma) const {
    std::vector<double> out(xs_.size());
    std::size_t kmax = coeffs_.front().size() - 1;
    std::vector<double> ga(kmax + 1), gb(kmax + 1);
    double acc = fs_.front() * norm_cdf((xs_.front() - mu) / sigma);
    out[0] = acc;
    for (std::size_t j = 0; j + 1 < xs_.size(); ++j) {
        gaussian_partial_moments(xs_[j], mu, sigma, static_cast<int>(kmax), ga.data());
        gaussian_partial_moments(xs_[j + 1], mu, sigma, static_cast<int>(kmax), gb.data());
        const auto& c = coeffs_[j];
        for (std::size_t k = 0; k < c.size(); ++k) {
            acc += c[k] * (gb[k] - ga[k]);
        }
        out[j + 1] = acc;
    }
    return out;
}

std::vector<double> GridFunction::complement_at_nodes(double mu, double sigma) const {
    std::vector<double> out(xs_.size());
    std::size_t kmax = coeffs_.front().size() - 1;
    std::vector<double> ua(kmax + 1), ub(kmax + 1);
    double acc = fs_.back() * norm_cdf(-(xs_.back() - mu) / sigma);
    out[xs_.size() - 1] = acc;
    for (std::size_t j = xs_.size() - 1; j-- > 0;) {
        gaussian_upper_partial_moments(xs_[j], mu, sigma, static_cast<int>(kmax), ua.data());
        gaussian_upper_partial_moments(xs_[j + 1], mu, sigma, static_cast<int>(kmax), ub.data());
        const auto& c = coeffs_[j];
        for (std::size_t k = 0; k < c.size(); ++k) {
            acc += c[k] * (ua[k] - ub[k]);
        }
        out[j] = acc;
    }
    return out;
}

double integrate_grid_function(std::span<const double> xs, std::span<const double> fs, double mu,
                               double sigma, int order) {
    return GridFunction(xs, fs, order).integrate_against(mu, sigma);
}

MaxIntegrand::MaxIntegrand(std::span<const double> xs, std::span<const double> fa,
                           std::span<const double> fb, int order)
    : ga_(xs, fa, order), gb_(xs, fb, order) {
    std::size_t n = xs.size();
    if (fa.size() != n || fb.size() != n) {
        throw std::invalid_argument("MaxIntegrand: bad input sizes");
    }
    // Crossovers of the fitted difference, located inside sign-change intervals.
    auto sgn = [&](std::size_t i) {
        double d = fb[i] - fa[i];
        return d > 0 ? 1 : d < 0 ? -1 : 0;
    };
    for (std::size_t j = 0; j + 1 < n; ++j) {
        int s0 = sgn(j), s1 = sgn(j + 1);
        if (s0 == s1 || (s0 == 0 && s1 != 0)) {
            continue;  // same side, or the crossover sits exactly on node j
        }
        if (s1 == 0) {
            cuts_.push_back(xs[j + 1]);
            continue;
        }
        auto diff = [&](double x) { return gb_.piece_value(j, x) - ga_.piece_value(j, x); };
        double lo = xs[j], hi = xs[j + 1];
        double flo = diff(lo);
        if (flo * diff(hi) > 0) {
            // Fitted polynomials disagree with the samples about the crossing;
            // fall back to the interval midpoint.
            cuts_.push_back(0.5 * (lo + hi));
            continue;
        }
        for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
            double mid = 0.5 * (lo + hi);
            if (diff(mid) * flo <= 0) {
                hi = mid;
            } else {
                lo = mid;
                flo = diff(lo);
            }
        }
        cuts_.push_back(0.5 * (lo + hi));
    }
    // Branch choice per segment: first node strictly inside it with a definite
    // sign decides (branches tie everywhere otherwise, either integrand works).
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= cuts_.size(); ++s) {
        double lo = s == 0 ? -inf : cuts_[s - 1];
        double hi = s == cuts_.size() ? inf : cuts_[s];
        bool use_b = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (xs[i] > lo && xs[i] < hi && sgn(i) != 0) {
                use_b = sgn(i) > 0;
                break;
            }
        }
        upper_is_b_.push_back(use_b);
    }
}

double MaxIntegrand::integrate(double mu, double sigma) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t s = 0; s < upper_is_b_.size(); ++s) {
        double lo = s == 0 ? -inf : cuts_[s - 1];
        double hi = s == cuts_.size() ? inf : cuts_[s];
        total += (upper_is_b_[s] ? gb_ : ga_).integrate_against(mu, sigma, lo, hi);
    }
    return total;
}

double integrate_max(std::span<const double> xs, std::span<const double> fa,
                     std::span<const double> fb, double mu, double sigma, int order) {
    return MaxIntegrand(xs, fa, fb, order).integrate(mu, sigma);
}

}  // namespace mf
