#pragma once

#include <span>
#include <vector>

namespace mf {

// Monomial coefficients (degree = points-1) of the interpolating polynomial,
// via the in-place Neville coefficient recurrence.
std::vector<double> neville_coeffs(std::span<const double> xs, std::span<const double> fs);

// G(k; h, mu, sigma) = int_{-inf}^h x^k N(x; mu, sigma^2) dx.
double gaussian_partial_moment(int k, double h, double mu, double sigma);
// Whole row G(0..kmax) at once (the recurrence produces it anyway).
void gaussian_partial_moments(double h, double mu, double sigma, int kmax, double* out);
// Upper counterparts U(k) = int_h^inf x^k N dx, exact to denormal scale for
// h >> mu where the lower form would cancel.
void gaussian_upper_partial_moments(double h, double mu, double sigma, int kmax, double* out);

// Piecewise-polynomial view of samples f on a grid: per interval [x_j, x_{j+1}]
// a degree-`order` fit through the stencil x_{j-M/2} .. x_{j-M/2+M} (window
// shifted inward at the edges), constant extension beyond the grid.
class GridFunction {
public:
    GridFunction(std::span<const double> xs, std::span<const double> fs, int order);

    // int_lo^hi f(y) N(y; mu, sigma^2) dy; pass +-infinity for open ends.
    double integrate_against(double mu, double sigma) const;
    double integrate_against(double mu, double sigma, double lo, double hi) const;

    // Prefix integrals int_{-inf}^{x_j} f N dy at every node.
    std::vector<double> cumulative_at_nodes(double mu, double sigma) const;
    // Suffix integrals int_{x_j}^{inf} f N dy, accumulated from the top so the
    // upper tail keeps full relative precision.
    std::vector<double> complement_at_nodes(double mu, double sigma) const;

    // Fitted polynomial of interval j evaluated at x.
    double piece_value(std::size_t j, double x) const;

    const std::vector<double>& grid() const { return xs_; }
    const std::vector<double>& piece_coeffs(std::size_t j) const { return coeffs_[j]; }

private:
    std::vector<double> xs_, fs_;
    std::vector<std::vector<double>> coeffs_;
};

// Convenience form of GridFunction::integrate_against over the whole line.
double integrate_grid_function(std::span<const double> xs, std::span<const double> fs, double mu,
                               double sigma, int order);

// max(fa, fb) as an integrand: polynomial fits per branch, the real line split
// at the fitted-difference crossovers.  The split is a property of the two
// sample sets alone, so one instance serves any number of conditional
// densities (the backward-induction inner loop).
class MaxIntegrand {
public:
    MaxIntegrand(std::span<const double> xs, std::span<const double> fa,
                 std::span<const double> fb, int order);

    // int max(fa, fb)(y) N(y; mu, sigma^2) dy.
    double integrate(double mu, double sigma) const;

    const std::vector<double>& cuts() const { return cuts_; }

private:
    GridFunction ga_, gb_;
    std::vector<double> cuts_;        // crossover abscissae, increasing
    std::vector<bool> upper_is_b_;    // per segment between cuts
};

// One-shot convenience form of MaxIntegrand.
double integrate_max(std::span<const double> xs, std::span<const double> fa,
                     std::span<const double> fb, double mu, double sigma, int order);

}  // namespace mf
