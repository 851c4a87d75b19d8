#pragma once

#include <vector>

namespace mf {

// One-factor driftless driver dX = e^{a t} dW with X(0) = 0.
struct DriverSpec {
    double a = 0.0;             // mean reversion
    std::vector<double> times;  // reset times T_1..T_{N+1}, strictly increasing
};

// Var[X(s) - X(t)] = (e^{2as} - e^{2at}) / (2a), with the a = 0 branch s - t.
double driver_variance(double a, double t, double s);

// corr(X(t), X(s)) for t <= s: sqrt((e^{2at}-1)/(e^{2as}-1)), a = 0 -> sqrt(t/s).
double driver_autocorrelation(double a, double t, double s);

// Per-date symmetric grids: 2*steps*devs + 1 nodes spanning +-devs standard
// deviations of X at that date, spacing sigma_X / steps.
struct LatticeGrid {
    std::vector<std::vector<double>> nodes;  // per reset date
    std::vector<double> sigma_x;             // sqrt Var[X(T_n)]
};

LatticeGrid build_grid(const DriverSpec& spec, int steps_per_dev, int deviations);

}  // namespace mf
