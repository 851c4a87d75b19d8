#include "mf/driver.hpp"

#include <cmath>
#include <stdexcept>

namespace mf {

double driver_variance(double a, double t, double s) {
    if (t < 0 || s < t) {
        throw std::invalid_argument("need 0 <= t <= s");
    }
    if (a == 0.0) {
        return s - t;
    }
    return (std::exp(2.0 * a * s) - std::exp(2.0 * a * t)) / (2.0 * a);
}

double driver_autocorrelation(double a, double t, double s) {
    if (t <= 0 || s < t) {
        throw std::invalid_argument("need 0 < t <= s");
    }
    if (t == s) {
        return 1.0;
    }
    if (a == 0.0) {
        return std::sqrt(t / s);
    }
    return std::sqrt((std::exp(2.0 * a * t) - 1.0) / (std::exp(2.0 * a * s) - 1.0));
}

LatticeGrid build_grid(const DriverSpec& spec, int steps_per_dev, int deviations) {
    if (steps_per_dev < 1 || deviations < 1) {
        throw std::invalid_argument("grid parameters must be positive");
    }
    LatticeGrid grid;
    int M = steps_per_dev * deviations;
    for (double T : spec.times) {
        double sx = std::sqrt(driver_variance(spec.a, 0.0, T));
        grid.sigma_x.push_back(sx);
        double dx = sx / steps_per_dev;
        std::vector<double> nodes;
        nodes.reserve(2 * M + 1);
        for (int j = -M; j <= M; ++j) {
            nodes.push_back(j * dx);
        }
        grid.nodes.push_back(std::move(nodes));
    }
    return grid;
}

}  // namespace mf
