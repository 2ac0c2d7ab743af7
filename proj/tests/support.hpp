#pragma once

// Test-only helpers: independent oracles and generators shared by the unit
// and acceptance suites. Nothing here calls back into the code paths under
// test beyond plain config construction.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qi/config.hpp"
#include "qi/rng.hpp"

namespace qi::test {

// Random valid scenario for property tests. Mode counts are log-uniform,
// noise stays in the model's low-occupancy domain.
inline ExperimentConfig random_config(SplitMix64& rng, int max_modes = 100000) {
    const double log_m = rng.uniform01() * std::log(static_cast<double>(max_modes));
    const int modes = std::max(1, static_cast<int>(std::exp(log_m)));
    ExperimentConfig cfg = make_default_config(modes);
    cfg.noise_mean_NB = std::exp(rng.uniform(-14.0, 13.0));  // ~ [8e-7, 0.37)
    if (cfg.noise_mean_NB >= 1.0) cfg.noise_mean_NB = 0.5;
    cfg.reflectivity_eta = rng.uniform01();
    cfg.trials_m = 1 + static_cast<long long>(rng.uniform01() * 19.0);
    cfg.rng_seed = rng();
    return cfg;
}

// Closed-form rearrangement of the equivalence condition, the oracle the
// bisection solver is checked against:
// M' = (SNR_QI2R * NB - (1 - eta) * NB) / eta.
inline double equivalence_closed_form(double snr_qi2r, double noise_mean, double eta) {
    return (snr_qi2r * noise_mean - (1.0 - eta) * noise_mean) / eta;
}

// Least-squares slope of y against x.
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = static_cast<double>(n);
    return (d * sxy - sx * sy) / (d * sxx - sx * sx);
}

// FNV-1a over bytes; used to compare command outputs across reruns.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace qi::test
