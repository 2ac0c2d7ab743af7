#pragma once

#include <stdexcept>

#include "qi/config.hpp"
#include "qi/stats.hpp"

namespace qi::analytic {

// snr_report rejects the degenerate noiseless scenario instead of
// reporting infinities.
struct DivisionByZeroNoise : std::domain_error {
    DivisionByZeroNoise() : std::domain_error("snr_report: noise_mean_NB is zero") {}
};

// Unreachable for reflectivity_eta > 0; kept as a guard.
struct NoSolution : std::runtime_error {
    explicit NoSolution(const std::string& what) : std::runtime_error(what) {}
};

// Single-trial closed-form outcome probabilities. Expects a validated
// config; each returns stats with trials_m == 1.
HypothesisStats classical_single(const ExperimentConfig& cfg);
HypothesisStats lloyd_entangled(const ExperimentConfig& cfg);
HypothesisStats classical_two_photon(const ExperimentConfig& cfg);
HypothesisStats entangled_two_photon(const ExperimentConfig& cfg);
HypothesisStats stats_for(Protocol protocol, const ExperimentConfig& cfg);

// m-fold agreement probabilities: every outcome field is raised to the
// m-th power, matching the repeated-trial laws (positives and negatives
// alike). Composes multiplicatively: m_trial(m_trial(s, a), b) ==
// m_trial(s, a * b). For m > 1 the pos/neg pairs are per-outcome
// agreement probabilities, not complements.
HypothesisStats m_trial(const HypothesisStats& stats, long long m);

// SNRs for all four protocols plus squaring-identity residuals. The
// two-photon SNRs come from the two-photon probabilities while the
// residual reference squares the single-photon ratio, keeping the two
// arithmetic routes independent.
SnrReport snr_report(const ExperimentConfig& cfg);

// Lloyd-model SNR as a function of a continuous mode count, the quantity
// the equivalence solver inverts.
double snr_qi_for_modes(double num_modes, double noise_mean, double eta);

struct EquivalenceResult {
    double target_snr = 0.0;              // SNR_QI2R(M) being matched
    double m_prime = 0.0;                 // solved mode count M'
    double ratio_m_prime_over_m = 0.0;    // M'/M
    double asymptotic_m_prime = 0.0;      // eta * M^2 / NB first-order prediction
    bool in_valid_regime = false;          // M/NB above threshold
};

inline constexpr double default_regime_threshold = 1e3;

// Finds M' with SNR_QI(M') == SNR_QI2R(M) by bracketed bisection on the
// strictly increasing map M' -> SNR_QI(M'), to 1e-10 relative accuracy.
// Requires eta > 0 and NB > 0.
EquivalenceResult solve_equivalent_bandwidth(const ExperimentConfig& cfg,
                                             double regime_threshold = default_regime_threshold);

}  // namespace qi::analytic
