#include "qi/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "qi/root_find.hpp"

namespace qi {

std::string_view protocol_name(Protocol p) {
    switch (p) {
        case Protocol::ClassicalSingle: return "ClassicalSingle";
        case Protocol::LloydEntangled: return "LloydEntangled";
        case Protocol::ClassicalTwoPhoton: return "ClassicalTwoPhoton";
        case Protocol::EntangledTwoPhoton: return "EntangledTwoPhoton";
    }
    return "Unknown";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
    for (Protocol p : all_protocols)
        if (name == protocol_name(p)) return p;
    return std::nullopt;
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double k = static_cast<double>(successes);
    const double z2 = z * z;
    const double center = (k + z2 / 2.0) / (n + z2);
    const double radius = (z / (n + z2)) * std::sqrt(k * (n - k) / n + z2 / 4.0);
    return {center - radius, center + radius};
}

namespace analytic {

namespace {

// Per-photon positive-click probability: the photon returns, or noise
// fakes it at rate q.
double click(double q, double eta) { return (1.0 - eta) * q + eta; }

HypothesisStats from_single_rate(Protocol protocol, double q, double eta) {
    HypothesisStats s;
    s.protocol = protocol;
    s.p_pos_h0 = q;
    s.p_pos_h1 = click(q, eta);
    s.p_neg_h0 = 1.0 - s.p_pos_h0;
    s.p_neg_h1 = 1.0 - s.p_pos_h1;
    return s;
}

HypothesisStats squared(Protocol protocol, const HypothesisStats& single) {
    HypothesisStats s;
    s.protocol = protocol;
    s.p_pos_h0 = single.p_pos_h0 * single.p_pos_h0;
    s.p_pos_h1 = single.p_pos_h1 * single.p_pos_h1;
    s.p_neg_h0 = 1.0 - s.p_pos_h0;
    s.p_neg_h1 = 1.0 - s.p_pos_h1;
    return s;
}

}  // namespace

HypothesisStats classical_single(const ExperimentConfig& cfg) {
    return from_single_rate(Protocol::ClassicalSingle, cfg.noise_mean_NB, cfg.reflectivity_eta);
}

HypothesisStats lloyd_entangled(const ExperimentConfig& cfg) {
    const double q = cfg.noise_mean_NB / static_cast<double>(cfg.num_modes_M);
    return from_single_rate(Protocol::LloydEntangled, q, cfg.reflectivity_eta);
}

HypothesisStats classical_two_photon(const ExperimentConfig& cfg) {
    return squared(Protocol::ClassicalTwoPhoton, classical_single(cfg));
}

HypothesisStats entangled_two_photon(const ExperimentConfig& cfg) {
    return squared(Protocol::EntangledTwoPhoton, lloyd_entangled(cfg));
}

HypothesisStats stats_for(Protocol protocol, const ExperimentConfig& cfg) {
    switch (protocol) {
        case Protocol::ClassicalSingle: return classical_single(cfg);
        case Protocol::LloydEntangled: return lloyd_entangled(cfg);
        case Protocol::ClassicalTwoPhoton: return classical_two_photon(cfg);
        case Protocol::EntangledTwoPhoton: return entangled_two_photon(cfg);
    }
    throw std::invalid_argument("stats_for: unknown protocol");
}

HypothesisStats m_trial(const HypothesisStats& stats, long long m) {
    if (m < 1) throw std::invalid_argument("m_trial: m must be >= 1");
    if (m == 1) return stats;
    HypothesisStats out = stats;
    const double power = static_cast<double>(m);
    out.p_pos_h0 = std::pow(stats.p_pos_h0, power);
    out.p_neg_h0 = std::pow(stats.p_neg_h0, power);
    out.p_pos_h1 = std::pow(stats.p_pos_h1, power);
    out.p_neg_h1 = std::pow(stats.p_neg_h1, power);
    out.trials_m = stats.trials_m * m;
    return out;
}

SnrReport snr_report(const ExperimentConfig& cfg) {
    if (cfg.noise_mean_NB == 0.0) throw DivisionByZeroNoise();

    const HypothesisStats ci = classical_single(cfg);
    const HypothesisStats qi = lloyd_entangled(cfg);
    const HypothesisStats ci2p = classical_two_photon(cfg);
    const HypothesisStats qi2r = entangled_two_photon(cfg);

    SnrReport report;
    report.snr_ci = ci.p_pos_h1 / ci.p_pos_h0;
    report.snr_qi = qi.p_pos_h1 / qi.p_pos_h0;
    report.snr_ci2p = ci2p.p_pos_h1 / ci2p.p_pos_h0;
    report.snr_qi2r = qi2r.p_pos_h1 / qi2r.p_pos_h0;
    report.squaring_residual_classical = std::fabs(report.snr_ci2p - report.snr_ci * report.snr_ci);
    report.squaring_residual_entangled = std::fabs(report.snr_qi2r - report.snr_qi * report.snr_qi);
    return report;
}

double snr_qi_for_modes(double num_modes, double noise_mean, double eta) {
    return (num_modes / noise_mean) * ((1.0 - eta) * noise_mean / num_modes + eta);
}

EquivalenceResult solve_equivalent_bandwidth(const ExperimentConfig& cfg, double regime_threshold) {
    const double eta = cfg.reflectivity_eta;
    const double nb = cfg.noise_mean_NB;
    if (!(eta > 0.0))
        throw std::invalid_argument("solve_equivalent_bandwidth: requires reflectivity_eta > 0");
    if (!(nb > 0.0))
        throw std::invalid_argument("solve_equivalent_bandwidth: requires noise_mean_NB > 0");

    const double modes = static_cast<double>(cfg.num_modes_M);
    const double snr_qi = snr_qi_for_modes(modes, nb, eta);
    const double target = snr_qi * snr_qi;

    auto f = [&](double m_prime) { return snr_qi_for_modes(m_prime, nb, eta); };
    const double lo = 1e-12;
    if (target < f(lo))
        throw NoSolution("solve_equivalent_bandwidth: target SNR below the solvable floor");
    double hi = std::fmax(1.0, modes);
    while (f(hi) < target) {
        hi *= 2.0;
        if (hi > 1e18)
            throw NoSolution("solve_equivalent_bandwidth: bracket expansion exceeded 1e18 modes");
    }

    EquivalenceResult result;
    result.target_snr = target;
    result.m_prime = bisect_increasing(f, target, lo, hi, 1e-12);
    result.ratio_m_prime_over_m = result.m_prime / modes;
    result.asymptotic_m_prime = eta * modes * modes / nb;
    result.in_valid_regime = (modes / nb) >= regime_threshold;
    return result;
}

}  // namespace analytic
}  // namespace qi
