#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace qi {

enum class Protocol {
    ClassicalSingle,
    LloydEntangled,
    ClassicalTwoPhoton,
    EntangledTwoPhoton,
};

inline constexpr std::array<Protocol, 4> all_protocols = {
    Protocol::ClassicalSingle,
    Protocol::LloydEntangled,
    Protocol::ClassicalTwoPhoton,
    Protocol::EntangledTwoPhoton,
};

std::string_view protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(std::string_view name);

// Positive/negative outcome probabilities under both hypotheses for one
// protocol. For trials_m == 1 the pairs are complementary; after m_trial
// each field holds the probability that all m repetitions agree on that
// outcome, so the pairs no longer sum to one.
struct HypothesisStats {
    Protocol protocol = Protocol::ClassicalSingle;
    double p_pos_h0 = 0.0;
    double p_neg_h0 = 1.0;
    double p_pos_h1 = 0.0;
    double p_neg_h1 = 1.0;
    long long trials_m = 1;
};

// Linear-scale signal-to-noise ratios p1(+)/p0(+) for the four protocols,
// with the residuals of the two-photon squaring identities measured
// through independent arithmetic routes.
struct SnrReport {
    double snr_ci = 0.0;
    double snr_qi = 0.0;
    double snr_ci2p = 0.0;
    double snr_qi2r = 0.0;
    double squaring_residual_classical = 0.0;
    double squaring_residual_entangled = 0.0;
};

struct RangeEstimate {
    double estimated_range = 0.0;   // m
    double arrival_time_T = 0.0;    // s
    double uncertainty = 0.0;       // m, exactly c * window / 2
    double truth_error = 0.0;       // m, estimated - true (diagnostics)
};

// Two-sided normal quantiles for 95% and 99% confidence.
inline constexpr double z_two_sided_95 = 1.959963984540054;
inline constexpr double z_two_sided_99 = 2.5758293035489004;

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double p) const { return p >= lo && p <= hi; }
};

// Wilson score interval for a binomial proportion; well behaved at k == 0
// and k == n where the normal approximation interval collapses.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);

}  // namespace qi
