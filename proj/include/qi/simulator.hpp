#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "qi/config.hpp"
#include "qi/events.hpp"
#include "qi/rng.hpp"
#include "qi/stats.hpp"

namespace qi::sim {

enum class Hypothesis { TargetAbsent, TargetPresent };

std::string_view hypothesis_name(Hypothesis h);
std::optional<Hypothesis> hypothesis_from_name(std::string_view name);

struct NotDetected : std::runtime_error {
    NotDetected() : std::runtime_error("estimate_range: trial produced no detection") {}
};

// Candidate pairs discarded by the matcher, by first failing check, in the
// order window -> idler -> energy/consistency.
struct RejectionCounts {
    std::uint64_t window = 0;
    std::uint64_t energy = 0;
    std::uint64_t idler = 0;

    RejectionCounts& operator+=(const RejectionCounts& o) {
        window += o.window;
        energy += o.energy;
        idler += o.idler;
        return *this;
    }
};

struct TrialOutcome {
    bool detected = false;
    std::optional<int> matched_mode;          // 1-based
    std::optional<double> arrival_time_T;     // s, midpoint of the matched pair
    RejectionCounts rejected;
};

// Per-config machinery shared by every trial of a run: the detection gate,
// the spectral cells noise can occupy, and the per-photon matcher gates.
//
// Event model. A trial is one detection gate of length `window` opened at
// the expected round-trip time. Each probe photon returns independently
// with probability eta at its exact mode frequency. Background occupancy
// is Bernoulli(NB) per spectral cell per gate; a background photon's
// frequency is smeared uniformly over its cell, whose width is
// M * energy_tolerance. The entangled matcher resolves frequencies to
// +-energy_tolerance/2 around the mode identified by the idler, so
// background passes with probability exactly 1/M per photon; classical
// matching accepts the whole cell. Those per-photon acceptance rates are
// what the closed-form laws assume.
class TrialModel {
  public:
    // Validates the config and checks that the spectrum can host the
    // smeared noise cells without overlap (throws std::invalid_argument
    // with the failed constraint otherwise).
    explicit TrialModel(const ExperimentConfig& cfg);

    const ExperimentConfig& config() const { return cfg_; }
    double gate_start() const { return gate_start_; }
    double smear_width() const { return smear_width_; }

    // Per-photon frequency gates (half-widths).
    double fine_gate() const { return fine_gate_; }  // entangled, energy_tolerance / 2
    double cell_gate() const { return cell_gate_; }  // classical, smear_width / 2

    // Number of background cells: two per noise mode (the w2 and w3
    // spectral slots), modes beyond the signal table sit out of band.
    int noise_cell_count() const { return 2 * cfg_.noise_modes_MB; }
    double noise_cell_center(int cell) const;

    // 1-based mode whose idler frequency matches w, or 0 when none does.
    int mode_for_idler_frequency(double w) const;

  private:
    ExperimentConfig cfg_;
    double gate_start_ = 0.0;
    double smear_width_ = 0.0;
    double fine_gate_ = 0.0;
    double cell_gate_ = 0.0;
    double out_of_band_base_ = 0.0;
};

// One trial's events: the idler reference, the independently surviving
// return photons under TargetPresent, and the background hits. The output
// buffer is cleared first; event order is deterministic for a given rng
// state.
void generate_trial_events(const TrialModel& model, Hypothesis hypothesis,
                           SplitMix64& rng, std::vector<PhotonEvent>& out);
std::vector<PhotonEvent> generate_trial_events(const TrialModel& model, Hypothesis hypothesis,
                                               SplitMix64& rng);

std::vector<DetectionEvent> strip_events(const std::vector<PhotonEvent>& events);

// Positive-detection criterion for the entangled pair protocol: two
// non-idler events within the coincidence window, an idler consistent
// with the same trial (each pair photon inside the fine frequency gate of
// the idler-identified mode), and the three-frequency sum matching the
// pump budget. Earliest qualifying pair wins; arrival_time_T is its
// midpoint.
TrialOutcome coincidence_decide(std::span<const DetectionEvent> events, const TrialModel& model);
TrialOutcome coincidence_decide(std::span<const DetectionEvent> events, const ExperimentConfig& cfg);

// Decision rules for all four protocols over the same event record.
TrialOutcome decide(Protocol protocol, std::span<const DetectionEvent> events,
                    const TrialModel& model);

RangeEstimate estimate_range(const TrialOutcome& outcome, const ExperimentConfig& cfg);

struct SimulationSummary {
    Protocol protocol = Protocol::EntangledTwoPhoton;
    Hypothesis hypothesis = Hypothesis::TargetAbsent;
    std::uint64_t trials = 0;
    std::uint64_t detections = 0;
    double p_empirical = 0.0;
    WilsonInterval wilson95;
    WilsonInterval wilson99;
    double p_analytic = 0.0;
    bool within_wilson95 = false;
    bool within_wilson99 = false;
    double mean_abs_range_error = 0.0;  // m, over detected trials; 0 when none
    RejectionCounts rejected;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> seed_chain;  // first per-trial seed of each block
};

// Trials processed in fixed blocks of trial_block_size; blocks are the
// parallel work units and are reduced in index order, so the summary is
// bit-identical for any worker count.
inline constexpr std::uint64_t trial_block_size = 1 << 16;

SimulationSummary run_monte_carlo(const ExperimentConfig& cfg, Hypothesis hypothesis,
                                  Protocol protocol, std::uint64_t n_trials,
                                  unsigned n_workers = 0 /* 0 = hardware */);

}  // namespace qi::sim
