#include "qi/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qi/analytic.hpp"

namespace qi::sim {

std::string_view hypothesis_name(Hypothesis h) {
    return h == Hypothesis::TargetAbsent ? "TargetAbsent" : "TargetPresent";
}

std::optional<Hypothesis> hypothesis_from_name(std::string_view name) {
    if (name == "TargetAbsent" || name == "h0") return Hypothesis::TargetAbsent;
    if (name == "TargetPresent" || name == "h1") return Hypothesis::TargetPresent;
    return std::nullopt;
}

TrialModel::TrialModel(const ExperimentConfig& cfg) : cfg_(require_valid(cfg)) {
    gate_start_ = cfg_.emission_time_t0 + 2.0 * cfg_.true_range / speed_of_light;
    smear_width_ = static_cast<double>(cfg_.num_modes_M) * cfg_.energy_tolerance;
    fine_gate_ = 0.5 * cfg_.energy_tolerance;
    cell_gate_ = 0.5 * smear_width_;

    // The smeared noise cells must not overlap each other or a neighbour's
    // matcher gates, otherwise the event model no longer realizes the
    // per-cell occupancy the closed forms assume. M == 1 is the known
    // degenerate spectrum (w2 == w3) and has no neighbours to collide with.
    const int modes = cfg_.num_modes_M;
    double max_center = 0.0;
    if (modes >= 2) {
        std::vector<double> centers;
        centers.reserve(2 * static_cast<std::size_t>(modes));
        for (const ModeTriple& t : cfg_.mode_frequencies) {
            centers.push_back(t.w2);
            centers.push_back(t.w3);
        }
        std::sort(centers.begin(), centers.end());
        max_center = centers.back();
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < centers.size(); ++i)
            min_gap = std::fmin(min_gap, centers[i] - centers[i - 1]);
        const double needed = (modes + 1) * cfg_.energy_tolerance;
        if (!(min_gap > needed))
            throw std::invalid_argument(
                "TrialModel: signal spectrum too dense for the noise smear width "
                "num_modes_M * energy_tolerance; smallest cell gap " + std::to_string(min_gap) +
                " rad/s needs > " + std::to_string(needed) +
                " rad/s. Reduce energy_tolerance or num_modes_M.");

        std::vector<double> idlers;
        idlers.reserve(cfg_.mode_frequencies.size());
        for (const ModeTriple& t : cfg_.mode_frequencies) idlers.push_back(t.w1);
        std::sort(idlers.begin(), idlers.end());
        for (std::size_t i = 1; i < idlers.size(); ++i)
            if (!(idlers[i] - idlers[i - 1] > cfg_.energy_tolerance))
                throw std::invalid_argument(
                    "TrialModel: idler frequencies closer than energy_tolerance; "
                    "mode lookup would be ambiguous");
    } else {
        max_center = std::fmax(cfg_.mode_frequencies[0].w2, cfg_.mode_frequencies[0].w3);
    }
    out_of_band_base_ = max_center + 2.0 * std::fmax(smear_width_, cfg_.energy_tolerance);
}

double TrialModel::noise_cell_center(int cell) const {
    const int mode = cell / 2;  // 0-based
    if (mode < cfg_.num_modes_M) {
        const ModeTriple& t = cfg_.mode_frequencies[static_cast<std::size_t>(mode)];
        return (cell % 2 == 0) ? t.w2 : t.w3;
    }
    // Background modes beyond the signal table sit above the band, spaced
    // so they can never reach a matcher gate.
    const int overflow = cell - 2 * cfg_.num_modes_M;
    return out_of_band_base_ + 2.0 * std::fmax(smear_width_, cfg_.energy_tolerance) *
                                   static_cast<double>(overflow + 1);
}

int TrialModel::mode_for_idler_frequency(double w) const {
    for (std::size_t i = 0; i < cfg_.mode_frequencies.size(); ++i)
        if (std::fabs(w - cfg_.mode_frequencies[i].w1) <= fine_gate_)
            return static_cast<int>(i) + 1;
    return 0;
}

void generate_trial_events(const TrialModel& model, Hypothesis hypothesis, SplitMix64& rng,
                           std::vector<PhotonEvent>& out) {
    out.clear();
    const ExperimentConfig& cfg = model.config();
    const double jitter = cfg.generation_jitter;
    const double gate = model.gate_start();

    int mode = 1 + static_cast<int>(rng.uniform01() * static_cast<double>(cfg.num_modes_M));
    mode = std::min(mode, cfg.num_modes_M);
    const ModeTriple& triple = cfg.mode_frequencies[static_cast<std::size_t>(mode - 1)];

    out.push_back({{cfg.emission_time_t0 + rng.uniform01() * jitter, triple.w1, Channel::Idler, mode},
                   TruthOrigin::Triplet});

    if (hypothesis == Hypothesis::TargetPresent) {
        // The two probe photons survive the round trip independently; the
        // closed-form laws are squares of the per-photon probability.
        if (rng.bernoulli(cfg.reflectivity_eta))
            out.push_back({{gate + rng.uniform01() * jitter, triple.w2, Channel::SignalReturn, mode},
                           TruthOrigin::Triplet});
        if (rng.bernoulli(cfg.reflectivity_eta))
            out.push_back({{gate + rng.uniform01() * jitter, triple.w3, Channel::SignalReturn, mode},
                           TruthOrigin::Triplet});
    }

    const double window = cfg.coincidence_window_dt;
    const double smear = model.smear_width();
    sample_bernoulli_hits(
        static_cast<std::size_t>(model.noise_cell_count()), cfg.noise_mean_NB, rng,
        [&](std::size_t cell) {
            const double t = gate + rng.uniform01() * window;
            const double w =
                model.noise_cell_center(static_cast<int>(cell)) + (rng.uniform01() - 0.5) * smear;
            out.push_back({{t, w, Channel::Noise, std::nullopt}, TruthOrigin::Background});
        });
}

std::vector<PhotonEvent> generate_trial_events(const TrialModel& model, Hypothesis hypothesis,
                                               SplitMix64& rng) {
    std::vector<PhotonEvent> out;
    generate_trial_events(model, hypothesis, rng, out);
    return out;
}

std::vector<DetectionEvent> strip_events(const std::vector<PhotonEvent>& events) {
    std::vector<DetectionEvent> out;
    out.reserve(events.size());
    for (const PhotonEvent& e : events) out.push_back(e.strip());
    return out;
}

namespace {

struct DecisionScratch {
    std::vector<int> candidates;  // non-idler event indices, time-sorted
};

bool two_photon(Protocol p) {
    return p == Protocol::ClassicalTwoPhoton || p == Protocol::EntangledTwoPhoton;
}

bool entangled(Protocol p) {
    return p == Protocol::LloydEntangled || p == Protocol::EntangledTwoPhoton;
}

// Earliest idler by (time, frequency, index); -1 when absent.
int find_idler(std::span<const DetectionEvent> events) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(events.size()); ++i) {
        if (events[static_cast<std::size_t>(i)].channel != Channel::Idler) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const DetectionEvent& a = events[static_cast<std::size_t>(i)];
        const DetectionEvent& b = events[static_cast<std::size_t>(best)];
        if (a.arrival_time < b.arrival_time ||
            (a.arrival_time == b.arrival_time && a.frequency < b.frequency))
            best = i;
    }
    return best;
}

TrialOutcome decide_impl(Protocol protocol, std::span<const DetectionEvent> events,
                         const TrialModel& model, DecisionScratch& scratch) {
    const ExperimentConfig& cfg = model.config();
    TrialOutcome outcome;

    scratch.candidates.clear();
    for (int i = 0; i < static_cast<int>(events.size()); ++i)
        if (events[static_cast<std::size_t>(i)].channel != Channel::Idler)
            scratch.candidates.push_back(i);
    std::sort(scratch.candidates.begin(), scratch.candidates.end(), [&](int a, int b) {
        const DetectionEvent& ea = events[static_cast<std::size_t>(a)];
        const DetectionEvent& eb = events[static_cast<std::size_t>(b)];
        if (ea.arrival_time != eb.arrival_time) return ea.arrival_time < eb.arrival_time;
        if (ea.frequency != eb.frequency) return ea.frequency < eb.frequency;
        return a < b;
    });

    const int idler_idx = find_idler(events);
    int mode = 0;
    if (idler_idx >= 0)
        mode = model.mode_for_idler_frequency(events[static_cast<std::size_t>(idler_idx)].frequency);
    const bool idler_ok = mode > 0;

    // Per-photon frequency gate: the entangled joint measurement resolves
    // to the energy tolerance, a classical filter only to the mode cell.
    const double gate = entangled(protocol) ? model.fine_gate() : model.cell_gate();
    const ModeTriple* triple =
        idler_ok ? &cfg.mode_frequencies[static_cast<std::size_t>(mode - 1)] : nullptr;
    auto in_channel2 = [&](const DetectionEvent& e) { return std::fabs(e.frequency - triple->w2) <= gate; };
    auto in_channel3 = [&](const DetectionEvent& e) { return std::fabs(e.frequency - triple->w3) <= gate; };

    if (!two_photon(protocol)) {
        // Single-photon rule: one return-side event consistent with the
        // trial mode's outgoing frequency.
        for (int idx : scratch.candidates) {
            const DetectionEvent& e = events[static_cast<std::size_t>(idx)];
            if (!idler_ok) {
                outcome.rejected.idler++;
                continue;
            }
            if (!in_channel2(e)) {
                outcome.rejected.energy++;
                continue;
            }
            outcome.detected = true;
            outcome.matched_mode = mode;
            outcome.arrival_time_T = e.arrival_time;
            break;
        }
        return outcome;
    }

    const double window = cfg.coincidence_window_dt;
    const std::size_t n = scratch.candidates.size();
    for (std::size_t i = 0; i < n && !outcome.detected; ++i) {
        const DetectionEvent& a = events[static_cast<std::size_t>(scratch.candidates[i])];
        for (std::size_t j = i + 1; j < n; ++j) {
            const DetectionEvent& b = events[static_cast<std::size_t>(scratch.candidates[j])];
            if (!(std::fabs(b.arrival_time - a.arrival_time) <= window)) {
                outcome.rejected.window++;
                continue;
            }
            if (!idler_ok) {
                outcome.rejected.idler++;
                continue;
            }
            const bool channels_covered =
                (in_channel2(a) && in_channel3(b)) || (in_channel3(a) && in_channel2(b));
            bool ok = channels_covered;
            if (ok && entangled(protocol)) {
                const double w_idler = events[static_cast<std::size_t>(idler_idx)].frequency;
                const double deviation =
                    std::fabs(cfg.pump_frequency_w0 - (w_idler + a.frequency + b.frequency));
                ok = deviation <= cfg.energy_tolerance;
            }
            if (!ok) {
                outcome.rejected.energy++;
                continue;
            }
            outcome.detected = true;
            outcome.matched_mode = mode;
            outcome.arrival_time_T = 0.5 * (a.arrival_time + b.arrival_time);
            break;
        }
    }
    return outcome;
}

}  // namespace

TrialOutcome coincidence_decide(std::span<const DetectionEvent> events, const TrialModel& model) {
    DecisionScratch scratch;
    return decide_impl(Protocol::EntangledTwoPhoton, events, model, scratch);
}

TrialOutcome coincidence_decide(std::span<const DetectionEvent> events, const ExperimentConfig& cfg) {
    return coincidence_decide(events, TrialModel(cfg));
}

TrialOutcome decide(Protocol protocol, std::span<const DetectionEvent> events,
                    const TrialModel& model) {
    DecisionScratch scratch;
    return decide_impl(protocol, events, model, scratch);
}

RangeEstimate estimate_range(const TrialOutcome& outcome, const ExperimentConfig& cfg) {
    if (!outcome.detected || !outcome.arrival_time_T) throw NotDetected();
    RangeEstimate est;
    est.arrival_time_T = *outcome.arrival_time_T;
    est.estimated_range = speed_of_light * (est.arrival_time_T - cfg.emission_time_t0) / 2.0;
    est.uncertainty = speed_of_light * cfg.coincidence_window_dt / 2.0;
    est.truth_error = est.estimated_range - cfg.true_range;
    return est;
}

namespace {

struct BlockResult {
    std::uint64_t detections = 0;
    double sum_abs_range_error = 0.0;
    RejectionCounts rejected;
};

}  // namespace

SimulationSummary run_monte_carlo(const ExperimentConfig& cfg, Hypothesis hypothesis,
                                  Protocol protocol, std::uint64_t n_trials, unsigned n_workers) {
    if (n_trials < 1) throw std::invalid_argument("run_monte_carlo: n_trials must be >= 1");
    const TrialModel model(cfg);

    const std::uint64_t n_blocks = (n_trials + trial_block_size - 1) / trial_block_size;
    std::vector<BlockResult> blocks(n_blocks);

    unsigned workers = n_workers != 0 ? n_workers : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_blocks)));

    std::atomic<std::uint64_t> next_block{0};
    auto worker_fn = [&]() {
        std::vector<PhotonEvent> events;
        std::vector<DetectionEvent> stripped;
        DecisionScratch scratch;
        while (true) {
            const std::uint64_t b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            BlockResult& result = blocks[b];
            const std::uint64_t first = b * trial_block_size;
            const std::uint64_t last = std::min(n_trials, first + trial_block_size);
            for (std::uint64_t t = first; t < last; ++t) {
                SplitMix64 rng(derive_seed(cfg.rng_seed, t));
                generate_trial_events(model, hypothesis, rng, events);
                stripped.clear();
                for (const PhotonEvent& e : events) stripped.push_back(e.strip());
                const TrialOutcome outcome = decide_impl(protocol, stripped, model, scratch);
                result.rejected += outcome.rejected;
                if (outcome.detected) {
                    ++result.detections;
                    result.sum_abs_range_error +=
                        std::fabs(estimate_range(outcome, cfg).truth_error);
                }
            }
        }
    };

    if (workers == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (std::thread& th : pool) th.join();
    }

    // Reduce in block order so the summary is independent of scheduling.
    SimulationSummary summary;
    summary.protocol = protocol;
    summary.hypothesis = hypothesis;
    summary.trials = n_trials;
    summary.master_seed = cfg.rng_seed;
    double sum_abs_err = 0.0;
    summary.seed_chain.reserve(n_blocks);
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        summary.detections += blocks[b].detections;
        summary.rejected += blocks[b].rejected;
        sum_abs_err += blocks[b].sum_abs_range_error;
        summary.seed_chain.push_back(derive_seed(cfg.rng_seed, b * trial_block_size));
    }
    summary.p_empirical = static_cast<double>(summary.detections) / static_cast<double>(n_trials);
    summary.wilson95 = wilson_interval(summary.detections, n_trials, z_two_sided_95);
    summary.wilson99 = wilson_interval(summary.detections, n_trials, z_two_sided_99);

    const HypothesisStats reference = analytic::stats_for(protocol, cfg);
    summary.p_analytic =
        hypothesis == Hypothesis::TargetAbsent ? reference.p_pos_h0 : reference.p_pos_h1;
    summary.within_wilson95 = summary.wilson95.contains(summary.p_analytic);
    summary.within_wilson99 = summary.wilson99.contains(summary.p_analytic);
    summary.mean_abs_range_error =
        summary.detections > 0 ? sum_abs_err / static_cast<double>(summary.detections) : 0.0;
    return summary;
}

}  // namespace qi::sim
