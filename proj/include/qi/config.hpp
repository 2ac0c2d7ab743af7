#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qi {

inline constexpr double speed_of_light = 299792458.0;  // m/s

// Library defaults for scenario construction; the JSON loader applies the
// same values for omitted optional keys.
inline constexpr double default_pump_frequency = 3.6e15;       // rad/s
inline constexpr double default_energy_tolerance_factor = 1e-6;  // of w0
inline constexpr std::uint64_t default_rng_seed = 88172645463325252ull;

// One signal mode's frequency assignment. The components sum to the pump
// frequency: w1 stays in the lab as the idler, w2 and w3 travel out.
struct ModeTriple {
    double w1 = 0.0;
    double w2 = 0.0;
    double w3 = 0.0;

    double sum() const { return w1 + w2 + w3; }
};

// Physical and numerical parameters for one scenario. Immutable by
// convention after validation; safe to share across threads.
struct ExperimentConfig {
    int num_modes_M = 1;             // time-bandwidth product (signal modes)
    int noise_modes_MB = 1;          // background modes, conventionally == num_modes_M
    double noise_mean_NB = 0.01;     // mean noise photons per mode per detection window
    double reflectivity_eta = 0.1;   // probability a signal photon returns
    long long trials_m = 1;          // independent repetitions for the m-trial laws
    double pump_frequency_w0 = default_pump_frequency;  // rad/s
    std::vector<ModeTriple> mode_frequencies;            // one triple per signal mode
    double coincidence_window_dt = 2e-9;  // s, detection window
    double generation_jitter = 1e-9;      // s, triplet creation spread; must be < window
    double energy_tolerance = default_energy_tolerance_factor * default_pump_frequency;  // rad/s
    double emission_time_t0 = 0.0;        // s
    double true_range = 150.0;            // m, ground truth used by the simulator
    std::uint64_t rng_seed = default_rng_seed;
};

enum class ViolationKind {
    InvalidNoise,      // noise_mean_NB outside [0, 1)
    WindowTooNarrow,   // coincidence_window_dt <= generation_jitter
    EnergyMismatch,    // a mode triple breaks the pump-frequency budget
    BadRange,          // reflectivity_eta outside [0, 1]
    InvalidCount,      // non-positive mode/trial counts or table size mismatch
    InvalidTiming,     // non-finite or negative timing fields
    InvalidSpectrum,   // non-positive pump frequency or energy tolerance
    BadGeometry,       // negative or non-finite true_range
};

std::string_view violation_kind_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
    bool has(ViolationKind kind) const;
    std::string joined() const;  // newline-separated error messages
};

// Checks every invariant and reports all violations, not just the first.
// Pure function: a config that passes re-validates identically.
ValidationReport validate_config(const ExperimentConfig& cfg);

// Returns cfg unchanged when valid, throws std::invalid_argument carrying
// the full violation list otherwise.
const ExperimentConfig& require_valid(const ExperimentConfig& cfg);

// Deterministic default spectrum: M distinct triples, each summing to w0
// to machine precision. w2 and w3 sit on disjoint uniform grids and w1
// closes the sum, so idler frequencies are pairwise distinct. M == 1
// degenerates to the symmetric triple (w0/3, w0/3, w0/3).
std::vector<ModeTriple> uniform_mode_table(int num_modes, double pump_w0);

// Ready-to-run scenario with the default spectrum.
ExperimentConfig make_default_config(int num_modes = 100);

// Strict JSON config I/O. Keys mirror the ExperimentConfig field names;
// unknown keys are an error. Omitted optional keys get library defaults
// (noise_modes_MB = num_modes_M, energy_tolerance = 1e-6 * w0,
// mode_frequencies = uniform_mode_table).
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& cfg);

}  // namespace qi
