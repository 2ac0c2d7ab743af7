#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qi/analytic.hpp"
#include "qi/config.hpp"
#include "qi/simulator.hpp"
#include "qi/stats.hpp"

namespace qi::harness {

// Exit codes shared by the CLI and the command implementations.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_agreement_failure = 3;
inline constexpr int exit_no_detections = 4;

enum class SweepAxis { Eta, NB, M, TrialsM, Window };
enum class SweepMode { AnalyticOnly, MonteCarloOnly, Both };

std::string_view sweep_axis_name(SweepAxis axis);
std::optional<SweepAxis> sweep_axis_from_name(std::string_view name);
std::optional<SweepMode> sweep_mode_from_name(std::string_view name);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Eta;
    std::vector<double> values;            // non-empty, strictly increasing
    std::vector<Protocol> protocols;       // subset, row order
    SweepMode mode = SweepMode::AnalyticOnly;
    std::uint64_t n_trials = 100000;       // per hypothesis when MC requested
};

// All violated constraints, empty when the spec is usable.
std::vector<std::string> validate_sweep_spec(const SweepSpec& spec);

struct CommandResult {
    int exit_code = exit_ok;
    std::string output;       // stdout payload (CSV or JSON)
    std::string diagnostics;  // stderr payload
};

// CSV column headers, pinned (tests assert the exact strings).
inline constexpr std::string_view analytic_csv_header = "protocol,p0_pos,p1_pos,snr";
inline constexpr std::string_view sweep_csv_header =
    "axis,value,protocol,p0_pos,p1_pos,snr,mc_trials,mc_seed,"
    "mc_p0_pos,mc_p0_lo99,mc_p0_hi99,mc_p1_pos,mc_p1_lo99,mc_p1_hi99";
inline constexpr std::string_view equivalence_csv_header =
    "M,target_snr,m_prime,m_prime_over_m,asymptotic_m_prime,in_valid_regime";
inline constexpr std::string_view range_csv_header = "trial,estimated_range_m,truth_error_m";

// Full-precision (17 significant digits) decimal rendering used by every
// CSV cell so reruns are byte-identical.
std::string format_full(double v);

// Per-protocol single-trial probabilities and SNR for a validated config.
CommandResult run_analytic(const ExperimentConfig& cfg, bool db_scale = false);

// One Monte Carlo run serialized as a JSON artifact. strict maps a 99%
// Wilson disagreement with the analytic reference to exit code 3.
CommandResult run_simulate(const ExperimentConfig& cfg, Protocol protocol,
                           sim::Hypothesis hypothesis, std::uint64_t n_trials,
                           unsigned n_workers = 0, bool strict = false);

// One CSV row per (axis value x protocol), sorted by (value, protocol).
CommandResult run_sweep(const ExperimentConfig& cfg, const SweepSpec& spec,
                        unsigned n_workers = 0, bool db_scale = false);

// Time-bandwidth equivalence study over a list of mode counts.
CommandResult run_equivalence(const ExperimentConfig& cfg, const std::vector<double>& m_values,
                              double regime_threshold = analytic::default_regime_threshold,
                              bool db_scale = false);

// Per-detected-trial range estimates plus a trailing summary row; exit 4
// when nothing was detected.
CommandResult run_range(const ExperimentConfig& cfg, std::uint64_t n_trials,
                        unsigned n_workers = 0);

}  // namespace qi::harness
