#include "qi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace qi::harness {

std::string_view sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Eta: return "eta";
        case SweepAxis::NB: return "NB";
        case SweepAxis::M: return "M";
        case SweepAxis::TrialsM: return "m";
        case SweepAxis::Window: return "window";
    }
    return "unknown";
}

std::optional<SweepAxis> sweep_axis_from_name(std::string_view name) {
    if (name == "eta") return SweepAxis::Eta;
    if (name == "NB") return SweepAxis::NB;
    if (name == "M") return SweepAxis::M;
    if (name == "m") return SweepAxis::TrialsM;
    if (name == "window") return SweepAxis::Window;
    return std::nullopt;
}

std::optional<SweepMode> sweep_mode_from_name(std::string_view name) {
    if (name == "analytic") return SweepMode::AnalyticOnly;
    if (name == "mc") return SweepMode::MonteCarloOnly;
    if (name == "both") return SweepMode::Both;
    return std::nullopt;
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string format_int(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
}

bool integral(double v) { return std::floor(v) == v && std::isfinite(v); }

double to_db(double snr) { return 10.0 * std::log10(snr); }

}  // namespace

std::vector<std::string> validate_sweep_spec(const SweepSpec& spec) {
    std::vector<std::string> errors;
    if (spec.values.empty()) errors.push_back("sweep: values must be non-empty");
    for (std::size_t i = 1; i < spec.values.size(); ++i)
        if (!(spec.values[i] > spec.values[i - 1])) {
            errors.push_back("sweep: values must be strictly increasing");
            break;
        }
    if (spec.protocols.empty()) errors.push_back("sweep: protocols must be non-empty");
    const bool wants_mc = spec.mode != SweepMode::AnalyticOnly;
    if (wants_mc && spec.n_trials < 1)
        errors.push_back("sweep: n_trials must be >= 1 when Monte Carlo is requested");
    if (wants_mc && spec.axis == SweepAxis::TrialsM)
        errors.push_back("sweep: axis m is analytic-only (the m-trial law is a closed-form power)");
    const bool integral_axis = spec.axis == SweepAxis::M || spec.axis == SweepAxis::TrialsM;
    if (integral_axis)
        for (double v : spec.values)
            if (!integral(v) || v < 1.0) {
                errors.push_back("sweep: axis " + std::string(sweep_axis_name(spec.axis)) +
                                 " requires integer values >= 1");
                break;
            }
    return errors;
}

namespace {

// Applies one axis value to a base scenario. Sweeping M regenerates the
// default spectrum and keeps noise_modes_MB tied to M when the base config
// followed that convention.
ExperimentConfig config_at(const ExperimentConfig& base, SweepAxis axis, double value) {
    ExperimentConfig cfg = base;
    switch (axis) {
        case SweepAxis::Eta:
            cfg.reflectivity_eta = value;
            break;
        case SweepAxis::NB:
            cfg.noise_mean_NB = value;
            break;
        case SweepAxis::M: {
            const int m = static_cast<int>(value);
            if (base.noise_modes_MB == base.num_modes_M) cfg.noise_modes_MB = m;
            cfg.num_modes_M = m;
            cfg.mode_frequencies = uniform_mode_table(m, cfg.pump_frequency_w0);
            break;
        }
        case SweepAxis::TrialsM:
            cfg.trials_m = static_cast<long long>(value);
            break;
        case SweepAxis::Window:
            cfg.coincidence_window_dt = value;
            break;
    }
    return cfg;
}

CommandResult config_failure(const ValidationReport& report) {
    return {exit_config_error, "", report.joined()};
}

}  // namespace

CommandResult run_analytic(const ExperimentConfig& cfg, bool db_scale) {
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) return config_failure(report);

    CommandResult result;
    for (const std::string& w : report.warnings) result.diagnostics += "warning: " + w + "\n";

    std::string& out = result.output;
    out += analytic_csv_header;
    out += '\n';
    try {
        for (Protocol p : all_protocols) {
            const HypothesisStats stats = analytic::stats_for(p, cfg);
            double snr = stats.p_pos_h1 / stats.p_pos_h0;
            if (db_scale) snr = to_db(snr);
            out += std::string(protocol_name(p)) + "," + format_full(stats.p_pos_h0) + "," +
                   format_full(stats.p_pos_h1) + "," + format_full(snr) + "\n";
        }
    } catch (const std::exception& e) {
        return {exit_config_error, "", std::string(e.what()) + "\n"};
    }
    if (cfg.noise_mean_NB == 0.0)
        return {exit_config_error, "",
                "analytic: noise_mean_NB is zero; SNR is undefined for the noiseless limit\n"};
    return result;
}

CommandResult run_simulate(const ExperimentConfig& cfg, Protocol protocol,
                           sim::Hypothesis hypothesis, std::uint64_t n_trials, unsigned n_workers,
                           bool strict) {
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) return config_failure(report);

    CommandResult result;
    for (const std::string& w : report.warnings) result.diagnostics += "warning: " + w + "\n";

    sim::SimulationSummary summary;
    try {
        summary = sim::run_monte_carlo(cfg, hypothesis, protocol, n_trials, n_workers);
    } catch (const std::exception& e) {
        return {exit_config_error, "", std::string(e.what()) + "\n"};
    }

    nlohmann::ordered_json j;
    j["command"] = "simulate";
    j["protocol"] = std::string(protocol_name(summary.protocol));
    j["hypothesis"] = std::string(sim::hypothesis_name(summary.hypothesis));
    j["trials"] = summary.trials;
    j["detections"] = summary.detections;
    j["empirical_p_pos"] = summary.p_empirical;
    j["wilson95"] = {{"lo", summary.wilson95.lo}, {"hi", summary.wilson95.hi}};
    j["wilson99"] = {{"lo", summary.wilson99.lo}, {"hi", summary.wilson99.hi}};
    j["analytic_p_pos"] = summary.p_analytic;
    j["within_wilson95"] = summary.within_wilson95;
    j["within_wilson99"] = summary.within_wilson99;
    j["agreement_pass"] = summary.within_wilson99;
    j["mean_abs_range_error_m"] = summary.mean_abs_range_error;
    j["rejected_pairs"] = {{"window", summary.rejected.window},
                           {"energy", summary.rejected.energy},
                           {"idler", summary.rejected.idler}};
    j["seed"] = summary.master_seed;
    j["seed_chain"] = summary.seed_chain;
    result.output = j.dump(2) + "\n";

    if (strict && !summary.within_wilson99) {
        result.exit_code = exit_agreement_failure;
        result.diagnostics += "strict: analytic probability " + format_full(summary.p_analytic) +
                              " outside the empirical 99% Wilson interval [" +
                              format_full(summary.wilson99.lo) + ", " +
                              format_full(summary.wilson99.hi) + "]\n";
    }
    return result;
}

CommandResult run_sweep(const ExperimentConfig& cfg, const SweepSpec& spec, unsigned n_workers,
                        bool db_scale) {
    {
        const std::vector<std::string> spec_errors = validate_sweep_spec(spec);
        if (!spec_errors.empty()) {
            CommandResult bad;
            bad.exit_code = exit_config_error;
            for (const std::string& e : spec_errors) bad.diagnostics += e + "\n";
            return bad;
        }
    }

    CommandResult result;
    std::string& out = result.output;
    out += sweep_csv_header;
    out += '\n';

    const bool analytic_cols = spec.mode != SweepMode::MonteCarloOnly;
    const bool mc_cols = spec.mode != SweepMode::AnalyticOnly;
    const bool integral_axis = spec.axis == SweepAxis::M || spec.axis == SweepAxis::TrialsM;

    std::uint64_t row_index = 0;
    for (double value : spec.values) {
        const ExperimentConfig point = config_at(cfg, spec.axis, value);
        const ValidationReport report = validate_config(point);
        if (!report.ok()) {
            result.exit_code = exit_config_error;
            result.diagnostics += "sweep: " + std::string(sweep_axis_name(spec.axis)) + " = " +
                                  format_full(value) + " yields an invalid config:\n" +
                                  report.joined();
            result.output.clear();
            return result;
        }
        for (Protocol protocol : spec.protocols) {
            out += sweep_axis_name(spec.axis);
            out += ',';
            out += integral_axis ? format_int(value) : format_full(value);
            out += ',';
            out += protocol_name(protocol);

            if (analytic_cols) {
                HypothesisStats stats = analytic::stats_for(protocol, point);
                if (spec.axis == SweepAxis::TrialsM)
                    stats = analytic::m_trial(stats, point.trials_m);
                double snr = stats.p_pos_h1 / stats.p_pos_h0;
                if (db_scale) snr = to_db(snr);
                out += "," + format_full(stats.p_pos_h0) + "," + format_full(stats.p_pos_h1) + "," +
                       format_full(snr);
            } else {
                out += ",,,";
            }

            if (mc_cols) {
                const std::uint64_t point_seed = derive_seed(cfg.rng_seed, row_index);
                ExperimentConfig mc_cfg = point;
                try {
                    mc_cfg.rng_seed = derive_seed(point_seed, 0);
                    const sim::SimulationSummary h0 = sim::run_monte_carlo(
                        mc_cfg, sim::Hypothesis::TargetAbsent, protocol, spec.n_trials, n_workers);
                    mc_cfg.rng_seed = derive_seed(point_seed, 1);
                    const sim::SimulationSummary h1 = sim::run_monte_carlo(
                        mc_cfg, sim::Hypothesis::TargetPresent, protocol, spec.n_trials, n_workers);
                    out += "," + std::to_string(spec.n_trials) + "," + std::to_string(point_seed) +
                           "," + format_full(h0.p_empirical) + "," + format_full(h0.wilson99.lo) +
                           "," + format_full(h0.wilson99.hi) + "," + format_full(h1.p_empirical) +
                           "," + format_full(h1.wilson99.lo) + "," + format_full(h1.wilson99.hi);
                } catch (const std::exception& e) {
                    result.exit_code = exit_config_error;
                    result.diagnostics += std::string(e.what()) + "\n";
                    result.output.clear();
                    return result;
                }
            } else {
                out += ",,,,,,,,";
            }
            out += '\n';
            ++row_index;
        }
    }
    return result;
}

CommandResult run_equivalence(const ExperimentConfig& cfg, const std::vector<double>& m_values,
                              double regime_threshold, bool db_scale) {
    CommandResult result;
    if (!(cfg.reflectivity_eta > 0.0)) {
        result.exit_code = exit_config_error;
        result.diagnostics = "equivalence: requires reflectivity_eta > 0\n";
        return result;
    }
    if (m_values.empty()) {
        result.exit_code = exit_config_error;
        result.diagnostics = "equivalence: M list must be non-empty\n";
        return result;
    }
    for (double v : m_values)
        if (!integral(v) || v < 1.0) {
            result.exit_code = exit_config_error;
            result.diagnostics = "equivalence: M values must be integers >= 1\n";
            return result;
        }

    std::string& out = result.output;
    out += equivalence_csv_header;
    out += '\n';
    for (double v : m_values) {
        ExperimentConfig point = cfg;
        point.num_modes_M = static_cast<int>(v);
        if (cfg.noise_modes_MB == cfg.num_modes_M) point.noise_modes_MB = point.num_modes_M;
        point.mode_frequencies = uniform_mode_table(point.num_modes_M, point.pump_frequency_w0);
        const ValidationReport report = validate_config(point);
        if (!report.ok()) {
            result.exit_code = exit_config_error;
            result.diagnostics = "equivalence: M = " + format_int(v) +
                                 " yields an invalid config:\n" + report.joined();
            result.output.clear();
            return result;
        }
        try {
            const analytic::EquivalenceResult eq =
                analytic::solve_equivalent_bandwidth(point, regime_threshold);
            const double target = db_scale ? to_db(eq.target_snr) : eq.target_snr;
            out += format_int(v) + "," + format_full(target) + "," + format_full(eq.m_prime) +
                   "," + format_full(eq.ratio_m_prime_over_m) + "," +
                   format_full(eq.asymptotic_m_prime) + "," +
                   (eq.in_valid_regime ? "true" : "false") + "\n";
        } catch (const std::exception& e) {
            result.exit_code = exit_config_error;
            result.diagnostics = std::string(e.what()) + "\n";
            result.output.clear();
            return result;
        }
    }
    return result;
}

CommandResult run_range(const ExperimentConfig& cfg, std::uint64_t n_trials, unsigned n_workers) {
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) return config_failure(report);
    if (n_trials < 1)
        return {exit_config_error, "", "range: n_trials must be >= 1\n"};

    CommandResult result;
    for (const std::string& w : report.warnings) result.diagnostics += "warning: " + w + "\n";

    sim::TrialModel model(cfg);

    // Rows are emitted in trial order; the output does not depend on the
    // worker count.
    (void)n_workers;
    std::string& out = result.output;
    out += range_csv_header;
    out += '\n';

    std::vector<PhotonEvent> events;
    std::vector<DetectionEvent> stripped;
    std::uint64_t detections = 0;
    double sum_abs_error = 0.0;
    for (std::uint64_t t = 0; t < n_trials; ++t) {
        SplitMix64 rng(derive_seed(cfg.rng_seed, t));
        sim::generate_trial_events(model, sim::Hypothesis::TargetPresent, rng, events);
        stripped.clear();
        for (const PhotonEvent& e : events) stripped.push_back(e.strip());
        const sim::TrialOutcome outcome =
            sim::decide(Protocol::EntangledTwoPhoton, stripped, model);
        if (!outcome.detected) continue;
        const RangeEstimate est = sim::estimate_range(outcome, cfg);
        ++detections;
        sum_abs_error += std::fabs(est.truth_error);
        out += std::to_string(t) + "," + format_full(est.estimated_range) + "," +
               format_full(est.truth_error) + "\n";
    }

    if (detections == 0) {
        result.exit_code = exit_no_detections;
        result.diagnostics += "range: no detections in " + std::to_string(n_trials) + " trials\n";
        result.output.clear();
        return result;
    }
    const double uncertainty = speed_of_light * cfg.coincidence_window_dt / 2.0;
    out += "summary," + format_full(sum_abs_error / static_cast<double>(detections)) + "," +
           format_full(uncertainty) + "\n";
    return result;
}

}  // namespace qi::harness
