#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qi/harness.hpp"

namespace {

using qi::harness::CommandResult;

int emit(const CommandResult& result, const std::string& out_path) {
    if (!result.diagnostics.empty()) std::cerr << result.diagnostics;
    if (!result.output.empty()) {
        if (out_path.empty()) {
            std::cout << result.output;
        } else {
            std::ofstream file(out_path, std::ios::binary);
            if (!file) {
                std::cerr << "cannot open output file \"" << out_path << "\"\n";
                return qi::harness::exit_config_error;
            }
            file << result.output;
        }
    }
    return result.exit_code;
}

std::optional<qi::ExperimentConfig> load(const std::string& path, bool seed_set,
                                         std::uint64_t seed) {
    try {
        qi::ExperimentConfig cfg = qi::load_config_file(path);
        if (seed_set) cfg.rng_seed = seed;
        return cfg;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return std::nullopt;
    }
}

std::vector<double> parse_values(const std::string& csv, bool& ok) {
    std::vector<double> values;
    ok = true;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string token =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            std::cerr << "cannot parse value \"" << token << "\"\n";
            ok = false;
            return {};
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic detection theory and event-level Monte Carlo for "
                 "photon-pair illumination protocols"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t trials = 100000;
    unsigned workers = 0;
    bool strict = false;
    bool db_scale = false;

    auto add_common = [&](CLI::App* cmd, bool with_trials) {
        cmd->add_option("--config", config_path, "Scenario JSON file")->required();
        cmd->add_option("--out", out_path, "Output file (default: standard output)");
        cmd->add_option("--seed", seed, "Override the config rng_seed")
            ->each([&](const std::string&) { seed_set = true; });
        if (with_trials) {
            cmd->add_option("--trials", trials, "Monte Carlo trials");
            cmd->add_option("--workers", workers, "Worker threads (0 = hardware)");
        }
    };

    CLI::App* analytic = app.add_subcommand("analytic", "Closed-form probabilities and SNRs");
    add_common(analytic, false);
    analytic->add_flag("--db", db_scale, "Report SNR in dB (10*log10)");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo run with JSON summary");
    add_common(simulate, true);
    std::string protocol_name_arg = "EntangledTwoPhoton";
    std::string hypothesis_arg = "TargetPresent";
    simulate->add_option("--protocol", protocol_name_arg,
                         "ClassicalSingle | LloydEntangled | ClassicalTwoPhoton | EntangledTwoPhoton");
    simulate->add_option("--hypothesis", hypothesis_arg, "TargetAbsent/h0 | TargetPresent/h1");
    simulate->add_flag("--strict", strict, "Exit 3 when the 99% Wilson agreement check fails");

    CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep CSV");
    add_common(sweep, true);
    std::string axis_arg = "eta";
    std::string values_arg;
    std::string protocols_arg = "all";
    std::string mode_arg = "analytic";
    sweep->add_option("--axis", axis_arg, "eta | NB | M | m | window");
    sweep->add_option("--values", values_arg, "Comma-separated, strictly increasing")->required();
    sweep->add_option("--protocols", protocols_arg, "Comma-separated protocol names or 'all'");
    sweep->add_option("--mode", mode_arg, "analytic | mc | both");
    sweep->add_flag("--db", db_scale, "Report SNR in dB (10*log10)");

    CLI::App* equivalence = app.add_subcommand("equivalence", "Time-bandwidth equivalence CSV");
    add_common(equivalence, false);
    std::string m_values_arg;
    double regime_threshold = qi::analytic::default_regime_threshold;
    equivalence->add_option("--m-values", m_values_arg, "Comma-separated mode counts")->required();
    equivalence->add_option("--regime-threshold", regime_threshold,
                            "M/NB threshold for the valid-regime flag");
    equivalence->add_flag("--db", db_scale, "Report target SNR in dB (10*log10)");

    CLI::App* range = app.add_subcommand("range", "Per-trial range estimates CSV");
    add_common(range, true);

    CLI11_PARSE(app, argc, argv);

    const auto cfg = load(config_path, seed_set, seed);
    if (!cfg) return qi::harness::exit_config_error;

    if (analytic->parsed()) return emit(qi::harness::run_analytic(*cfg, db_scale), out_path);

    if (simulate->parsed()) {
        const auto protocol = qi::protocol_from_name(protocol_name_arg);
        if (!protocol) {
            std::cerr << "unknown protocol \"" << protocol_name_arg << "\"\n";
            return qi::harness::exit_config_error;
        }
        const auto hypothesis = qi::sim::hypothesis_from_name(hypothesis_arg);
        if (!hypothesis) {
            std::cerr << "unknown hypothesis \"" << hypothesis_arg << "\"\n";
            return qi::harness::exit_config_error;
        }
        return emit(qi::harness::run_simulate(*cfg, *protocol, *hypothesis, trials, workers, strict),
                    out_path);
    }

    if (sweep->parsed()) {
        qi::harness::SweepSpec spec;
        const auto axis = qi::harness::sweep_axis_from_name(axis_arg);
        if (!axis) {
            std::cerr << "unknown sweep axis \"" << axis_arg << "\"\n";
            return qi::harness::exit_config_error;
        }
        spec.axis = *axis;
        const auto mode = qi::harness::sweep_mode_from_name(mode_arg);
        if (!mode) {
            std::cerr << "unknown sweep mode \"" << mode_arg << "\"\n";
            return qi::harness::exit_config_error;
        }
        spec.mode = *mode;
        bool ok = false;
        spec.values = parse_values(values_arg, ok);
        if (!ok) return qi::harness::exit_config_error;
        if (protocols_arg == "all") {
            spec.protocols.assign(qi::all_protocols.begin(), qi::all_protocols.end());
        } else {
            std::size_t pos = 0;
            while (pos <= protocols_arg.size()) {
                const std::size_t comma = protocols_arg.find(',', pos);
                const std::string token = protocols_arg.substr(
                    pos, comma == std::string::npos ? std::string::npos : comma - pos);
                const auto p = qi::protocol_from_name(token);
                if (!p) {
                    std::cerr << "unknown protocol \"" << token << "\"\n";
                    return qi::harness::exit_config_error;
                }
                spec.protocols.push_back(*p);
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        }
        spec.n_trials = trials;
        return emit(qi::harness::run_sweep(*cfg, spec, workers, db_scale), out_path);
    }

    if (equivalence->parsed()) {
        bool ok = false;
        const std::vector<double> m_values = parse_values(m_values_arg, ok);
        if (!ok) return qi::harness::exit_config_error;
        return emit(qi::harness::run_equivalence(*cfg, m_values, regime_threshold, db_scale),
                    out_path);
    }

    if (range->parsed()) return emit(qi::harness::run_range(*cfg, trials, workers), out_path);

    return qi::harness::exit_ok;
}
