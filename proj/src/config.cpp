#include "qi/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qi {

std::string_view violation_kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::InvalidNoise: return "InvalidNoise";
        case ViolationKind::WindowTooNarrow: return "WindowTooNarrow";
        case ViolationKind::EnergyMismatch: return "EnergyMismatch";
        case ViolationKind::BadRange: return "BadRange";
        case ViolationKind::InvalidCount: return "InvalidCount";
        case ViolationKind::InvalidTiming: return "InvalidTiming";
        case ViolationKind::InvalidSpectrum: return "InvalidSpectrum";
        case ViolationKind::BadGeometry: return "BadGeometry";
    }
    return "Unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
    for (const auto& v : errors)
        if (v.kind == kind) return true;
    return false;
}

std::string ValidationReport::joined() const {
    std::string out;
    for (const auto& v : errors) {
        out += violation_kind_name(v.kind);
        out += ": ";
        out += v.message;
        out += '\n';
    }
    return out;
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ValidationReport validate_config(const ExperimentConfig& cfg) {
    ValidationReport report;
    auto fail = [&](ViolationKind kind, std::string message) {
        report.errors.push_back({kind, std::move(message)});
    };

    if (cfg.num_modes_M < 1)
        fail(ViolationKind::InvalidCount, "num_modes_M must be >= 1, got " + std::to_string(cfg.num_modes_M));
    if (cfg.noise_modes_MB < 1)
        fail(ViolationKind::InvalidCount, "noise_modes_MB must be >= 1, got " + std::to_string(cfg.noise_modes_MB));
    if (cfg.trials_m < 1)
        fail(ViolationKind::InvalidCount, "trials_m must be >= 1, got " + std::to_string(cfg.trials_m));
    if (cfg.num_modes_M >= 1 &&
        cfg.mode_frequencies.size() != static_cast<std::size_t>(cfg.num_modes_M))
        fail(ViolationKind::InvalidCount,
             "mode_frequencies has " + std::to_string(cfg.mode_frequencies.size()) +
                 " entries, expected num_modes_M = " + std::to_string(cfg.num_modes_M));

    // The closed-form model needs NB in the low-occupancy regime. Zero is
    // accepted as the noiseless degenerate limit; snr_report refuses it
    // separately.
    if (!(cfg.noise_mean_NB >= 0.0 && cfg.noise_mean_NB < 1.0))
        fail(ViolationKind::InvalidNoise,
             "noise_mean_NB must lie in [0, 1), got " + num(cfg.noise_mean_NB));
    else if (cfg.noise_mean_NB > 0.1)
        report.warnings.push_back("noise_mean_NB = " + num(cfg.noise_mean_NB) +
                                  " exceeds 0.1; the low-noise approximation degrades");

    if (!(cfg.reflectivity_eta >= 0.0 && cfg.reflectivity_eta <= 1.0))
        fail(ViolationKind::BadRange,
             "reflectivity_eta must lie in [0, 1], got " + num(cfg.reflectivity_eta));

    if (!std::isfinite(cfg.generation_jitter) || cfg.generation_jitter < 0.0)
        fail(ViolationKind::InvalidTiming,
             "generation_jitter must be finite and >= 0, got " + num(cfg.generation_jitter));
    if (!std::isfinite(cfg.coincidence_window_dt) || cfg.coincidence_window_dt <= 0.0)
        fail(ViolationKind::InvalidTiming,
             "coincidence_window_dt must be finite and > 0, got " + num(cfg.coincidence_window_dt));
    else if (!(cfg.coincidence_window_dt > cfg.generation_jitter))
        fail(ViolationKind::WindowTooNarrow,
             "coincidence_window_dt = " + num(cfg.coincidence_window_dt) +
                 " must exceed generation_jitter = " + num(cfg.generation_jitter));
    if (!std::isfinite(cfg.emission_time_t0))
        fail(ViolationKind::InvalidTiming, "emission_time_t0 must be finite");

    if (!(cfg.pump_frequency_w0 > 0.0) || !std::isfinite(cfg.pump_frequency_w0))
        fail(ViolationKind::InvalidSpectrum,
             "pump_frequency_w0 must be finite and > 0, got " + num(cfg.pump_frequency_w0));
    if (!(cfg.energy_tolerance > 0.0) || !std::isfinite(cfg.energy_tolerance))
        fail(ViolationKind::InvalidSpectrum,
             "energy_tolerance must be finite and > 0, got " + num(cfg.energy_tolerance));

    if (!std::isfinite(cfg.true_range) || cfg.true_range < 0.0)
        fail(ViolationKind::BadGeometry,
             "true_range must be finite and >= 0, got " + num(cfg.true_range));

    if (cfg.pump_frequency_w0 > 0.0 && cfg.energy_tolerance > 0.0) {
        std::size_t bad = 0;
        std::size_t first_bad = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < cfg.mode_frequencies.size(); ++i) {
            const double dev = std::fabs(cfg.pump_frequency_w0 - cfg.mode_frequencies[i].sum());
            if (!(dev <= cfg.energy_tolerance) || !std::isfinite(dev)) {
                if (bad == 0) first_bad = i;
                ++bad;
                worst = std::fmax(worst, dev);
            }
        }
        if (bad > 0)
            fail(ViolationKind::EnergyMismatch,
                 std::to_string(bad) + " mode triple(s) break the pump-frequency budget (first at index " +
                     std::to_string(first_bad) + ", worst deviation " + num(worst) +
                     " rad/s vs tolerance " + num(cfg.energy_tolerance) + ")");
    }

    return report;
}

const ExperimentConfig& require_valid(const ExperimentConfig& cfg) {
    ValidationReport report = validate_config(cfg);
    if (!report.ok())
        throw std::invalid_argument("invalid config:\n" + report.joined());
    return cfg;
}

std::vector<ModeTriple> uniform_mode_table(int num_modes, double pump_w0) {
    if (num_modes < 1) throw std::invalid_argument("uniform_mode_table: num_modes must be >= 1");
    if (!(pump_w0 > 0.0)) throw std::invalid_argument("uniform_mode_table: pump_w0 must be > 0");

    std::vector<ModeTriple> table(static_cast<std::size_t>(num_modes));
    if (num_modes == 1) {
        const double third = pump_w0 / 3.0;
        table[0].w2 = third;
        table[0].w3 = third;
        table[0].w1 = pump_w0 - third - third;
        return table;
    }
    // w2 and w3 grids occupy disjoint bands; w1 closes the sum exactly
    // (up to one rounding) and decreases strictly, so idler frequencies
    // are pairwise distinct.
    for (int i = 0; i < num_modes; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(num_modes - 1) - 0.5;
        ModeTriple& t = table[static_cast<std::size_t>(i)];
        t.w2 = pump_w0 * (7.0 / 18.0 + x / 18.0);
        t.w3 = pump_w0 * (5.0 / 18.0 + x / 24.0);
        t.w1 = pump_w0 - t.w2 - t.w3;
    }
    return table;
}

ExperimentConfig make_default_config(int num_modes) {
    ExperimentConfig cfg;
    cfg.num_modes_M = num_modes;
    cfg.noise_modes_MB = num_modes;
    cfg.mode_frequencies = uniform_mode_table(num_modes, cfg.pump_frequency_w0);
    cfg.energy_tolerance = default_energy_tolerance_factor * cfg.pump_frequency_w0;
    return cfg;
}

namespace {

using nlohmann::json;

const char* const known_keys[] = {
    "num_modes_M",       "noise_modes_MB",        "noise_mean_NB",
    "reflectivity_eta",  "trials_m",              "pump_frequency_w0",
    "mode_frequencies",  "coincidence_window_dt", "generation_jitter",
    "energy_tolerance",  "emission_time_t0",      "true_range",
    "rng_seed",
};

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : known_keys)
            if (item.key() == key) { known = true; break; }
        if (!known) throw std::invalid_argument("config: unknown key \"" + item.key() + "\"");
    }

    auto require = [&](const char* key) -> const json& {
        auto it = j.find(key);
        if (it == j.end())
            throw std::invalid_argument(std::string("config: missing required key \"") + key + "\"");
        return *it;
    };

    ExperimentConfig cfg;
    cfg.num_modes_M = require("num_modes_M").get<int>();
    cfg.noise_mean_NB = require("noise_mean_NB").get<double>();
    cfg.reflectivity_eta = require("reflectivity_eta").get<double>();
    cfg.pump_frequency_w0 = require("pump_frequency_w0").get<double>();
    cfg.coincidence_window_dt = require("coincidence_window_dt").get<double>();
    cfg.generation_jitter = require("generation_jitter").get<double>();

    cfg.noise_modes_MB = j.value("noise_modes_MB", cfg.num_modes_M);
    cfg.trials_m = j.value("trials_m", 1LL);
    cfg.energy_tolerance =
        j.value("energy_tolerance", default_energy_tolerance_factor * cfg.pump_frequency_w0);
    cfg.emission_time_t0 = j.value("emission_time_t0", 0.0);
    cfg.true_range = j.value("true_range", 150.0);
    cfg.rng_seed = j.value("rng_seed", default_rng_seed);

    if (auto it = j.find("mode_frequencies"); it != j.end()) {
        if (!it->is_array()) throw std::invalid_argument("config: mode_frequencies must be an array");
        cfg.mode_frequencies.reserve(it->size());
        for (const auto& row : *it) {
            if (!row.is_array() || row.size() != 3)
                throw std::invalid_argument("config: each mode_frequencies entry must be [w1, w2, w3]");
            cfg.mode_frequencies.push_back(
                {row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
        }
    } else if (cfg.num_modes_M >= 1 && cfg.pump_frequency_w0 > 0.0) {
        cfg.mode_frequencies = uniform_mode_table(cfg.num_modes_M, cfg.pump_frequency_w0);
    }
    return cfg;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open \"" + path + "\"");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["num_modes_M"] = cfg.num_modes_M;
    j["noise_modes_MB"] = cfg.noise_modes_MB;
    j["noise_mean_NB"] = cfg.noise_mean_NB;
    j["reflectivity_eta"] = cfg.reflectivity_eta;
    j["trials_m"] = cfg.trials_m;
    j["pump_frequency_w0"] = cfg.pump_frequency_w0;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ModeTriple& t : cfg.mode_frequencies) rows.push_back({t.w1, t.w2, t.w3});
    j["mode_frequencies"] = std::move(rows);
    j["coincidence_window_dt"] = cfg.coincidence_window_dt;
    j["generation_jitter"] = cfg.generation_jitter;
    j["energy_tolerance"] = cfg.energy_tolerance;
    j["emission_time_t0"] = cfg.emission_time_t0;
    j["true_range"] = cfg.true_range;
    j["rng_seed"] = cfg.rng_seed;
    return j.dump(2) + "\n";
}

}  // namespace qi
