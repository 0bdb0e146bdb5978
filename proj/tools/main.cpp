#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using entb92::cli::Format;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string output;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string format;
};

// The format default depends on the subcommand, so an empty value is resolved
// after parsing.
void add_common(CLI::App* cmd, Common& common, const std::string& default_format) {
    cmd->callback([&common, default_format] {
        if (common.format.empty()) common.format = default_format;
    });
    cmd->add_option("-o,--output", common.output, "Write the result to this file (default: stdout)");
    cmd->add_option("--seed", common.seed, "Random seed");
    cmd->add_option("--workers", common.workers, "Maximum worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

Format format_of(const Common& c) { return c.format == "json" ? Format::Json : Format::Csv; }

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << contents;
    if (!f) throw std::runtime_error("failed writing " + path);
}

// Writes the primary output (stdout when no path is set), any extra files, and
// a manifest next to the primary output listing every file with its checksum.
void emit(const std::string& subcommand, const Common& common, const nlohmann::json& parameters,
          std::optional<std::uint64_t> seed, const std::string& primary,
          std::vector<entb92::cli::EmittedFile> extra = {}) {
    if (common.output.empty()) {
        std::cout << primary;
    } else {
        write_file(common.output, primary);
    }
    for (const auto& f : extra) write_file(f.path, f.contents);
    if (common.output.empty()) return;
    std::vector<entb92::cli::EmittedFile> files{{common.output, primary}};
    files.insert(files.end(), extra.begin(), extra.end());
    write_file(common.output + ".manifest.json",
               entb92::cli::manifest(subcommand, parameters, seed, files).dump(2) + "\n");
}

struct SimulateFlags {
    double theta_deg = 60.0;
    std::uint64_t rounds = 100000;
    double test_fraction = 0.5;
    double eta_a = 1.0;
    double eta_b = 1.0;
    double depol = 0.0;
    std::string attack = "none";
    double abort_threshold = 0.0;
    std::uint64_t chunk_size = 1 << 16;
    std::string config;
    std::string table_csv;
};

// Values from a JSON config file apply only to flags not given on the
// command line.
void apply_config_file(CLI::App* cmd, SimulateFlags& flags, Common& common) {
    if (flags.config.empty()) return;
    std::ifstream in(flags.config);
    if (!in) throw ConfigError("cannot read config file " + flags.config);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

    const std::map<std::string, std::function<void(const nlohmann::json&)>> setters{
        {"theta-deg", [&](const nlohmann::json& v) { flags.theta_deg = v.get<double>(); }},
        {"rounds", [&](const nlohmann::json& v) { flags.rounds = v.get<std::uint64_t>(); }},
        {"test-fraction", [&](const nlohmann::json& v) { flags.test_fraction = v.get<double>(); }},
        {"eta-a", [&](const nlohmann::json& v) { flags.eta_a = v.get<double>(); }},
        {"eta-b", [&](const nlohmann::json& v) { flags.eta_b = v.get<double>(); }},
        {"depol", [&](const nlohmann::json& v) { flags.depol = v.get<double>(); }},
        {"attack", [&](const nlohmann::json& v) { flags.attack = v.get<std::string>(); }},
        {"abort-threshold", [&](const nlohmann::json& v) { flags.abort_threshold = v.get<double>(); }},
        {"chunk-size", [&](const nlohmann::json& v) { flags.chunk_size = v.get<std::uint64_t>(); }},
        {"table-csv", [&](const nlohmann::json& v) { flags.table_csv = v.get<std::string>(); }},
        {"seed", [&](const nlohmann::json& v) { common.seed = v.get<std::uint64_t>(); }},
        {"workers", [&](const nlohmann::json& v) { common.workers = v.get<unsigned>(); }},
        {"output", [&](const nlohmann::json& v) { common.output = v.get<std::string>(); }},
        {"format", [&](const nlohmann::json& v) { common.format = v.get<std::string>(); }},
    };
    for (const auto& [key, value] : j.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        if (cmd->get_option("--" + key)->count() > 0) continue;
        try {
            it->second(value);
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    }
}

entb92::SessionConfig session_config(const SimulateFlags& f, const Common& common) {
    entb92::SessionConfig c;
    try {
        c.angle = entb92::ProtocolAngle::from_degrees(f.theta_deg);
        c.n_rounds = f.rounds;
        c.test_fraction = f.test_fraction;
        c.channel = {f.eta_a, f.eta_b, f.depol, entb92::attacker_from_string(f.attack)};
        c.seed = common.seed;
        c.abort_threshold = f.abort_threshold;
        c.chunk_size = f.chunk_size;
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (common.workers < 1) throw ConfigError("--workers must be at least 1");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement-based B92 key distribution: analytic curves, thresholds and simulation"};
    app.require_subcommand(1);

    Common common;

    auto* curve_cmd = app.add_subcommand("curve", "CH value of the protocol settings and the maximal CH value vs theta");
    entb92::cli::CurveOptions curve_opts;
    curve_cmd->add_option("--points", curve_opts.points, "Interior grid points on (0, 90) degrees")->check(CLI::PositiveNumber);
    add_common(curve_cmd, common, "csv");

    auto* rate_cmd = app.add_subcommand("rate-curve", "Secure normalized rate at the optimal angle vs depolarization");
    entb92::cli::RateCurveOptions rate_opts;
    rate_cmd->add_option("--p-min", rate_opts.p_min, "Smallest depolarization probability");
    rate_cmd->add_option("--p-max", rate_opts.p_max, "Largest depolarization probability (at most 0.05)");
    rate_cmd->add_option("--points", rate_opts.points, "Number of grid points");
    add_common(rate_cmd, common, "csv");

    auto* thr_cmd = app.add_subcommand("thresholds", "Detection-efficiency and depolarization thresholds");
    add_common(thr_cmd, common, "json");

    auto* attack_cmd = app.add_subcommand("attack-demo", "CH value with and without the USD intercept-resend attack");
    entb92::cli::AttackDemoOptions attack_opts;
    attack_cmd->add_option("--points", attack_opts.points, "Interior grid points on (0, 90) degrees")->check(CLI::PositiveNumber);
    add_common(attack_cmd, common, "csv");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo protocol session");
    SimulateFlags sim;
    sim_cmd->add_option("--theta-deg", sim.theta_deg, "Source angle in degrees, strictly between 0 and 90");
    sim_cmd->add_option("--rounds", sim.rounds, "Number of rounds");
    sim_cmd->add_option("--test-fraction", sim.test_fraction, "Probability that Alice measures X");
    sim_cmd->add_option("--eta-a", sim.eta_a, "Alice detection efficiency");
    sim_cmd->add_option("--eta-b", sim.eta_b, "Bob detection efficiency");
    sim_cmd->add_option("--depol", sim.depol, "Depolarization probability on Bob's qubit");
    sim_cmd->add_option("--attack", sim.attack, "Attacker: none or usd");
    sim_cmd->add_option("--abort-threshold", sim.abort_threshold, "Abort when the CH estimate is at or below this");
    sim_cmd->add_option("--chunk-size", sim.chunk_size, "Rounds per work unit");
    sim_cmd->add_option("--config", sim.config, "JSON file with flag values (flags take precedence)");
    sim_cmd->add_option("--table-csv", sim.table_csv, "Also write the correlation table as CSV");
    add_common(sim_cmd, common, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? entb92::cli::kExitOk : entb92::cli::kExitConfigError;
    }

    try {
        if (curve_cmd->parsed()) {
            curve_opts.format = format_of(common);
            emit("curve", common, {{"points", curve_opts.points}, {"format", common.format}}, std::nullopt,
                 entb92::cli::curve(curve_opts));
        } else if (rate_cmd->parsed()) {
            rate_opts.format = format_of(common);
            std::string out;
            try {
                out = entb92::cli::rate_curve(rate_opts);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            emit("rate-curve", common,
                 {{"p_min", rate_opts.p_min}, {"p_max", rate_opts.p_max}, {"points", rate_opts.points},
                  {"format", common.format}},
                 std::nullopt, out);
        } else if (thr_cmd->parsed()) {
            emit("thresholds", common, {{"format", common.format}}, std::nullopt,
                 entb92::cli::thresholds(format_of(common)));
        } else if (attack_cmd->parsed()) {
            attack_opts.format = format_of(common);
            emit("attack-demo", common, {{"points", attack_opts.points}, {"format", common.format}}, std::nullopt,
                 entb92::cli::attack_demo(attack_opts));
        } else if (sim_cmd->parsed()) {
            apply_config_file(sim_cmd, sim, common);
            if (common.format != "csv" && common.format != "json") throw ConfigError("format must be csv or json");
            const entb92::SessionConfig config = session_config(sim, common);
            const auto result = entb92::cli::simulate(config, common.workers);
            std::vector<entb92::cli::EmittedFile> extra;
            if (!sim.table_csv.empty()) extra.push_back({sim.table_csv, result.table_csv});
            nlohmann::json params = to_json(config);
            params["workers"] = common.workers;
            params["format"] = common.format;
            emit("simulate", common, params, config.seed,
                 format_of(common) == Format::Json ? result.json : result.table_csv, extra);
            if (result.result.insufficient_statistics) {
                std::cerr << "simulate: insufficient statistics (a setting pair or the conclusive set is empty)\n";
                return entb92::cli::kExitInsufficientStatistics;
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return entb92::cli::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return entb92::cli::kExitFailure;
    }
    return entb92::cli::kExitOk;
}
