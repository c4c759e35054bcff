#include "dimerlab/lab.hpp"

#include "dimerlab/extraction.hpp"
#include "dimerlab/seeds.hpp"
#include "dimerlab/simulator.hpp"
#include "dimerlab/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace dimerlab {

namespace fs = std::filesystem;

// ----------------------------- configuration --------------------------------

void GridSpec::validate() const {
    if (!(t_min >= kTMin))
        throw ConfigError("grid: t_min must be >= " + std::to_string(kTMin) + " K");
    if (!(t_max >= t_min)) throw ConfigError("grid: t_max must be >= t_min");
    if (points < 1) throw ConfigError("grid: points must be >= 1");
    if (points == 1 && t_max != t_min) throw ConfigError("grid: a single point needs t_min == t_max");
}

std::vector<double> GridSpec::values() const {
    validate();
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = t_min;
        return out;
    }
    const double step = (t_max - t_min) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) out[i] = t_min + step * i;
    out.back() = t_max;
    return out;
}

void RunConfig::validate() const {
    try {
        dimer.validate();
        noise.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
    grid.validate();
    if (ansatz_layers < 1) throw ConfigError("ansatz_layers must be >= 1");
    if (max_evals < 1) throw ConfigError("max_evals must be >= 1");
    if (repetitions < 0) throw ConfigError("repetitions must be >= 0 (0 = automatic)");
    if (shots < 0) throw ConfigError("shots must be >= 0 (0 = exact)");
    optimizer_from_string(optimizer);
}

VqtConfig RunConfig::vqt_config() const {
    VqtConfig cfg;
    cfg.optimizer = optimizer_from_string(optimizer);
    cfg.max_evals = max_evals;
    cfg.ansatz.layers = ansatz_layers;
    cfg.noise = noise;
    return cfg;
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (known.find(key) == known.end())
            throw ConfigError("unknown configuration key '" + scope + key + "'");
    }
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["dimer"] = {{"j_kelvin", dimer.j_kelvin},
                  {"g_factor", dimer.g_factor},
                  {"b_tesla", dimer.b_tesla},
                  {"mu_b_over_kb", dimer.mu_b_over_kb}};
    j["grid"] = {{"t_min", grid.t_min}, {"t_max", grid.t_max}, {"points", grid.points}};
    j["ansatz_layers"] = ansatz_layers;
    j["optimizer"] = optimizer;
    j["max_evals"] = max_evals;
    j["repetitions"] = resolved_repetitions();
    j["noise"] = noise.enabled ? nlohmann::json(noise.to_json()) : nlohmann::json("off");
    j["master_seed"] = master_seed;
    j["shots"] = shots > 0 ? nlohmann::json(shots) : nlohmann::json("exact");
    j["emit_points"] = emit_points;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    // A manifest wraps the effective config under "config"; accept both so a
    // manifest can be re-run directly.
    const nlohmann::json& j =
        (doc.contains("config") && doc.contains("version")) ? doc.at("config") : doc;

    RunConfig cfg;
    try {
        reject_unknown(j, {"dimer", "grid", "ansatz_layers", "optimizer", "max_evals",
                           "repetitions", "noise", "master_seed", "shots", "emit_points"},
                       "");
        if (j.contains("dimer")) {
            const auto& d = j.at("dimer");
            reject_unknown(d, {"j_kelvin", "g_factor", "b_tesla", "mu_b_over_kb"}, "dimer.");
            if (d.contains("j_kelvin")) cfg.dimer.j_kelvin = d.at("j_kelvin").get<double>();
            if (d.contains("g_factor")) cfg.dimer.g_factor = d.at("g_factor").get<double>();
            if (d.contains("b_tesla")) cfg.dimer.b_tesla = d.at("b_tesla").get<double>();
            if (d.contains("mu_b_over_kb"))
                cfg.dimer.mu_b_over_kb = d.at("mu_b_over_kb").get<double>();
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            reject_unknown(g, {"t_min", "t_max", "points"}, "grid.");
            if (g.contains("t_min")) cfg.grid.t_min = g.at("t_min").get<double>();
            if (g.contains("t_max")) cfg.grid.t_max = g.at("t_max").get<double>();
            if (g.contains("points")) cfg.grid.points = g.at("points").get<int>();
        }
        if (j.contains("ansatz_layers")) cfg.ansatz_layers = j.at("ansatz_layers").get<int>();
        if (j.contains("optimizer")) cfg.optimizer = j.at("optimizer").get<std::string>();
        if (j.contains("max_evals")) cfg.max_evals = j.at("max_evals").get<int>();
        if (j.contains("repetitions")) cfg.repetitions = j.at("repetitions").get<int>();
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            if (n.is_string()) {
                const std::string mode = n.get<std::string>();
                if (mode == "off")
                    cfg.noise = NoiseModel::off();
                else if (mode == "on" || mode == "default")
                    cfg.noise = NoiseModel::backend_defaults(true);
                else
                    throw ConfigError("noise: expected 'on', 'off', or a model document");
            } else {
                cfg.noise = NoiseModel::from_json(n);
            }
        }
        if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("shots")) {
            const auto& s = j.at("shots");
            if (s.is_string()) {
                if (s.get<std::string>() != "exact")
                    throw ConfigError("shots: expected a count or 'exact'");
                cfg.shots = 0;
            } else {
                cfg.shots = s.get<std::int64_t>();
            }
        }
        if (j.contains("emit_points")) cfg.emit_points = j.at("emit_points").get<bool>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("malformed configuration: ") + ex.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path_or_default) {
    if (path_or_default.empty() || path_or_default == "default") {
        RunConfig cfg;
        cfg.validate();
        return cfg;
    }
    std::ifstream in(path_or_default);
    if (!in) throw ConfigError("cannot open config file '" + path_or_default + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ConfigError("cannot parse config file '" + path_or_default + "': " + ex.what());
    }
    return from_json(j);
}

// ----------------------------- reference curves ------------------------------

void ReferenceCurve::validate() const {
    if (rows.empty()) throw ConfigError("reference curve is empty");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first <= rows[i - 1].first)
            throw ConfigError("reference curve temperatures must ascend");
        if (rows[i].second < 0.0 || rows[i].second > 1.05)
            throw ConfigError("reference curve value outside [0, 1.05] at T = " +
                              std::to_string(rows[i].first));
    }
}

ReferenceCurve ReferenceCurve::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open reference CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("reference CSV '" + path + "' is empty");
    if (line == "T_K,ergotropy_norm\r") line.pop_back();
    if (line != "T_K,ergotropy_norm")
        throw ConfigError("reference CSV header must be 'T_K,ergotropy_norm'");
    ReferenceCurve curve;
    curve.source = path;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("reference CSV row without a comma: '" + line + "'");
        curve.rows.emplace_back(std::stod(line.substr(0, comma)),
                                std::stod(line.substr(comma + 1)));
    }
    curve.validate();
    return curve;
}

// ----------------------------- metrics ---------------------------------------

double avg_error_accumulation(const ReferenceCurve& ref,
                              const std::vector<std::pair<double, double>>& sim) {
    ref.validate();
    if (sim.empty()) throw std::invalid_argument("avg_error_accumulation: empty simulation curve");
    double acc = 0.0;
    for (const auto& [t, value] : ref.rows) {
        double best_gap = std::numeric_limits<double>::infinity();
        double best_value = 0.0;
        for (const auto& [ts, vs] : sim) {
            const double gap = std::abs(ts - t);
            if (gap < best_gap) {
                best_gap = gap;
                best_value = vs;
            }
        }
        if (best_gap > 1.0)
            throw std::invalid_argument("avg_error_accumulation: no simulated point within 1 K of T = " +
                                        std::to_string(t));
        acc += std::abs(value - best_value);
    }
    return acc / static_cast<double>(ref.rows.size());
}

double avg_function_evaluations(const std::vector<SweepRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("avg_function_evaluations: no records");
    double acc = 0.0;
    for (const SweepRecord& r : records) acc += r.n_evals_mean;
    return acc / static_cast<double>(records.size());
}

// ----------------------------- CSV -------------------------------------------

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

namespace {

const char* kCsvHeader =
    "T_K,ergotropy_norm_mean,ergotropy_norm_std,discord_mean,discord_std,"
    "susceptibility_mean,susceptibility_std,cost_mean,cost_std,n_evals_mean,"
    "pop00_mean,pop00_std,pop01_mean,pop01_std,pop10_mean,pop10_std,pop11_mean,pop11_std,"
    "fidelity_mean,fidelity_std,delta_e_mean,delta_e_std,delta_sigma_mean,delta_sigma_std,"
    "delta_sigma_abs_mean,ergotropy_oracle_K";

}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_sweep_csv: cannot open '" + path + "'");
    out << kCsvHeader << "\n";
    for (const SweepRecord& r : records) {
        out << format_double(r.t_kelvin) << ',' << format_double(r.ergotropy_norm_mean) << ','
            << format_double(r.ergotropy_norm_std) << ',' << format_double(r.discord_mean) << ','
            << format_double(r.discord_std) << ',' << format_double(r.susceptibility_mean) << ','
            << format_double(r.susceptibility_std) << ',' << format_double(r.cost_mean) << ','
            << format_double(r.cost_std) << ',' << format_double(r.n_evals_mean) << ',';
        if (r.has_extraction) {
            for (int k = 0; k < 4; ++k)
                out << format_double(r.pop_mean(k)) << ',' << format_double(r.pop_std(k)) << ',';
            out << format_double(r.fidelity_mean) << ',' << format_double(r.fidelity_std) << ','
                << format_double(r.delta_e_mean) << ',' << format_double(r.delta_e_std) << ','
                << format_double(r.delta_sigma_mean) << ',' << format_double(r.delta_sigma_std)
                << ',' << format_double(r.delta_sigma_abs_mean) << ','
                << format_double(r.ergotropy_oracle_kelvin);
        } else {
            out << ",,,,,,,,,,,,,,,";
        }
        out << "\n";
    }
}

std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_sweep_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_sweep_csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw std::runtime_error("read_sweep_csv: unexpected header");

    std::vector<SweepRecord> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        while (cells.size() < 26) cells.push_back("");
        const auto num = [&](std::size_t k) { return cells[k].empty() ? 0.0 : std::stod(cells[k]); };
        SweepRecord r;
        r.t_kelvin = num(0);
        r.ergotropy_norm_mean = num(1);
        r.ergotropy_norm_std = num(2);
        r.discord_mean = num(3);
        r.discord_std = num(4);
        r.susceptibility_mean = num(5);
        r.susceptibility_std = num(6);
        r.cost_mean = num(7);
        r.cost_std = num(8);
        r.n_evals_mean = num(9);
        r.has_extraction = !cells[10].empty();
        for (int k = 0; k < 4; ++k) {
            r.pop_mean(k) = num(10 + 2 * k);
            r.pop_std(k) = num(11 + 2 * k);
        }
        r.fidelity_mean = num(18);
        r.fidelity_std = num(19);
        r.delta_e_mean = num(20);
        r.delta_e_std = num(21);
        r.delta_sigma_mean = num(22);
        r.delta_sigma_std = num(23);
        r.delta_sigma_abs_mean = num(24);
        r.ergotropy_oracle_kelvin = num(25);
        out.push_back(r);
    }
    return out;
}

void write_reference_csv(const std::string& path,
                         const std::vector<std::pair<double, double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_reference_csv: cannot open '" + path + "'");
    out << "T_K,ergotropy_norm\n";
    for (const auto& [t, v] : rows) out << format_double(t) << ',' << format_double(v) << "\n";
}

// ----------------------------- drivers ---------------------------------------

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("DIMERLAB_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (const std::exception&) {
            throw ConfigError("DIMERLAB_THREADS is not a number");
        }
    }
    return n;
}

namespace {

std::vector<SweepRecord> oracle_records(const RunConfig& cfg) {
    const auto points = oracle_sweep(cfg.dimer, cfg.grid.values());
    std::vector<SweepRecord> records;
    records.reserve(points.size());
    for (const ThermalPoint& pt : points) {
        SweepRecord r;
        r.t_kelvin = pt.t_kelvin;
        r.ergotropy_norm_mean = pt.ergotropy_normalized;
        r.discord_mean = pt.discord;
        r.susceptibility_mean = pt.susceptibility;
        r.cost_mean = -pt.log_z;   // the free-energy optimum at this temperature
        r.n_evals_mean = 0.0;
        records.push_back(r);
    }
    return records;
}

std::vector<SweepRecord> vqt_records(const RunConfig& cfg, int threads,
                                     std::vector<VqtSweepPoint>* raw_out) {
    const auto points = vqt_sweep(cfg.grid.values(), cfg.vqt_config(), cfg.dimer,
                                  cfg.resolved_repetitions(), cfg.master_seed, threads);
    std::vector<SweepRecord> records;
    records.reserve(points.size());
    for (const VqtSweepPoint& pt : points) {
        SweepRecord r;
        r.t_kelvin = pt.t_kelvin;
        r.ergotropy_norm_mean = pt.ergotropy_norm_mean;
        r.ergotropy_norm_std = pt.ergotropy_norm_std;
        r.discord_mean = pt.discord_mean;
        r.discord_std = pt.discord_std;
        r.susceptibility_mean = pt.susceptibility_mean;
        r.susceptibility_std = pt.susceptibility_std;
        r.cost_mean = pt.cost_mean;
        r.cost_std = pt.cost_std;
        r.n_evals_mean = pt.n_evals_mean;
        records.push_back(r);
    }
    if (raw_out) *raw_out = points;
    return records;
}

struct Stats {
    double mean = 0.0;
    double std_dev = 0.0;
};

Stats stats_of(const std::vector<double>& values) {
    Stats s;
    if (values.empty()) return s;
    for (const double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) var += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(std::max(var / static_cast<double>(values.size()), 0.0));
    return s;
}

// Fold per-repetition extraction rows of one temperature into the record.
void fold_extraction(SweepRecord& record, const std::vector<ExtractionRow>& rows) {
    record.has_extraction = true;
    for (int k = 0; k < 4; ++k) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (const ExtractionRow& row : rows) vals.push_back(row.populations(k));
        const Stats s = stats_of(vals);
        record.pop_mean(k) = s.mean;
        record.pop_std(k) = s.std_dev;
    }
    const auto collect = [&](const auto& get) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (const ExtractionRow& row : rows) vals.push_back(get(row));
        return stats_of(vals);
    };
    Stats s = collect([](const ExtractionRow& r) { return r.fidelity; });
    record.fidelity_mean = s.mean;
    record.fidelity_std = s.std_dev;
    s = collect([](const ExtractionRow& r) { return r.delta_e_kelvin; });
    record.delta_e_mean = s.mean;
    record.delta_e_std = s.std_dev;
    s = collect([](const ExtractionRow& r) { return r.delta_sigma_kelvin; });
    record.delta_sigma_mean = s.mean;
    record.delta_sigma_std = s.std_dev;
    s = collect([](const ExtractionRow& r) { return std::abs(r.delta_sigma_kelvin); });
    record.delta_sigma_abs_mean = s.mean;
    s = collect([](const ExtractionRow& r) { return r.ergotropy_oracle_kelvin; });
    record.ergotropy_oracle_kelvin = s.mean;
}

void maybe_sample_populations(ExtractionRow& row, const RunConfig& cfg, std::size_t t_index,
                              int rep) {
    if (cfg.shots <= 0) return;
    const std::uint64_t seed =
        derive_seed(splitmix64(cfg.master_seed ^ 0x53484F54ULL), t_index, rep);
    const auto counts = sample_counts(row.populations, cfg.shots, seed);
    for (int k = 0; k < 4; ++k)
        row.populations(k) = static_cast<double>(counts[k]) / static_cast<double>(cfg.shots);
}

void write_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                    int threads, double wall_time_s, const nlohmann::json& metrics,
                    const std::string& csv_path) {
    nlohmann::json m;
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = cfg.to_json();
    m["threads"] = threads;
    m["seed_derivation"] =
        "seed(t_index, rep) = splitmix64(splitmix64(master ^ splitmix64(t_index + 1)) ^ "
        "splitmix64(~rep))";
    m["noise_model"] = cfg.noise.to_json();
    m["wall_time_s"] = wall_time_s;
    if (!metrics.is_null()) m["metrics"] = metrics;
    m["outputs"] = {{"sweep_csv", csv_path}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_manifest: cannot open '" + path + "'");
    out << m.dump(2) << "\n";
}

void write_points_json(const std::string& path, const std::vector<VqtSweepPoint>& points,
                       const RunConfig& cfg) {
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        nlohmann::json entry;
        entry["t_kelvin"] = points[i].t_kelvin;
        nlohmann::json reps = nlohmann::json::array();
        for (std::size_t rep = 0; rep < points[i].reps.size(); ++rep) {
            const VqtResult& r = points[i].reps[rep];
            reps.push_back({{"seed", derive_seed(cfg.master_seed, i, rep)},
                            {"cost", r.cost},
                            {"n_evals", r.n_evals},
                            {"converged", r.converged},
                            {"ergotropy_norm",
                             2.0 * discord_from_susceptibility(reduced_susceptibility(r.rho))}});
        }
        entry["reps"] = reps;
        doc.push_back(entry);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_points_json: cannot open '" + path + "'");
    out << doc.dump(2) << "\n";
}

struct CommonArgs {
    std::string config_path = "default";
    std::string out_dir = "out";
    std::string noise_override;   // "", "on", or "off"
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::int64_t shots = -1;      // -1 = keep config value
    int threads = -1;
    std::string source = "oracle";
    std::string reference_out;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool with_source = false) {
    cmd->add_option("--config", args.config_path,
                    "Config JSON (or a manifest), or 'default'");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--noise", args.noise_override, "Override noise mode: on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--seed", args.seed, "Override the master seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--shots", args.shots, "Sample measured populations with this many shots");
    cmd->add_option("--threads", args.threads, "Worker threads (overrides DIMERLAB_THREADS)");
    if (with_source)
        cmd->add_option("--source", args.source, "States to push through the protocol")
            ->check(CLI::IsMember({"oracle", "vqt"}));
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    if (args.noise_override == "on") cfg.noise.enabled = true;
    if (args.noise_override == "off") cfg.noise.enabled = false;
    if (args.seed_set) cfg.master_seed = args.seed;
    if (args.shots >= 0) cfg.shots = args.shots;
    cfg.validate();
    return cfg;
}

// The low-temperature population aggregate is only defined when the grid
// reaches below the cutoff.
void attach_low_t_average(nlohmann::json& metrics, const std::vector<ExtractionRow>& rows) {
    bool any = false;
    for (const ExtractionRow& row : rows) any = any || row.t_kelvin < 100.0;
    if (!any) return;
    const Vec4 avg = average_populations_below(rows, 100.0);
    metrics["avg_populations_below_100K"] = {avg(0), avg(1), avg(2), avg(3)};
}

int run_sweep_command(const std::string& command, const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig cfg = resolve_config(args);
    const int threads = resolve_threads(args.threads);

    std::vector<SweepRecord> records;
    std::vector<VqtSweepPoint> raw;
    nlohmann::json metrics;

    if (command == "oracle") {
        records = oracle_records(cfg);
    } else if (command == "vqt") {
        records = vqt_records(cfg, threads, cfg.emit_points ? &raw : nullptr);
    } else if (command == "extract") {
        if (args.source == "oracle") {
            records = oracle_records(cfg);
            const Mat4c h = build_hamiltonian(cfg.dimer);
            const auto grid = cfg.grid.values();
            std::vector<ExtractionRow> all_rows;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                ExtractionRow row =
                    run_extraction(gibbs_state(h, grid[i]), cfg.noise, cfg.dimer, grid[i]);
                maybe_sample_populations(row, cfg, i, 0);
                fold_extraction(records[i], {row});
                all_rows.push_back(row);
            }
            attach_low_t_average(metrics, all_rows);
        } else {
            records = vqt_records(cfg, threads, &raw);
            std::vector<ExtractionRow> all_rows;
            for (std::size_t i = 0; i < raw.size(); ++i) {
                std::vector<ExtractionRow> rows;
                for (std::size_t rep = 0; rep < raw[i].reps.size(); ++rep) {
                    ExtractionRow row = run_extraction(raw[i].reps[rep].rho, cfg.noise,
                                                       cfg.dimer, raw[i].t_kelvin);
                    maybe_sample_populations(row, cfg, i, static_cast<int>(rep));
                    rows.push_back(row);
                    all_rows.push_back(row);
                }
                fold_extraction(records[i], rows);
            }
            attach_low_t_average(metrics, all_rows);
        }
    } else {
        throw std::logic_error("run_sweep_command: unknown command");
    }

    bool variational = false;
    for (const SweepRecord& r : records) variational = variational || r.n_evals_mean > 0.0;
    if (variational) metrics["avg_function_evaluations"] = avg_function_evaluations(records);

    fs::create_directories(args.out_dir);
    const std::string csv_path = (fs::path(args.out_dir) / "sweep.csv").string();
    write_sweep_csv(csv_path, records);
    if (cfg.emit_points && !raw.empty())
        write_points_json((fs::path(args.out_dir) / "points.json").string(), raw, cfg);
    if (!args.reference_out.empty()) {
        std::vector<std::pair<double, double>> rows;
        for (const SweepRecord& r : records) rows.emplace_back(r.t_kelvin, r.ergotropy_norm_mean);
        write_reference_csv(args.reference_out, rows);
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest((fs::path(args.out_dir) / "manifest.json").string(), command, cfg, threads,
                   wall, metrics, csv_path);

    if (metrics.contains("avg_populations_below_100K")) {
        const auto& avg = metrics["avg_populations_below_100K"];
        std::cout << "avg populations (T < 100 K): |00> " << format_double(avg[0].get<double>())
                  << "  |01> " << format_double(avg[1].get<double>()) << "  |10> "
                  << format_double(avg[2].get<double>()) << "  |11> "
                  << format_double(avg[3].get<double>()) << "\n";
    }
    std::cout << command << ": wrote " << records.size() << " rows to " << csv_path << "\n";
    return 0;
}

std::vector<std::pair<double, double>> curve_from_csv(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw ConfigError("cannot open CSV '" + path + "'");
    std::string header;
    std::getline(probe, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    probe.close();
    if (header == "T_K,ergotropy_norm") {
        const ReferenceCurve curve = ReferenceCurve::load_csv(path);
        return curve.rows;
    }
    std::vector<std::pair<double, double>> rows;
    for (const SweepRecord& r : read_sweep_csv(path))
        rows.emplace_back(r.t_kelvin, r.ergotropy_norm_mean);
    return rows;
}

int run_compare(const std::string& ref_path, const std::string& sim_path,
                const std::string& out_dir) {
    ReferenceCurve ref;
    ref.rows = curve_from_csv(ref_path);
    ref.source = ref_path;
    ref.validate();
    const auto sim = curve_from_csv(sim_path);
    const double avg_error = avg_error_accumulation(ref, sim);

    nlohmann::json metrics;
    metrics["reference"] = ref_path;
    metrics["simulation"] = sim_path;
    metrics["avg_error_accumulation"] = avg_error;
    std::cout << "reference: " << ref_path << "\n";
    std::cout << "avg_error_accumulation = " << format_double(avg_error) << "\n";

    std::ifstream probe(sim_path);
    std::string header;
    std::getline(probe, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "T_K,ergotropy_norm") {
        const double avg_evals = avg_function_evaluations(read_sweep_csv(sim_path));
        metrics["avg_function_evaluations"] = avg_evals;
        std::cout << "avg_function_evaluations = " << format_double(avg_evals) << "\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "metrics.json", std::ios::binary);
        out << metrics.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"dimerlab - two-qubit battery simulation laboratory"};
    app.require_subcommand(1);

    CommonArgs oracle_args, vqt_args, extract_args, noise_args;
    std::string ref_path, sim_path, compare_out;

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "Exact reference curves over the grid");
    add_common_options(oracle_cmd, oracle_args);
    oracle_cmd->add_option("--reference-out", oracle_args.reference_out,
                           "Also write a reference-format CSV (T_K,ergotropy_norm)");

    CLI::App* vqt_cmd = app.add_subcommand("vqt", "Variational thermal-state sweep");
    add_common_options(vqt_cmd, vqt_args);

    CLI::App* extract_cmd =
        app.add_subcommand("extract", "Work-extraction protocol over oracle or VQT states");
    add_common_options(extract_cmd, extract_args, true);

    CLI::App* compare_cmd = app.add_subcommand("compare", "Metrics of a sweep vs a reference");
    compare_cmd->add_option("--ref", ref_path, "Reference CSV")->required();
    compare_cmd->add_option("--sim", sim_path, "Simulated CSV")->required();
    compare_cmd->add_option("--out", compare_out, "Directory for metrics.json");

    CLI::App* noise_cmd = app.add_subcommand("noise-info", "Print the resolved noise model");
    add_common_options(noise_cmd, noise_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (oracle_cmd->parsed()) return run_sweep_command("oracle", oracle_args);
        if (vqt_cmd->parsed()) return run_sweep_command("vqt", vqt_args);
        if (extract_cmd->parsed()) return run_sweep_command("extract", extract_args);
        if (compare_cmd->parsed()) return run_compare(ref_path, sim_path, compare_out);
        if (noise_cmd->parsed()) {
            const RunConfig cfg = resolve_config(noise_args);
            std::cout << cfg.noise.to_json().dump(2) << "\n";
            return 0;
        }
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace dimerlab
