// lab.hpp — batch experiment orchestration: run configuration, temperature
// grids, sweep records, CSV/manifest emission, comparison metrics, and the
// command-line front end.

#pragma once

#include "dimerlab/circuit.hpp"
#include "dimerlab/dimer.hpp"
#include "dimerlab/vqt.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dimerlab {

// Configuration problems exit the CLI with status 2; everything else is a
// runtime failure (status 3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double t_min = 1.0;
    double t_max = 300.0;
    int points = 31;

    std::vector<double> values() const;
    void validate() const;
};

struct RunConfig {
    DimerParams dimer;
    GridSpec grid;
    int ansatz_layers = 4;
    std::string optimizer = "cobyla";
    int max_evals = 5000;
    int repetitions = 0;   // 0 = automatic: 1 noiseless, 30 noisy
    NoiseModel noise = NoiseModel::off();
    std::uint64_t master_seed = 7;
    std::int64_t shots = 0;   // 0 = exact expectation values
    bool emit_points = false;

    int resolved_repetitions() const { return repetitions > 0 ? repetitions : (noise.enabled ? 30 : 1); }
    VqtConfig vqt_config() const;
    void validate() const;

    nlohmann::json to_json() const;
    // Accepts either a bare config document or a manifest containing one
    // under "config". Unknown keys are rejected by name.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path_or_default);
};

// One CSV row. Core columns are always present; extraction columns are
// emitted only when has_extraction is set.
struct SweepRecord {
    double t_kelvin = 0.0;
    double ergotropy_norm_mean = 0.0, ergotropy_norm_std = 0.0;
    double discord_mean = 0.0, discord_std = 0.0;
    double susceptibility_mean = 0.0, susceptibility_std = 0.0;
    double cost_mean = 0.0, cost_std = 0.0;
    double n_evals_mean = 0.0;
    bool has_extraction = false;
    Vec4 pop_mean = Vec4::Zero();
    Vec4 pop_std = Vec4::Zero();
    double fidelity_mean = 0.0, fidelity_std = 0.0;
    double delta_e_mean = 0.0, delta_e_std = 0.0;
    double delta_sigma_mean = 0.0, delta_sigma_std = 0.0;
    double delta_sigma_abs_mean = 0.0;
    double ergotropy_oracle_kelvin = 0.0;
};

struct ReferenceCurve {
    std::vector<std::pair<double, double>> rows;   // (T_K, normalized ergotropy)
    std::string source;

    void validate() const;
    static ReferenceCurve load_csv(const std::string& path);
};

// Mean absolute difference of normalized ergotropy after a nearest-T join
// (maximum grid gap 1 K).
double avg_error_accumulation(const ReferenceCurve& ref,
                              const std::vector<std::pair<double, double>>& sim);

// Mean per-point optimizer evaluation count.
double avg_function_evaluations(const std::vector<SweepRecord>& records);

std::string format_double(double v);

void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(const std::string& path);

void write_reference_csv(const std::string& path,
                         const std::vector<std::pair<double, double>>& rows);

// Resolve the worker count: an explicit request wins, otherwise hardware
// concurrency capped by the DIMERLAB_THREADS environment variable.
int resolve_threads(int requested);

int cli_main(int argc, const char* const* argv);

}  // namespace dimerlab
