// vqt.hpp — Variational Quantum Thermalizer: a softmax latent distribution
// over the computational basis pushed through a layered rotation/CNOT
// ansatz, minimizing the relative free energy beta*tr(rho H) - S(rho) with a
// derivative-free optimizer.

#pragma once

#include "dimerlab/circuit.hpp"
#include "dimerlab/dimer.hpp"
#include "dimerlab/optimize.hpp"
#include "dimerlab/qmatrix.hpp"

#include <cstdint>
#include <vector>

namespace dimerlab {

struct AnsatzConfig {
    int layers = 4;   // each layer: rx, ry, rz on both qubits, then cx(0 -> 1)

    void validate() const {
        if (layers < 1) throw std::invalid_argument("AnsatzConfig: layers must be >= 1");
    }
};

inline int ansatz_param_count(const AnsatzConfig& cfg) {
    cfg.validate();
    return cfg.layers * 2 * 3;
}

// The latent carries one unconstrained logit per basis state (softmax
// weights, so any diagonal spectrum is representable); a shared logit offset
// is a gauge freedom.
struct VqtParams {
    Eigen::Vector4d theta;   // latent logits, unconstrained
    Eigen::VectorXd phi;     // rotation angles, radians
};

enum class OptimizerKind { nelder_mead, cobyla };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct VqtConfig {
    OptimizerKind optimizer = OptimizerKind::cobyla;
    int max_evals = 5000;
    AnsatzConfig ansatz;
    NoiseModel noise = NoiseModel::off();
    OptimOptions optim;   // rho_begin/rho_end and stop tolerances

    void validate() const {
        if (max_evals < 1) throw std::invalid_argument("VqtConfig: max_evals must be >= 1");
        ansatz.validate();
        noise.validate();
    }
};

struct VqtResult {
    VqtParams params;
    DensityMatrix rho{Mat4c::Identity() / 4.0};
    double cost = 0.0;
    int n_evals = 0;
    bool converged = false;
};

// Aggregates over the repetitions of one grid temperature.
struct VqtSweepPoint {
    double t_kelvin = 0.0;
    std::vector<VqtResult> reps;
    double ergotropy_norm_mean = 0.0, ergotropy_norm_std = 0.0;
    double discord_mean = 0.0, discord_std = 0.0;
    double susceptibility_mean = 0.0, susceptibility_std = 0.0;
    double cost_mean = 0.0, cost_std = 0.0;
    double n_evals_mean = 0.0;
};

// diag(softmax(theta)) in the computational basis.
Mat4c latent_state(const Eigen::Vector4d& theta);

// Layered circuit: rx, ry, rz on each qubit then cx(0 -> 1), per layer.
Circuit ansatz_circuit(const Eigen::VectorXd& phi, const AnsatzConfig& cfg);

// rho = sum_x p_theta(x) * run(U(phi), |x><x|) over the four basis states;
// channel linearity makes this exact in both noiseless and noisy modes.
DensityMatrix prepare_state(const VqtParams& params, const AnsatzConfig& cfg,
                            const NoiseModel& nm);

// Relative free energy of an explicit state.
double free_energy_cost(const DensityMatrix& rho, double t_kelvin, const Mat4c& h);

// Relative free energy of the ansatz state at the given parameters.
double vqt_cost(const VqtParams& params, double t_kelvin, const Mat4c& h,
                const AnsatzConfig& cfg, const NoiseModel& nm);

// One optimization run: theta starts at zero, phi uniform in [0, 2*pi) from
// the seed, then the configured optimizer minimizes vqt_cost.
VqtResult optimize_point(double t_kelvin, const VqtConfig& cfg, const DimerParams& p,
                         std::uint64_t seed);

// repetitions runs per temperature with seeds derived from (master_seed,
// grid index, repetition); tasks may fan out over threads, results are
// assembled in grid order.
std::vector<VqtSweepPoint> vqt_sweep(const std::vector<double>& t_grid, const VqtConfig& cfg,
                                     const DimerParams& p, int repetitions,
                                     std::uint64_t master_seed, int threads = 1);

}  // namespace dimerlab
