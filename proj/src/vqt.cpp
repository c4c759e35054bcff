#include "dimerlab/vqt.hpp"

#include "dimerlab/seeds.hpp"
#include "dimerlab/simulator.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

namespace dimerlab {

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "nelder_mead" || name == "nelder-mead") return OptimizerKind::nelder_mead;
    if (name == "cobyla") return OptimizerKind::cobyla;
    throw std::invalid_argument("optimizer_from_string: unknown optimizer '" + name + "'");
}

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::cobyla ? "cobyla" : "nelder_mead";
}

Mat4c latent_state(const Eigen::Vector4d& theta) {
    if (!theta.allFinite()) throw std::invalid_argument("latent_state: non-finite logits");
    const double shift = theta.maxCoeff();
    Eigen::Vector4d weights;
    for (int k = 0; k < 4; ++k) weights(k) = std::exp(theta(k) - shift);
    weights /= weights.sum();
    Mat4c rho = Mat4c::Zero();
    for (int k = 0; k < 4; ++k) rho(k, k) = weights(k);
    return rho;
}

Circuit ansatz_circuit(const Eigen::VectorXd& phi, const AnsatzConfig& cfg) {
    if (phi.size() != ansatz_param_count(cfg))
        throw std::invalid_argument("ansatz_circuit: expected " +
                                    std::to_string(ansatz_param_count(cfg)) + " angles, got " +
                                    std::to_string(phi.size()));
    Circuit c;
    c.gates.reserve(static_cast<std::size_t>(cfg.layers) * 7);
    int k = 0;
    for (int layer = 0; layer < cfg.layers; ++layer) {
        for (int q = 0; q < 2; ++q) {
            c.gates.push_back(Gate::rotation(GateKind::rx, q, phi(k++)));
            c.gates.push_back(Gate::rotation(GateKind::ry, q, phi(k++)));
            c.gates.push_back(Gate::rotation(GateKind::rz, q, phi(k++)));
        }
        c.gates.push_back(Gate::cx(0, 1));
    }
    return c;
}

namespace {

Mat4c prepare_state_raw(const VqtParams& params, const AnsatzConfig& cfg, const NoiseModel& nm) {
    const Mat4c latent = latent_state(params.theta);
    const Circuit transpiled = transpile(ansatz_circuit(params.phi, cfg), nm);
    Mat4c rho = Mat4c::Zero();
    for (int x = 0; x < 4; ++x) {
        const double weight = latent(x, x).real();
        if (weight <= 0.0) continue;
        Mat4c basis = Mat4c::Zero();
        basis(x, x) = 1.0;
        rho += weight * detail::run_raw(transpiled, basis, nm);
    }
    return rho;
}

double entropy_raw(const Mat4c& rho) {
    Eigen::SelfAdjointEigenSolver<Mat4c> solver(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double l = solver.eigenvalues()(k);
        if (l > 0.0) s -= l * std::log(l);
    }
    return std::max(s, 0.0);
}

}  // namespace

DensityMatrix prepare_state(const VqtParams& params, const AnsatzConfig& cfg,
                            const NoiseModel& nm) {
    return DensityMatrix(prepare_state_raw(params, cfg, nm));
}

double free_energy_cost(const DensityMatrix& rho, double t_kelvin, const Mat4c& h) {
    if (t_kelvin < kTMin)
        throw std::domain_error("free_energy_cost: temperature below supported minimum");
    return expectation(h, rho) / t_kelvin - von_neumann_entropy(rho);
}

double vqt_cost(const VqtParams& params, double t_kelvin, const Mat4c& h,
                const AnsatzConfig& cfg, const NoiseModel& nm) {
    if (t_kelvin < kTMin)
        throw std::domain_error("vqt_cost: temperature below supported minimum");
    const Mat4c rho = prepare_state_raw(params, cfg, nm);
    return (h * rho).trace().real() / t_kelvin - entropy_raw(rho);
}

VqtResult optimize_point(double t_kelvin, const VqtConfig& cfg, const DimerParams& p,
                         std::uint64_t seed) {
    cfg.validate();
    p.validate();
    const Mat4c h = build_hamiltonian(p);
    const int n_phi = ansatz_param_count(cfg.ansatz);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4 + n_phi);
    for (int k = 0; k < n_phi; ++k) x0(4 + k) = angle(rng);

    const auto unpack = [n_phi](const Eigen::VectorXd& x) {
        VqtParams params;
        params.theta = x.head<4>();
        params.phi = x.tail(n_phi);
        return params;
    };
    const Objective objective = [&](const Eigen::VectorXd& x) {
        return vqt_cost(unpack(x), t_kelvin, h, cfg.ansatz, cfg.noise);
    };

    OptimOptions opts = cfg.optim;
    opts.max_evals = cfg.max_evals;
    const OptimResult opt = cfg.optimizer == OptimizerKind::cobyla
                                ? cobyla(objective, x0, opts)
                                : nelder_mead(objective, x0, opts);

    VqtResult result;
    result.params = unpack(opt.x);
    result.rho = prepare_state(result.params, cfg.ansatz, cfg.noise);
    result.cost = opt.f;
    result.n_evals = opt.n_evals;
    result.converged = opt.converged;
    return result;
}

namespace {

void finalize_point(VqtSweepPoint& pt) {
    const auto stats = [&](const auto& value_of, double& mean, double& std_out) {
        double m = 0.0;
        for (const VqtResult& r : pt.reps) m += value_of(r);
        m /= static_cast<double>(pt.reps.size());
        double v = 0.0;
        for (const VqtResult& r : pt.reps) {
            const double d = value_of(r) - m;
            v += d * d;
        }
        v /= static_cast<double>(pt.reps.size());
        mean = m;
        std_out = std::sqrt(std::max(v, 0.0));
    };
    stats([](const VqtResult& r) { return 2.0 * discord_from_susceptibility(
                                              reduced_susceptibility(r.rho)); },
          pt.ergotropy_norm_mean, pt.ergotropy_norm_std);
    stats([](const VqtResult& r) { return discord_from_susceptibility(
                                              reduced_susceptibility(r.rho)); },
          pt.discord_mean, pt.discord_std);
    stats([](const VqtResult& r) { return reduced_susceptibility(r.rho); },
          pt.susceptibility_mean, pt.susceptibility_std);
    stats([](const VqtResult& r) { return r.cost; }, pt.cost_mean, pt.cost_std);
    double unused = 0.0;
    stats([](const VqtResult& r) { return static_cast<double>(r.n_evals); }, pt.n_evals_mean,
          unused);
}

}  // namespace

std::vector<VqtSweepPoint> vqt_sweep(const std::vector<double>& t_grid, const VqtConfig& cfg,
                                     const DimerParams& p, int repetitions,
                                     std::uint64_t master_seed, int threads) {
    cfg.validate();
    if (repetitions < 1) throw std::invalid_argument("vqt_sweep: repetitions must be >= 1");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (t_grid[i] > t_grid[i + 1])
            throw std::invalid_argument("vqt_sweep: temperature grid must be ascending");

    std::vector<VqtSweepPoint> out(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        out[i].t_kelvin = t_grid[i];
        out[i].reps.resize(repetitions, VqtResult{});
    }

    struct Task {
        std::size_t t_index;
        int rep;
    };
    std::vector<Task> tasks;
    tasks.reserve(t_grid.size() * static_cast<std::size_t>(repetitions));
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        for (int r = 0; r < repetitions; ++r) tasks.push_back(Task{i, r});

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const Task task = tasks[k];
            try {
                const std::uint64_t seed =
                    derive_seed(master_seed, task.t_index, static_cast<std::uint64_t>(task.rep));
                out[task.t_index].reps[task.rep] =
                    optimize_point(t_grid[task.t_index], cfg, p, seed);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(tasks.size());
                return;
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (VqtSweepPoint& pt : out) finalize_point(pt);
    return out;
}

}  // namespace dimerlab
