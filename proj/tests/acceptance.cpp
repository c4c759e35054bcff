// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavy variational runs fan out over the worker pool.

#include "dimerlab/extraction.hpp"
#include "dimerlab/lab.hpp"
#include "dimerlab/seeds.hpp"
#include "dimerlab/simulator.hpp"
#include "dimerlab/vqt.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace dimerlab;
namespace fs = std::filesystem;

namespace {

struct Tally {
    int failures = 0;

    void report(int index, bool pass, const std::string& label, const std::string& detail) {
        std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", index, label.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

Mat4c random_ginibre(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat4c g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = Complex(gauss(rng), gauss(rng));
    return g;
}

DensityMatrix random_density(std::mt19937_64& rng) {
    const Mat4c g = random_ginibre(rng);
    Mat4c rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

std::vector<double> default_grid() { return GridSpec{}.values(); }

std::string fmt(double v) { return format_double(v); }

// --------------------------------------------------------------------------

void criterion_1(Tally& tally) {
    DimerParams p;
    double worst_state = 0.0;
    for (const double b : {0.0, 0.25, 0.5, 1.0, 2.0}) {
        DimerParams pb = p;
        pb.b_tesla = b;
        const Mat4c h = build_hamiltonian(pb);
        for (int i = 0; i < 10; ++i) {
            const double t = 10.0 + i * (290.0 / 9.0);
            const double dev = (gibbs_state(h, t).matrix() - closed_form_thermal_state(pb, t))
                                   .cwiseAbs()
                                   .maxCoeff();
            worst_state = std::max(worst_state, dev);
        }
    }

    DimerParams pz = p;
    pz.b_tesla = 0.0;
    const Mat4c hz = build_hamiltonian(pz);
    double worst_chi = 0.0;
    for (double t = 10.0; t <= 300.0; t += 10.0) {
        const double dev = std::abs(reduced_susceptibility(gibbs_state(hz, t)) -
                                    bleaney_bowers_reduced(t, pz.j_kelvin));
        worst_chi = std::max(worst_chi, dev);
    }

    const Mat4c h0 = build_reference_hamiltonian(p);
    std::mt19937_64 rng(2024);
    double worst_erg = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const DensityMatrix rho = random_density(rng);
        worst_erg = std::max(worst_erg, std::abs(ergotropy_spectral(rho, h0) -
                                                 brute_force_ergotropy(rho, h0)));
    }

    const bool pass = worst_state <= 1e-12 && worst_chi <= 1e-10 && worst_erg <= 1e-12;
    tally.report(1, pass, "oracle equivalences",
                 "X-state dev " + fmt(worst_state) + ", Bleaney-Bowers dev " + fmt(worst_chi) +
                     ", spectral-vs-brute dev " + fmt(worst_erg));
}

void criterion_2(Tally& tally) {
    DimerParams p;   // B = 1 T, J = 748 K
    const Mat4c h = build_hamiltonian(p);
    const Mat4c h0 = build_reference_hamiltonian(p);
    double worst_rel = 0.0;
    for (double t = 50.0; t <= 300.0; t += 10.0) {
        const double spectral = ergotropy_spectral(gibbs_state(h, t), h0);
        const double closed = ergotropy_closed(t, p);
        worst_rel = std::max(worst_rel, std::abs(closed - spectral) / spectral);
    }
    tally.report(2, worst_rel <= 0.01, "closed-form regime check",
                 "max relative difference " + fmt(worst_rel) + " over T in [50, 300] K at B = 1 T");
}

void criterion_3(Tally& tally) {
    DimerParams p;
    const Mat4c h = build_hamiltonian(p);

    const double e1 = 2.0 * discord_from_susceptibility(
                                reduced_susceptibility(gibbs_state(h, 1.0)));
    const double e300 = 2.0 * discord_from_susceptibility(
                                  reduced_susceptibility(gibbs_state(h, 300.0)));
    const double d_hot = discord_from_susceptibility(reduced_susceptibility(gibbs_state(h, 1e5)));

    const bool pass = std::abs(e1 - 1.0) <= 1e-3 && std::abs(e300 - 0.735) <= 5e-3 &&
                      d_hot <= 1e-3;
    tally.report(3, pass, "limit values",
                 "ergotropy_norm(1 K) = " + fmt(e1) + ", ergotropy_norm(300 K) = " + fmt(e300) +
                     ", discord(1e5 K) = " + fmt(d_hot));
}

void criterion_4(Tally& tally) {
    DimerParams p;
    VqtConfig cfg;   // 4 layers, COBYLA, 5000 evals
    const int threads = resolve_threads(-1);
    const Mat4c h = build_hamiltonian(p);

    bool spot_ok = true;
    std::string spot_detail;
    const auto spots = vqt_sweep({100.0, 200.0, 300.0}, cfg, p, 1, 20250801, threads);
    for (const VqtSweepPoint& pt : spots) {
        const double bound = -log_partition_function(h, pt.t_kelvin);
        const double gap = pt.reps[0].cost - bound;
        const double fid = state_fidelity(pt.reps[0].rho, gibbs_state(h, pt.t_kelvin));
        spot_ok = spot_ok && std::abs(gap) <= 1e-2 && fid >= 0.99;
        spot_detail += "T=" + fmt(pt.t_kelvin) + ": gap " + fmt(gap) + ", fid " + fmt(fid) + "; ";
    }

    const auto sweep = vqt_sweep(default_grid(), cfg, p, 1, 20250801, threads);
    const auto oracle = oracle_sweep(p, default_grid());
    ReferenceCurve ref;
    ref.source = "oracle";
    for (const ThermalPoint& pt : oracle) ref.rows.emplace_back(pt.t_kelvin, pt.ergotropy_normalized);
    std::vector<std::pair<double, double>> sim;
    for (const VqtSweepPoint& pt : sweep) sim.emplace_back(pt.t_kelvin, pt.ergotropy_norm_mean);
    const double avg_error = avg_error_accumulation(ref, sim);

    double avg_evals = 0.0;
    bool budget_ok = true;
    for (const VqtSweepPoint& pt : sweep) {
        avg_evals += pt.n_evals_mean;
        budget_ok = budget_ok && pt.n_evals_mean <= 5000.0;
    }
    avg_evals /= static_cast<double>(sweep.size());

    const bool pass = spot_ok && avg_error <= 0.05 && budget_ok;
    tally.report(4, pass, "noiseless VQT",
                 spot_detail + "avg error " + fmt(avg_error) + ", avg evals " + fmt(avg_evals));
}

// Shared by criteria 5 and 7: noiseless extraction over the oracle grid.
struct NoiselessExtraction {
    std::vector<ExtractionRow> rows;
};

NoiselessExtraction noiseless_extraction(const DimerParams& p) {
    const Mat4c h = build_hamiltonian(p);
    std::vector<std::pair<double, DensityMatrix>> states;
    for (const double t : default_grid()) states.emplace_back(t, gibbs_state(h, t));
    NoiselessExtraction out;
    out.rows = extraction_sweep(states, NoiseModel::off(), p);
    return out;
}

void criterion_5(Tally& tally, const NoiselessExtraction& ext) {
    DimerParams p;
    const double e0 = p.zeeman_splitting();

    bool pop_ok = true, fid_ok = true, de_ok = true;
    double worst_de = 0.0;
    for (const ExtractionRow& row : ext.rows) {
        if (row.t_kelvin > 83.0) continue;
        pop_ok = pop_ok && row.populations(0) >= 0.999;
        fid_ok = fid_ok && row.fidelity >= 0.999;
        const double gap = std::abs(row.delta_e_kelvin - row.ergotropy_oracle_kelvin);
        worst_de = std::max(worst_de, gap);
        de_ok = de_ok && gap <= 1e-9;
    }
    const double sigma_cold = std::abs(ext.rows.front().delta_sigma_kelvin);
    const bool sigma_ok = sigma_cold <= 1e-6 * e0;

    const bool pass = pop_ok && fid_ok && de_ok && sigma_ok;
    tally.report(5, pass, "noiseless extraction (T <= 83 K)",
                 std::string("ground pop ") + (pop_ok ? "ok" : "LOW") + ", fidelity " +
                     (fid_ok ? "ok" : "LOW") + ", max |dE - ergotropy| " + fmt(worst_de) +
                     ", |delta sigma|(1 K) " + fmt(sigma_cold));
}

void criterion_6(Tally& tally) {
    DimerParams p;
    VqtConfig cfg;
    cfg.noise = NoiseModel::backend_defaults(true);
    const int threads = resolve_threads(-1);

    std::vector<double> grid;
    for (const double t : default_grid())
        if (t < 100.0) grid.push_back(t);

    const auto sweep = vqt_sweep(grid, cfg, p, 30, 8451, threads);
    std::vector<ExtractionRow> rows;
    for (std::size_t i = 0; i < sweep.size(); ++i)
        for (const VqtResult& rep : sweep[i].reps)
            rows.push_back(run_extraction(rep.rho, cfg.noise, p, sweep[i].t_kelvin));

    const Vec4 avg = average_populations_below(rows, 100.0);
    const bool pass = avg(0) >= 0.75;   // tolerance band; 0.8 is the target
    tally.report(6, pass, "noisy extraction (30 reps, T < 100 K)",
                 "mean ground population " + fmt(avg(0)) + " (target 0.8, band 0.75)");
}

void criterion_7(Tally& tally, const NoiselessExtraction& ext) {
    DimerParams p;

    double fid50 = -1.0, fid280 = -1.0;
    bool bound_ok = true;
    for (const ExtractionRow& row : ext.rows) {
        if (std::abs(row.t_kelvin - 50.8333) < 0.5) fid50 = row.fidelity;
        if (std::abs(row.t_kelvin - 280.0667) < 0.5) fid280 = row.fidelity;
        bound_ok = bound_ok && row.delta_e_kelvin <= row.ergotropy_oracle_kelvin + 1e-9;
    }

    const auto oracle = oracle_sweep(p, default_grid());
    bool monotone = true;
    for (std::size_t i = 1; i < oracle.size(); ++i)
        monotone = monotone &&
                   oracle[i].ergotropy_normalized <= oracle[i - 1].ergotropy_normalized + 1e-12;

    const bool pass = fid280 >= 0.0 && fid50 >= 0.0 && fid280 < fid50 && monotone && bound_ok;
    tally.report(7, pass, "trend checks",
                 "fidelity(280 K) = " + fmt(fid280) + " < fidelity(50 K) = " + fmt(fid50) +
                     (monotone ? ", ergotropy monotone" : ", MONOTONICITY BROKEN") +
                     (bound_ok ? ", dE bound holds" : ", dE BOUND VIOLATED"));
}

void criterion_8(Tally& tally) {
    const auto quadratic = [](const Eigen::VectorXd& x) {
        return (x(0) - 1.0) * (x(0) - 1.0) + (x(1) - 2.0) * (x(1) - 2.0);
    };
    const auto rosenbrock = [](const Eigen::VectorXd& x) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        return a * a + 100.0 * b * b;
    };
    Eigen::VectorXd q0(2), r0(2);
    q0 << 0.0, 0.0;
    r0 << -1.2, 1.0;

    int counted = 0;
    const Objective counted_rosenbrock = [&](const Eigen::VectorXd& x) {
        ++counted;
        return rosenbrock(x);
    };

    bool pass = true;
    std::string detail;
    for (const bool use_cobyla : {false, true}) {
        const auto solve = [&](const Objective& f, const Eigen::VectorXd& x0) {
            return use_cobyla ? cobyla(f, x0) : nelder_mead(f, x0);
        };
        const OptimResult q = solve(quadratic, q0);
        counted = 0;
        const OptimResult r = solve(counted_rosenbrock, r0);
        const bool q_ok = std::abs(q.x(0) - 1.0) <= 1e-5 && std::abs(q.x(1) - 2.0) <= 1e-5;
        const bool r_ok = std::abs(r.x(0) - 1.0) <= 1e-3 && std::abs(r.x(1) - 1.0) <= 1e-3;
        const bool count_ok = r.n_evals == counted && r.n_evals <= 5000 && q.n_evals <= 5000;
        pass = pass && q_ok && r_ok && count_ok;
        detail += std::string(use_cobyla ? "cobyla" : "nelder_mead") + ": quad |x-x*| " +
                  fmt(std::max(std::abs(q.x(0) - 1.0), std::abs(q.x(1) - 2.0))) + ", rosen |x-x*| " +
                  fmt(std::max(std::abs(r.x(0) - 1.0), std::abs(r.x(1) - 1.0))) + ", evals " +
                  std::to_string(r.n_evals) + "; ";
    }
    tally.report(8, pass, "optimizer suite", detail);
}

void criterion_9(Tally& tally) {
    std::mt19937_64 rng(31337);
    NoiseModel nm = NoiseModel::backend_defaults();
    std::uniform_real_distribution<double> angle(-3.0, 3.0);

    double worst_trace = 0.0, worst_negative = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Circuit c;
        c.gates.push_back(Gate::rotation(GateKind::rx, trial % 2, angle(rng)));
        c.gates.push_back(Gate::cx(0, 1));
        c.gates.push_back(Gate::one_qubit(GateKind::sx, (trial >> 1) % 2));
        c.gates.push_back(Gate::one_qubit(GateKind::id, trial % 2));
        const DensityMatrix out = run(c, random_density(rng), nm);
        worst_trace = std::max(worst_trace, std::abs(out.matrix().trace().real() - 1.0));
        const auto es = hermitian_eigen<4>(out.matrix());
        worst_negative = std::min(worst_negative, static_cast<double>(es.values.minCoeff()));
    }

    bool rejects_bad_t2 = false;
    try {
        relaxation_factors(1.0e-4, 2.5e-4, 1e-6);
    } catch (const std::invalid_argument&) {
        rejects_bad_t2 = true;
    }

    std::uniform_int_distribution<int> pick_kind(0, 7);
    std::uniform_int_distribution<int> pick_qubit(0, 1);
    double worst_transpile = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Circuit c;
        const int length = 1 + static_cast<int>(rng() % 20);
        for (int k = 0; k < length; ++k) {
            const int q = pick_qubit(rng);
            switch (pick_kind(rng)) {
                case 0: c.gates.push_back(Gate::one_qubit(GateKind::h, q)); break;
                case 1: c.gates.push_back(Gate::rotation(GateKind::rx, q, angle(rng))); break;
                case 2: c.gates.push_back(Gate::rotation(GateKind::ry, q, angle(rng))); break;
                case 3: c.gates.push_back(Gate::rotation(GateKind::rz, q, angle(rng))); break;
                case 4: c.gates.push_back(Gate::one_qubit(GateKind::sx, q)); break;
                case 5: c.gates.push_back(Gate::one_qubit(GateKind::x, q)); break;
                case 6: c.gates.push_back(Gate::cx(q, 1 - q)); break;
                default: c.gates.push_back(Gate::cnot_zero_ctrl(q, 1 - q)); break;
            }
        }
        worst_transpile = std::max(
            worst_transpile, phase_free_distance(circuit_unitary(transpile(c, nm)),
                                                 circuit_unitary(c)));
    }

    const bool pass = worst_trace <= 1e-9 && worst_negative >= -1e-9 && rejects_bad_t2 &&
                      worst_transpile <= 1e-10;
    tally.report(9, pass, "channel correctness",
                 "trace dev " + fmt(worst_trace) + ", min eigenvalue " + fmt(worst_negative) +
                     ", T2<=2T1 rejected " + (rejects_bad_t2 ? "yes" : "NO") +
                     ", transpile dev " + fmt(worst_transpile));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10(Tally& tally) {
    const fs::path root =
        fs::temp_directory_path() / ("dimerlab_acceptance_" + std::to_string(splitmix64(4242)));
    fs::create_directories(root);

    const auto run_cli = [](std::initializer_list<std::string> args) {
        std::vector<std::string> store = {"dimerlab"};
        store.insert(store.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const std::string& s : store) argv.push_back(s.c_str());
        return cli_main(static_cast<int>(argv.size()), argv.data());
    };

    // Exact-mode VQT on a small grid plus the analytic sweep, then re-run
    // both from their manifests.
    const std::string cfg_path = (root / "config.json").string();
    std::ofstream cfg(cfg_path);
    cfg << R"({"grid": {"t_min": 50.0, "t_max": 300.0, "points": 3}, "max_evals": 400,)"
        << R"( "master_seed": 99})";
    cfg.close();

    bool pass = true;
    std::string detail;
    for (const std::string cmd : {std::string("oracle"), std::string("vqt")}) {
        const std::string first = (root / (cmd + "_a")).string();
        const std::string second = (root / (cmd + "_b")).string();
        const int rc1 = run_cli({cmd, "--config", cfg_path, "--out", first});
        const int rc2 =
            run_cli({cmd, "--config", first + "/manifest.json", "--out", second});
        const bool identical = slurp(first + "/sweep.csv") == slurp(second + "/sweep.csv") &&
                               !slurp(first + "/sweep.csv").empty();
        pass = pass && rc1 == 0 && rc2 == 0 && identical;
        detail += cmd + (identical ? " byte-identical; " : " MISMATCH; ");
    }
    fs::remove_all(root);
    tally.report(10, pass, "manifest reproducibility", detail);
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    Tally tally;

    criterion_1(tally);
    criterion_2(tally);
    criterion_3(tally);
    criterion_4(tally);

    DimerParams p;
    const NoiselessExtraction ext = noiseless_extraction(p);
    criterion_5(tally, ext);
    criterion_6(tally);
    criterion_7(tally, ext);
    criterion_8(tally);
    criterion_9(tally);
    criterion_10(tally);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d criterion(s) failed; wall time %.1f s\n", tally.failures, secs);
    return tally.failures;
}
