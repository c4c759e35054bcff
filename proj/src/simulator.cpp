#include "dimerlab/simulator.hpp"

#include <cmath>
#include <random>

namespace dimerlab {

RelaxationFactors relaxation_factors(double t1_s, double t2_s, double dt_s) {
    if (dt_s < 0.0) throw std::invalid_argument("relaxation_factors: negative duration");
    if (!(t1_s > 0.0) || !(t2_s > 0.0))
        throw std::invalid_argument("relaxation_factors: T1 and T2 must be positive");
    if (t2_s > 2.0 * t1_s + 1e-15)
        throw std::invalid_argument("relaxation_factors: T2 exceeds 2*T1, channel is not CPTP");
    return RelaxationFactors{std::exp(-dt_s / t1_s), std::exp(-dt_s / t2_s)};
}

namespace detail {

Mat4c apply_relaxation(const Mat4c& rho, int qubit, const RelaxationFactors& f) {
    // Entrywise action of the single-qubit channel extended to the register:
    // excited-excited blocks scale by f.population with the loss moved into
    // the ground block, mixed blocks scale by f.coherence.
    const int mask = qubit == 0 ? 2 : 1;
    Mat4c out = rho;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            const bool row_excited = (r & mask) != 0;
            const bool col_excited = (c & mask) != 0;
            if (row_excited && col_excited) {
                out(r, c) = f.population * rho(r, c);
                out(r & ~mask, c & ~mask) += (1.0 - f.population) * rho(r, c);
            } else if (row_excited != col_excited) {
                out(r, c) = f.coherence * rho(r, c);
            }
        }
    }
    return out;
}

namespace {

Mat4c apply_depolarizing(const Mat4c& rho, int qubit, double p) {
    // rho -> (1-p) rho + p * (I/2 (x) tr_q rho) on the chosen qubit.
    const int mask = qubit == 0 ? 2 : 1;
    Mat2c reduced = Mat2c::Zero();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if ((r & mask) == (c & mask)) {
                const int ro = qubit == 0 ? (r & 1) : (r >> 1);
                const int co = qubit == 0 ? (c & 1) : (c >> 1);
                reduced(ro, co) += rho(r, c) * 0.5;
            }
        }
    }
    Mat4c mixed = Mat4c::Zero();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if ((r & mask) == (c & mask)) {
                const int ro = qubit == 0 ? (r & 1) : (r >> 1);
                const int co = qubit == 0 ? (c & 1) : (c >> 1);
                mixed(r, c) = reduced(ro, co);
            }
        }
    }
    return (1.0 - p) * rho + p * mixed;
}

Mat4c dephase_qubit(const Mat4c& rho, int qubit) {
    const int mask = qubit == 0 ? 2 : 1;
    Mat4c out = rho;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if ((r & mask) != (c & mask)) out(r, c) = 0.0;
    return out;
}

Mat4c reset_qubit(const Mat4c& rho, int qubit) {
    // Trace out the qubit and reinstall it in |0>.
    const int mask = qubit == 0 ? 2 : 1;
    Mat2c reduced = Mat2c::Zero();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if ((r & mask) == (c & mask)) {
                const int ro = qubit == 0 ? (r & 1) : (r >> 1);
                const int co = qubit == 0 ? (c & 1) : (c >> 1);
                reduced(ro, co) += rho(r, c);
            }
        }
    }
    Mat4c out = Mat4c::Zero();
    for (int ro = 0; ro < 2; ++ro)
        for (int co = 0; co < 2; ++co) {
            const int r = qubit == 0 ? ro : (ro << 1);
            const int c = qubit == 0 ? co : (co << 1);
            out(r, c) = reduced(ro, co);
        }
    return out;
}

Mat4c apply_gate_raw(Mat4c rho, const Gate& g, const NoiseModel& nm) {
    g.validate();
    switch (g.kind) {
        case GateKind::measure:
            rho = dephase_qubit(rho, g.q0);
            break;
        case GateKind::reset:
            rho = reset_qubit(rho, g.q0);
            break;
        default: {
            const Mat4c u = gate_unitary(g);
            rho = u * rho * u.adjoint();
            break;
        }
    }
    if (nm.enabled && nm.gate_is_noisy(g.kind)) {
        const RelaxationFactors f = relaxation_factors(nm.t1_s, nm.t2_s, nm.duration_for(g));
        rho = apply_relaxation(rho, g.q0, f);
        if (is_two_qubit(g.kind)) rho = apply_relaxation(rho, g.q1, f);
        if (nm.depolarizing > 0.0) {
            rho = apply_depolarizing(rho, g.q0, nm.depolarizing);
            if (is_two_qubit(g.kind)) rho = apply_depolarizing(rho, g.q1, nm.depolarizing);
        }
    }
    return rho;
}

}  // namespace

Mat4c run_raw(const Circuit& transpiled, Mat4c rho, const NoiseModel& nm) {
    for (std::size_t k = 0; k < transpiled.gates.size(); ++k) {
        try {
            rho = apply_gate_raw(rho, transpiled.gates[k], nm);
        } catch (const std::exception& ex) {
            throw std::runtime_error("run: gate " + std::to_string(k) + " (" +
                                     to_string(transpiled.gates[k].kind) + "): " + ex.what());
        }
    }
    return rho;
}

}  // namespace detail

DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& g, const NoiseModel& nm) {
    if (!is_basis_gate(g.kind))
        throw std::invalid_argument("apply_gate: gate '" + to_string(g.kind) +
                                    "' must be transpiled first");
    return DensityMatrix(detail::apply_gate_raw(rho.matrix(), g, nm), rho.tol());
}

DensityMatrix run(const Circuit& c, const DensityMatrix& rho0, const NoiseModel& nm) {
    const Circuit transpiled = transpile(c, nm);
    return DensityMatrix(detail::run_raw(transpiled, rho0.matrix(), nm), rho0.tol());
}

Vec4 measure_populations(const DensityMatrix& rho, const NoiseModel& nm) {
    Vec4 pops;
    for (int k = 0; k < 4; ++k) pops(k) = std::max(rho(k, k).real(), 0.0);
    pops /= pops.sum();
    if (!nm.enabled) return pops;
    Eigen::Matrix4d assignment;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            assignment(r, c) = nm.readout[0]((r >> 1) & 1, (c >> 1) & 1) *
                               nm.readout[1](r & 1, c & 1);
    Vec4 out = assignment * pops;
    out /= out.sum();
    return out;
}

std::array<std::int64_t, 4> sample_counts(const Vec4& populations, std::int64_t shots,
                                          std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("sample_counts: shots must be >= 1");
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (populations(k) < -1e-12)
            throw std::invalid_argument("sample_counts: negative probability");
        total += std::max(populations(k), 0.0);
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("sample_counts: probabilities sum to " +
                                    std::to_string(total) + ", not 1");
    Vec4 cum;
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        acc += std::max(populations(k), 0.0) / total;
        cum(k) = acc;
    }
    cum(3) = 1.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::array<std::int64_t, 4> counts = {0, 0, 0, 0};
    for (std::int64_t s = 0; s < shots; ++s) {
        const double u = uni(rng);
        int k = 0;
        while (k < 3 && u >= cum(k)) ++k;
        ++counts[k];
    }
    return counts;
}

}  // namespace dimerlab
