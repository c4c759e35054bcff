// circuit.hpp — two-qubit gate-level circuits: the backend basis-gate set,
// convenience gates, transpilation into the basis, and the relaxation /
// readout noise model.

#pragma once

#include "dimerlab/qmatrix.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace dimerlab {

// The first eight kinds form the backend basis; h, rx, ry and the
// zero-controlled CNOT are pre-transpile conveniences.
enum class GateKind { cx, delay, id, measure, reset, rz, sx, x, h, rx, ry, cnot_zero_ctrl };

std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& name);
bool is_basis_gate(GateKind kind);
bool is_rotation(GateKind kind);
bool is_two_qubit(GateKind kind);

struct Gate {
    GateKind kind = GateKind::id;
    int q0 = 0;               // the target for 1q gates; the control for 2q gates
    int q1 = -1;              // the target for 2q gates
    double angle = 0.0;       // rotation kinds only, radians
    double duration_s = -1.0; // resolved at transpile time; delay is user-set

    void validate() const;

    static Gate one_qubit(GateKind kind, int qubit);
    static Gate rotation(GateKind kind, int qubit, double angle);
    static Gate cx(int control, int target);
    static Gate cnot_zero_ctrl(int control, int target);
    static Gate delay(int qubit, double duration_s);
};

struct Circuit {
    static constexpr int n_qubits = 2;
    std::vector<Gate> gates;

    void validate() const;
};

// Per-qubit 2x2 readout assignment matrix, a(i, j) = P(read i | true j);
// each column sums to one.
using ReadoutMatrix = Eigen::Matrix2d;

struct NoiseModel {
    bool enabled = false;
    double t1_s = 1.5774397097652505e-4;
    double t2_s = 1.0861203881817735e-4;
    double frequency_hz = 5227644738.696302;   // metadata only
    std::map<GateKind, double> durations_s;
    std::set<GateKind> noisy_instructions;
    std::array<ReadoutMatrix, 2> readout;
    double depolarizing = 0.0;   // optional per-noisy-gate depolarizing probability

    // Duration for a gate: the gate's own resolved value if set, otherwise
    // the model's table entry (zero if absent).
    double duration_for(const Gate& g) const;
    bool gate_is_noisy(GateKind kind) const;

    void validate() const;

    // Backend defaults: Table-1 T1/T2/frequency, the five noisy
    // instructions, typical superconducting gate durations, and a symmetric
    // 2% readout flip per qubit.
    static NoiseModel backend_defaults(bool enabled = true);
    static NoiseModel off();

    nlohmann::json to_json() const;
    static NoiseModel from_json(const nlohmann::json& j);
};

// Ideal 2x2 unitary of a single-qubit gate.
Mat2c gate_unitary_1q(const Gate& g);

// Ideal 4x4 unitary of any unitary gate kind on the two-qubit register.
Mat4c gate_unitary(const Gate& g);

// Product of the ideal unitaries of a circuit (all gates must be unitary
// kinds; measure/reset are rejected).
Mat4c circuit_unitary(const Circuit& c);

// Largest entry deviation between u and v after aligning global phase.
double phase_free_distance(const Mat4c& u, const Mat4c& v);

// Rewrite convenience gates into the basis set (h and the axis rotations via
// rz/sx sequences, the zero-controlled CNOT via x-conjugation) and stamp
// durations from the noise model. Output contains basis kinds only and is
// unitarily equivalent to the input up to global phase.
Circuit transpile(const Circuit& c, const NoiseModel& nm);

}  // namespace dimerlab
