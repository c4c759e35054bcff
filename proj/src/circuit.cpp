#include "dimerlab/circuit.hpp"

#include <cmath>

namespace dimerlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::map<GateKind, std::string>& kind_names() {
    static const std::map<GateKind, std::string> names = {
        {GateKind::cx, "cx"},         {GateKind::delay, "delay"},
        {GateKind::id, "id"},         {GateKind::measure, "measure"},
        {GateKind::reset, "reset"},   {GateKind::rz, "rz"},
        {GateKind::sx, "sx"},         {GateKind::x, "x"},
        {GateKind::h, "h"},           {GateKind::rx, "rx"},
        {GateKind::ry, "ry"},         {GateKind::cnot_zero_ctrl, "cnot_zero_ctrl"},
    };
    return names;
}

}  // namespace

std::string to_string(GateKind kind) {
    const auto it = kind_names().find(kind);
    if (it == kind_names().end()) throw std::invalid_argument("to_string: unknown gate kind");
    return it->second;
}

GateKind gate_kind_from_string(const std::string& name) {
    for (const auto& [kind, kname] : kind_names())
        if (kname == name) return kind;
    throw std::invalid_argument("gate_kind_from_string: unknown gate kind '" + name + "'");
}

bool is_basis_gate(GateKind kind) {
    switch (kind) {
        case GateKind::cx:
        case GateKind::delay:
        case GateKind::id:
        case GateKind::measure:
        case GateKind::reset:
        case GateKind::rz:
        case GateKind::sx:
        case GateKind::x:
            return true;
        default:
            return false;
    }
}

bool is_rotation(GateKind kind) {
    return kind == GateKind::rz || kind == GateKind::rx || kind == GateKind::ry;
}

bool is_two_qubit(GateKind kind) {
    return kind == GateKind::cx || kind == GateKind::cnot_zero_ctrl;
}

void Gate::validate() const {
    if (kind_names().find(kind) == kind_names().end())
        throw std::invalid_argument("Gate: unknown gate kind");
    if (q0 < 0 || q0 > 1) throw std::invalid_argument("Gate: qubit index out of range");
    if (is_two_qubit(kind)) {
        if (q1 < 0 || q1 > 1) throw std::invalid_argument("Gate: target qubit index out of range");
        if (q0 == q1) throw std::invalid_argument("Gate: control and target must differ");
    }
    if (kind == GateKind::delay && duration_s < 0.0)
        throw std::invalid_argument("Gate: delay requires a non-negative duration");
}

Gate Gate::one_qubit(GateKind kind, int qubit) {
    Gate g;
    g.kind = kind;
    g.q0 = qubit;
    g.validate();
    return g;
}

Gate Gate::rotation(GateKind kind, int qubit, double angle) {
    if (!is_rotation(kind)) throw std::invalid_argument("Gate::rotation: not a rotation kind");
    Gate g;
    g.kind = kind;
    g.q0 = qubit;
    g.angle = angle;
    g.validate();
    return g;
}

Gate Gate::cx(int control, int target) {
    Gate g;
    g.kind = GateKind::cx;
    g.q0 = control;
    g.q1 = target;
    g.validate();
    return g;
}

Gate Gate::cnot_zero_ctrl(int control, int target) {
    Gate g;
    g.kind = GateKind::cnot_zero_ctrl;
    g.q0 = control;
    g.q1 = target;
    g.validate();
    return g;
}

Gate Gate::delay(int qubit, double duration_s) {
    Gate g;
    g.kind = GateKind::delay;
    g.q0 = qubit;
    g.duration_s = duration_s;
    g.validate();
    return g;
}

void Circuit::validate() const {
    for (const Gate& g : gates) g.validate();
}

// ----------------------------- noise model ----------------------------------

double NoiseModel::duration_for(const Gate& g) const {
    if (g.duration_s >= 0.0) return g.duration_s;
    const auto it = durations_s.find(g.kind);
    return it == durations_s.end() ? 0.0 : it->second;
}

bool NoiseModel::gate_is_noisy(GateKind kind) const {
    return noisy_instructions.count(kind) > 0;
}

void NoiseModel::validate() const {
    if (!(t1_s > 0.0) || !(t2_s > 0.0))
        throw std::invalid_argument("NoiseModel: T1 and T2 must be positive");
    if (t2_s > 2.0 * t1_s + 1e-15)
        throw std::invalid_argument("NoiseModel: T2 exceeds 2*T1, channel is not CPTP");
    if (depolarizing < 0.0 || depolarizing > 1.0)
        throw std::invalid_argument("NoiseModel: depolarizing probability outside [0, 1]");
    for (const auto& [kind, dur] : durations_s) {
        if (dur < 0.0)
            throw std::invalid_argument("NoiseModel: negative duration for gate '" +
                                        to_string(kind) + "'");
    }
    for (int q = 0; q < 2; ++q) {
        for (int j = 0; j < 2; ++j) {
            double col = 0.0;
            for (int i = 0; i < 2; ++i) {
                const double a = readout[q](i, j);
                if (a < 0.0 || a > 1.0)
                    throw std::invalid_argument("NoiseModel: readout entry outside [0, 1]");
                col += a;
            }
            if (std::abs(col - 1.0) > 1e-9)
                throw std::invalid_argument("NoiseModel: readout column " + std::to_string(j) +
                                            " of qubit " + std::to_string(q) +
                                            " does not sum to 1");
        }
    }
}

NoiseModel NoiseModel::backend_defaults(bool enabled) {
    NoiseModel nm;
    nm.enabled = enabled;
    nm.durations_s = {
        {GateKind::sx, 35.6e-9},    {GateKind::x, 35.6e-9},  {GateKind::id, 35.6e-9},
        {GateKind::cx, 320.0e-9},   {GateKind::measure, 1000.0e-9},
        {GateKind::rz, 0.0},        {GateKind::reset, 0.0},
    };
    nm.noisy_instructions = {GateKind::sx, GateKind::id, GateKind::x, GateKind::cx,
                             GateKind::measure};
    ReadoutMatrix a;
    a << 0.98, 0.02, 0.02, 0.98;
    nm.readout = {a, a};
    return nm;
}

NoiseModel NoiseModel::off() { return backend_defaults(false); }

nlohmann::json NoiseModel::to_json() const {
    nlohmann::json j;
    j["enabled"] = enabled;
    j["basis_gates"] = {"cx", "delay", "id", "measure", "reset", "rz", "sx", "x"};
    nlohmann::json noisy = nlohmann::json::array();
    for (const GateKind kind : noisy_instructions) noisy.push_back(to_string(kind));
    j["noisy_instructions"] = noisy;
    j["qubits"] = {0, 1};
    j["t1_s"] = t1_s;
    j["t2_s"] = t2_s;
    j["frequency_hz"] = frequency_hz;
    nlohmann::json durations;
    for (const auto& [kind, dur] : durations_s) durations[to_string(kind)] = dur * 1e9;
    j["durations_ns"] = durations;
    nlohmann::json readout_json = nlohmann::json::array();
    for (int q = 0; q < 2; ++q) {
        readout_json.push_back({{readout[q](0, 0), readout[q](0, 1)},
                                {readout[q](1, 0), readout[q](1, 1)}});
    }
    j["readout"] = readout_json;
    j["depolarizing"] = depolarizing;
    return j;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
    NoiseModel nm = backend_defaults(true);
    static const std::set<std::string> known = {
        "enabled",  "basis_gates", "noisy_instructions", "qubits",  "t1_s",
        "t2_s",     "frequency_hz", "durations_ns",      "readout", "depolarizing"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (known.find(key) == known.end())
            throw std::invalid_argument("NoiseModel: unknown key '" + key + "'");
    }
    if (j.contains("enabled")) nm.enabled = j.at("enabled").get<bool>();
    if (j.contains("t1_s")) nm.t1_s = j.at("t1_s").get<double>();
    if (j.contains("t2_s")) nm.t2_s = j.at("t2_s").get<double>();
    if (j.contains("frequency_hz")) nm.frequency_hz = j.at("frequency_hz").get<double>();
    if (j.contains("noisy_instructions")) {
        nm.noisy_instructions.clear();
        for (const auto& name : j.at("noisy_instructions"))
            nm.noisy_instructions.insert(gate_kind_from_string(name.get<std::string>()));
    }
    if (j.contains("durations_ns")) {
        for (const auto& [name, ns] : j.at("durations_ns").items())
            nm.durations_s[gate_kind_from_string(name)] = ns.get<double>() * 1e-9;
    }
    if (j.contains("readout")) {
        const auto& r = j.at("readout");
        if (!r.is_array() || r.size() != 2)
            throw std::invalid_argument("NoiseModel: readout must list two 2x2 matrices");
        for (int q = 0; q < 2; ++q)
            for (int i = 0; i < 2; ++i)
                for (int c = 0; c < 2; ++c) nm.readout[q](i, c) = r[q][i][c].get<double>();
    }
    if (j.contains("depolarizing")) nm.depolarizing = j.at("depolarizing").get<double>();
    nm.validate();
    return nm;
}

// ----------------------------- ideal unitaries -------------------------------

Mat2c gate_unitary_1q(const Gate& g) {
    const Complex i(0.0, 1.0);
    Mat2c u;
    switch (g.kind) {
        case GateKind::id:
        case GateKind::delay:
            u = Mat2c::Identity();
            break;
        case GateKind::x:
            u << 0, 1, 1, 0;
            break;
        case GateKind::sx:
            u << Complex(0.5, 0.5), Complex(0.5, -0.5), Complex(0.5, -0.5), Complex(0.5, 0.5);
            break;
        case GateKind::h:
            u << 1, 1, 1, -1;
            u /= std::sqrt(2.0);
            break;
        case GateKind::rz:
            u = Mat2c::Zero();
            u(0, 0) = std::exp(-i * (g.angle / 2.0));
            u(1, 1) = std::exp(i * (g.angle / 2.0));
            break;
        case GateKind::rx: {
            const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
            u << c, -i * s, -i * s, c;
            break;
        }
        case GateKind::ry: {
            const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
            u << c, -s, s, c;
            break;
        }
        default:
            throw std::invalid_argument("gate_unitary_1q: gate '" + to_string(g.kind) +
                                        "' has no single-qubit unitary");
    }
    return u;
}

Mat4c gate_unitary(const Gate& g) {
    g.validate();
    if (g.kind == GateKind::measure || g.kind == GateKind::reset)
        throw std::invalid_argument("gate_unitary: '" + to_string(g.kind) + "' is not unitary");
    if (g.kind == GateKind::cx || g.kind == GateKind::cnot_zero_ctrl) {
        // Flip the target when the control is |1> (cx) or |0> (zero-control).
        const int active = g.kind == GateKind::cx ? 1 : 0;
        Mat4c u = Mat4c::Zero();
        for (int in = 0; in < 4; ++in) {
            const int ctrl_bit = (g.q0 == 0) ? (in >> 1) & 1 : in & 1;
            int out = in;
            if (ctrl_bit == active) out = in ^ (g.q1 == 0 ? 2 : 1);
            u(out, in) = 1.0;
        }
        return u;
    }
    const Mat2c u1 = gate_unitary_1q(g);
    return g.q0 == 0 ? kron2(u1, Mat2c::Identity()) : kron2(Mat2c::Identity(), u1);
}

Mat4c circuit_unitary(const Circuit& c) {
    Mat4c u = Mat4c::Identity();
    for (const Gate& g : c.gates) u = gate_unitary(g) * u;
    return u;
}

double phase_free_distance(const Mat4c& u, const Mat4c& v) {
    const Complex overlap = (u.adjoint() * v).trace();
    Complex phase(1.0, 0.0);
    if (std::abs(overlap) > 1e-300) phase = overlap / std::abs(overlap);
    return (u * phase - v).cwiseAbs().maxCoeff();
}

// ----------------------------- transpilation --------------------------------

namespace {

void append_resolved(std::vector<Gate>& out, Gate g, const NoiseModel& nm) {
    if (g.kind != GateKind::delay) g.duration_s = nm.duration_for(Gate{g.kind});
    out.push_back(g);
}

}  // namespace

Circuit transpile(const Circuit& c, const NoiseModel& nm) {
    c.validate();
    Circuit out;
    out.gates.reserve(c.gates.size() * 3);
    for (const Gate& g : c.gates) {
        switch (g.kind) {
            case GateKind::cx:
            case GateKind::delay:
            case GateKind::id:
            case GateKind::measure:
            case GateKind::reset:
            case GateKind::rz:
            case GateKind::sx:
            case GateKind::x:
                append_resolved(out.gates, g, nm);
                break;
            case GateKind::h:
                // H = RZ(pi/2) SX RZ(pi/2) up to global phase.
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, kPi / 2.0), nm);
                append_resolved(out.gates, Gate::one_qubit(GateKind::sx, g.q0), nm);
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, kPi / 2.0), nm);
                break;
            case GateKind::rx:
                // RX(t) = H RZ(t) H with the H legs expanded and the inner
                // rz runs merged: RZ(pi/2) SX RZ(t + pi) SX RZ(pi/2).
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, kPi / 2.0), nm);
                append_resolved(out.gates, Gate::one_qubit(GateKind::sx, g.q0), nm);
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, g.angle + kPi), nm);
                append_resolved(out.gates, Gate::one_qubit(GateKind::sx, g.q0), nm);
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, kPi / 2.0), nm);
                break;
            case GateKind::ry:
                // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2); adjacent rz pairs cancel
                // or merge, leaving SX RZ(t + pi) SX RZ(pi).
                append_resolved(out.gates, Gate::one_qubit(GateKind::sx, g.q0), nm);
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, g.angle + kPi), nm);
                append_resolved(out.gates, Gate::one_qubit(GateKind::sx, g.q0), nm);
                append_resolved(out.gates, Gate::rotation(GateKind::rz, g.q0, kPi), nm);
                break;
            case GateKind::cnot_zero_ctrl:
                append_resolved(out.gates, Gate::one_qubit(GateKind::x, g.q0), nm);
                append_resolved(out.gates, Gate::cx(g.q0, g.q1), nm);
                append_resolved(out.gates, Gate::one_qubit(GateKind::x, g.q0), nm);
                break;
            default:
                throw std::invalid_argument("transpile: unknown gate kind");
        }
    }
    return out;
}

}  // namespace dimerlab
