// extraction.hpp — the optimal work-extraction step: the abstract optimal
// unitary built from the eigenbases, the concrete three-gate discharge
// circuit, and the per-state report of populations, fidelity, extracted
// energy and precision.

#pragma once

#include "dimerlab/circuit.hpp"
#include "dimerlab/dimer.hpp"
#include "dimerlab/qmatrix.hpp"

#include <utility>
#include <vector>

namespace dimerlab {

struct ExtractionRow {
    double t_kelvin = 0.0;
    Vec4 populations = Vec4::Zero();       // measured outcome probabilities
    double fidelity = 0.0;                 // ground fidelity of the final state
    double delta_e_kelvin = 0.0;           // energy removed by the circuit
    double ergotropy_oracle_kelvin = 0.0;  // spectral ergotropy of the input
    double delta_sigma_kelvin = 0.0;       // precision change across the step
    bool noisy = false;
};

// Discharge circuit (zero-controlled CNOT 0 -> 1, H on 0, X on 0); maps the
// exchange singlet onto |00> with unit amplitude.
Circuit protocol_circuit();

// The plain CNOT + Hadamard variant (no zero-control correction); under the
// conventions used here it parks the singlet on |11> instead, and is kept
// for side-by-side comparison.
Circuit protocol_circuit_plain_cnot();

// U = sum_i |e_i><r_i| with reference levels ascending and state eigenvalues
// descending; conjugation by U turns rho into its passive state.
Mat4c optimal_extraction_unitary(const DensityMatrix& rho, const Mat4c& h0);

// Push one state through the discharge circuit and report populations,
// fidelity, delta E against the reference Hamiltonian, the spectral
// ergotropy of the input, and the precision change.
ExtractionRow run_extraction(const DensityMatrix& rho, const NoiseModel& nm,
                             const DimerParams& p, double t_kelvin = 0.0);

// One row per (temperature, state) pair, in input order.
std::vector<ExtractionRow> extraction_sweep(
    const std::vector<std::pair<double, DensityMatrix>>& states, const NoiseModel& nm,
    const DimerParams& p);

// Mean outcome probabilities over the rows with T below the cutoff (the
// low-temperature bar-chart aggregate).
Vec4 average_populations_below(const std::vector<ExtractionRow>& rows, double t_cut_kelvin);

}  // namespace dimerlab
