// simulator.hpp — exact density-matrix evolution of two-qubit circuits with
// the relaxation/readout noise model: ideal conjugation per gate, thermal
// relaxation on the noisy instructions, assignment-error readout, and
// optional shot sampling.

#pragma once

#include "dimerlab/circuit.hpp"
#include "dimerlab/qmatrix.hpp"

#include <array>
#include <cstdint>

namespace dimerlab {

struct RelaxationFactors {
    double population;   // excited-population multiplier exp(-dt/T1)
    double coherence;    // off-diagonal multiplier exp(-dt/T2)
};

// Decay factors of the zero-temperature relaxation channel over dt. The
// ground population absorbs what the excited level loses.
RelaxationFactors relaxation_factors(double t1_s, double t2_s, double dt_s);

// One transpiled gate: ideal action, then the relaxation channel on each
// participating qubit when the model is enabled and the kind is noisy.
DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& g, const NoiseModel& nm);

// Sequential application of a circuit (transpiling first when convenience
// gates are present). Output trace stays within 1e-9 of one.
DensityMatrix run(const Circuit& c, const DensityMatrix& rho0, const NoiseModel& nm);

// Diagonal populations, pushed through the per-qubit assignment matrices
// when the model is enabled. Sums to one.
Vec4 measure_populations(const DensityMatrix& rho, const NoiseModel& nm);

// Multinomial counts over the four outcomes, deterministic per seed.
std::array<std::int64_t, 4> sample_counts(const Vec4& populations, std::int64_t shots,
                                          std::uint64_t seed);

namespace detail {

// Raw-matrix fast path used inside optimization loops; callers are expected
// to validate the end state through the DensityMatrix constructor.
Mat4c run_raw(const Circuit& transpiled, Mat4c rho, const NoiseModel& nm);

Mat4c apply_relaxation(const Mat4c& rho, int qubit, const RelaxationFactors& f);

}  // namespace detail

}  // namespace dimerlab
