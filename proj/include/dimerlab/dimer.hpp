// dimer.hpp — exact thermodynamics of the exchange-coupled two-qubit cell:
// Hamiltonians, Gibbs states, reduced susceptibility, discord, ergotropy,
// passive states, and energy-fluctuation measures. Everything here is the
// analytic reference the simulated results are compared against.

#pragma once

#include "dimerlab/qmatrix.hpp"

#include <vector>

namespace dimerlab {

// Physical parameters in Kelvin-energy units (k_B = 1, beta = 1/T).
struct DimerParams {
    double j_kelvin = 748.0;      // exchange coupling, antiferromagnetic
    double g_factor = 2.0;        // isotropic Lande factor
    double b_tesla = 1.0;         // external field along z
    double mu_b_over_kb = 0.67171;  // Bohr magneton over k_B, K/T

    // Zeeman splitting E0 = g * (mu_B/k_B) * B, in Kelvin.
    double zeeman_splitting() const { return g_factor * mu_b_over_kb * b_tesla; }

    void validate() const;
};

// Lowest supported temperature; beta stays finite.
inline constexpr double kTMin = 0.5;

struct ThermalPoint {
    double t_kelvin = 0.0;
    double xi = 0.0;       // -J/(4T)
    double log_z = 0.0;    // ln of the partition function (always finite)
    double z = 0.0;        // exp(log_z); may overflow to inf at very low T
    DensityMatrix rho{Mat4c::Identity() / 4.0};
    double susceptibility = 0.0;         // reduced, dimensionless, in [0,1]
    double discord = 0.0;                // dimensionless, in [0,1/2]
    double ergotropy_kelvin = 0.0;       // spectral route, Kelvin
    double ergotropy_normalized = 0.0;   // 2*discord, dimensionless
    double variance_active = 0.0;        // Kelvin^2
    double variance_passive = 0.0;       // Kelvin^2
    double delta_sigma = 0.0;            // Kelvin
};

// H = E0 (S1z + S2z) + J (S1.S2) with S = sigma/2 and the sign convention
// (S1z + S2z)|00> = -|00>, so |00> carries the Zeeman ground level -E0.
Mat4c build_hamiltonian(const DimerParams& p);

// The Zeeman reference Hamiltonian alone: diag(-E0, 0, 0, E0).
Mat4c build_reference_hamiltonian(const DimerParams& p);

// rho = exp(-H/T) / Z via the eigensystem of H, with the spectrum shifted
// before exponentiation so low temperatures stay finite.
DensityMatrix gibbs_state(const Mat4c& h, double t_kelvin);

// The same thermal state evaluated from the closed-form X-state expression
// (independent algebraic route; used to cross-check gibbs_state).
Mat4c closed_form_thermal_state(const DimerParams& p, double t_kelvin);

// ln Z for the dimer Hamiltonian at temperature T (always finite).
double log_partition_function(const Mat4c& h, double t_kelvin);

// Reduced susceptibility as the magnetization fluctuation
// s = tr(rho M^2) - (tr(rho M))^2 with M = diag(-1, 0, 0, +1).
double reduced_susceptibility(const DensityMatrix& rho);

// Closed Bleaney-Bowers form of the reduced susceptibility at B = 0:
// s = 2 / (3 + exp(-4 xi)).
double bleaney_bowers_reduced(double t_kelvin, double j_kelvin);

// Schatten one-norm discord of the dimer, D = |2s - 1| / 2.
double discord_from_susceptibility(double s);

// Spectral ergotropy: E = sum_{i,j} r_i e_j (|<r_i|e_j>|^2 - delta_ij) with
// reference eigenvalues e ascending and state eigenvalues r descending.
double ergotropy_spectral(const DensityMatrix& rho, const Mat4c& h0);

// Susceptibility-route ergotropy E = 2 E0 D(T), valid for E0 << T. Sets
// *regime_warning when E0/T > 0.1 and the approximation degrades.
double ergotropy_closed(double t_kelvin, const DimerParams& p, bool* regime_warning = nullptr);

// Exhaustive anti-regression oracle: minimize the final energy over all 24
// permutations assigning the state eigenbasis onto the reference eigenbasis.
double brute_force_ergotropy(const DensityMatrix& rho, const Mat4c& h0);

// State with rho's eigenvalues (descending) placed on h0's eigenstates
// (ascending); commutes with h0 and carries energy tr(h0 rho) - ergotropy.
DensityMatrix passive_state(const DensityMatrix& rho, const Mat4c& h0);

// V(rho) = tr(h0^2 rho) - (tr(h0 rho))^2, clamped at zero.
double energy_variance(const DensityMatrix& rho, const Mat4c& h0);

// Change in the energy standard deviation across the extraction,
// sqrt(V(active)) - sqrt(V(passive)).
double precision_delta_sigma(const DensityMatrix& active, const DensityMatrix& passive,
                             const Mat4c& h0);

// One fully populated ThermalPoint per grid temperature. The grid must be
// ascending with every entry >= kTMin.
std::vector<ThermalPoint> oracle_sweep(const DimerParams& p, const std::vector<double>& t_grid);

}  // namespace dimerlab
