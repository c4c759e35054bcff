#include "dimerlab/dimer.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace dimerlab {

void DimerParams::validate() const {
    if (!(j_kelvin > 0.0))
        throw std::invalid_argument("DimerParams: coupling J must be positive (antiferromagnetic)");
    const double e0 = zeeman_splitting();
    if (e0 < 0.0)
        throw std::invalid_argument("DimerParams: Zeeman splitting E0 must be non-negative");
    if (e0 >= j_kelvin)
        throw std::invalid_argument("DimerParams: field above the level crossing (E0 >= J)");
}

Mat4c build_hamiltonian(const DimerParams& p) {
    p.validate();
    const double e0 = p.zeeman_splitting();
    const double q = p.j_kelvin / 4.0;
    // Exchange term in the product basis: diag(q, -q, -q, q) plus the
    // flip-flop coupling 2q between |01> and |10>.
    Mat4c h = Mat4c::Zero();
    h(0, 0) = Complex(-e0 + q, 0.0);
    h(1, 1) = Complex(-q, 0.0);
    h(2, 2) = Complex(-q, 0.0);
    h(3, 3) = Complex(e0 + q, 0.0);
    h(1, 2) = Complex(2.0 * q, 0.0);
    h(2, 1) = Complex(2.0 * q, 0.0);
    return h;
}

Mat4c build_reference_hamiltonian(const DimerParams& p) {
    p.validate();
    const double e0 = p.zeeman_splitting();
    Mat4c h0 = Mat4c::Zero();
    h0(0, 0) = Complex(-e0, 0.0);
    h0(3, 3) = Complex(e0, 0.0);
    return h0;
}

double log_partition_function(const Mat4c& h, double t_kelvin) {
    if (t_kelvin < kTMin)
        throw std::domain_error("log_partition_function: temperature below " +
                                std::to_string(kTMin) + " K");
    const auto es = hermitian_eigen<4>(h);
    const double lmin = es.values.minCoeff();
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) acc += std::exp(-(es.values(k) - lmin) / t_kelvin);
    return -lmin / t_kelvin + std::log(acc);
}

DensityMatrix gibbs_state(const Mat4c& h, double t_kelvin) {
    if (t_kelvin < kTMin)
        throw std::domain_error("gibbs_state: temperature " + std::to_string(t_kelvin) +
                                " K below the supported minimum " + std::to_string(kTMin) + " K");
    const auto es = hermitian_eigen<4>(h);
    const double lmin = es.values.minCoeff();
    Vec4 w;
    for (int k = 0; k < 4; ++k) w(k) = std::exp(-(es.values(k) - lmin) / t_kelvin);
    w /= w.sum();
    Mat4c rho = Mat4c::Zero();
    for (int k = 0; k < 4; ++k) {
        const Vec4c v = es.vectors.col(k);
        rho += w(k) * (v * v.adjoint());
    }
    return DensityMatrix(rho);
}

Mat4c closed_form_thermal_state(const DimerParams& p, double t_kelvin) {
    if (t_kelvin < kTMin)
        throw std::domain_error("closed_form_thermal_state: temperature below supported minimum");
    p.validate();
    const double beta = 1.0 / t_kelvin;
    const double xi = -beta * p.j_kelvin / 4.0;
    const double be0 = beta * p.zeeman_splitting();
    // Boltzmann exponents of |00>, the two exchange levels, and |11>; shift
    // by the largest so the weights stay inside double range at low T.
    const std::array<double, 4> expo = {xi + be0, xi, -3.0 * xi, xi - be0};
    const double m = *std::max_element(expo.begin(), expo.end());
    const double w00 = std::exp(expo[0] - m);
    const double wt = std::exp(expo[1] - m);   // triplet component of the middle block
    const double ws = std::exp(expo[2] - m);   // singlet component
    const double w11 = std::exp(expo[3] - m);
    const double z = w00 + wt + ws + w11;
    Mat4c rho = Mat4c::Zero();
    rho(0, 0) = w00 / z;
    rho(1, 1) = (wt + ws) / (2.0 * z);
    rho(2, 2) = (wt + ws) / (2.0 * z);
    rho(1, 2) = (wt - ws) / (2.0 * z);
    rho(2, 1) = (wt - ws) / (2.0 * z);
    rho(3, 3) = w11 / z;
    return rho;
}

double reduced_susceptibility(const DensityMatrix& rho) {
    const double p00 = rho(0, 0).real();
    const double p11 = rho(3, 3).real();
    const double m1 = p11 - p00;        // tr(rho M)
    const double m2 = p11 + p00;        // tr(rho M^2)
    const double s = m2 - m1 * m1;
    return std::min(std::max(s, 0.0), 1.0);
}

double bleaney_bowers_reduced(double t_kelvin, double j_kelvin) {
    const double xi = -j_kelvin / (4.0 * t_kelvin);
    return 2.0 / (3.0 + std::exp(-4.0 * xi));
}

double discord_from_susceptibility(double s) {
    if (s < -1e-12 || s > 1.0 + 1e-12)
        throw std::invalid_argument("discord_from_susceptibility: s outside [0, 1]");
    return 0.5 * std::abs(2.0 * s - 1.0);
}

namespace {

// Eigenvalues of rho sorted descending and of h0 sorted ascending, plus the
// matching eigenvector columns.
struct OrderedPair {
    Vec4 rho_desc;
    Mat4c rho_vecs;
    Vec4 h0_asc;
    Mat4c h0_vecs;
};

OrderedPair ordered_eigensystems(const DensityMatrix& rho, const Mat4c& h0) {
    const auto er = hermitian_eigen<4>(rho.matrix(), rho.tol());
    const auto eh = hermitian_eigen<4>(h0);
    OrderedPair out;
    out.h0_asc = eh.values;
    out.h0_vecs = eh.vectors;
    // SelfAdjointEigenSolver returns ascending order; reverse the state side.
    for (int k = 0; k < 4; ++k) {
        out.rho_desc(k) = er.values(3 - k);
        out.rho_vecs.col(k) = er.vectors.col(3 - k);
    }
    return out;
}

}  // namespace

double ergotropy_spectral(const DensityMatrix& rho, const Mat4c& h0) {
    const OrderedPair op = ordered_eigensystems(rho, h0);
    double e = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            // Eigen's dot conjugates its first argument, so this is <r_i|e_j>.
            const Complex ov = op.rho_vecs.col(i).dot(op.h0_vecs.col(j));
            const double delta = (i == j) ? 1.0 : 0.0;
            e += op.rho_desc(i) * op.h0_asc(j) * (std::norm(ov) - delta);
        }
    }
    return std::max(e, 0.0);
}

double ergotropy_closed(double t_kelvin, const DimerParams& p, bool* regime_warning) {
    if (t_kelvin < kTMin)
        throw std::domain_error("ergotropy_closed: temperature below supported minimum");
    p.validate();
    const double e0 = p.zeeman_splitting();
    if (regime_warning) *regime_warning = (e0 / t_kelvin > 0.1);
    const double s = bleaney_bowers_reduced(t_kelvin, p.j_kelvin);
    return 2.0 * e0 * discord_from_susceptibility(s);
}

double brute_force_ergotropy(const DensityMatrix& rho, const Mat4c& h0) {
    const OrderedPair op = ordered_eigensystems(rho, h0);
    const double initial = expectation(h0, rho);
    std::array<int, 4> perm = {0, 1, 2, 3};
    double best_final = std::numeric_limits<double>::infinity();
    // perm[k] = reference level receiving the k-th state eigenvalue.
    do {
        double final_energy = 0.0;
        for (int k = 0; k < 4; ++k) final_energy += op.rho_desc(k) * op.h0_asc(perm[k]);
        best_final = std::min(best_final, final_energy);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::max(initial - best_final, 0.0);
}

DensityMatrix passive_state(const DensityMatrix& rho, const Mat4c& h0) {
    const OrderedPair op = ordered_eigensystems(rho, h0);
    Mat4c sigma = Mat4c::Zero();
    for (int k = 0; k < 4; ++k) {
        const Vec4c v = op.h0_vecs.col(k);
        sigma += op.rho_desc(k) * (v * v.adjoint());
    }
    return DensityMatrix(sigma, rho.tol());
}

double energy_variance(const DensityMatrix& rho, const Mat4c& h0) {
    const double mean = expectation(h0, rho);
    const double second = expectation(h0 * h0, rho);
    return std::max(second - mean * mean, 0.0);
}

double precision_delta_sigma(const DensityMatrix& active, const DensityMatrix& passive,
                             const Mat4c& h0) {
    return std::sqrt(energy_variance(active, h0)) - std::sqrt(energy_variance(passive, h0));
}

std::vector<ThermalPoint> oracle_sweep(const DimerParams& p, const std::vector<double>& t_grid) {
    p.validate();
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
        if (t_grid[i] > t_grid[i + 1])
            throw std::invalid_argument("oracle_sweep: temperature grid must be ascending");
    }
    const Mat4c h = build_hamiltonian(p);
    const Mat4c h0 = build_reference_hamiltonian(p);

    std::vector<ThermalPoint> out;
    out.reserve(t_grid.size());
    for (const double t : t_grid) {
        try {
            ThermalPoint pt;
            pt.t_kelvin = t;
            pt.xi = -p.j_kelvin / (4.0 * t);
            pt.log_z = log_partition_function(h, t);
            pt.z = std::exp(pt.log_z);
            pt.rho = gibbs_state(h, t);
            pt.susceptibility = reduced_susceptibility(pt.rho);
            pt.discord = discord_from_susceptibility(pt.susceptibility);
            pt.ergotropy_kelvin = ergotropy_spectral(pt.rho, h0);
            pt.ergotropy_normalized = 2.0 * pt.discord;
            pt.variance_active = energy_variance(pt.rho, h0);
            const DensityMatrix sigma = passive_state(pt.rho, h0);
            pt.variance_passive = energy_variance(sigma, h0);
            pt.delta_sigma = precision_delta_sigma(pt.rho, sigma, h0);
            out.push_back(std::move(pt));
        } catch (const std::exception& ex) {
            throw std::runtime_error("oracle_sweep: failure at T = " + std::to_string(t) +
                                     " K: " + ex.what());
        }
    }
    return out;
}

}  // namespace dimerlab
