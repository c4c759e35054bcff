// optimize.hpp — derivative-free minimizers used by the variational loop:
// Nelder-Mead simplex search and a COBYLA-style linear-model trust-region
// method. Both count objective evaluations exactly and never exceed the
// evaluation budget.

#pragma once

#include <Eigen/Dense>

#include <functional>

namespace dimerlab {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
    int max_evals = 5000;
    double f_tol = 1e-8;       // absolute cost-change stop
    double x_tol = 1e-8;       // simplex-size stop (Nelder-Mead)
    double initial_step = 0.5; // initial simplex edge (Nelder-Mead)
    double rho_begin = 0.5;    // initial trust radius (COBYLA)
    double rho_end = 1e-6;     // final trust radius (COBYLA)
};

struct OptimResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int n_evals = 0;
    bool converged = false;
};

// Classic reflect/expand/contract/shrink simplex descent.
OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                        const OptimOptions& opts = {});

// Linear-approximation trust-region descent in Powell's COBYLA scheme:
// dim+1 interpolation points, a linear model refit each step, and a working
// radius that shrinks from rho_begin to rho_end. Deterministic.
OptimResult cobyla(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts = {});

}  // namespace dimerlab
