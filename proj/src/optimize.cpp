#include "dimerlab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dimerlab {

namespace {

struct Budget {
    const Objective& f;
    int limit;
    int used = 0;

    bool exhausted() const { return used >= limit; }

    // Callers must check exhausted() first; this throws as a programming
    // guard, not as a user-visible error path.
    double eval(const Eigen::VectorXd& x) {
        if (exhausted()) throw std::logic_error("optimizer: evaluation past budget");
        ++used;
        return f(x);
    }
};

}  // namespace

OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const int n = static_cast<int>(x0.size());
    if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");
    if (opts.max_evals < n + 1)
        throw std::invalid_argument("nelder_mead: budget below dim + 1 evaluations");

    Budget budget{f, opts.max_evals};
    std::vector<Eigen::VectorXd> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    for (int i = 1; i <= n; ++i) xs[i](i - 1) += opts.initial_step;
    for (int i = 0; i <= n; ++i) fs[i] = budget.eval(xs[i]);

    // Standard coefficients: reflection 1, expansion 2, contraction 1/2,
    // shrink 1/2.
    const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;

    std::vector<int> order(n + 1);
    bool converged = false;
    while (!budget.exhausted()) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        const int best = order[0], worst = order[n], second_worst = order[n - 1];

        double diameter = 0.0;
        for (int i = 1; i <= n; ++i)
            diameter = std::max(diameter, (xs[order[i]] - xs[best]).norm());
        if (fs[worst] - fs[best] < opts.f_tol && diameter < opts.x_tol) {
            converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += xs[i];
        centroid /= n;

        const Eigen::VectorXd reflected = centroid + alpha * (centroid - xs[worst]);
        const double f_reflected = budget.eval(reflected);

        if (f_reflected < fs[best]) {
            if (!budget.exhausted()) {
                const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
                const double f_expanded = budget.eval(expanded);
                if (f_expanded < f_reflected) {
                    xs[worst] = expanded;
                    fs[worst] = f_expanded;
                    continue;
                }
            }
            xs[worst] = reflected;
            fs[worst] = f_reflected;
            continue;
        }
        if (f_reflected < fs[second_worst]) {
            xs[worst] = reflected;
            fs[worst] = f_reflected;
            continue;
        }
        if (budget.exhausted()) break;
        const bool outside = f_reflected < fs[worst];
        const Eigen::VectorXd contracted =
            outside ? Eigen::VectorXd(centroid + beta * (reflected - centroid))
                    : Eigen::VectorXd(centroid - beta * (centroid - xs[worst]));
        const double f_contracted = budget.eval(contracted);
        if (f_contracted < std::min(f_reflected, fs[worst])) {
            xs[worst] = contracted;
            fs[worst] = f_contracted;
            continue;
        }
        // Shrink toward the best vertex.
        for (int i = 0; i <= n && !budget.exhausted(); ++i) {
            if (i == best) continue;
            xs[i] = xs[best] + delta * (xs[i] - xs[best]);
            fs[i] = budget.eval(xs[i]);
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fs[i] < fs[best]) best = i;
    return OptimResult{xs[best], fs[best], budget.used, converged};
}

// COBYLA-style minimizer (Powell's scheme, unconstrained): n+1 interpolation
// points carry a linear model of the objective. Steps descend the model to
// the working-radius boundary, accepted steps are extended by verified
// doublings, and the working radius is floored by a resolution radius that
// only ever shrinks, from rho_begin down to rho_end.
OptimResult cobyla(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const int n = static_cast<int>(x0.size());
    if (n < 1) throw std::invalid_argument("cobyla: empty start point");
    if (opts.max_evals < n + 1)
        throw std::invalid_argument("cobyla: budget below dim + 1 evaluations");
    if (!(opts.rho_begin > opts.rho_end) || !(opts.rho_end > 0.0))
        throw std::invalid_argument("cobyla: require rho_begin > rho_end > 0");

    // Powell's acceptability constants: vertices no farther than beta times
    // the working radius from the best point, and no vertex closer than
    // alpha times the working radius to the span of the others.
    constexpr double kAlpha = 0.25;
    constexpr double kBeta = 2.1;

    Budget budget{f, opts.max_evals};

    std::vector<Eigen::VectorXd> xs(n + 1, x0);
    std::vector<double> fs(n + 1, std::numeric_limits<double>::infinity());
    double rho = opts.rho_begin;         // resolution radius, shrink-only
    double delta = rho;                  // working trust radius
    const double delta_cap = 1e2 * opts.rho_begin;

    fs[0] = budget.eval(xs[0]);
    for (int i = 1; i <= n && !budget.exhausted(); ++i) {
        xs[i](i - 1) += rho;
        fs[i] = budget.eval(xs[i]);
    }

    const auto best_to_front = [&]() {
        int best = 0;
        for (int i = 1; i <= n; ++i)
            if (fs[i] < fs[best]) best = i;
        std::swap(xs[0], xs[best]);
        std::swap(fs[0], fs[best]);
    };
    best_to_front();

    // Rebuild the interpolation set axis-aligned around the incumbent; the
    // recovery of last resort, n evaluations.
    const auto respan = [&](double scale) {
        for (int i = 1; i <= n && !budget.exhausted(); ++i) {
            xs[i] = xs[0];
            xs[i](i - 1) += scale;
            fs[i] = budget.eval(xs[i]);
        }
    };

    bool converged = false;
    int consecutive_failures = 0;
    int geometry_actions = 0;
    Eigen::MatrixXd spread(n, n);
    Eigen::VectorXd rhs(n);

    while (!budget.exhausted()) {
        best_to_front();
        for (int j = 1; j <= n; ++j) {
            spread.col(j - 1) = xs[j] - xs[0];
            rhs(j - 1) = fs[j] - fs[0];
        }

        if (geometry_actions > 2 * n) {
            geometry_actions = 0;
            respan(delta);
            continue;
        }

        // Geometry repair at the working scale: pull in stragglers first.
        int farthest = 1;
        for (int j = 2; j <= n; ++j)
            if ((xs[j] - xs[0]).norm() > (xs[farthest] - xs[0]).norm()) farthest = j;
        const double eta_max = (xs[farthest] - xs[0]).norm();
        if (eta_max > kBeta * delta) {
            const Eigen::VectorXd pulled = xs[0] + (delta / eta_max) * (xs[farthest] - xs[0]);
            xs[farthest] = pulled;
            fs[farthest] = budget.eval(pulled);
            ++geometry_actions;
            continue;
        }

        // Dual rows of the spread: row j of the inverse is orthogonal to
        // every displacement but the j-th, so its norm is the reciprocal
        // distance of vertex j from the span of the others.
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(spread);
        const Eigen::MatrixXd dual = lu.inverse();
        if (!dual.allFinite()) {
            geometry_actions = 0;
            respan(delta);
            continue;
        }
        int weakest = 1;
        double sigma_min = std::numeric_limits<double>::infinity();
        for (int j = 1; j <= n; ++j) {
            const double sigma = 1.0 / dual.row(j - 1).norm();
            if (sigma < sigma_min) {
                sigma_min = sigma;
                weakest = j;
            }
        }
        // The same factorization yields the interpolation gradient.
        const Eigen::VectorXd gradient = dual.transpose() * rhs;

        if (sigma_min < kAlpha * delta) {
            // Relocate the most redundant vertex along the direction the
            // simplex fails to span, on the descending side of the model.
            Eigen::VectorXd normal = dual.row(weakest - 1).transpose().normalized();
            if (gradient.allFinite() && gradient.dot(normal) > 0.0) normal = -normal;
            xs[weakest] = xs[0] + delta * normal;
            fs[weakest] = budget.eval(xs[weakest]);
            ++geometry_actions;
            continue;
        }
        geometry_actions = 0;

        const double gnorm = gradient.norm();
        const bool stalled = !gradient.allFinite() || gnorm * delta < 1e-300;

        bool resolution_spent = stalled;
        if (!stalled) {
            if (budget.exhausted()) break;
            const Eigen::VectorXd candidate = xs[0] - (delta / gnorm) * gradient;
            const double f_candidate = budget.eval(candidate);
            const double ratio = (fs[0] - f_candidate) / (delta * gnorm);

            if (ratio > 0.0) {
                // Descent: retire the worst value for the candidate, then
                // probe doubled steps along the same ray while they keep
                // paying; the working radius learns the proven scale.
                const auto fold = [&](const Eigen::VectorXd& x, double fx, int keep) {
                    int slot = keep == 1 ? 2 : 1;
                    for (int i = 1; i <= n; ++i)
                        if (i != keep && fs[i] > fs[slot]) slot = i;
                    xs[slot] = x;
                    fs[slot] = fx;
                    return slot;
                };
                consecutive_failures = 0;
                const Eigen::VectorXd origin = xs[0];
                const Eigen::VectorXd direction = candidate - xs[0];
                int hold = fold(candidate, f_candidate, 0);
                double f_cur = f_candidate;
                double accepted_scale = 1.0;
                double probe_scale = 2.0;
                while (n > 1 && !budget.exhausted() && probe_scale * delta <= delta_cap) {
                    const Eigen::VectorXd probe = origin + probe_scale * direction;
                    const double f_probe = budget.eval(probe);
                    if (f_probe >= f_cur) {
                        fold(probe, f_probe, hold);
                        break;
                    }
                    hold = fold(probe, f_probe, 0);
                    f_cur = f_probe;
                    accepted_scale = probe_scale;
                    probe_scale *= 2.0;
                }
                if (accepted_scale > 1.0)
                    delta = std::min(accepted_scale * delta, delta_cap);
                else if (ratio >= 0.1)
                    delta = std::min(1.8 * delta, delta_cap);
                continue;
            }
            // Failed step: the sample still carries local information, so
            // swap it for the farthest vertex and retry with the refreshed
            // model before narrowing.
            xs[farthest] = candidate;
            fs[farthest] = f_candidate;
            if (++consecutive_failures < 2) continue;
            consecutive_failures = 0;
            if (delta > rho * 1.000001) {
                // Narrow the working radius, floored at the resolution.
                delta = std::max(0.3 * delta, rho);
                continue;
            }
            resolution_spent = true;
        }

        if (!resolution_spent) continue;

        // Steps at the resolution floor keep failing: tighten the
        // resolution or stop at the final radius.
        if (rho <= opts.rho_end) {
            converged = true;
            break;
        }
        rho = std::max(0.3 * rho, opts.rho_end);
        delta = rho;
    }

    best_to_front();
    return OptimResult{xs[0], fs[0], budget.used, converged};
}

}  // namespace dimerlab
