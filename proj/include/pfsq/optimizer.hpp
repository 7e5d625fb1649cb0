#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pfsq/errors.hpp"

namespace pfsq::opt {

/// Parallel queues with distinct service times fed by one Poisson stream.
/// Keeps the caller's order; `sorted_order()` lists indices by ascending
/// service time (ties keep caller order).
class HeterogeneousArray {
public:
    HeterogeneousArray(double agg_rate, std::vector<double> service_times);

    double arrival_rate() const noexcept { return rate_; }
    std::span<const double> service_times() const noexcept { return times_; }
    std::span<const std::size_t> sorted_order() const noexcept { return order_; }
    std::size_t size() const noexcept { return times_.size(); }

private:
    double rate_;
    std::vector<double> times_;
    std::vector<std::size_t> order_;
};

/// Traffic fractions phi_k, indexed like the array's service times.
class RoutingVector {
public:
    /// Checks phi_k in [0, 1] and sum = 1 within 1e-12.
    explicit RoutingVector(std::vector<double> fractions);

    std::span<const double> fractions() const noexcept { return phi_; }
    double operator[](std::size_t k) const { return phi_[k]; }
    std::size_t size() const noexcept { return phi_.size(); }

private:
    std::vector<double> phi_;
};

struct Feasibility {
    bool feasible = false;
    /// Maximum stable throughput, sum of 1/S_k.
    double capacity = 0.0;
};

struct Optimum {
    RoutingVector routing;
    double response_time = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Final first-order residual (spread of the marginal residence times).
    double residual = 0.0;

    /// Fractions in ascending service-time order, i.e. phi_1 >= ... >= phi_m.
    std::vector<double> sorted_fractions(const HeterogeneousArray& array) const;
};

/// Raised when the iteration cap is hit; carries the best iterate found.
class ConvergenceError : public Error {
public:
    ConvergenceError(Optimum best, int cap);
    const Optimum& best() const noexcept { return best_; }

private:
    Optimum best_;
};

struct PgdOptions {
    int max_iterations = 10'000;
    double tolerance = 1e-10;
    /// Iterates are kept at phi_k lambda S_k <= 1 - guard.
    double stability_guard = 1e-9;
};

Feasibility feasibility(const HeterogeneousArray& array);

/// Sum_k phi_k S_k / (1 - phi_k lambda S_k). Throws SaturationError naming
/// the queue index when some phi_k lambda S_k >= 1.
double objective(const HeterogeneousArray& array, const RoutingVector& routing);

/// Partial derivatives of `objective`; component k is
/// S_k/(1-u_k) + u_k S_k/(1-u_k)^2 with u_k = phi_k lambda S_k.
std::vector<double> gradient(const HeterogeneousArray& array, const RoutingVector& routing);

/// Two queues: fraction phi to `fast`, 1-phi to `slow`. Root of the
/// derivative on the stable interval, by bisection.
Optimum optimize_dual(double agg_rate, double fast, double slow);

/// General m: projected gradient descent on the simplex with backtracking.
Optimum optimize_m(const HeterogeneousArray& array, const PgdOptions& options = {});

/// Euclidean projection of `y` onto {x : sum x = 1, 0 <= x_k <= upper_k}.
/// Requires sum(upper) >= 1.
std::vector<double> project_capped_simplex(std::span<const double> y, std::span<const double> upper);

/// First-order optimality residual at `phi`: spread of the gradient over the
/// support plus any shortfall of zero-weight components below it.
double kkt_residual(std::span<const double> phi, std::span<const double> grad);

}  // namespace pfsq::opt
