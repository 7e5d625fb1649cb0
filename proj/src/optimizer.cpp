#include "pfsq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace pfsq::opt {
namespace {

constexpr double kSumTolerance = 1e-12;

double marginal(double phi, double rate, double s) {
    const double u = phi * rate * s;
    const double idle = 1.0 - u;
    return s / idle + u * s / (idle * idle);
}

std::string queue_label(std::size_t k) { return fmt::format("queue {}", k + 1); }

double objective_raw(const HeterogeneousArray& a, std::span<const double> phi) {
    double total = 0.0;
    const auto s = a.service_times();
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double u = phi[k] * a.arrival_rate() * s[k];
        if (u >= 1.0) throw SaturationError(queue_label(k), u);
        total += phi[k] * s[k] / (1.0 - u);
    }
    return total;
}

std::vector<double> gradient_raw(const HeterogeneousArray& a, std::span<const double> phi) {
    std::vector<double> g(phi.size());
    const auto s = a.service_times();
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double u = phi[k] * a.arrival_rate() * s[k];
        if (u >= 1.0) throw SaturationError(queue_label(k), u);
        g[k] = marginal(phi[k], a.arrival_rate(), s[k]);
    }
    return g;
}

// Equal service times get equal fractions.
void apply_tie_rule(const HeterogeneousArray& a, std::vector<double>& phi) {
    const auto order = a.sorted_order();
    const auto s = a.service_times();
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && s[order[j]] == s[order[i]]) ++j;
        if (j - i > 1) {
            double mean = 0.0;
            for (std::size_t q = i; q < j; ++q) mean += phi[order[q]];
            mean /= static_cast<double>(j - i);
            for (std::size_t q = i; q < j; ++q) phi[order[q]] = mean;
        }
        i = j;
    }
}

}  // namespace

HeterogeneousArray::HeterogeneousArray(double agg_rate, std::vector<double> service_times)
    : rate_(agg_rate), times_(std::move(service_times)) {
    if (!(rate_ >= 0.0) || !std::isfinite(rate_)) {
        throw ValidationError(fmt::format("arrival rate must be >= 0, got {}", rate_));
    }
    if (times_.empty()) throw ValidationError("heterogeneous array needs at least one queue");
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (!(times_[k] > 0.0) || !std::isfinite(times_[k])) {
            throw ValidationError(fmt::format("service time of {} must be > 0, got {}",
                                              queue_label(k), times_[k]));
        }
    }
    order_.resize(times_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [this](std::size_t i, std::size_t j) { return times_[i] < times_[j]; });
}

RoutingVector::RoutingVector(std::vector<double> fractions) : phi_(std::move(fractions)) {
    if (phi_.empty()) throw ValidationError("routing vector must not be empty");
    double sum = 0.0;
    for (std::size_t k = 0; k < phi_.size(); ++k) {
        if (!(phi_[k] >= 0.0) || !(phi_[k] <= 1.0)) {
            throw ValidationError(fmt::format("routing fraction {} = {} is outside [0, 1]", k + 1, phi_[k]));
        }
        sum += phi_[k];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw ValidationError(fmt::format("routing fractions sum to {:.17g}, expected 1", sum));
    }
}

std::vector<double> Optimum::sorted_fractions(const HeterogeneousArray& array) const {
    std::vector<double> out;
    out.reserve(routing.size());
    for (auto k : array.sorted_order()) out.push_back(routing[k]);
    return out;
}

ConvergenceError::ConvergenceError(Optimum best, int cap)
    : Error(fmt::format("optimizer did not converge within {} iterations (residual {:.3g}, best R {:.9g})",
                        cap, best.residual, best.response_time)),
      best_(std::move(best)) {}

Feasibility feasibility(const HeterogeneousArray& array) {
    double capacity = 0.0;
    for (double s : array.service_times()) capacity += 1.0 / s;
    return {array.arrival_rate() < capacity, capacity};
}

double objective(const HeterogeneousArray& array, const RoutingVector& routing) {
    if (routing.size() != array.size()) {
        throw ValidationError(fmt::format("routing has {} entries for {} queues", routing.size(), array.size()));
    }
    return objective_raw(array, routing.fractions());
}

std::vector<double> gradient(const HeterogeneousArray& array, const RoutingVector& routing) {
    if (routing.size() != array.size()) {
        throw ValidationError(fmt::format("routing has {} entries for {} queues", routing.size(), array.size()));
    }
    return gradient_raw(array, routing.fractions());
}

double kkt_residual(std::span<const double> phi, std::span<const double> grad) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double zero_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (phi[k] > 0.0) {
            hi = std::max(hi, grad[k]);
            lo = std::min(lo, grad[k]);
        } else {
            zero_min = std::min(zero_min, grad[k]);
        }
    }
    if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    const double spread = hi - lo;
    const double shortfall = std::isfinite(zero_min) ? std::max(0.0, lo - zero_min) : 0.0;
    return std::max(spread, shortfall) / hi;
}

std::vector<double> project_capped_simplex(std::span<const double> y, std::span<const double> upper) {
    const std::size_t n = y.size();
    if (upper.size() != n) throw ValidationError("projection bounds do not match the point");
    const double cap_total = std::accumulate(upper.begin(), upper.end(), 0.0);
    if (!(cap_total >= 1.0)) throw ValidationError("capped simplex is empty: upper bounds sum below 1");

    auto mass = [&](double tau) {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) total += std::clamp(y[k] - tau, 0.0, upper[k]);
        return total;
    };

    // mass(tau) is piecewise linear and non-increasing with kinks at y_k and y_k - u_k.
    std::vector<double> kinks;
    kinks.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        kinks.push_back(y[k]);
        kinks.push_back(y[k] - upper[k]);
    }
    std::sort(kinks.begin(), kinks.end());

    // Find the last kink with mass >= 1; tau lies between it and the next one.
    std::size_t lo = 0;
    for (std::size_t i = 0; i < kinks.size(); ++i) {
        if (mass(kinks[i]) >= 1.0) lo = i;
    }
    const double left = kinks[lo];
    const double right = lo + 1 < kinks.size() ? kinks[lo + 1] : left + 1.0;
    const double probe = 0.5 * (left + right);

    double fixed = 0.0;
    double free_sum = 0.0;
    int free_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = y[k] - probe;
        if (v >= upper[k]) {
            fixed += upper[k];
        } else if (v > 0.0) {
            free_sum += y[k];
            ++free_count;
        }
    }
    const double tau = free_count > 0 ? (free_sum + fixed - 1.0) / free_count : left;

    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(y[k] - tau, 0.0, upper[k]);
    return x;
}

Optimum optimize_dual(double agg_rate, double fast, double slow) {
    const HeterogeneousArray array(agg_rate, {fast, slow});
    const auto feas = feasibility(array);
    if (!feas.feasible) throw InfeasibleError(agg_rate, feas.capacity);

    auto finish = [&](double phi, int iterations) {
        Optimum out{RoutingVector({phi, 1.0 - phi}), 0.0, iterations, true, 0.0};
        out.response_time = objective(array, out.routing);
        const auto g = gradient(array, out.routing);
        out.residual = kkt_residual(out.routing.fractions(), g);
        return out;
    };

    if (fast == slow) return finish(0.5, 0);

    // Derivative of the objective along phi: increasing on the stable interval.
    auto slope = [&](double phi) {
        return marginal(phi, agg_rate, fast) - marginal(1.0 - phi, agg_rate, slow);
    };

    // Stable interval for phi; an endpoint is closed only when it is not a pole.
    const bool lo_closed = agg_rate * slow < 1.0;
    const bool hi_closed = agg_rate * fast < 1.0;
    double lo = lo_closed ? 0.0 : 1.0 - 1.0 / (agg_rate * slow);
    double hi = hi_closed ? 1.0 : 1.0 / (agg_rate * fast);

    if (lo_closed && slope(0.0) >= 0.0) return finish(0.0, 0);
    if (hi_closed && slope(1.0) <= 0.0) return finish(1.0, 0);

    int iterations = 0;
    double mid = 0.5 * (lo + hi);
    while (iterations < 200) {
        ++iterations;
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double g = slope(mid);
        if (g == 0.0) break;
        (g < 0.0 ? lo : hi) = mid;
    }
    return finish(mid, iterations);
}

Optimum optimize_m(const HeterogeneousArray& array, const PgdOptions& options) {
    const auto feas = feasibility(array);
    if (!feas.feasible) throw InfeasibleError(array.arrival_rate(), feas.capacity);

    const std::size_t m = array.size();
    const double rate = array.arrival_rate();
    const auto s = array.service_times();

    std::vector<double> upper(m);
    for (std::size_t k = 0; k < m; ++k) {
        upper[k] = rate > 0.0 ? std::min(1.0, (1.0 - options.stability_guard) / (rate * s[k])) : 1.0;
    }
    if (std::accumulate(upper.begin(), upper.end(), 0.0) < 1.0) {
        throw InfeasibleError(rate, feas.capacity);
    }

    // Seed proportional to service rates; stable whenever the array is feasible.
    std::vector<double> phi(m);
    for (std::size_t k = 0; k < m; ++k) phi[k] = 1.0 / s[k];
    for (auto& p : phi) p /= feas.capacity;
    phi = project_capped_simplex(phi, upper);

    auto grad = gradient_raw(array, phi);
    double residual = kkt_residual(phi, grad);
    double step = 1.0;
    int it = 0;

    // Backtracking uses the convexity bound f(y) - f(x) <= g(y).(y - x): the
    // usual sufficient-decrease inequality holds whenever
    // (g(y) - g(x)).(y - x) <= |y - x|^2 / (2 step). This avoids comparing
    // objective values, whose differences vanish into rounding near the optimum.
    std::vector<double> trial(m);
    std::vector<double> shifted(m);
    std::vector<double> trial_grad(m);
    while (residual >= options.tolerance && it < options.max_iterations) {
        ++it;
        bool accepted = false;
        for (int halvings = 0; halvings < 200; ++halvings) {
            for (std::size_t k = 0; k < m; ++k) shifted[k] = phi[k] - step * grad[k];
            trial = project_capped_simplex(shifted, upper);
            double dist2 = 0.0;
            for (std::size_t k = 0; k < m; ++k) dist2 += (trial[k] - phi[k]) * (trial[k] - phi[k]);
            if (dist2 == 0.0) break;
            trial_grad = gradient_raw(array, trial);
            double curvature = 0.0;
            for (std::size_t k = 0; k < m; ++k) curvature += (trial_grad[k] - grad[k]) * (trial[k] - phi[k]);
            if (curvature <= dist2 / (2.0 * step)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        phi.swap(trial);
        grad.swap(trial_grad);
        residual = kkt_residual(phi, grad);
        step *= 2.0;
    }

    apply_tie_rule(array, phi);
    Optimum out{RoutingVector(phi), 0.0, it, false, 0.0};
    out.response_time = objective(array, out.routing);
    out.residual = kkt_residual(phi, gradient_raw(array, phi));
    out.converged = out.residual < options.tolerance;
    if (!out.converged) throw ConvergenceError(std::move(out), options.max_iterations);
    return out;
}

}  // namespace pfsq::opt
