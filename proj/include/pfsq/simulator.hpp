#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pfsq/network.hpp"

namespace pfsq::sim {

/// Queues side by side; arrival goes to queue k with probability routing[k].
/// An empty routing vector means uniform 1/m.
struct ParallelRoute {
    std::vector<double> service_times;
    std::vector<double> routing;
};

/// Stages in series, FCFS at each stage.
struct TandemRoute {
    std::vector<double> stage_times;
};

/// One FCFS queue; a request rejoins the tail until it has been served `visits` times.
struct FeedbackRoute {
    double service_time = 0.0;
    int visits = 1;
};

using SimTopology = std::variant<ParallelRoute, TandemRoute, FeedbackRoute>;

struct SimConfig {
    std::uint64_t seed = 1;
    /// Completions discarded before measuring. Defaults to 10% of measured.
    std::optional<std::uint64_t> warmup_completions;
    std::uint64_t measured_completions = 200'000;
    double arrival_rate = 0.0;
    SimTopology topology;
    int batches = 20;
};

struct SimStats {
    double mean_residence = 0.0;
    /// 95% half-width from batch means (Student t, batches - 1 dof).
    double half_width_95 = 0.0;
    std::vector<double> batch_means;
    std::vector<double> per_node_utilization;
    std::uint64_t completions = 0;
    /// Counted over the whole run including warmup and the final drain.
    std::vector<std::uint64_t> per_node_arrivals;
    std::vector<std::uint64_t> per_node_completions;
    /// Number of served visits that started out of FIFO order (always 0).
    std::uint64_t fifo_violations = 0;
    double simulated_time = 0.0;

    bool operator==(const SimStats&) const = default;
};

struct Comparison {
    double analytic = 0.0;
    SimStats stats;
    double relative_error = 0.0;
    /// Analytic value inside the 95% CI, or within 2% relative.
    bool pass = false;
};

/// Physical topology simulated for an analytic network. A parallel array is
/// simulated as m queues of service time S with uniform random routing,
/// whichever construction the model used.
SimTopology topology_from(const network::OpenNetwork& network);

/// Per-node utilizations implied by the configuration.
std::vector<double> offered_utilization(const SimConfig& config);

/// Closed-form mean residence for the configuration.
double analytic_residence(const SimConfig& config);

/// Runs one replication. Deterministic in `config`.
/// Random streams are std::mt19937_64 engines seeded with
/// splitmix64(splitmix64(seed) + golden * (node + 1) + purpose), where node
/// is the queue index (arrivals and routing use node = -1) and purpose is
/// 1 = interarrival, 2 = routing, 3 = service.
SimStats simulate(const SimConfig& config);

Comparison compare_analytic(const SimConfig& config);

}  // namespace pfsq::sim
