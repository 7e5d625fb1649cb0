#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pfsq::network {

/// One service facility.
struct QueueNode {
    std::string name;
    double service_time = 0.0;
    int visits = 1;

    bool operator==(const QueueNode&) const = default;
};

/// How a homogeneous parallel array is presented to the solver.
///  A: one representative queue that sees lambda/m.
///  B: m enumerated queues with service time S/m, each seeing the global lambda.
enum class Construction { MethodA, MethodB };

/// m identical queues side by side; the aggregate stream is split equally.
/// `service_time` is the per-queue service time S.
struct ParallelArray {
    int count = 1;
    double service_time = 0.0;
    Construction method = Construction::MethodB;
    std::string prefix = "ParaQ";

    bool operator==(const ParallelArray&) const = default;
};

/// Queues in series; every request visits every stage once.
struct TandemChain {
    std::vector<QueueNode> stages;

    bool operator==(const TandemChain&) const = default;
};

/// A single queue revisited `node.visits` times.
struct FeedbackQueue {
    QueueNode node;

    bool operator==(const FeedbackQueue&) const = default;
};

using Topology = std::variant<ParallelArray, TandemChain, FeedbackQueue>;

/// Open network: one Poisson workload with aggregate rate `arrival_rate`.
/// Construct through the factory functions below, which validate.
class OpenNetwork {
public:
    OpenNetwork(std::string workload_name, double arrival_rate, Topology topology);

    const std::string& workload_name() const noexcept { return workload_; }
    double arrival_rate() const noexcept { return arrival_rate_; }
    const Topology& topology() const noexcept { return topology_; }

    bool operator==(const OpenNetwork&) const = default;

private:
    std::string workload_;
    double arrival_rate_;
    Topology topology_;
};

inline constexpr const char* kDefaultWorkload = "Requests";

OpenNetwork build_parallel_method_a(double agg_rate, double service_time, int m,
                                    std::string workload = kDefaultWorkload);
OpenNetwork build_parallel_method_b(double agg_rate, double service_time, int m,
                                    std::string workload = kDefaultWorkload);
/// `count` stages named <prefix>1..<prefix>count, each with `stage_service_time`.
OpenNetwork build_tandem(double agg_rate, double stage_service_time, int count,
                         std::string workload = kDefaultWorkload,
                         const std::string& prefix = "SerQ");
OpenNetwork build_feedback(double agg_rate, double stage_service_time, int visits,
                           std::string workload = kDefaultWorkload,
                           std::string name = "FbQ");

/// Per-node metrics as they appear in the report.
struct NodeMetrics {
    std::string name;
    /// Number of identical queues this row stands for (m for a Method A array).
    int multiplicity = 1;
    double throughput = 0.0;
    double utilization = 0.0;
    double queue_length = 0.0;
    double residence_time = 0.0;
};

struct SolutionReport {
    std::string workload_name;
    std::vector<NodeMetrics> nodes;
    double system_residence = 0.0;
    double system_throughput = 0.0;

    const NodeMetrics* find(const std::string& name) const;
};

/// Analytic solution. Throws SaturationError naming the first saturated node.
///
/// Parallel arrays report the per-queue share lambda/m as node throughput
/// under both constructions. For Method B each enumerated node carries
/// residence (S/m)/(1-rho), and the node residences add up to the system value.
SolutionReport solve(const OpenNetwork& network);

/// Homogeneous parallel array -> m tandem stages of S/m at the same lambda.
/// Stages keep the array's node prefix so names stay traceable.
OpenNetwork serialize_transform(const OpenNetwork& parallel);

/// Inverse of serialize_transform: a homogeneous chain of m stages with stage
/// time s becomes an m-way array with per-queue service time m*s and the same
/// residence time.
OpenNetwork parallel_equivalent_transform(const OpenNetwork& serial);

/// Replace a homogeneous chain of m stages (stage time s) by m parallel queues
/// that keep the stage time s.
///  keep_stage_load = true:  each queue still sees the full rate lambda, so the
///                           array receives m*lambda in aggregate and the
///                           residence is exactly R_serial / m.
///  keep_stage_load = false: lambda is split m ways; the speedup is m only in
///                           the zero-load limit.
OpenNetwork parallelize_transform(const OpenNetwork& serial, bool keep_stage_load);

/// Stage service time when `chain` is homogeneous, nullopt otherwise.
std::optional<double> homogeneous_stage_time(const TandemChain& chain);

}  // namespace pfsq::network
