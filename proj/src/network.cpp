#include "pfsq/network.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "pfsq/errors.hpp"
#include "pfsq/kernel.hpp"

namespace pfsq::network {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_service_time(double s, const std::string& who) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw ValidationError(fmt::format("{}: service time must be > 0, got {}", who, s));
    }
}

void validate(const ParallelArray& p) {
    if (p.count < 1) throw ValidationError(fmt::format("parallel array needs m >= 1, got {}", p.count));
    if (p.prefix.empty()) throw ValidationError("parallel array needs a non-empty node prefix");
    check_service_time(p.service_time, p.prefix);
}

void validate(const TandemChain& t) {
    if (t.stages.empty()) throw ValidationError("tandem chain needs at least one stage");
    std::set<std::string> names;
    for (const auto& n : t.stages) {
        if (n.name.empty()) throw ValidationError("tandem stage needs a name");
        if (!names.insert(n.name).second) {
            throw ValidationError(fmt::format("duplicate node name '{}'", n.name));
        }
        check_service_time(n.service_time, n.name);
        if (n.visits != 1) {
            throw ValidationError(fmt::format("tandem stage '{}' must have exactly one visit", n.name));
        }
    }
}

void validate(const FeedbackQueue& f) {
    if (f.node.name.empty()) throw ValidationError("feedback queue needs a name");
    check_service_time(f.node.service_time, f.node.name);
    if (f.node.visits < 1) {
        throw ValidationError(fmt::format("feedback queue '{}' needs visits >= 1, got {}",
                                          f.node.name, f.node.visits));
    }
}

NodeMetrics node_metrics(std::string name, double local_rate, double service_time,
                         double reported_throughput, int multiplicity = 1) {
    NodeMetrics out;
    out.name = std::move(name);
    out.multiplicity = multiplicity;
    out.throughput = reported_throughput;
    out.utilization = kernel::utilization(local_rate, service_time);
    out.residence_time = kernel::mm1_residence(local_rate, service_time, out.name);
    out.queue_length = kernel::queue_length(out.utilization);
    return out;
}

std::string node_name(const std::string& prefix, int k) { return fmt::format("{}{}", prefix, k); }

}  // namespace

OpenNetwork::OpenNetwork(std::string workload_name, double arrival_rate, Topology topology)
    : workload_(std::move(workload_name)), arrival_rate_(arrival_rate), topology_(std::move(topology)) {
    if (workload_.empty()) throw ValidationError("workload name must not be empty");
    if (!(arrival_rate_ >= 0.0) || !std::isfinite(arrival_rate_)) {
        throw ValidationError(fmt::format("arrival rate must be >= 0, got {}", arrival_rate_));
    }
    std::visit([](const auto& t) { validate(t); }, topology_);
}

OpenNetwork build_parallel_method_a(double agg_rate, double service_time, int m, std::string workload) {
    return OpenNetwork(std::move(workload), agg_rate,
                       ParallelArray{m, service_time, Construction::MethodA, "ParaQ"});
}

OpenNetwork build_parallel_method_b(double agg_rate, double service_time, int m, std::string workload) {
    return OpenNetwork(std::move(workload), agg_rate,
                       ParallelArray{m, service_time, Construction::MethodB, "ParaQ"});
}

OpenNetwork build_tandem(double agg_rate, double stage_service_time, int count, std::string workload,
                         const std::string& prefix) {
    if (count < 1) throw ValidationError(fmt::format("tandem chain needs >= 1 stage, got {}", count));
    TandemChain chain;
    chain.stages.reserve(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) chain.stages.push_back({node_name(prefix, k), stage_service_time, 1});
    return OpenNetwork(std::move(workload), agg_rate, std::move(chain));
}

OpenNetwork build_feedback(double agg_rate, double stage_service_time, int visits, std::string workload,
                           std::string name) {
    return OpenNetwork(std::move(workload), agg_rate,
                       FeedbackQueue{QueueNode{std::move(name), stage_service_time, visits}});
}

const NodeMetrics* SolutionReport::find(const std::string& name) const {
    for (const auto& n : nodes) {
        if (n.name == name) return &n;
    }
    return nullptr;
}

SolutionReport solve(const OpenNetwork& network) {
    const double lambda = network.arrival_rate();
    SolutionReport report;
    report.workload_name = network.workload_name();
    report.system_throughput = lambda;

    std::visit(
        overloaded{
            [&](const ParallelArray& p) {
                const double share = lambda / p.count;
                if (p.method == Construction::MethodA) {
                    // Representative queue: local rate lambda/m, service time S.
                    report.nodes.push_back(node_metrics(p.prefix, share, p.service_time, share, p.count));
                    report.system_residence = report.nodes.front().residence_time;
                    return;
                }
                // Enumerated queues: global lambda, service time S/m each.
                const double stage = p.service_time / p.count;
                double total = 0.0;
                for (int k = 1; k <= p.count; ++k) {
                    report.nodes.push_back(node_metrics(node_name(p.prefix, k), lambda, stage, share));
                    total += report.nodes.back().residence_time;
                }
                report.system_residence = total;
            },
            [&](const TandemChain& t) {
                double total = 0.0;
                for (const auto& s : t.stages) {
                    report.nodes.push_back(node_metrics(s.name, lambda, s.service_time, lambda));
                    total += report.nodes.back().residence_time;
                }
                report.system_residence = total;
            },
            [&](const FeedbackQueue& f) {
                const double demand = f.node.visits * f.node.service_time;
                report.nodes.push_back(node_metrics(f.node.name, lambda, demand, lambda * f.node.visits));
                report.system_residence = report.nodes.front().residence_time;
            },
        },
        network.topology());
    return report;
}

std::optional<double> homogeneous_stage_time(const TandemChain& chain) {
    if (chain.stages.empty()) return std::nullopt;
    const double s = chain.stages.front().service_time;
    for (const auto& n : chain.stages) {
        if (n.service_time != s) return std::nullopt;
    }
    return s;
}

OpenNetwork serialize_transform(const OpenNetwork& parallel) {
    const auto* p = std::get_if<ParallelArray>(&parallel.topology());
    if (p == nullptr) throw ValidationError("serialize_transform expects a homogeneous parallel array");
    return build_tandem(parallel.arrival_rate(), p->service_time / p->count, p->count,
                        parallel.workload_name(), p->prefix);
}

namespace {

struct HomogeneousChain {
    int stages;
    double stage_time;
};

HomogeneousChain require_homogeneous_chain(const OpenNetwork& serial, const char* op) {
    const auto* t = std::get_if<TandemChain>(&serial.topology());
    if (t == nullptr) throw ValidationError(fmt::format("{} expects a tandem chain", op));
    const auto s = homogeneous_stage_time(*t);
    if (!s) throw ValidationError(fmt::format("{} rejects heterogeneous stage service times", op));
    return {static_cast<int>(t->stages.size()), *s};
}

}  // namespace

OpenNetwork parallel_equivalent_transform(const OpenNetwork& serial) {
    const auto chain = require_homogeneous_chain(serial, "parallel_equivalent_transform");
    return OpenNetwork(serial.workload_name(), serial.arrival_rate(),
                       ParallelArray{chain.stages, chain.stage_time * chain.stages,
                                     Construction::MethodB, "ParaQ"});
}

OpenNetwork parallelize_transform(const OpenNetwork& serial, bool keep_stage_load) {
    const auto chain = require_homogeneous_chain(serial, "parallelize_transform");
    const double lambda = serial.arrival_rate();
    const double aggregate = keep_stage_load ? lambda * chain.stages : lambda;
    return OpenNetwork(serial.workload_name(), aggregate,
                       ParallelArray{chain.stages, chain.stage_time, Construction::MethodA, "ParaQ"});
}

}  // namespace pfsq::network
