#include "pfsq/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pfsq/errors.hpp"
#include "pfsq/kernel.hpp"

namespace pfsq::cli {
namespace {

// Report layout: Metric 16, Resource 13, Work 10, Value right-aligned 13.
constexpr std::size_t kMetricWidth = 16;
constexpr std::size_t kResourceWidth = 13;
constexpr std::size_t kWorkWidth = 10;
constexpr std::size_t kValueWidth = 13;

std::string pad(const std::string& s, std::size_t width) {
    return s.size() < width ? s + std::string(width - s.size(), ' ') : s + ' ';
}

std::string fixed4(double v) { return fmt::format("{:.4f}", v); }

std::string topology_label(const network::OpenNetwork& net) {
    return std::visit(
        [](const auto& t) -> std::string {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, network::ParallelArray>) {
                const bool a = t.method == network::Construction::MethodA;
                return fmt::format("parallel array, m = {}, S = {}, Method {}{}", t.count, t.service_time,
                                   a ? "A" : "B",
                                   a ? fmt::format(" ({} stands for {} identical queues)", t.prefix, t.count)
                                     : std::string());
            } else if constexpr (std::is_same_v<T, network::TandemChain>) {
                return fmt::format("tandem chain, {} stages", t.stages.size());
            } else {
                return fmt::format("feedback queue, S = {}, V = {}", t.node.service_time, t.node.visits);
            }
        },
        net.topology());
}

}  // namespace

std::vector<ReportRow> report_rows(const network::SolutionReport& report) {
    std::vector<ReportRow> rows;
    const auto& work = report.workload_name;
    for (const auto& n : report.nodes) {
        rows.push_back({"Capacity", n.name, work, "1", "Servers"});
        rows.push_back({"Throughput", n.name, work, fixed4(n.throughput), "Requests/Sec"});
        rows.push_back({"Utilization", n.name, work, fixed4(100.0 * n.utilization), "Percent"});
        rows.push_back({"Queue length", n.name, work, fixed4(n.queue_length), "Requests"});
        rows.push_back({"Residence time", n.name, work, fixed4(n.residence_time), "Sec"});
    }
    return rows;
}

std::string render_rows(const std::vector<ReportRow>& rows) {
    auto line = [](const std::string& metric, const std::string& resource, const std::string& work,
                   const std::string& value, const std::string& unit) {
        std::string v = value.size() < kValueWidth ? std::string(kValueWidth - value.size(), ' ') + value
                                                   : ' ' + value;
        return pad(metric, kMetricWidth) + pad(resource, kResourceWidth) + pad(work, kWorkWidth) + v + "   " +
               unit + "\n";
    };
    std::string out = line("Metric", "Resource", "Work", "Value", "Unit");
    out += line("------", "--------", "----", "-----", "----");
    for (const auto& r : rows) out += line(r.metric, r.resource, r.work, r.value, r.unit);
    return out;
}

std::string render_report(const network::OpenNetwork& net, const network::SolutionReport& report) {
    std::string out;
    out += fmt::format("Workload:     {}\n", report.workload_name);
    out += fmt::format("Arrival rate: {:.4f} Requests/Sec\n", net.arrival_rate());
    out += fmt::format("Topology:     {}\n\n", topology_label(net));
    out += render_rows(report_rows(report));
    out += "\n";
    out += fmt::format("System throughput:     {:.4f} Requests/Sec\n", report.system_throughput);
    out += fmt::format("System residence time: {:.4f} Sec\n", report.system_residence);
    return out;
}

std::string render_optimum(const opt::HeterogeneousArray& array, const opt::Optimum& optimum) {
    std::string out;
    out += fmt::format("Arrival rate: {} Requests/Sec, m = {}\n\n", array.arrival_rate(), array.size());
    out += fmt::format("{:<18}{:<12}{:>10}\n", "Service time", "Parameter", "Value");
    out += fmt::format("{:<18}{:<12}{:>10}\n", "------------", "---------", "-----");
    const auto s = array.service_times();
    for (std::size_t k = 0; k < array.size(); ++k) {
        out += fmt::format("{:<18}{:<12}{:>10.6f}\n", fmt::format("S_{} = {}", k + 1, s[k]),
                           fmt::format("phi_{}", k + 1), optimum.routing[k]);
    }
    out += fmt::format("{:<18}{:<12}{:>10.6f}\n", "", fmt::format("R*_{}", array.size()), optimum.response_time);
    out += fmt::format("\nIterations: {}  residual: {:.3e}\n", optimum.iterations, optimum.residual);
    return out;
}

std::vector<SweepRow> sweep(double agg_rate, double fast, double slow, int steps) {
    if (steps < 2) throw ValidationError(fmt::format("sweep needs steps >= 2, got {}", steps));
    const opt::HeterogeneousArray array(agg_rate, {fast, slow});
    const auto feas = opt::feasibility(array);
    if (!feas.feasible) throw InfeasibleError(agg_rate, feas.capacity);

    const double lo = agg_rate * slow < 1.0 ? 0.0 : 1.0 - 1.0 / (agg_rate * slow);
    const double hi = agg_rate * fast < 1.0 ? 1.0 : 1.0 / (agg_rate * fast);
    const double width = (hi - lo) / steps;

    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        SweepRow r;
        r.phi = lo + (i + 0.5) * width;
        const double to_slow = 1.0 - r.phi;
        r.r_fast = r.phi * fast / (1.0 - r.phi * agg_rate * fast);
        r.r_slow = to_slow * slow / (1.0 - to_slow * agg_rate * slow);
        r.r_total = r.r_fast + r.r_slow;
        rows.push_back(r);
    }
    return rows;
}

std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "phi,r_fast,r_slow,r_total\n";
    for (const auto& r : rows) {
        out += fmt::format("{:.9f},{:.12g},{:.12g},{:.12g}\n", r.phi, r.r_fast, r.r_slow, r.r_total);
    }
    return out;
}

EquivalenceTable equivalence(double agg_rate, double service_time, int m) {
    EquivalenceTable t;
    t.r_parallel = kernel::parallel_array_residence(agg_rate, service_time, m);
    t.r_serial = kernel::tandem_residence(agg_rate, service_time, m);
    t.feedback_utilization = kernel::utilization(agg_rate, service_time);
    if (t.feedback_utilization < 1.0) {
        t.r_feedback = kernel::feedback_residence(agg_rate, service_time / m, m);
    }
    t.relative_gap = std::abs(t.r_parallel - t.r_serial) / std::max(t.r_parallel, t.r_serial);
    t.equivalent = t.relative_gap <= kEquivalenceTolerance;
    return t;
}

std::string render_equivalence(double agg_rate, double service_time, int m, const EquivalenceTable& t) {
    std::string out;
    out += fmt::format("lambda = {}, S = {}, m = {}, per-queue utilization = {:.6f}\n\n", agg_rate, service_time, m,
                       agg_rate * service_time / m);
    out += fmt::format("{:<44}{:.6f}\n", "R_para     (m queues, S, rate lambda/m)", t.r_parallel);
    out += fmt::format("{:<44}{:.6f}\n", "R_serial   (m stages, S/m, rate lambda)", t.r_serial);
    if (t.r_feedback) {
        out += fmt::format("{:<44}{:.6f}\n", "R_feedback (1 queue, V = m visits of S/m)", *t.r_feedback);
    } else {
        out += fmt::format("{:<44}saturated (utilization {:.6f})\n", "R_feedback (1 queue, V = m visits of S/m)",
                           t.feedback_utilization);
    }
    out += "\n";
    out += fmt::format("{:<44}{:.3e} (relative {:.3e})\n", "|R_para - R_serial|",
                       std::abs(t.r_parallel - t.r_serial), t.relative_gap);
    if (t.r_feedback) {
        out += fmt::format("{:<44}{:.6f}\n", "R_feedback - R_serial", *t.r_feedback - t.r_serial);
    }
    out += fmt::format("{:<44}{}\n", "parallel == tandem (relative 1e-12)", t.equivalent ? "yes" : "NO");
    return out;
}

std::string render_comparison(const sim::SimConfig& config, const sim::Comparison& c) {
    const auto& s = c.stats;
    const auto rho = sim::offered_utilization(config);
    std::string out;
    out += fmt::format("{:<26}{:.6f} Sec\n", "Analytic residence time", c.analytic);
    out += fmt::format("{:<26}{:.6f} Sec\n", "Simulated mean", s.mean_residence);
    out += fmt::format("{:<26}[{:.6f}, {:.6f}] (half-width {:.6f}, {} batch means)\n", "95% confidence interval",
                       s.mean_residence - s.half_width_95, s.mean_residence + s.half_width_95, s.half_width_95,
                       s.batch_means.size());
    out += fmt::format("{:<26}{} (seed {}, warmup {})\n", "Measured completions", s.completions, config.seed,
                       config.warmup_completions.value_or(config.measured_completions / 10));
    out += fmt::format("{:<26}{:.4f}%\n", "Relative error", 100.0 * c.relative_error);
    for (std::size_t k = 0; k < rho.size(); ++k) {
        out += fmt::format("{:<26}simulated {:.4f}  analytic {:.4f}\n", fmt::format("Utilization node {}", k + 1),
                           s.per_node_utilization[k], rho[k]);
    }
    out += fmt::format("{:<26}{}\n", "Result", c.pass ? "PASS" : "FAIL");
    return out;
}

}  // namespace pfsq::cli
