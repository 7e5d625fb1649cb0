#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfsq/network.hpp"
#include "pfsq/optimizer.hpp"
#include "pfsq/simulator.hpp"

namespace pfsq::cli {

/// One line of the node report: Metric / Resource / Work / Value / Unit.
struct ReportRow {
    std::string metric;
    std::string resource;
    std::string work;
    std::string value;  // already rounded for display
    std::string unit;
};

/// Rows for every node (Capacity, Throughput, Utilization, Queue length,
/// Residence time). Values use 4 decimals, utilization in percent.
std::vector<ReportRow> report_rows(const network::SolutionReport& report);

/// Fixed-width rendering of `rows` with the two header lines.
std::string render_rows(const std::vector<ReportRow>& rows);

/// Full text report: model header, node rows and a system summary.
std::string render_report(const network::OpenNetwork& network, const network::SolutionReport& report);

/// Service times, routing fractions (6 decimals) and R*_m.
std::string render_optimum(const opt::HeterogeneousArray& array, const opt::Optimum& optimum);

struct SweepRow {
    double phi = 0.0;
    double r_fast = 0.0;
    double r_slow = 0.0;
    double r_total = 0.0;
};

/// Response-time profile of a fast/slow pair. `steps` cell-centred points
/// on the stable interval of phi, ascending.
std::vector<SweepRow> sweep(double agg_rate, double fast, double slow, int steps);

/// CSV with a header row; '.' decimals, comma delimiter.
std::string render_sweep_csv(const std::vector<SweepRow>& rows);

struct EquivalenceTable {
    double r_parallel = 0.0;
    double r_serial = 0.0;
    /// Empty when the feedback queue (demand S) is saturated.
    std::optional<double> r_feedback;
    double feedback_utilization = 0.0;
    double relative_gap = 0.0;
    bool equivalent = false;
};

inline constexpr double kEquivalenceTolerance = 1e-12;

EquivalenceTable equivalence(double agg_rate, double service_time, int m);
std::string render_equivalence(double agg_rate, double service_time, int m, const EquivalenceTable& table);

std::string render_comparison(const sim::SimConfig& config, const sim::Comparison& comparison);

}  // namespace pfsq::cli
