#include "pfsq/cli.hpp"

#include <cmath>
#include <functional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pfsq/errors.hpp"
#include "pfsq/model_file.hpp"
#include "pfsq/network.hpp"
#include "pfsq/optimizer.hpp"
#include "pfsq/report.hpp"
#include "pfsq/simulator.hpp"

namespace pfsq::cli {
namespace {

// Count-valued flags accept decimal notation (4, 4.0, 2e5) as long as the value is integral.
std::uint64_t whole(double v, const char* flag) {
    if (!std::isfinite(v) || v < 0.0 || v != std::floor(v) || v > 1.8e19) {
        throw ValidationError(fmt::format("{} must be a whole number, got {}", flag, v));
    }
    return static_cast<std::uint64_t>(v);
}

int whole_int(double v, const char* flag) {
    const auto n = whole(v, flag);
    if (n < 1 || n > 1'000'000) throw ValidationError(fmt::format("{} must be in [1, 1000000], got {}", flag, v));
    return static_cast<int>(n);
}

std::vector<double> parse_services(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const auto comma = std::min(csv.find(',', pos), csv.size());
        const std::string item = csv.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw ValidationError(fmt::format("--services: '{}' is not a decimal number", item));
        }
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

sim::SimConfig sim_config_for(const ModelFile& model, const opt::Optimum* optimum) {
    sim::SimConfig config;
    const SimulateSection s = model.simulate.value_or(SimulateSection{});
    config.seed = s.seed;
    config.measured_completions = s.completions;
    config.warmup_completions = s.warmup;
    config.arrival_rate = model.network.arrival_rate;
    if (const auto* o = std::get_if<OptimizeSection>(&model.body)) {
        const auto phi = optimum->routing.fractions();
        config.topology = sim::ParallelRoute{o->service_times, {phi.begin(), phi.end()}};
    } else {
        config.topology = sim::topology_from(to_network(model));
    }
    return config;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Open queueing network solver and routing optimizer", "pfsq"};
    app.require_subcommand(1);

    std::string model_path;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a model file and print the node report");
    solve_cmd->add_option("file", model_path, "Model file")->required();

    double rate = 0.0;
    double service = 0.0;
    double m_flag = 0.0;
    auto* eq_cmd = app.add_subcommand("equivalence", "Compare parallel, tandem and feedback residence times");
    eq_cmd->add_option("--rate", rate, "Aggregate arrival rate")->required();
    eq_cmd->add_option("--service", service, "Per-queue service time S")->required();
    eq_cmd->add_option("--m", m_flag, "Number of queues / stages")->required();

    std::string services;
    auto* opt_cmd = app.add_subcommand("optimize", "Optimal routing over heterogeneous parallel queues");
    opt_cmd->add_option("--rate", rate, "Aggregate arrival rate")->required();
    opt_cmd->add_option("--services", services, "Comma-separated service times")->required();

    double fast = 0.0;
    double slow = 0.0;
    double steps = 0.0;
    auto* sweep_cmd = app.add_subcommand("sweep", "CSV response-time profile of a fast/slow pair");
    sweep_cmd->add_option("--rate", rate, "Aggregate arrival rate")->required();
    sweep_cmd->add_option("--fast", fast, "Fast service time")->required();
    sweep_cmd->add_option("--slow", slow, "Slow service time")->required();
    sweep_cmd->add_option("--steps", steps, "Number of grid points")->required();

    std::optional<double> seed;
    std::optional<double> completions;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a model and compare with the analytic value");
    sim_cmd->add_option("file", model_path, "Model file")->required();
    sim_cmd->add_option("--seed", seed, "Random seed");
    sim_cmd->add_option("--completions", completions, "Measured completions");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidInput;
    }

    try {
        if (solve_cmd->parsed()) {
            const auto model = parse_model(model_path);
            if (const auto* o = std::get_if<OptimizeSection>(&model.body)) {
                const opt::HeterogeneousArray array(model.network.arrival_rate, o->service_times);
                out << render_optimum(array, opt::optimize_m(array));
            } else {
                const auto net = to_network(model);
                out << render_report(net, network::solve(net));
            }
        } else if (eq_cmd->parsed()) {
            const int m = whole_int(m_flag, "--m");
            const auto table = equivalence(rate, service, m);
            out << render_equivalence(rate, service, m, table);
            if (!table.equivalent) return kInvalidInput;
        } else if (opt_cmd->parsed()) {
            const opt::HeterogeneousArray array(rate, parse_services(services));
            out << render_optimum(array, opt::optimize_m(array));
        } else if (sweep_cmd->parsed()) {
            out << render_sweep_csv(sweep(rate, fast, slow, whole_int(steps, "--steps")));
        } else if (sim_cmd->parsed()) {
            auto model = parse_model(model_path);
            if (!model.simulate) throw ValidationError("model has no [simulate] section");
            if (seed) model.simulate->seed = whole(*seed, "--seed");
            if (completions) model.simulate->completions = whole(*completions, "--completions");
            std::optional<opt::Optimum> optimum;
            if (const auto* o = std::get_if<OptimizeSection>(&model.body)) {
                optimum = opt::optimize_m(opt::HeterogeneousArray(model.network.arrival_rate, o->service_times));
            }
            const auto config = sim_config_for(model, optimum ? &*optimum : nullptr);
            const auto comparison = sim::compare_analytic(config);
            out << render_comparison(config, comparison);
            return comparison.pass ? kOk : kSimulationMismatch;
        }
    } catch (const SaturationError& e) {
        err << "error: saturation: resource " << e.resource() << " utilization "
            << fmt::format("{:.6f}", e.utilization()) << " (must be < 1)\n";
        return kSaturated;
    } catch (const InfeasibleError& e) {
        err << "error: infeasible: " << e.what() << "\n";
        return kSaturated;
    } catch (const opt::ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kNotConverged;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    }
    return kOk;
}

}  // namespace pfsq::cli
