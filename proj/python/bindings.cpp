#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pfsq/errors.hpp"
#include "pfsq/kernel.hpp"
#include "pfsq/model_file.hpp"
#include "pfsq/network.hpp"
#include "pfsq/optimizer.hpp"
#include "pfsq/report.hpp"
#include "pfsq/simulator.hpp"

namespace py = pybind11;
using namespace pfsq;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

sim::SimConfig make_config(double rate, const sim::SimTopology& topology, std::uint64_t seed,
                           std::uint64_t completions, std::optional<std::uint64_t> warmup, int batches) {
    sim::SimConfig c;
    c.arrival_rate = rate;
    c.topology = topology;
    c.seed = seed;
    c.measured_completions = completions;
    c.warmup_completions = warmup;
    c.batches = batches;
    return c;
}

network::OpenNetwork load_network(const std::filesystem::path& path) {
    return cli::to_network(cli::parse_model(path));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Open queueing network models of parallel and serial queue arrays";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<cli::ParseError>(m, "ParseError", validation.ptr());
    py::register_exception<SaturationError>(m, "SaturationError", error.ptr());
    py::register_exception<InfeasibleError>(m, "InfeasibleError", error.ptr());
    py::register_exception<SimulationError>(m, "SimulationError", error.ptr());
    py::register_exception<opt::ConvergenceError>(m, "ConvergenceError", error.ptr());

    // kernel
    m.def("utilization", &kernel::utilization, py::arg("arrival_rate"), py::arg("service_time"));
    m.def("mm1_residence", &kernel::mm1_residence, py::arg("arrival_rate"), py::arg("service_time"),
          py::arg("resource") = "queue");
    m.def("parallel_array_residence", &kernel::parallel_array_residence, py::arg("rate"), py::arg("service_time"),
          py::arg("m"));
    m.def("tandem_residence", &kernel::tandem_residence, py::arg("rate"), py::arg("total_service_time"), py::arg("m"));
    m.def("feedback_residence", &kernel::feedback_residence, py::arg("rate"), py::arg("stage_service_time"),
          py::arg("visits"));
    m.def("queue_length", &kernel::queue_length, py::arg("utilization"));

    // networks
    py::class_<network::OpenNetwork>(m, "OpenNetwork")
        .def_property_readonly("workload_name", &network::OpenNetwork::workload_name)
        .def_property_readonly("arrival_rate", &network::OpenNetwork::arrival_rate)
        .def("__eq__", [](const network::OpenNetwork& a, const network::OpenNetwork& b) { return a == b; });

    py::class_<network::NodeMetrics>(m, "NodeMetrics")
        .def_readonly("name", &network::NodeMetrics::name)
        .def_readonly("multiplicity", &network::NodeMetrics::multiplicity)
        .def_readonly("throughput", &network::NodeMetrics::throughput)
        .def_readonly("utilization", &network::NodeMetrics::utilization)
        .def_readonly("queue_length", &network::NodeMetrics::queue_length)
        .def_readonly("residence_time", &network::NodeMetrics::residence_time)
        .def("__repr__", [](const network::NodeMetrics& n) {
            return "<NodeMetrics " + n.name + " R=" + std::to_string(n.residence_time) + ">";
        });

    py::class_<network::SolutionReport>(m, "SolutionReport")
        .def_readonly("workload_name", &network::SolutionReport::workload_name)
        .def_readonly("nodes", &network::SolutionReport::nodes)
        .def_readonly("system_residence", &network::SolutionReport::system_residence)
        .def_readonly("system_throughput", &network::SolutionReport::system_throughput);

    m.def("build_parallel_method_a", &network::build_parallel_method_a, py::arg("rate"), py::arg("service_time"),
          py::arg("m"), py::arg("workload") = network::kDefaultWorkload);
    m.def("build_parallel_method_b", &network::build_parallel_method_b, py::arg("rate"), py::arg("service_time"),
          py::arg("m"), py::arg("workload") = network::kDefaultWorkload);
    m.def("build_tandem", &network::build_tandem, py::arg("rate"), py::arg("stage_service_time"), py::arg("count"),
          py::arg("workload") = network::kDefaultWorkload, py::arg("prefix") = "SerQ");
    m.def("build_feedback", &network::build_feedback, py::arg("rate"), py::arg("stage_service_time"),
          py::arg("visits"), py::arg("workload") = network::kDefaultWorkload, py::arg("name") = "FbQ");
    m.def("load_network", &load_network, py::arg("path"), "Read a model file and build its network");
    m.def("solve", &network::solve, py::arg("network"));
    m.def("serialize_transform", &network::serialize_transform, py::arg("parallel"));
    m.def("parallel_equivalent_transform", &network::parallel_equivalent_transform, py::arg("serial"));
    m.def("parallelize_transform", &network::parallelize_transform, py::arg("serial"),
          py::arg("keep_stage_load") = true);
    m.def("render_report", [](const network::OpenNetwork& n) { return cli::render_report(n, network::solve(n)); },
          py::arg("network"));

    // routing optimization
    py::class_<opt::Optimum>(m, "Optimum")
        .def_property_readonly("routing", [](const opt::Optimum& o) { return to_vector(o.routing.fractions()); })
        .def_readonly("response_time", &opt::Optimum::response_time)
        .def_readonly("iterations", &opt::Optimum::iterations)
        .def_readonly("converged", &opt::Optimum::converged)
        .def_readonly("residual", &opt::Optimum::residual);

    m.def(
        "feasibility",
        [](double rate, std::vector<double> times) {
            const auto f = opt::feasibility(opt::HeterogeneousArray(rate, std::move(times)));
            return py::make_tuple(f.feasible, f.capacity);
        },
        py::arg("rate"), py::arg("service_times"), "Return (feasible, capacity)");
    m.def(
        "objective",
        [](double rate, std::vector<double> times, std::vector<double> phi) {
            return opt::objective(opt::HeterogeneousArray(rate, std::move(times)), opt::RoutingVector(std::move(phi)));
        },
        py::arg("rate"), py::arg("service_times"), py::arg("routing"));
    m.def(
        "gradient",
        [](double rate, std::vector<double> times, std::vector<double> phi) {
            return opt::gradient(opt::HeterogeneousArray(rate, std::move(times)), opt::RoutingVector(std::move(phi)));
        },
        py::arg("rate"), py::arg("service_times"), py::arg("routing"));
    m.def("optimize_dual", &opt::optimize_dual, py::arg("rate"), py::arg("fast"), py::arg("slow"));
    m.def(
        "optimize",
        [](double rate, std::vector<double> times, int max_iterations, double tolerance) {
            opt::PgdOptions options;
            options.max_iterations = max_iterations;
            options.tolerance = tolerance;
            return opt::optimize_m(opt::HeterogeneousArray(rate, std::move(times)), options);
        },
        py::arg("rate"), py::arg("service_times"), py::arg("max_iterations") = 10'000, py::arg("tolerance") = 1e-10);
    m.def("render_optimum", [](double rate, std::vector<double> times, const opt::Optimum& o) {
        return cli::render_optimum(opt::HeterogeneousArray(rate, std::move(times)), o);
    });

    // simulation
    py::class_<sim::ParallelRoute>(m, "ParallelRoute")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("service_times"),
             py::arg("routing") = std::vector<double>{})
        .def_readonly("service_times", &sim::ParallelRoute::service_times)
        .def_readonly("routing", &sim::ParallelRoute::routing);
    py::class_<sim::TandemRoute>(m, "TandemRoute")
        .def(py::init<std::vector<double>>(), py::arg("stage_times"))
        .def_readonly("stage_times", &sim::TandemRoute::stage_times);
    py::class_<sim::FeedbackRoute>(m, "FeedbackRoute")
        .def(py::init<double, int>(), py::arg("service_time"), py::arg("visits"))
        .def_readonly("service_time", &sim::FeedbackRoute::service_time)
        .def_readonly("visits", &sim::FeedbackRoute::visits);

    py::class_<sim::SimStats>(m, "SimStats")
        .def_readonly("mean_residence", &sim::SimStats::mean_residence)
        .def_readonly("half_width_95", &sim::SimStats::half_width_95)
        .def_readonly("batch_means", &sim::SimStats::batch_means)
        .def_readonly("per_node_utilization", &sim::SimStats::per_node_utilization)
        .def_readonly("completions", &sim::SimStats::completions)
        .def_readonly("per_node_arrivals", &sim::SimStats::per_node_arrivals)
        .def_readonly("per_node_completions", &sim::SimStats::per_node_completions)
        .def_readonly("fifo_violations", &sim::SimStats::fifo_violations)
        .def_readonly("simulated_time", &sim::SimStats::simulated_time);
    py::class_<sim::Comparison>(m, "Comparison")
        .def_readonly("analytic", &sim::Comparison::analytic)
        .def_readonly("stats", &sim::Comparison::stats)
        .def_readonly("relative_error", &sim::Comparison::relative_error)
        .def_readonly("passed", &sim::Comparison::pass);

    m.def(
        "simulate",
        [](double rate, const sim::SimTopology& topology, std::uint64_t seed, std::uint64_t completions,
           std::optional<std::uint64_t> warmup, int batches) {
            const auto config = make_config(rate, topology, seed, completions, warmup, batches);
            py::gil_scoped_release release;
            return sim::simulate(config);
        },
        py::arg("rate"), py::arg("topology"), py::arg("seed") = 42, py::arg("completions") = 200'000,
        py::arg("warmup") = py::none(), py::arg("batches") = 20);
    m.def(
        "compare_analytic",
        [](double rate, const sim::SimTopology& topology, std::uint64_t seed, std::uint64_t completions,
           std::optional<std::uint64_t> warmup, int batches) {
            const auto config = make_config(rate, topology, seed, completions, warmup, batches);
            py::gil_scoped_release release;
            return sim::compare_analytic(config);
        },
        py::arg("rate"), py::arg("topology"), py::arg("seed") = 42, py::arg("completions") = 200'000,
        py::arg("warmup") = py::none(), py::arg("batches") = 20);
}
