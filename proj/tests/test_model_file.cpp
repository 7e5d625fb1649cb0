#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pfsq/model_file.hpp"

using namespace pfsq;
using namespace pfsq::cli;

namespace {

constexpr const char* kFourQueues = R"(# Method B parallel array
[network]
workload = Requests
arrival_rate = 2.0

[parallel]
count = 4
service_time = 0.25
method = b
)";

int parse_error_line(std::string_view text) {
    try {
        parse_model_text(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_SUITE("model_file") {

TEST_CASE("four-queue model builds four enumerated queues") {
    const auto model = parse_model_text(kFourQueues);
    CHECK(model.network.arrival_rate == 2.0);
    const auto& p = std::get<ParallelSection>(model.body);
    CHECK(p.count == 4);
    CHECK(p.service_time == 0.25);
    CHECK(p.method == network::Construction::MethodB);
    const auto report = network::solve(to_network(model));
    CHECK(report.nodes.size() == 4);
    CHECK_FALSE(model.simulate.has_value());
}

TEST_CASE("parse from a file path") {
    const auto path = std::filesystem::temp_directory_path() / "pfsq_four_queue_test.model";
    {
        std::ofstream out(path);
        out << kFourQueues;
    }
    CHECK(parse_model(path) == parse_model_text(kFourQueues));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_model(path), ValidationError);
}

TEST_CASE("syntax errors carry line numbers") {
    CHECK_THROWS_AS(parse_model_text(""), ParseError);
    CHECK_THROWS_AS(parse_model_text("# only comments\n\n"), ParseError);
    CHECK(parse_error_line("[network]\narrival_rate = 1\nbogus = 3\n") == 3);
    CHECK(parse_error_line("[network]\narrival_rate = 1\n[nope]\n") == 3);
    CHECK(parse_error_line("arrival_rate = 1\n") == 1);
    CHECK(parse_error_line("[network]\narrival_rate\n") == 2);
    CHECK(parse_error_line("[network]\narrival_rate = 1\narrival_rate = 2\n") == 3);
    CHECK(parse_error_line("[network]\narrival_rate = fast\n") == 2);
    CHECK(parse_error_line("[network\n") == 1);
}

TEST_CASE("validation errors name the field") {
    auto message = [](std::string_view text) -> std::string {
        try {
            parse_model_text(text);
        } catch (const ValidationError& e) {
            return e.what();
        }
        return {};
    };
    const auto neg = message("[network]\narrival_rate = 1\n[parallel]\ncount = 2\nservice_time = -0.25\n");
    CHECK(neg.find("service_time") != std::string::npos);
    CHECK(message("[network]\narrival_rate = 1\n").find("exactly one") != std::string::npos);
    CHECK(message("[network]\narrival_rate = 1\n[parallel]\ncount=1\nservice_time=1\n[tandem]\ncount=1\n"
                  "service_time=1\n")
              .find("exactly one") != std::string::npos);
    CHECK(message("[network]\narrival_rate = 0\n[feedback]\nservice_time=1\nvisits=2\n").find("arrival_rate") !=
          std::string::npos);
    CHECK(message("[network]\narrival_rate = 1\n[parallel]\ncount = 2.5\nservice_time = 1\n").find("count") !=
          std::string::npos);
    CHECK(message("[network]\narrival_rate = 1\n[parallel]\ncount = 2\nservice_time = 1\nmethod = c\n")
              .find("method") != std::string::npos);
    CHECK(message("[parallel]\ncount = 2\nservice_time = 1\n").find("[network]") != std::string::npos);
    CHECK(message("[network]\narrival_rate = 1\n[optimize]\nservice_times = 0.1\n[simulate]\ncompletions = 10\n")
              .find("completions") != std::string::npos);
}

TEST_CASE("tandem, feedback, optimize and simulate sections") {
    const auto t = parse_model_text("[network]\narrival_rate = 0.5\n[tandem]\ncount = 3\nservice_time = 0.1\n");
    CHECK(std::get<TandemSection>(t.body).service_times == std::vector<double>(3, 0.1));
    const auto t2 = parse_model_text("[network]\narrival_rate = 0.5\n[tandem]\nservice_times = 0.1, 0.2,0.3\n");
    CHECK(std::get<TandemSection>(t2.body).service_times == std::vector<double>{0.1, 0.2, 0.3});
    CHECK_THROWS_AS(parse_model_text("[network]\narrival_rate = 0.5\n[tandem]\nservice_times = 0.1\ncount = 1\n"),
                    ValidationError);

    const auto f = parse_model_text("[network]\narrival_rate = 2\n[feedback]\nservice_time = 0.0625\nvisits = 4\n");
    CHECK(std::get<FeedbackSection>(f.body).visits == 4);

    const auto o = parse_model_text(
        "[network]\narrival_rate = 166.67\n[optimize]\nservice_times = 0.005,0.015\n[simulate]\nseed = 7\n"
        "completions = 2e5\nwarmup = 1000\n");
    CHECK(std::get<OptimizeSection>(o.body).service_times == std::vector<double>{0.005, 0.015});
    REQUIRE(o.simulate.has_value());
    CHECK(o.simulate->seed == 7);
    CHECK(o.simulate->completions == 200'000);
    CHECK(o.simulate->warmup == 1000);
    CHECK_THROWS_AS(to_network(o), ValidationError);
}

TEST_CASE("dump and parse round trip") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> real(1e-4, 10.0);
    std::uniform_int_distribution<int> small(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
        ModelFile m;
        m.network.arrival_rate = real(rng);
        m.network.workload = trial % 2 ? "Requests" : "IO";
        switch (trial % 4) {
            case 0:
                m.body = ParallelSection{small(rng), real(rng),
                                         trial % 8 ? network::Construction::MethodB : network::Construction::MethodA,
                                         "Q"};
                break;
            case 1: {
                TandemSection t;
                for (int k = small(rng); k > 0; --k) t.service_times.push_back(real(rng));
                m.body = t;
                break;
            }
            case 2:
                m.body = FeedbackSection{real(rng), small(rng), "Fb"};
                break;
            default: {
                OptimizeSection o;
                for (int k = small(rng); k > 0; --k) o.service_times.push_back(real(rng));
                m.body = o;
            }
        }
        if (trial % 3 == 0) m.simulate = SimulateSection{rng(), 1000u + rng() % 100'000, std::nullopt};
        if (trial % 6 == 0) m.simulate->warmup = 17;
        CHECK(parse_model_text(dump_model(m)) == m);
    }
}

}  // TEST_SUITE
