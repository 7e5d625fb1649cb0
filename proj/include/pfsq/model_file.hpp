#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pfsq/errors.hpp"
#include "pfsq/network.hpp"

// Line-oriented model files:
//
//   # comment
//   [network]
//   workload = Requests
//   arrival_rate = 2.0
//
//   [parallel]          one of [parallel] [tandem] [feedback] [optimize]
//   count = 4
//   service_time = 0.25
//   method = b
//
//   [simulate]          optional
//   seed = 42
//   completions = 200000

namespace pfsq::cli {

class ParseError : public ValidationError {
public:
    ParseError(int line, const std::string& what);
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct NetworkSection {
    std::string workload = network::kDefaultWorkload;
    double arrival_rate = 0.0;
    bool operator==(const NetworkSection&) const = default;
};

struct ParallelSection {
    int count = 1;
    double service_time = 0.0;
    network::Construction method = network::Construction::MethodB;
    std::string prefix = "ParaQ";
    bool operator==(const ParallelSection&) const = default;
};

/// Either `service_times = a,b,c` or `count` plus `service_time`.
struct TandemSection {
    std::vector<double> service_times;
    std::string prefix = "SerQ";
    bool operator==(const TandemSection&) const = default;
};

struct FeedbackSection {
    double service_time = 0.0;
    int visits = 1;
    std::string name = "FbQ";
    bool operator==(const FeedbackSection&) const = default;
};

struct OptimizeSection {
    std::vector<double> service_times;
    bool operator==(const OptimizeSection&) const = default;
};

struct SimulateSection {
    std::uint64_t seed = 42;
    std::uint64_t completions = 200'000;
    std::optional<std::uint64_t> warmup;
    bool operator==(const SimulateSection&) const = default;
};

using ModelBody = std::variant<ParallelSection, TandemSection, FeedbackSection, OptimizeSection>;

struct ModelFile {
    NetworkSection network;
    ModelBody body;
    std::optional<SimulateSection> simulate;
    bool operator==(const ModelFile&) const = default;
};

ModelFile parse_model(const std::filesystem::path& path);
ModelFile parse_model_text(std::string_view text);

/// Canonical text form; parse_model_text(dump_model(m)) == m.
std::string dump_model(const ModelFile& model);

/// Analytic network for a topology model. Throws ValidationError for [optimize] models.
network::OpenNetwork to_network(const ModelFile& model);

}  // namespace pfsq::cli
