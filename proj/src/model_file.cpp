#include "pfsq/model_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace pfsq::cli {
namespace {

struct Entry {
    std::string value;
    int line = 0;
};

struct Section {
    int line = 0;
    std::map<std::string, Entry> entries;
};

using Sections = std::map<std::string, Section>;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"network", {"workload", "arrival_rate"}},
        {"parallel", {"count", "service_time", "method", "prefix"}},
        {"tandem", {"count", "service_time", "service_times", "prefix"}},
        {"feedback", {"service_time", "visits", "name"}},
        {"optimize", {"service_times"}},
        {"simulate", {"seed", "completions", "warmup"}},
    };
    return keys;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

Sections tokenize(std::string_view text) {
    Sections sections;
    std::string current;
    int line_no = 0;
    bool any_content = false;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        any_content = true;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            auto name = lower(trim(line.substr(1, line.size() - 2)));
            if (!allowed_keys().contains(name)) {
                throw ParseError(line_no, fmt::format("unknown section [{}]", name));
            }
            if (sections.contains(name)) throw ParseError(line_no, fmt::format("duplicate section [{}]", name));
            sections[name].line = line_no;
            current = std::move(name);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        if (current.empty()) throw ParseError(line_no, "key outside of any section");
        const auto key = lower(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "missing key before '='");
        if (value.empty()) throw ParseError(line_no, fmt::format("missing value for '{}'", key));
        if (!allowed_keys().at(current).contains(key)) {
            throw ParseError(line_no, fmt::format("unknown key '{}' in [{}]", key, current));
        }
        auto& entries = sections[current].entries;
        if (entries.contains(key)) throw ParseError(line_no, fmt::format("duplicate key '{}'", key));
        entries[key] = Entry{std::string(value), line_no};
    }
    if (!any_content) throw ParseError(line_no, "model file is empty");
    return sections;
}

double parse_decimal(const Entry& e, std::string_view field) {
    double v = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError(e.line, fmt::format("'{}' is not a decimal number for {}", e.value, field));
    }
    return v;
}

double positive_decimal(const Entry& e, std::string_view field) {
    const double v = parse_decimal(e, field);
    if (!(v > 0.0)) throw ValidationError(fmt::format("line {}: {} must be > 0, got {}", e.line, field, e.value));
    return v;
}

std::uint64_t parse_count(const Entry& e, std::string_view field, std::uint64_t min_value) {
    std::uint64_t n = 0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || ptr != last) {
        // Decimal notation such as 2e5 or 4.0 is accepted when integral.
        const double v = parse_decimal(e, field);
        if (v < 0.0 || v != std::floor(v) || v > 1.8e19) {
            throw ValidationError(fmt::format("line {}: {} must be a whole number, got {}", e.line, field, e.value));
        }
        n = static_cast<std::uint64_t>(v);
    }
    if (n < min_value) {
        throw ValidationError(fmt::format("line {}: {} must be >= {}, got {}", e.line, field, min_value, e.value));
    }
    return n;
}

int parse_small_count(const Entry& e, std::string_view field) {
    const auto n = parse_count(e, field, 1);
    if (n > 1'000'000) throw ValidationError(fmt::format("line {}: {} is too large ({})", e.line, field, n));
    return static_cast<int>(n);
}

std::vector<double> parse_list(const Entry& e, std::string_view field) {
    std::vector<double> out;
    std::string_view rest = e.value;
    while (true) {
        const auto comma = rest.find(',');
        const Entry item{std::string(trim(rest.substr(0, comma))), e.line};
        out.push_back(positive_decimal(item, field));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

const Entry& require(const Section& s, const std::string& section, const std::string& key) {
    const auto it = s.entries.find(key);
    if (it == s.entries.end()) {
        throw ValidationError(fmt::format("line {}: [{}] is missing '{}'", s.line, section, key));
    }
    return it->second;
}

const Entry* optional_entry(const Section& s, const std::string& key) {
    const auto it = s.entries.find(key);
    return it == s.entries.end() ? nullptr : &it->second;
}

std::string fmt_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(values[i]);
    }
    return out;
}

}  // namespace

ParseError::ParseError(int line, const std::string& what)
    : ValidationError(fmt::format("line {}: {}", line, what)), line_(line) {}

ModelFile parse_model_text(std::string_view text) {
    const Sections sections = tokenize(text);
    ModelFile model;

    const auto net = sections.find("network");
    if (net == sections.end()) throw ValidationError("model is missing the [network] section");
    if (const auto* w = optional_entry(net->second, "workload")) model.network.workload = w->value;
    model.network.arrival_rate = positive_decimal(require(net->second, "network", "arrival_rate"), "arrival_rate");

    std::vector<std::string> bodies;
    for (const char* name : {"parallel", "tandem", "feedback", "optimize"}) {
        if (sections.contains(name)) bodies.emplace_back(name);
    }
    if (bodies.size() != 1) {
        throw ValidationError(fmt::format(
            "model needs exactly one of [parallel] [tandem] [feedback] [optimize], found {}", bodies.size()));
    }
    const std::string& kind = bodies.front();
    const Section& body = sections.at(kind);

    if (kind == "parallel") {
        ParallelSection p;
        p.count = parse_small_count(require(body, kind, "count"), "count");
        p.service_time = positive_decimal(require(body, kind, "service_time"), "service_time");
        if (const auto* m = optional_entry(body, "method")) {
            const auto v = lower(m->value);
            if (v == "a") {
                p.method = network::Construction::MethodA;
            } else if (v == "b") {
                p.method = network::Construction::MethodB;
            } else {
                throw ValidationError(fmt::format("line {}: method must be 'a' or 'b', got '{}'", m->line, m->value));
            }
        }
        if (const auto* pre = optional_entry(body, "prefix")) p.prefix = pre->value;
        model.body = p;
    } else if (kind == "tandem") {
        TandemSection t;
        const auto* list = optional_entry(body, "service_times");
        const auto* count = optional_entry(body, "count");
        const auto* single = optional_entry(body, "service_time");
        if (list != nullptr) {
            if (count != nullptr || single != nullptr) {
                throw ValidationError(fmt::format(
                    "line {}: [tandem] takes either service_times or count + service_time", list->line));
            }
            t.service_times = parse_list(*list, "service_times");
        } else {
            const int n = parse_small_count(require(body, kind, "count"), "count");
            const double s = positive_decimal(require(body, kind, "service_time"), "service_time");
            t.service_times.assign(static_cast<std::size_t>(n), s);
        }
        if (const auto* pre = optional_entry(body, "prefix")) t.prefix = pre->value;
        model.body = t;
    } else if (kind == "feedback") {
        FeedbackSection f;
        f.service_time = positive_decimal(require(body, kind, "service_time"), "service_time");
        f.visits = parse_small_count(require(body, kind, "visits"), "visits");
        if (const auto* n = optional_entry(body, "name")) f.name = n->value;
        model.body = f;
    } else {
        OptimizeSection o;
        o.service_times = parse_list(require(body, kind, "service_times"), "service_times");
        model.body = o;
    }

    if (const auto sim = sections.find("simulate"); sim != sections.end()) {
        SimulateSection s;
        if (const auto* e = optional_entry(sim->second, "seed")) s.seed = parse_count(*e, "seed", 0);
        if (const auto* e = optional_entry(sim->second, "completions")) {
            s.completions = parse_count(*e, "completions", 1000);
        }
        if (const auto* e = optional_entry(sim->second, "warmup")) s.warmup = parse_count(*e, "warmup", 0);
        model.simulate = s;
    }
    return model;
}

ModelFile parse_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(fmt::format("cannot open model file '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str());
}

std::string dump_model(const ModelFile& model) {
    std::string out;
    out += "[network]\n";
    out += fmt::format("workload = {}\n", model.network.workload);
    out += fmt::format("arrival_rate = {}\n", fmt_double(model.network.arrival_rate));
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ParallelSection>) {
                out += "\n[parallel]\n";
                out += fmt::format("count = {}\n", b.count);
                out += fmt::format("service_time = {}\n", fmt_double(b.service_time));
                out += fmt::format("method = {}\n", b.method == network::Construction::MethodA ? "a" : "b");
                out += fmt::format("prefix = {}\n", b.prefix);
            } else if constexpr (std::is_same_v<T, TandemSection>) {
                out += "\n[tandem]\n";
                out += fmt::format("service_times = {}\n", fmt_list(b.service_times));
                out += fmt::format("prefix = {}\n", b.prefix);
            } else if constexpr (std::is_same_v<T, FeedbackSection>) {
                out += "\n[feedback]\n";
                out += fmt::format("service_time = {}\n", fmt_double(b.service_time));
                out += fmt::format("visits = {}\n", b.visits);
                out += fmt::format("name = {}\n", b.name);
            } else {
                out += "\n[optimize]\n";
                out += fmt::format("service_times = {}\n", fmt_list(b.service_times));
            }
        },
        model.body);
    if (model.simulate) {
        out += "\n[simulate]\n";
        out += fmt::format("seed = {}\n", model.simulate->seed);
        out += fmt::format("completions = {}\n", model.simulate->completions);
        if (model.simulate->warmup) out += fmt::format("warmup = {}\n", *model.simulate->warmup);
    }
    return out;
}

network::OpenNetwork to_network(const ModelFile& model) {
    const auto& net = model.network;
    return std::visit(
        [&](const auto& b) -> network::OpenNetwork {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ParallelSection>) {
                return network::OpenNetwork(net.workload, net.arrival_rate,
                                            network::ParallelArray{b.count, b.service_time, b.method, b.prefix});
            } else if constexpr (std::is_same_v<T, TandemSection>) {
                network::TandemChain chain;
                for (std::size_t k = 0; k < b.service_times.size(); ++k) {
                    chain.stages.push_back({fmt::format("{}{}", b.prefix, k + 1), b.service_times[k], 1});
                }
                return network::OpenNetwork(net.workload, net.arrival_rate, std::move(chain));
            } else if constexpr (std::is_same_v<T, FeedbackSection>) {
                return network::OpenNetwork(net.workload, net.arrival_rate,
                                            network::FeedbackQueue{{b.name, b.service_time, b.visits}});
            } else {
                throw ValidationError("an [optimize] model has no fixed topology to solve");
            }
        },
        model.body);
}

}  // namespace pfsq::cli
