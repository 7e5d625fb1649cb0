#include "pfsq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "pfsq/errors.hpp"
#include "pfsq/kernel.hpp"
#include "pfsq/optimizer.hpp"

namespace pfsq::sim {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

enum class Purpose : std::uint64_t { Interarrival = 1, Routing = 2, Service = 3 };

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::int64_t node, Purpose purpose) {
    const auto key = splitmix64(seed) + kGolden * static_cast<std::uint64_t>(node + 1) +
                     static_cast<std::uint64_t>(purpose);
    return std::mt19937_64(splitmix64(key));
}

double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

double exponential(std::mt19937_64& g, double mean) { return -mean * std::log1p(-unit_uniform(g)); }

struct Job {
    double born;
    int visits_left;
    std::size_t stage;
    std::uint64_t ticket;
};

struct Node {
    double mean_service = 0.0;
    std::deque<Job> waiting;
    bool busy = false;
    double busy_since = 0.0;
    double busy_total = 0.0;
    std::uint64_t next_ticket = 0;
    std::uint64_t next_serve = 0;
    std::mt19937_64 rng;
};

struct Event {
    double time;
    std::uint64_t seq;
    int node;  // -1 = external arrival

    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

struct Layout {
    std::vector<double> service;
    std::vector<double> cumulative;  // parallel routing CDF, empty otherwise
    bool tandem = false;
    int visits = 1;
};

Layout layout_of(const SimTopology& topology) {
    Layout out;
    std::visit(overloaded{
                   [&](const ParallelRoute& p) {
                       out.service = p.service_times;
                       const std::size_t m = p.service_times.size();
                       double acc = 0.0;
                       for (std::size_t k = 0; k < m; ++k) {
                           acc += p.routing.empty() ? 1.0 / static_cast<double>(m) : p.routing[k];
                           out.cumulative.push_back(acc);
                       }
                       out.cumulative.back() = 1.0;
                   },
                   [&](const TandemRoute& t) {
                       out.service = t.stage_times;
                       out.tandem = true;
                   },
                   [&](const FeedbackRoute& f) {
                       out.service = {f.service_time};
                       out.visits = f.visits;
                   },
               },
               topology);
    return out;
}

void validate(const SimConfig& c) {
    if (!(c.arrival_rate > 0.0) || !std::isfinite(c.arrival_rate)) {
        throw ValidationError(fmt::format("simulation needs a positive arrival rate, got {}", c.arrival_rate));
    }
    if (c.measured_completions < 1000) {
        throw ValidationError(fmt::format("simulation needs >= 1000 measured completions, got {}",
                                          c.measured_completions));
    }
    if (c.batches < 2 || static_cast<std::uint64_t>(c.batches) > c.measured_completions) {
        throw ValidationError(fmt::format("batch count {} is out of range", c.batches));
    }
    std::visit(overloaded{
                   [](const ParallelRoute& p) {
                       if (p.service_times.empty()) throw ValidationError("parallel route needs queues");
                       for (double s : p.service_times) {
                           if (!(s > 0.0)) throw ValidationError("service times must be > 0");
                       }
                       if (!p.routing.empty()) {
                           if (p.routing.size() != p.service_times.size()) {
                               throw ValidationError("routing vector size does not match the queue count");
                           }
                           opt::RoutingVector check(p.routing);
                       }
                   },
                   [](const TandemRoute& t) {
                       if (t.stage_times.empty()) throw ValidationError("tandem route needs stages");
                       for (double s : t.stage_times) {
                           if (!(s > 0.0)) throw ValidationError("service times must be > 0");
                       }
                   },
                   [](const FeedbackRoute& f) {
                       if (!(f.service_time > 0.0)) throw ValidationError("service times must be > 0");
                       if (f.visits < 1) throw ValidationError("feedback visits must be >= 1");
                   },
               },
               c.topology);
    const auto rho = offered_utilization(c);
    for (std::size_t k = 0; k < rho.size(); ++k) {
        if (rho[k] >= 1.0) throw SaturationError(fmt::format("node {}", k + 1), rho[k]);
    }
}

double t_quantile_975(int dof) {
    return boost::math::quantile(boost::math::students_t(static_cast<double>(dof)), 0.975);
}

}  // namespace

SimTopology topology_from(const network::OpenNetwork& net) {
    return std::visit(
        overloaded{
            [](const network::ParallelArray& p) -> SimTopology {
                return ParallelRoute{std::vector<double>(static_cast<std::size_t>(p.count), p.service_time), {}};
            },
            [](const network::TandemChain& t) -> SimTopology {
                TandemRoute r;
                for (const auto& s : t.stages) r.stage_times.push_back(s.service_time);
                return r;
            },
            [](const network::FeedbackQueue& f) -> SimTopology {
                return FeedbackRoute{f.node.service_time, f.node.visits};
            },
        },
        net.topology());
}

std::vector<double> offered_utilization(const SimConfig& c) {
    const double lambda = c.arrival_rate;
    return std::visit(overloaded{
                          [&](const ParallelRoute& p) {
                              std::vector<double> rho;
                              const auto m = static_cast<double>(p.service_times.size());
                              for (std::size_t k = 0; k < p.service_times.size(); ++k) {
                                  const double share = p.routing.empty() ? 1.0 / m : p.routing[k];
                                  rho.push_back(share * lambda * p.service_times[k]);
                              }
                              return rho;
                          },
                          [&](const TandemRoute& t) {
                              std::vector<double> rho;
                              for (double s : t.stage_times) rho.push_back(lambda * s);
                              return rho;
                          },
                          [&](const FeedbackRoute& f) {
                              return std::vector<double>{lambda * f.visits * f.service_time};
                          },
                      },
                      c.topology);
}

double analytic_residence(const SimConfig& c) {
    const double lambda = c.arrival_rate;
    return std::visit(
        overloaded{
            [&](const ParallelRoute& p) {
                const auto& s = p.service_times;
                const bool uniform_s = std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
                if (p.routing.empty() && uniform_s) {
                    return kernel::parallel_array_residence(lambda, s.front(), static_cast<int>(s.size()));
                }
                std::vector<double> phi = p.routing;
                if (phi.empty()) phi.assign(s.size(), 1.0 / static_cast<double>(s.size()));
                return opt::objective(opt::HeterogeneousArray(lambda, s), opt::RoutingVector(phi));
            },
            [&](const TandemRoute& t) {
                double total = 0.0;
                for (std::size_t k = 0; k < t.stage_times.size(); ++k) {
                    total += kernel::mm1_residence(lambda, t.stage_times[k], fmt::format("node {}", k + 1));
                }
                return total;
            },
            [&](const FeedbackRoute& f) { return kernel::feedback_residence(lambda, f.service_time, f.visits); },
        },
        c.topology);
}

SimStats simulate(const SimConfig& config) {
    validate(config);
    const Layout layout = layout_of(config.topology);
    const std::size_t n = layout.service.size();
    const std::uint64_t warmup = config.warmup_completions.value_or(config.measured_completions / 10);
    const std::uint64_t measured = config.measured_completions;

    std::vector<Node> nodes(n);
    for (std::size_t k = 0; k < n; ++k) {
        nodes[k].mean_service = layout.service[k];
        nodes[k].rng = make_stream(config.seed, static_cast<std::int64_t>(k), Purpose::Service);
    }
    auto arrivals_rng = make_stream(config.seed, -1, Purpose::Interarrival);
    auto routing_rng = make_stream(config.seed, -1, Purpose::Routing);
    const double mean_interarrival = 1.0 / config.arrival_rate;

    SimStats stats;
    stats.per_node_arrivals.assign(n, 0);
    stats.per_node_completions.assign(n, 0);

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    std::uint64_t seq = 0;
    double now = 0.0;

    auto schedule = [&](double at, int node) {
        if (!std::isfinite(at)) throw SimulationError("event clock overflowed");
        events.push({at, seq++, node});
    };
    auto advance = [&](double delay) {
        const double at = now + delay;
        if (delay > 0.0 && at == now) {
            throw SimulationError(fmt::format("event clock lost precision at t = {:.6g}", now));
        }
        return at;
    };

    auto start_service = [&](std::size_t k) {
        Node& node = nodes[k];
        if (node.busy || node.waiting.empty()) return;
        if (node.waiting.front().ticket != node.next_serve) ++stats.fifo_violations;
        ++node.next_serve;
        node.busy = true;
        node.busy_since = now;
        schedule(advance(exponential(node.rng, node.mean_service)), static_cast<int>(k));
    };
    auto enqueue = [&](std::size_t k, Job job) {
        job.stage = k;
        job.ticket = nodes[k].next_ticket++;
        ++stats.per_node_arrivals[k];
        nodes[k].waiting.push_back(job);
        start_service(k);
    };
    auto route = [&]() -> std::size_t {
        if (layout.cumulative.empty()) return 0;
        const double u = unit_uniform(routing_rng);
        for (std::size_t k = 0; k < layout.cumulative.size(); ++k) {
            if (u < layout.cumulative[k]) return k;
        }
        return layout.cumulative.size() - 1;
    };

    // Measurement window bookkeeping.
    std::vector<double> busy_at_start(n, 0.0);
    double window_start = 0.0;
    auto busy_snapshot = [&](std::vector<double>& out) {
        out.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = nodes[k].busy_total + (nodes[k].busy ? now - nodes[k].busy_since : 0.0);
        }
    };
    if (warmup == 0) busy_snapshot(busy_at_start);

    std::vector<double> samples;
    samples.reserve(measured);
    std::uint64_t completed = 0;
    bool arrivals_open = true;

    schedule(advance(exponential(arrivals_rng, mean_interarrival)), -1);
    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        now = ev.time;

        if (ev.node < 0) {
            if (!arrivals_open) continue;
            enqueue(route(), Job{now, layout.visits, 0, 0});
            schedule(advance(exponential(arrivals_rng, mean_interarrival)), -1);
            continue;
        }

        const auto k = static_cast<std::size_t>(ev.node);
        Node& node = nodes[k];
        Job job = node.waiting.front();
        node.waiting.pop_front();
        node.busy = false;
        node.busy_total += now - node.busy_since;
        ++stats.per_node_completions[k];
        start_service(k);

        if (layout.tandem && job.stage + 1 < n) {
            enqueue(job.stage + 1, job);
            continue;
        }
        if (--job.visits_left > 0) {
            enqueue(k, job);
            continue;
        }

        // Departure from the network.
        if (!arrivals_open) continue;
        ++completed;
        if (completed == warmup) {
            busy_snapshot(busy_at_start);
            window_start = now;
        } else if (completed > warmup) {
            samples.push_back(now - job.born);
            if (samples.size() == measured) {
                std::vector<double> busy_at_end;
                busy_snapshot(busy_at_end);
                const double span = now - window_start;
                for (std::size_t q = 0; q < n; ++q) {
                    stats.per_node_utilization.push_back((busy_at_end[q] - busy_at_start[q]) / span);
                }
                stats.simulated_time = now;
                arrivals_open = false;  // drain what is left in the network
            }
        }
    }

    const auto batches = static_cast<std::size_t>(config.batches);
    const std::size_t batch_size = samples.size() / batches;
    double grand = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        double sum = 0.0;
        for (std::size_t i = b * batch_size; i < (b + 1) * batch_size; ++i) sum += samples[i];
        stats.batch_means.push_back(sum / static_cast<double>(batch_size));
        grand += stats.batch_means.back();
    }
    grand /= static_cast<double>(batches);
    double ss = 0.0;
    for (double bm : stats.batch_means) ss += (bm - grand) * (bm - grand);
    const double sd = std::sqrt(ss / static_cast<double>(batches - 1));
    stats.mean_residence = grand;
    stats.half_width_95 = t_quantile_975(config.batches - 1) * sd / std::sqrt(static_cast<double>(batches));
    stats.completions = samples.size();
    return stats;
}

Comparison compare_analytic(const SimConfig& config) {
    Comparison out;
    out.analytic = analytic_residence(config);
    out.stats = simulate(config);
    const double gap = std::abs(out.analytic - out.stats.mean_residence);
    out.relative_error = gap / out.analytic;
    out.pass = gap <= out.stats.half_width_95 || out.relative_error <= 0.02;
    return out;
}

}  // namespace pfsq::sim
