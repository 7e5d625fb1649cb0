#include "pfsq/kernel.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "pfsq/errors.hpp"

namespace pfsq::kernel {
namespace {

void check_rate_and_time(double arrival_rate, double service_time) {
    if (!(arrival_rate >= 0.0) || !std::isfinite(arrival_rate)) {
        throw ValidationError(fmt::format("arrival rate must be >= 0, got {}", arrival_rate));
    }
    if (!(service_time > 0.0) || !std::isfinite(service_time)) {
        throw ValidationError(fmt::format("service time must be > 0, got {}", service_time));
    }
}

void check_count(int m, const char* what) {
    if (m < 1) throw ValidationError(fmt::format("{} must be >= 1, got {}", what, m));
}

}  // namespace

double utilization(double arrival_rate, double service_time) {
    check_rate_and_time(arrival_rate, service_time);
    return arrival_rate * service_time;
}

double mm1_residence(double arrival_rate, double service_time, std::string_view resource) {
    const double rho = utilization(arrival_rate, service_time);
    if (rho >= 1.0) throw SaturationError(std::string(resource), rho);
    return service_time / (1.0 - rho);
}

double parallel_array_residence(double agg_rate, double service_time, int m) {
    check_count(m, "queue count");
    check_rate_and_time(agg_rate, service_time);
    return mm1_residence(agg_rate / m, service_time, "parallel queue");
}

double tandem_residence(double agg_rate, double total_service_time, int m) {
    check_count(m, "stage count");
    check_rate_and_time(agg_rate, total_service_time);
    const double stage = mm1_residence(agg_rate, total_service_time / m, "tandem stage");
    return m * stage;
}

double feedback_residence(double agg_rate, double stage_service_time, int visits) {
    check_count(visits, "visit count");
    check_rate_and_time(agg_rate, stage_service_time);
    const double demand = visits * stage_service_time;
    return mm1_residence(agg_rate, demand, "feedback queue");
}

double queue_length(double utilization) {
    if (!(utilization >= 0.0) || !(utilization < 1.0)) {
        throw ValidationError(
            fmt::format("queue length needs utilization in [0, 1), got {}", utilization));
    }
    return utilization / (1.0 - utilization);
}

}  // namespace pfsq::kernel
