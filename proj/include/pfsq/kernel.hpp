#pragma once

#include <string_view>

// Closed-form M/M/1 formulas. Rates are requests per unit time, service
// times are time units per request. All functions are pure.

namespace pfsq::kernel {

/// Offered load of a single server, arrival_rate * service_time.
/// Values >= 1 are returned as-is; callers decide whether that is an error.
double utilization(double arrival_rate, double service_time);

/// Mean residence time S / (1 - lambda S) of one M/M/1 queue.
/// Throws SaturationError (tagged with `resource`) when lambda S >= 1.
double mm1_residence(double arrival_rate, double service_time,
                     std::string_view resource = "queue");

/// Residence time of an m-way parallel array with the aggregate rate split
/// equally: S / (1 - (lambda/m) S). Same for every queue of the array.
double parallel_array_residence(double agg_rate, double service_time, int m);

/// Residence time of m tandem stages, each with service time S/m and seeing
/// the full rate lambda. Computed as the sum over stages.
double tandem_residence(double agg_rate, double total_service_time, int m);

/// Single queue visited `visits` times; demand D = V * stage time and the
/// residence is D / (1 - lambda D).
double feedback_residence(double agg_rate, double stage_service_time, int visits);

/// Mean number in an M/M/1 node, rho / (1 - rho). Throws ValidationError for
/// rho outside [0, 1).
double queue_length(double utilization);

}  // namespace pfsq::kernel
