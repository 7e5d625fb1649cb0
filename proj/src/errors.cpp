#include "pfsq/errors.hpp"

#include <fmt/format.h>

namespace pfsq {

SaturationError::SaturationError(std::string resource, double utilization)
    : Error(fmt::format("saturation at {}: utilization {:.6g} must be below 1",
                        resource, utilization)),
      resource_(std::move(resource)),
      utilization_(utilization) {}

InfeasibleError::InfeasibleError(double arrival_rate, double capacity)
    : Error(fmt::format("infeasible load: arrival rate {:.6g} requires capacity above "
                        "sum(1/S_k) = {:.6g}",
                        arrival_rate, capacity)),
      arrival_rate_(arrival_rate),
      capacity_(capacity) {}

}  // namespace pfsq
