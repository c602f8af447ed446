#ifndef FPSTEER_SERIALIZATION_HPP
#define FPSTEER_SERIALIZATION_HPP

#include <json.hpp>

#include <vector>

#include "fpsteer/controller.hpp"
#include "fpsteer/distribution.hpp"
#include "fpsteer/planner.hpp"
#include "fpsteer/realizer.hpp"
#include "fpsteer/reporting.hpp"

namespace fpsteer {

using Json = nlohmann::ordered_json;

Json to_json(const Moments& m);
Moments moments_from_json(const Json& j);

/// Tagged union: {"kind": "gaussian", "mean": .., "variance": ..}, etc.
Json to_json(const DensitySpec& spec);
DensitySpec density_from_json(const Json& j);

Json to_json(const MomentStateTrajectory& plan);
MomentStateTrajectory plan_from_json(const Json& j);

Json to_json(const StepFeasibilityReport& report);

Json to_json(const std::vector<StepControl>& controls);
std::vector<StepControl> controls_from_json(const Json& j);

Json to_json(const RealizedDensity& rd);
RealizedDensity kernel_from_json(const Json& j);

Json to_json(const SteeringReport& report);

}  // namespace fpsteer

#endif  // FPSTEER_SERIALIZATION_HPP
