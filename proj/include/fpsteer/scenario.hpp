#ifndef FPSTEER_SCENARIO_HPP
#define FPSTEER_SCENARIO_HPP

#include <string>

#include "fpsteer/controller.hpp"
#include "fpsteer/distribution.hpp"
#include "fpsteer/planner.hpp"
#include "fpsteer/realizer.hpp"
#include "fpsteer/serialization.hpp"
#include "fpsteer/simulation.hpp"

namespace fpsteer {

inline constexpr const char* kScenarioSchema = "fpsteer/1";

struct Scenario {
  std::string name;
  int half_order = 2;  // moments up to order 2n are steered
  LinearSystem system;
  DensitySpec initial;
  DensitySpec target;
  ControllerConfig controller;
  RealizerConfig realizer;
  SimulationConfig simulation;
  double report_z = 4.0;
  int histogram_bins = 50;

  int horizon() const { return system.horizon(); }
  Index order() const { return 2 * half_order; }
};

/// Parses and validates a scenario document; throws ConfigError naming the
/// offending field.
Scenario parse_scenario(const Json& doc);
Scenario load_scenario(const std::string& path);
Json to_json(const Scenario& scenario);

}  // namespace fpsteer

#endif  // FPSTEER_SCENARIO_HPP
