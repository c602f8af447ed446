#include "fpsteer/scenario.hpp"

#include <fstream>
#include <set>

namespace fpsteer {

namespace {

template <typename T>
T field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError("missing field '" + path + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + path + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const Json& obj, const std::string& key, const std::string& path, T fallback) {
  return obj.contains(key) ? field<T>(obj, key, path) : fallback;
}

void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) throw ConfigError("unknown field '" + path + key + "'");
}

std::vector<double> gain_sequence(const Json& doc, const std::string& key, int horizon) {
  if (!doc.contains(key)) throw ConfigError("missing field '" + key + "'");
  const Json& v = doc.at(key);
  if (v.is_number()) return std::vector<double>(horizon, v.get<double>());
  auto seq = field<std::vector<double>>(doc, key, "");
  if (static_cast<int>(seq.size()) != horizon)
    throw ConfigError("field '" + key + "' must have one entry per step (" +
                      std::to_string(horizon) + ")");
  return seq;
}

DensitySpec density_field(const Json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ConfigError("missing field '" + key + "'");
  try {
    return density_from_json(doc.at(key));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("field '" + key + "': " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError("field '" + key + "': " + e.what());
  }
}

}  // namespace

Scenario parse_scenario(const Json& doc) {
  reject_unknown(doc,
                 {"schema", "name", "horizon", "half_order", "a", "b", "noise_variance", "initial",
                  "target", "controller", "realizer", "simulation", "report", "description"},
                 "");
  const auto schema = field<std::string>(doc, "schema", "");
  if (schema != kScenarioSchema)
    throw ConfigError("field 'schema' must be \"" + std::string(kScenarioSchema) + "\", got \"" +
                      schema + "\"");

  Scenario s;
  s.name = field<std::string>(doc, "name", "");
  const int horizon = field<int>(doc, "horizon", "");
  if (horizon < 1) throw ConfigError("field 'horizon' must be >= 1");
  s.half_order = optional_field<int>(doc, "half_order", "", 2);
  if (s.half_order < 1) throw ConfigError("field 'half_order' must be >= 1");

  s.system.a = gain_sequence(doc, "a", horizon);
  s.system.b = gain_sequence(doc, "b", horizon);
  for (int k = 0; k < horizon; ++k)
    if (s.system.b[k] == 0.0)
      throw ConfigError("field 'b' entry " + std::to_string(k) + " is zero; b(k) must be nonzero");
  s.system.noise_variance = field<double>(doc, "noise_variance", "");
  if (!(s.system.noise_variance > 0.0)) throw ConfigError("field 'noise_variance' must be positive");

  s.initial = density_field(doc, "initial");
  s.target = density_field(doc, "target");

  if (doc.contains("controller")) {
    const Json& c = doc.at("controller");
    reject_unknown(c, {"grid", "c_tol", "psd_tol", "cost"}, "controller.");
    s.controller.grid = optional_field<int>(c, "grid", "controller.", s.controller.grid);
    s.controller.c_tol = optional_field<double>(c, "c_tol", "controller.", s.controller.c_tol);
    s.controller.psd_tol = optional_field<double>(c, "psd_tol", "controller.", s.controller.psd_tol);
    const auto cost = optional_field<std::string>(c, "cost", "controller.", "paper");
    if (cost == "paper") s.controller.cost = CostVariant::paper_cost;
    else if (cost == "physical") s.controller.cost = CostVariant::physical_cost;
    else throw ConfigError("field 'controller.cost' must be \"paper\" or \"physical\"");
  }
  if (doc.contains("realizer")) {
    const Json& r = doc.at("realizer");
    const std::string p = "realizer.";
    reject_unknown(r,
                   {"nodes", "half_width", "max_iters", "grad_tol", "backtrack", "moment_tol",
                    "max_widenings", "reference_variance", "optimizer"},
                   p);
    auto& cfg = s.realizer;
    cfg.nodes = optional_field<int>(r, "nodes", p, cfg.nodes);
    cfg.half_width = optional_field<double>(r, "half_width", p, cfg.half_width);
    cfg.max_iters = optional_field<int>(r, "max_iters", p, cfg.max_iters);
    cfg.grad_tol = optional_field<double>(r, "grad_tol", p, cfg.grad_tol);
    cfg.backtrack = optional_field<double>(r, "backtrack", p, cfg.backtrack);
    cfg.moment_tol = optional_field<double>(r, "moment_tol", p, cfg.moment_tol);
    cfg.max_widenings = optional_field<int>(r, "max_widenings", p, cfg.max_widenings);
    const auto variance = optional_field<std::string>(r, "reference_variance", p, "central");
    if (variance == "central") cfg.reference_variance = ReferenceVariance::central;
    else if (variance == "raw") cfg.reference_variance = ReferenceVariance::raw_second_moment;
    else throw ConfigError("field 'realizer.reference_variance' must be \"central\" or \"raw\"");
    const auto optimizer = optional_field<std::string>(r, "optimizer", p, "newton");
    if (optimizer == "newton") cfg.optimizer = RealizerOptimizer::newton;
    else if (optimizer == "gradient") cfg.optimizer = RealizerOptimizer::gradient;
    else throw ConfigError("field 'realizer.optimizer' must be \"newton\" or \"gradient\"");
  }
  if (doc.contains("simulation")) {
    const Json& m = doc.at("simulation");
    const std::string p = "simulation.";
    reject_unknown(m, {"runs", "seed", "record_full_trajectories", "threads"}, p);
    s.simulation.runs = optional_field<int>(m, "runs", p, s.simulation.runs);
    s.simulation.seed = optional_field<std::uint64_t>(m, "seed", p, s.simulation.seed);
    s.simulation.record_full_trajectories =
        optional_field<bool>(m, "record_full_trajectories", p, s.simulation.record_full_trajectories);
    s.simulation.threads = optional_field<int>(m, "threads", p, s.simulation.threads);
  }
  if (doc.contains("report")) {
    const Json& r = doc.at("report");
    reject_unknown(r, {"z", "bins"}, "report.");
    s.report_z = optional_field<double>(r, "z", "report.", s.report_z);
    s.histogram_bins = optional_field<int>(r, "bins", "report.", s.histogram_bins);
    if (!(s.report_z > 0.0)) throw ConfigError("field 'report.z' must be positive");
    if (s.histogram_bins < 1) throw ConfigError("field 'report.bins' must be >= 1");
  }

  try {
    s.system.validate();
    s.controller.validate();
    s.realizer.validate();
    s.simulation.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario " + path + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

Json to_json(const Scenario& s) {
  return Json{
      {"schema", kScenarioSchema},
      {"name", s.name},
      {"horizon", s.horizon()},
      {"half_order", s.half_order},
      {"a", s.system.a},
      {"b", s.system.b},
      {"noise_variance", s.system.noise_variance},
      {"initial", to_json(s.initial)},
      {"target", to_json(s.target)},
      {"controller",
       {{"grid", s.controller.grid},
        {"c_tol", s.controller.c_tol},
        {"psd_tol", s.controller.psd_tol},
        {"cost", s.controller.cost == CostVariant::paper_cost ? "paper" : "physical"}}},
      {"realizer",
       {{"nodes", s.realizer.nodes},
        {"half_width", s.realizer.half_width},
        {"max_iters", s.realizer.max_iters},
        {"grad_tol", s.realizer.grad_tol},
        {"backtrack", s.realizer.backtrack},
        {"moment_tol", s.realizer.moment_tol},
        {"max_widenings", s.realizer.max_widenings},
        {"reference_variance",
         s.realizer.reference_variance == ReferenceVariance::central ? "central" : "raw"},
        {"optimizer", s.realizer.optimizer == RealizerOptimizer::newton ? "newton" : "gradient"}}},
      {"simulation",
       {{"runs", s.simulation.runs},
        {"seed", s.simulation.seed},
        {"record_full_trajectories", s.simulation.record_full_trajectories},
        {"threads", s.simulation.threads}}},
      {"report", {{"z", s.report_z}, {"bins", s.histogram_bins}}}};
}

}  // namespace fpsteer
