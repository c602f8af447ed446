#include "fpsteer/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fpsteer {

namespace fs = std::filesystem;

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

/// Output directory plus the manifest that records a hash per artifact.
class ArtifactStore {
 public:
  ArtifactStore(fs::path dir, Json& manifest) : dir_(std::move(dir)), manifest_(manifest) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    manifest_["artifacts"][name] = hex(fnv1a(content));
  }

  std::string read(const std::string& name) const {
    const fs::path path = dir_ / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing artifact " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    const auto& artifacts = manifest_["artifacts"];
    if (!artifacts.contains(name) || artifacts[name].get<std::string>() != hex(fnv1a(content)))
      throw std::runtime_error("artifact " + name + " does not match the hash recorded by its stage");
    return content;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void flush_manifest() const {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << json_text(manifest_);
  }

 private:
  fs::path dir_;
  Json& manifest_;
};

Moments density_moments(const DensitySpec& spec, Index order) {
  return moments_of(spec, order,
                    has_closed_form(spec) ? MomentMethod::closed_form : MomentMethod::quadrature);
}

Json feasibility_json(const std::vector<StepFeasibilityReport>& reports, bool repaired) {
  Json steps = Json::array();
  for (const auto& r : reports) steps.push_back(to_json(r));
  return Json{{"feasible", plan_feasible(reports)}, {"repaired", repaired}, {"steps", steps}};
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stage parse_stage(const std::string& name) {
  if (name == "check") return Stage::check;
  if (name == "plan") return Stage::plan;
  if (name == "solve") return Stage::solve;
  if (name == "simulate") return Stage::simulate;
  if (name == "report" || name == "all") return Stage::report;
  throw ConfigError("unknown stage '" + name + "'");
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::check: return "check";
    case Stage::plan: return "plan";
    case Stage::solve: return "solve";
    case Stage::simulate: return "simulate";
    case Stage::report: return "report";
  }
  return "?";
}

void write_samples_csv(const std::string& path, const ClosedLoopResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  const int horizon = result.horizon();
  const bool full = result.states.size() > 0;
  out << "run";
  if (full)
    for (int k = 0; k <= horizon; ++k) out << ",x" << k;
  else
    out << ",x" << horizon;
  for (int k = 0; k < horizon; ++k) out << ",u" << k;
  for (int k = 0; k < horizon; ++k) out << ",f" << k;
  out << '\n';
  for (int r = 0; r < result.runs(); ++r) {
    out << r;
    if (full)
      for (int k = 0; k <= horizon; ++k) out << ',' << result.states(r, k);
    else
      out << ',' << result.terminal[r];
    for (int k = 0; k < horizon; ++k) out << ',' << result.controls(r, k);
    for (int k = 0; k < horizon; ++k) out << ',' << result.kernel_draws(r, k);
    out << '\n';
  }
}

namespace {

ClosedLoopResult parse_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("samples file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int horizon = 0;
  for (const auto& h : header)
    if (h[0] == 'u') ++horizon;
  const int x_cols = static_cast<int>(header.size()) - 1 - 2 * horizon;
  const bool full = x_cols == horizon + 1;
  if (!full && x_cols != 1) throw std::runtime_error("samples header is malformed");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    std::getline(ss, cell, ',');  // run index
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != x_cols + 2 * horizon)
      throw std::runtime_error("samples row has the wrong number of columns");
    rows.push_back(std::move(row));
  }
  const int runs = static_cast<int>(rows.size());
  ClosedLoopResult result;
  result.terminal.resize(runs);
  result.controls.resize(runs, horizon);
  result.kernel_draws.resize(runs, horizon);
  if (full) result.states.resize(runs, horizon + 1);
  for (int r = 0; r < runs; ++r) {
    const auto& row = rows[r];
    if (full)
      for (int k = 0; k <= horizon; ++k) result.states(r, k) = row[k];
    result.terminal[r] = row[x_cols - 1];
    for (int k = 0; k < horizon; ++k) {
      result.controls(r, k) = row[x_cols + k];
      result.kernel_draws(r, k) = row[x_cols + horizon + k];
    }
  }
  return result;
}

}  // namespace

ClosedLoopResult read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return parse_samples(in);
}

PipelineRun run_pipeline(const Scenario& input, Stage last, const PipelineOptions& options) {
  PipelineRun run;
  run.scenario = input;
  Scenario& s = run.scenario;
  if (options.seed) s.simulation.seed = *options.seed;
  if (options.runs) s.simulation.runs = *options.runs;
  if (options.cost) s.controller.cost = *options.cost;
  s.simulation.validate();

  Json& manifest = run.manifest;
  manifest = Json{{"schema", kScenarioSchema},
                  {"scenario", s.name},
                  {"seed", s.simulation.seed},
                  {"runs", s.simulation.runs},
                  {"scenario_hash", hex(fnv1a(to_json(s).dump()))},
                  {"stages", Json::array()},
                  {"timings_ms", Json::object()},
                  {"artifacts", Json::object()}};
  ArtifactStore store(options.out_dir, manifest);

  auto timed = [&](Stage stage, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (...) {
      manifest["failed_stage"] = stage_name(stage);
      store.flush_manifest();
      throw;
    }
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    manifest["stages"].push_back(stage_name(stage));
    manifest["timings_ms"][stage_name(stage)] = ms.count();
    run.completed = stage;
    store.flush_manifest();
  };

  const Index order = s.order();

  timed(Stage::check, [&] {
    run.initial_moments = density_moments(s.initial, order);
    run.target_moments = density_moments(s.target, order);
    const auto reach = s.controller.reachability();
    MomentStateTrajectory plan = interpolate_states(run.initial_moments, run.target_moments, s.horizon());
    run.feasibility = check_plan(plan, s.system, reach);
    if (!plan_feasible(run.feasibility)) {
      try {
        plan = repair_plan(plan, s.system, 40, reach);
      } catch (const PlanningError&) {
        store.write("check.json", json_text(feasibility_json(run.feasibility, false)));
        throw;
      }
      run.repaired = true;
      run.feasibility = check_plan(plan, s.system, reach);
    }
    run.plan = std::move(plan);
    store.write("check.json", json_text(feasibility_json(run.feasibility, run.repaired)));
  });
  if (last == Stage::check) return run;

  timed(Stage::plan, [&] { store.write("plan.json", json_text(to_json(*run.plan))); });
  if (last == Stage::plan) return run;

  timed(Stage::solve, [&] {
    const MomentStateTrajectory plan = plan_from_json(Json::parse(store.read("plan.json")));
    run.controls.clear();
    run.kernels.clear();
    for (int k = 0; k < plan.horizon(); ++k) {
      StepControl control = solve_step(plan.states[k], plan.states[k + 1], s.system, k, s.controller);
      RealizedDensity kernel = realize_adaptive(control.kernel_moments, s.realizer);
      const DensitySpec& reference = kernel.reference;
      store.write("kernels/" + std::to_string(k) + ".json", json_text(to_json(kernel)));
      const auto [mean, sd] = reference_location_scale(reference);
      std::ostringstream grid;
      grid << std::setprecision(17) << "x,pdf\n";
      for (const auto& [x, p] : export_density_grid(kernel, mean - 6.0 * sd, mean + 6.0 * sd, 400))
        grid << x << ',' << p << '\n';
      store.write("kernels/" + std::to_string(k) + ".density.csv", grid.str());
      run.controls.push_back(std::move(control));
      run.kernels.push_back(std::move(kernel));
    }
    store.write("controls.json", json_text(to_json(run.controls)));
  });
  if (last == Stage::solve) return run;

  timed(Stage::simulate, [&] {
    const auto controls = controls_from_json(Json::parse(store.read("controls.json")));
    std::vector<RealizedDensity> kernels;
    for (int k = 0; k < s.horizon(); ++k)
      kernels.push_back(kernel_from_json(Json::parse(store.read("kernels/" + std::to_string(k) + ".json"))));
    run.result = run_closed_loop(s.system, s.initial, controls, kernels, s.simulation);
    write_samples_csv(store.path("samples.csv"), *run.result);
    std::ifstream in(store.path("samples.csv"), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    manifest["artifacts"]["samples.csv"] = hex(fnv1a(buf.str()));
  });
  if (last == Stage::simulate) return run;

  timed(Stage::report, [&] {
    const MomentStateTrajectory plan = plan_from_json(Json::parse(store.read("plan.json")));
    const auto controls = controls_from_json(Json::parse(store.read("controls.json")));
    std::istringstream samples(store.read("samples.csv"));
    const ClosedLoopResult result = parse_samples(samples);
    run.report = build_report(result, plan, controls, s.target, s.report_z, s.name);
    store.write("report.json", json_text(to_json(*run.report)));

    auto histogram = [&](int k, const Eigen::VectorXd& column, bool overlay) {
      const std::span<const double> xs(column.data(), column.size());
      const auto [lo, hi] = default_histogram_range(xs);
      const auto hist = export_histogram(xs, s.histogram_bins, lo, hi,
                                         overlay ? std::optional(s.target) : std::nullopt);
      write_histogram_csv(store.path("hist_x" + std::to_string(k) + ".csv"), hist);
      if (overlay) write_density_csv(store.path("target_density.csv"), hist.overlay);
    };
    if (result.states.size() > 0)
      for (int k = 0; k < s.horizon(); ++k) histogram(k, result.states.col(k), false);
    histogram(s.horizon(), result.terminal, true);
  });
  return run;
}

}  // namespace fpsteer
