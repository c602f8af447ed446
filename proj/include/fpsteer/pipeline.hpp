#ifndef FPSTEER_PIPELINE_HPP
#define FPSTEER_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpsteer/scenario.hpp"

namespace fpsteer {

enum class Stage { check = 0, plan = 1, solve = 2, simulate = 3, report = 4 };

Stage parse_stage(const std::string& name);
std::string stage_name(Stage stage);

struct PipelineOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<CostVariant> cost;
};

/// Artifacts of every stage that ran. Stages hand off through files in
/// out_dir; a stage re-reads what the previous one wrote and checks the
/// FNV-1a hash recorded in the manifest.
struct PipelineRun {
  Scenario scenario;
  Stage completed = Stage::check;
  Moments initial_moments;
  Moments target_moments;
  std::vector<StepFeasibilityReport> feasibility;
  bool repaired = false;
  std::optional<MomentStateTrajectory> plan;
  std::vector<StepControl> controls;
  std::vector<RealizedDensity> kernels;
  std::optional<ClosedLoopResult> result;
  std::optional<SteeringReport> report;
  Json manifest;
};

/// Runs every stage up to and including `last`:
/// check (moments, interpolation, reachability, repair) -> plan (plan.json)
/// -> solve (controls.json, kernels/) -> simulate (samples.csv)
/// -> report (report.json, histograms, density grids).
/// Throws PlanningError when no plan is reachable.
PipelineRun run_pipeline(const Scenario& scenario, Stage last, const PipelineOptions& options);

std::uint64_t fnv1a(const std::string& bytes);

void write_samples_csv(const std::string& path, const ClosedLoopResult& result);
ClosedLoopResult read_samples_csv(const std::string& path);

}  // namespace fpsteer

#endif  // FPSTEER_PIPELINE_HPP
