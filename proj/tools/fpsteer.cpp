// fpsteer: steer the state density of a scalar stochastic linear system
// through its power moments.
//
//   fpsteer <check|plan|solve|simulate|report|all> --scenario s.json --out dir
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible plan,
// 4 numerical failure, 1 anything else (I/O).

#include <CLI11.hpp>

#include <iostream>

#include "fpsteer/pipeline.hpp"

namespace {

void print_summary(const fpsteer::PipelineRun& run) {
  using std::cout;
  cout << "scenario " << run.scenario.name << ": stages through " << fpsteer::stage_name(run.completed)
       << " completed\n";
  for (const auto& r : run.feasibility) {
    cout << "  step " << r.step << (r.feasible ? " feasible" : " INFEASIBLE");
    for (const auto& [lo, hi] : r.feasible_intervals) cout << " [" << lo << ", " << hi << "]";
    cout << '\n';
  }
  if (run.repaired) cout << "  plan was repaired by even-moment inflation\n";
  for (const auto& c : run.controls)
    cout << "  c(" << c.step << ") = " << c.c << ", J = " << c.objective << '\n';
  if (run.report) {
    const auto& t = run.report->terminal;
    cout << "  terminal moments (target / empirical / SE):\n";
    for (Eigen::Index l = 0; l < t.planned.size(); ++l)
      cout << "    m" << l + 1 << ": " << t.planned[l] << " / " << t.empirical[l] << " / "
           << t.standard_error[l] << (t.within[l] ? "" : "  <-- outside band") << '\n';
    cout << "  terminal check " << (run.report->terminal_pass ? "PASS" : "FAIL") << " at z = "
         << run.report->z << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution steering by power moments"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::string cost;

  for (const char* name : {"check", "plan", "solve", "simulate", "report", "all"}) {
    auto* sub = app.add_subcommand(name, std::string("run the pipeline through '") + name + "'");
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "master seed for the Monte Carlo streams");
    sub->add_option("--runs", runs, "number of Monte Carlo runs")->check(CLI::PositiveNumber);
    sub->add_option("--cost", cost, "step cost variant")->check(CLI::IsMember({"paper", "physical"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    const fpsteer::Scenario scenario = fpsteer::load_scenario(scenario_path);
    fpsteer::PipelineOptions options;
    options.out_dir = out_dir;
    options.seed = seed;
    options.runs = runs;
    if (cost == "paper") options.cost = fpsteer::CostVariant::paper_cost;
    if (cost == "physical") options.cost = fpsteer::CostVariant::physical_cost;
    const auto run = fpsteer::run_pipeline(scenario, fpsteer::parse_stage(stage), options);
    print_summary(run);
    return 0;
  } catch (const fpsteer::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const fpsteer::PlanningError& e) {
    std::cerr << "infeasible plan at step " << e.step() << ": " << e.what() << '\n';
    return 3;
  } catch (const fpsteer::InfeasibleStepError& e) {
    std::cerr << "infeasible plan at step " << e.report().step << ": " << e.what() << '\n';
    return 3;
  } catch (const fpsteer::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const fpsteer::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
