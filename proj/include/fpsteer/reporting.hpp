#ifndef FPSTEER_REPORTING_HPP
#define FPSTEER_REPORTING_HPP

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpsteer/controller.hpp"
#include "fpsteer/distribution.hpp"
#include "fpsteer/planner.hpp"
#include "fpsteer/realizer.hpp"
#include "fpsteer/simulation.hpp"

namespace fpsteer {

/// Planned moments against empirical ones with z-SE bands.
struct MomentComparison {
  int step = 0;
  Eigen::VectorXd planned;
  Eigen::VectorXd empirical;
  Eigen::VectorXd standard_error;
  std::vector<bool> within;

  bool all_within() const;
};

MomentComparison compare_moments(int step, const Moments& planned, std::span<const double> samples,
                                 double z);

struct SteeringReport {
  std::string scenario;
  int runs = 0;
  double z = 4.0;
  std::vector<MomentComparison> states;   // x(k) vs X(k); empty without full trajectories
  MomentComparison terminal;              // x(K) vs target moments
  std::vector<double> gains;              // c(k)
  std::vector<MomentComparison> kernels;  // F(k) draws vs planned kernel moments
  bool terminal_pass = false;
};

SteeringReport build_report(const ClosedLoopResult& result, const MomentStateTrajectory& plan,
                            const std::vector<StepControl>& controls, const DensitySpec& target,
                            double z = 4.0, const std::string& scenario = {});

/// Uniform bins on [lo, hi). Samples outside the range are tallied in
/// below/above; heights are normalized over the in-range samples.
struct HistogramData {
  Eigen::VectorXd edges;
  std::vector<long> counts;
  Eigen::VectorXd heights;
  long below = 0;
  long above = 0;
  std::vector<std::pair<double, double>> overlay;  // (x, pdf) at 10x bin resolution
};

HistogramData export_histogram(std::span<const double> samples, int bins, double lo, double hi,
                               const std::optional<DensitySpec>& overlay = std::nullopt);

/// Sample mean -/+ 4 sample standard deviations.
std::pair<double, double> default_histogram_range(std::span<const double> samples);

using DensityGrid = std::vector<std::pair<double, double>>;

DensityGrid export_density_grid(const std::function<double(double)>& pdf, double lo, double hi,
                                int points);
DensityGrid export_density_grid(const DensitySpec& spec, double lo, double hi, int points);
DensityGrid export_density_grid(const RealizedDensity& rd, double lo, double hi, int points);

void write_histogram_csv(const std::string& path, const HistogramData& hist);
void write_density_csv(const std::string& path, const DensityGrid& grid);

}  // namespace fpsteer

#endif  // FPSTEER_REPORTING_HPP
